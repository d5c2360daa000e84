#include "usagebib/pipeline.hpp"

int main(int argc, char** argv) { return usagebib::run_cli(argc, argv); }
