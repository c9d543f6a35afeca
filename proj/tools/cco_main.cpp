#include "cco/cli.hpp"

int main(int argc, char** argv) { return cco::run_cli(argc, argv); }
