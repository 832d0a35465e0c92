#include "salmap/cli.hpp"

int main(int argc, char** argv) { return salmap::run_cli(argc, argv); }
