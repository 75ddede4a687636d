#include "georef/cli.hpp"

int main(int argc, char** argv) { return georef::run_cli(argc, argv); }
