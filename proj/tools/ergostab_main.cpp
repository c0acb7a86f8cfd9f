#include "ergostab/cli.hpp"

int main(int argc, char** argv) { return ergostab::cli_main(argc, argv); }
