#include "qntk/cli.hpp"

int main(int argc, char** argv) { return qntk::cli_main(argc, argv); }
