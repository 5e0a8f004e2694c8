#include "cli.hpp"

int main(int argc, char** argv) { return znn::cli_main(argc, argv); }
