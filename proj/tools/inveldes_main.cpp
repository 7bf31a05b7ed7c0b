#include "inveldes/cli.hpp"

int main(int argc, char** argv) { return inveldes::cli_main(argc, argv); }
