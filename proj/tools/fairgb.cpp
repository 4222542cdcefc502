#include "fairgb/cli.hpp"

int main(int argc, char** argv) { return fairgb::cli_main(argc, argv); }
