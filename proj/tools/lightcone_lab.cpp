#include "lightcone/cli.hpp"

int main(int argc, char** argv) { return lc::cli_main(argc, argv); }
