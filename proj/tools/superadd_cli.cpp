#include "superadd/cli.hpp"

int main(int argc, char** argv) { return superadd::cli::run_cli(argc, argv); }
