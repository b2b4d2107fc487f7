#include "caas/cli.hpp"

int main(int argc, char** argv) { return caas::cli::run_cli(argc, argv); }
