#include "scrip/cli.hpp"

int main(int argc, char** argv) { return scrip::cli::run_command(argc, argv); }
