#include "bloom/cli.hpp"

int main(int argc, char** argv) { return bloom::cli::run(argc, argv); }
