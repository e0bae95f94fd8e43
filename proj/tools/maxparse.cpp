#include "cli.hpp"

int main(int argc, char** argv) { return maxparse::cli::run(argc, argv); }
