#include "wtd/cli.hpp"

int main(int argc, char** argv) { return wtd::cli::main(argc, argv); }
