#include "curemst/cli.hpp"

int main(int argc, char** argv) { return curemst::cli::main_entry(argc, argv); }
