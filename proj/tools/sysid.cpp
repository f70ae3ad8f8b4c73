#include "optrec/cli.hpp"

int main(int argc, char** argv) { return optrec::cli::main_entry(argc, argv); }
