#include "cli.hpp"

int main(int argc, char** argv) { return quadm::cli::main_entry(argc, argv); }
