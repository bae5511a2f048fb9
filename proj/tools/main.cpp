#include "commands.hpp"

int main(int argc, char** argv) { return heavytail::cli::main_entry(argc, argv); }
