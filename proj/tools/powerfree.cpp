#include "powerfree/cli.hpp"

int main(int argc, char** argv) { return powerfree::cli::main(argc, argv); }
