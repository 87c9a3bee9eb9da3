#include "affsym/cli.hpp"

int main(int argc, char** argv) { return affsym::cli::run(argc, argv); }
