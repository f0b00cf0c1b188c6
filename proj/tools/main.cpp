#include "cli.hpp"

int main(int argc, char** argv) { return altblock::cli::run(argc, argv); }
