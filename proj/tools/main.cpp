#include "cli.hpp"

int main(int argc, char** argv) { return lfgeom::cli::run(argc, argv); }
