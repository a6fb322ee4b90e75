#pragma once

#include <iosfwd>

namespace lfgeom::cli {

// Exit codes: 0 pass, 1 witnessed violation, 2 error.
int run(int argc, char** argv);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lfgeom::cli
