#pragma once

#include <iosfwd>
#include <string>

#include "psuper/field.hpp"

namespace psuper {

/// `.fld` files: a self-describing text header (dim, origin, extent,
/// cells_per_axis, optional time block, extended flag) followed by
/// row-major values, one per line, `inf` for +infinity. Finite values
/// round-trip bit-exactly (%.17g).
void write_fld(std::ostream& os, const ScalarField& f);
void write_fld(std::ostream& os, const SpaceTimeField& f);
void write_fld_file(const std::string& path, const ScalarField& f);
void write_fld_file(const std::string& path, const SpaceTimeField& f);

struct FldContents {
  bool space_time = false;
  ScalarField scalar;
  SpaceTimeField st;
};

FldContents read_fld(std::istream& is);
FldContents read_fld_file(const std::string& path);

/// Canonical shortest-round-trip formatting used by every text artifact.
std::string format_double(double v);

}  // namespace psuper
