#include "psuper/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace psuper {

std::string format_double(double v) {
  if (v == kInf) return "inf";
  char buf[40];
  // Shortest representation that parses back to the same double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& os, const Grid& g, bool extended) {
  os << "pfld 1\n";
  os << "dim " << g.dim << "\n";
  os << "origin";
  for (int a = 0; a < g.dim; ++a) os << ' ' << format_double(g.origin[a]);
  os << "\nextent";
  for (int a = 0; a < g.dim; ++a) os << ' ' << format_double(g.extent[a]);
  os << "\ncells";
  for (int a = 0; a < g.dim; ++a) os << ' ' << g.cells[a];
  os << "\nextended " << (extended ? 1 : 0) << "\n";
}

void write_values(std::ostream& os, const std::vector<double>& vals) {
  for (double v : vals) os << format_double(v) << "\n";
}

double parse_value(const std::string& tok) {
  if (tok == "inf") return kInf;
  return std::strtod(tok.c_str(), nullptr);
}

}  // namespace

void write_fld(std::ostream& os, const ScalarField& f) {
  write_header(os, f.grid, f.extended);
  os << "values " << f.values.size() << "\n";
  write_values(os, f.values);
}

void write_fld(std::ostream& os, const SpaceTimeField& f) {
  write_header(os, f.stgrid.space, f.extended);
  os << "time " << format_double(f.stgrid.t0) << ' ' << format_double(f.stgrid.t1)
     << ' ' << f.stgrid.time_steps << "\n";
  os << "values "
     << f.slices.size() * static_cast<std::size_t>(f.stgrid.space.node_count())
     << "\n";
  for (const auto& s : f.slices) write_values(os, s.values);
}

FldContents read_fld(std::istream& is) {
  std::string tag;
  int version = 0;
  is >> tag >> version;
  require(tag == "pfld" && version == 1, "fld: not a pfld version-1 file");
  int dim = 0;
  Point origin{0, 0, 0}, extent{1, 1, 1};
  std::array<int, 3> cells{1, 1, 1};
  bool extended = false;
  bool has_time = false;
  double t0 = 0, t1 = 1;
  int steps = 1;
  std::size_t count = 0;
  while (is >> tag) {
    if (tag == "dim") {
      is >> dim;
    } else if (tag == "origin") {
      for (int a = 0; a < dim; ++a) is >> origin[a];
    } else if (tag == "extent") {
      for (int a = 0; a < dim; ++a) is >> extent[a];
    } else if (tag == "cells") {
      for (int a = 0; a < dim; ++a) is >> cells[a];
    } else if (tag == "extended") {
      int e = 0;
      is >> e;
      extended = e != 0;
    } else if (tag == "time") {
      has_time = true;
      is >> t0 >> t1 >> steps;
    } else if (tag == "values") {
      is >> count;
      break;
    } else {
      throw Error("fld: unknown header key '" + tag + "'");
    }
  }
  require(count > 0, "fld: missing values block");
  Grid g(dim, origin, extent, cells);
  FldContents out;
  if (has_time) {
    out.space_time = true;
    out.st = SpaceTimeField(SpaceTimeGrid(g, t0, t1, steps), 0.0, extended);
    const std::size_t per = static_cast<std::size_t>(g.node_count());
    require(count == per * out.st.slices.size(), "fld: value count mismatch");
    std::string tok;
    for (auto& s : out.st.slices)
      for (auto& v : s.values) {
        require(static_cast<bool>(is >> tok), "fld: truncated values block");
        v = parse_value(tok);
      }
    out.st.validate();
  } else {
    out.scalar = ScalarField(g, 0.0, extended);
    require(count == out.scalar.values.size(), "fld: value count mismatch");
    std::string tok;
    for (auto& v : out.scalar.values) {
      require(static_cast<bool>(is >> tok), "fld: truncated values block");
      v = parse_value(tok);
    }
    out.scalar.validate();
  }
  return out;
}

void write_fld_file(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  require(os.good(), "fld: cannot open " + path + " for writing");
  write_fld(os, f);
}

void write_fld_file(const std::string& path, const SpaceTimeField& f) {
  std::ofstream os(path);
  require(os.good(), "fld: cannot open " + path + " for writing");
  write_fld(os, f);
}

FldContents read_fld_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "fld: cannot open " + path);
  return read_fld(is);
}

}  // namespace psuper
