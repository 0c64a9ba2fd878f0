#pragma once

// CFF1 field files, phase-point manifests, and CSV tables for plotting.
//
// CFF1 layout: newline-terminated header lines
//   CFF1
//   n=<int>
//   shape=<scalar|vector|sym2>
//   points=<p1,...,pn>
//   period=<real>
//   encoding=<binary|text>
// followed by the values, point-major in row-major order (last axis fastest)
// with components fastest within a point. sym2 stores the n(n+1)/2 upper
// triangle row by row. Binary is little-endian IEEE-754 binary64; text is one
// value per line with 17 significant digits. Both round-trip exactly.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cforge/fields.hpp"
#include "cforge/solve.hpp"
#include "cforge/verify.hpp"

namespace cforge {

/// Malformed or inconsistent input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Encoding { binary, text };

struct CffData {
  int n = 3;
  std::string shape = "scalar";
  std::vector<int> points;
  double period = kTwoPi;
  std::vector<double> values;  // total_points * components

  int components() const;
  std::size_t total_points() const;
};

void write_cff1(std::ostream& out, const CffData& data, Encoding encoding = Encoding::binary);
CffData read_cff1(std::istream& in);
void write_cff1(const std::filesystem::path& path, const CffData& data, Encoding encoding = Encoding::binary);
CffData read_cff1(const std::filesystem::path& path);

CffData to_cff(const Field& f);
CffData to_cff(const VectorField& v);
CffData to_cff(const SymField& s);

/// Conversions back; throw FormatError if shape or grid disagree with `grid`.
Field scalar_from_cff(const GridPtr& grid, const CffData& d);
VectorField vector_from_cff(const GridPtr& grid, const CffData& d);
SymField sym_from_cff(const GridPtr& grid, const CffData& d);

// ---------------------------------------------------------------------------
// Phase-point manifest: {"format": "cforge-phase-point", "n", "points",
// "period", "tau", "kappa", "lambda", "fields": {"g": file, "pi": file}} with
// file names relative to the manifest.

struct LoadedPoint {
  GridPtr grid;
  PhasePoint point;
  double lambda = 0.0;
};

/// Writes <dir>/<name>.json, <dir>/<name>.g.cff and <dir>/<name>.pi.cff;
/// returns the manifest path.
std::filesystem::path write_phase_point(const std::filesystem::path& dir, const std::string& name,
                                        const PhasePoint& p, Encoding encoding = Encoding::binary);
LoadedPoint read_phase_point(const std::filesystem::path& manifest);

GridSpec grid_spec_from_json(const nlohmann::json& j);
nlohmann::json grid_spec_to_json(const GridSpec& s);

// ---------------------------------------------------------------------------
// CSV tables; an empty report gives the header line only.

std::string newton_csv(const NewtonReport& r);                 // residual against iteration
std::string slope_csv(const OperatorReport& r);                // error against t per trial
std::string singular_value_csv(const KernelReport& r);         // ascending sigma
std::string residual_csv(const OperatorReport& r);             // residual per entry

}  // namespace cforge
