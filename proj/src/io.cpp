#include "cforge/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cforge {
namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw FormatError("CFF1: bad number '" + s + "'");
  return x;
}

int parse_int(const std::string& s) {
  int x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("CFF1: bad integer '" + s + "'");
  return x;
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CFF1: missing '" + key + "=' line");
  if (line.rfind(key + "=", 0) != 0) throw FormatError("CFF1: expected '" + key + "=', got '" + line + "'");
  return line.substr(key.size() + 1);
}

int shape_components(const std::string& shape, int n) {
  if (shape == "scalar") return 1;
  if (shape == "vector") return n;
  if (shape == "sym2") return sym_size(n);
  throw FormatError("CFF1: unknown shape '" + shape + "'");
}

CffData header_for(const Grid& grid, const std::string& shape) {
  CffData d;
  d.n = grid.dim();
  d.shape = shape;
  d.points = grid.spec().points;
  d.period = grid.spec().period;
  return d;
}

CffData pack_components(const std::vector<const Field*>& comps, const std::string& shape) {
  CffData d = header_for(comps.front()->grid(), shape);
  const std::size_t total = comps.front()->size();
  const std::size_t nc = comps.size();
  d.values.resize(total * nc);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t i = 0; i < total; ++i) d.values[i * nc + c] = (*comps[c])[i];
  return d;
}

void check_against(const GridPtr& grid, const CffData& d, const std::string& shape) {
  if (d.shape != shape) throw FormatError("CFF1: expected shape " + shape + ", file has " + d.shape);
  if (d.n != grid->dim() || d.points != grid->spec().points) throw FormatError("CFF1: grid size mismatch");
  if (std::abs(d.period - grid->spec().period) > 1e-12 * grid->spec().period) {
    throw FormatError("CFF1: period mismatch");
  }
}

std::vector<Field> unpack_components(const GridPtr& grid, const CffData& d) {
  const std::size_t nc = static_cast<std::size_t>(d.components());
  const std::size_t total = grid->total_points();
  std::vector<Field> out;
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) v[i] = d.values[i * nc + c];
    out.emplace_back(grid, std::move(v));
  }
  return out;
}

}  // namespace

int CffData::components() const { return shape_components(shape, n); }

std::size_t CffData::total_points() const {
  std::size_t t = 1;
  for (int p : points) t *= static_cast<std::size_t>(p);
  return t;
}

void write_cff1(std::ostream& out, const CffData& d, Encoding encoding) {
  if (d.values.size() != d.total_points() * static_cast<std::size_t>(d.components())) {
    throw FormatError("CFF1: value count does not match header");
  }
  out << "CFF1\n" << "n=" << d.n << "\n" << "shape=" << d.shape << "\n" << "points=";
  for (std::size_t a = 0; a < d.points.size(); ++a) out << (a ? "," : "") << d.points[a];
  out << "\nperiod=" << format_double(d.period) << "\n";
  if (encoding == Encoding::binary) {
    out << "encoding=binary\n";
    for (double x : d.values) {
      const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(x));
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
  } else {
    out << "encoding=text\n";
    for (double x : d.values) out << format_double(x) << "\n";
  }
  if (!out) throw FormatError("CFF1: write failed");
}

CffData read_cff1(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "CFF1") throw FormatError("CFF1: missing magic line");
  CffData d;
  d.n = parse_int(expect_key(in, "n"));
  if (d.n < 1) throw FormatError("CFF1: n must be positive");
  d.shape = expect_key(in, "shape");
  std::stringstream pts(expect_key(in, "points"));
  for (std::string tok; std::getline(pts, tok, ',');) {
    const int p = parse_int(tok);
    if (p < 1) throw FormatError("CFF1: points must be positive");
    d.points.push_back(p);
  }
  if (static_cast<int>(d.points.size()) != d.n) throw FormatError("CFF1: points list does not have n entries");
  d.period = parse_double(expect_key(in, "period"));
  if (!(d.period > 0.0)) throw FormatError("CFF1: period must be positive");
  const std::string encoding = expect_key(in, "encoding");
  const std::size_t count = d.total_points() * static_cast<std::size_t>(d.components());
  d.values.resize(count);
  if (encoding == "binary") {
    for (std::size_t i = 0; i < count; ++i) {
      char bytes[8];
      if (!in.read(bytes, 8)) throw FormatError("CFF1: truncated binary block");
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes, 8);
      d.values[i] = std::bit_cast<double>(to_little(bits));
    }
  } else if (encoding == "text") {
    for (std::size_t i = 0; i < count; ++i) {
      std::string tok;
      if (!(in >> tok)) throw FormatError("CFF1: truncated text block");
      d.values[i] = parse_double(tok);
    }
  } else {
    throw FormatError("CFF1: unknown encoding '" + encoding + "'");
  }
  return d;
}

void write_cff1(const std::filesystem::path& path, const CffData& data, Encoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_cff1(out, data, encoding);
}

CffData read_cff1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_cff1(in);
}

CffData to_cff(const Field& f) { return pack_components({&f}, "scalar"); }

CffData to_cff(const VectorField& v) {
  std::vector<const Field*> c;
  for (const auto& f : v.components()) c.push_back(&f);
  return pack_components(c, "vector");
}

CffData to_cff(const SymField& s) {
  std::vector<const Field*> c;
  for (const auto& f : s.components()) c.push_back(&f);
  return pack_components(c, "sym2");
}

Field scalar_from_cff(const GridPtr& grid, const CffData& d) {
  check_against(grid, d, "scalar");
  return unpack_components(grid, d).front();
}

VectorField vector_from_cff(const GridPtr& grid, const CffData& d) {
  check_against(grid, d, "vector");
  return VectorField(unpack_components(grid, d));
}

SymField sym_from_cff(const GridPtr& grid, const CffData& d) {
  check_against(grid, d, "sym2");
  return SymField(d.n, unpack_components(grid, d));
}

// ---------------------------------------------------------------------------

nlohmann::json grid_spec_to_json(const GridSpec& s) {
  nlohmann::json j{{"n", s.n}, {"points", s.points}, {"period", s.period}, {"tau", s.tau}, {"kappa", s.kappa}};
  j["lambda"] = s.cosmological_constant();
  return j;
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
  try {
    GridSpec s;
    s.n = j.at("n").get<int>();
    s.points = j.at("points").get<std::vector<int>>();
    s.period = j.value("period", kTwoPi);
    s.tau = j.value("tau", 0.0);
    s.kappa = j.value("kappa", 0.0);
    if (j.contains("lambda") && !j["lambda"].is_null()) s.lambda = j["lambda"].get<double>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

std::filesystem::path write_phase_point(const std::filesystem::path& dir, const std::string& name,
                                        const PhasePoint& p, Encoding encoding) {
  std::filesystem::create_directories(dir);
  const std::string gfile = name + ".g.cff";
  const std::string pifile = name + ".pi.cff";
  write_cff1(dir / gfile, to_cff(p.g.g), encoding);
  write_cff1(dir / pifile, to_cff(p.pi.pi), encoding);
  nlohmann::json m = grid_spec_to_json(p.grid_ptr()->spec());
  m["format"] = "cforge-phase-point";
  m["fields"] = {{"g", gfile}, {"pi", pifile}};
  const std::filesystem::path manifest = dir / (name + ".json");
  std::ofstream out(manifest);
  if (!out) throw FormatError("cannot open " + manifest.string() + " for writing");
  out << m.dump(2) << "\n";
  return manifest;
}

LoadedPoint read_phase_point(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw FormatError("cannot open " + manifest.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + manifest.string() + ": " + e.what());
  }
  if (m.value("format", std::string()) != "cforge-phase-point") throw FormatError("manifest: unknown format");
  LoadedPoint lp;
  lp.grid = Grid::make(grid_spec_from_json(m));
  const std::filesystem::path base = manifest.parent_path();
  std::string gname, piname;
  try {
    gname = m.at("fields").at("g").get<std::string>();
    piname = m.at("fields").at("pi").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  lp.point.g.g = sym_from_cff(lp.grid, read_cff1(base / gname));
  lp.point.pi.pi = sym_from_cff(lp.grid, read_cff1(base / piname));
  lp.lambda = lp.grid->spec().cosmological_constant();
  return lp;
}

// ---------------------------------------------------------------------------

std::string newton_csv(const NewtonReport& r) {
  std::ostringstream os;
  os << "iteration,residual,raw_residual,halvings,krylov_iterations,krylov_residual\n";
  for (std::size_t i = 0; i < r.residuals.size(); ++i) {
    os << i << "," << format_double(r.residuals[i]) << ","
       << (i < r.raw_residuals.size() ? format_double(r.raw_residuals[i]) : "") << ",";
    if (i > 0 && i - 1 < r.halvings.size()) os << r.halvings[i - 1];
    os << ",";
    if (i > 0 && i - 1 < r.krylov_iterations.size()) os << r.krylov_iterations[i - 1];
    os << ",";
    if (i > 0 && i - 1 < r.krylov_residuals.size()) os << format_double(r.krylov_residuals[i - 1]);
    os << "\n";
  }
  return os.str();
}

std::string slope_csv(const OperatorReport& r) {
  std::ostringstream os;
  os << "trial,t,error\n";
  if (!r.statistics.contains("errors") || !r.parameters.contains("steps")) return os.str();
  const auto steps = r.parameters["steps"].get<std::vector<double>>();
  const auto errors = r.statistics["errors"].get<std::vector<std::vector<double>>>();
  for (std::size_t i = 0; i < errors.size(); ++i)
    for (std::size_t j = 0; j < errors[i].size() && j < steps.size(); ++j)
      os << i << "," << format_double(steps[j]) << "," << format_double(errors[i][j]) << "\n";
  return os.str();
}

std::string singular_value_csv(const KernelReport& r) {
  std::ostringstream os;
  os << "index,sigma\n";
  for (std::size_t i = 0; i < r.singular_values.size(); ++i)
    os << i << "," << format_double(r.singular_values[i]) << "\n";
  return os.str();
}

std::string residual_csv(const OperatorReport& r) {
  std::ostringstream os;
  os << "index,residual\n";
  for (std::size_t i = 0; i < r.residuals.size(); ++i) os << i << "," << format_double(r.residuals[i]) << "\n";
  return os.str();
}

}  // namespace cforge
