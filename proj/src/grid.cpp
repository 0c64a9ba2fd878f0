#include "cforge/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <random>
#include <stdexcept>

#include "cforge/simd/kernels.hpp"

namespace cforge {
namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

using Complex = std::complex<double>;

std::vector<Complex>& scratch_spectrum(std::size_t size) {
  thread_local std::vector<Complex> buffer;
  if (buffer.size() < size) buffer.resize(size);
  return buffer;
}

// Multi-indices alpha in N^n with |alpha| == order.
void multi_indices(int n, int order, std::vector<int>& current, int axis,
                   std::vector<std::vector<int>>& out) {
  if (axis == n - 1) {
    current[static_cast<std::size_t>(axis)] = order;
    out.push_back(current);
    return;
  }
  for (int a = order; a >= 0; --a) {
    current[static_cast<std::size_t>(axis)] = a;
    multi_indices(n, order - a, current, axis + 1, out);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

GridSpec GridSpec::uniform(int n, int points_per_axis, double tau, double kappa) {
  GridSpec s;
  s.n = n;
  s.points.assign(static_cast<std::size_t>(std::max(n, 0)), points_per_axis);
  s.tau = tau;
  s.kappa = kappa;
  return s;
}

double GridSpec::cosmological_constant() const {
  if (lambda) return *lambda;
  return 0.5 * n * (n - 1) * (tau * tau + kappa);
}

void GridSpec::validate() const {
  if (n < 3) throw std::invalid_argument("grid: dimension n must be >= 3, got " + std::to_string(n));
  if (points.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("grid: expected " + std::to_string(n) + " axis sizes, got " +
                                std::to_string(points.size()));
  }
  for (int p : points) {
    if (p < 4 || p % 2 != 0) {
      throw std::invalid_argument("grid: points per axis must be even and >= 4, got " + std::to_string(p));
    }
  }
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("grid: period must be > 0");
  if (!std::isfinite(tau) || !std::isfinite(kappa)) throw std::invalid_argument("grid: tau/kappa must be finite");
}

// ---------------------------------------------------------------------------
// Grid

GridPtr Grid::make(GridSpec spec) { return GridPtr(new Grid(std::move(spec))); }

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n = spec_.n;
  total_ = 1;
  for (int p : spec_.points) total_ *= static_cast<std::size_t>(p);
  cell_volume_ = std::pow(spec_.period, n) / static_cast<double>(total_);

  std::vector<int> cdims(spec_.points);
  cdims.back() = spec_.points.back() / 2 + 1;
  complex_total_ = 1;
  for (int d : cdims) complex_total_ *= static_cast<std::size_t>(d);

  deriv_k_.assign(static_cast<std::size_t>(n), std::vector<double>(complex_total_));
  modes_.assign(static_cast<std::size_t>(n), std::vector<int>(complex_total_));
  herm_weight_.assign(complex_total_, 2.0);
  nyquist_.assign(complex_total_, false);

  const double base = kTwoPi / spec_.period;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t j = 0; j < complex_total_; ++j) {
    std::size_t rem = j;
    for (int a = n - 1; a >= 0; --a) {
      const auto d = static_cast<std::size_t>(cdims[static_cast<std::size_t>(a)]);
      idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % d);
      rem /= d;
    }
    for (int a = 0; a < n; ++a) {
      const int N = spec_.points[static_cast<std::size_t>(a)];
      const int i = idx[static_cast<std::size_t>(a)];
      const int mode = (i <= N / 2) ? i : i - N;
      const bool nyq = (i == N / 2);
      modes_[static_cast<std::size_t>(a)][j] = mode;
      deriv_k_[static_cast<std::size_t>(a)][j] = nyq ? 0.0 : base * mode;
      if (nyq) nyquist_[j] = true;
    }
    const int last = idx.back();
    if (last == 0 || last == spec_.points.back() / 2) herm_weight_[j] = 1.0;
  }

  std::lock_guard lock(fftw_planner_mutex());
  double* rbuf = fftw_alloc_real(total_);
  fftw_complex* cbuf = fftw_alloc_complex(complex_total_);
  plan_forward_ = fftw_plan_dft_r2c(n, spec_.points.data(), rbuf, cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_backward_ = fftw_plan_dft_c2r(n, spec_.points.data(), cbuf, rbuf,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  fftw_free(rbuf);
  fftw_free(cbuf);
  if (!plan_forward_ || !plan_backward_) throw std::runtime_error("grid: FFTW planning failed");
}

Grid::~Grid() {
  std::lock_guard lock(fftw_planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
}

double Grid::volume() const { return std::pow(spec_.period, spec_.n); }

std::vector<int> Grid::unravel(std::size_t flat) const {
  std::vector<int> idx(static_cast<std::size_t>(spec_.n));
  for (int a = spec_.n - 1; a >= 0; --a) {
    const auto d = static_cast<std::size_t>(points(a));
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % d);
    flat /= d;
  }
  return idx;
}

std::vector<double> Grid::coordinates(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::vector<double> x(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) x[a] = coordinate(static_cast<int>(a), idx[a]);
  return x;
}

void Grid::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Grid::backward(const Complex* in, double* out) const {
  auto& tmp = scratch_spectrum(complex_total_);
  std::copy(in, in + complex_total_, tmp.begin());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_backward_), reinterpret_cast<fftw_complex*>(tmp.data()), out);
  simd::kernels().scale(1.0 / static_cast<double>(total_), out, out, total_);
}

// ---------------------------------------------------------------------------
// Field

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("field: null grid");
  values_.assign(grid_->total_points(), value);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field: null grid");
  if (values_.size() != grid_->total_points()) {
    throw std::invalid_argument("field: value count " + std::to_string(values_.size()) +
                                " does not match grid size " + std::to_string(grid_->total_points()));
  }
}

Field Field::from_function(GridPtr grid, const std::function<double(std::span<const double>)>& fn) {
  Field f(grid);
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto x = grid->coordinates(p);
    f[p] = fn(x);
  }
  return f;
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr() && (a.size() != b.size() || !a.grid_ptr() || !b.grid_ptr() ||
                                       a.grid().spec().points != b.grid().spec().points ||
                                       a.grid().spec().period != b.grid().spec().period)) {
    throw std::invalid_argument("field: operands live on different grids");
  }
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  simd::kernels().add(data(), other.data(), data(), size());
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  simd::kernels().sub(data(), other.data(), data(), size());
  return *this;
}

Field& Field::operator*=(const Field& other) {
  require_same_grid(*this, other);
  simd::kernels().mul(data(), other.data(), data(), size());
  return *this;
}

Field& Field::operator*=(double s) {
  simd::kernels().scale(s, data(), data(), size());
  return *this;
}

Field& Field::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

Field& Field::axpy(double alpha, const Field& x) {
  require_same_grid(*this, x);
  simd::kernels().axpy(alpha, x.data(), data(), size());
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }
Field operator-(Field a) { return a *= -1.0; }

// ---------------------------------------------------------------------------
// spectral calculus

namespace {

void check_axis(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dim()) {
    throw std::out_of_range("derivative: axis " + std::to_string(axis) + " outside [0," + std::to_string(g.dim()) +
                            ")");
  }
}

std::vector<Complex> spectrum_of(const Field& f) {
  std::vector<Complex> spec(f.grid().complex_size());
  f.grid().forward(f.data(), spec.data());
  return spec;
}

Field from_spectrum(const GridPtr& grid, const std::vector<Complex>& spec) {
  Field out(grid);
  grid->backward(spec.data(), out.data());
  return out;
}

}  // namespace

Field derivative(const Field& f, int axis) {
  const Grid& g = f.grid();
  check_axis(g, axis);
  auto spec = spectrum_of(f);
  auto* c = reinterpret_cast<double*>(spec.data());
  simd::kernels().mul_ik(g.derivative_wavenumbers(axis).data(), c, c, spec.size());
  return from_spectrum(f.grid_ptr(), spec);
}

std::vector<Field> gradient(const Field& f) {
  const Grid& g = f.grid();
  const auto spec = spectrum_of(f);
  std::vector<Complex> work(spec.size());
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    simd::kernels().mul_ik(g.derivative_wavenumbers(a).data(), reinterpret_cast<const double*>(spec.data()),
                           reinterpret_cast<double*>(work.data()), spec.size());
    out.push_back(from_spectrum(f.grid_ptr(), work));
  }
  return out;
}

Field second_derivative(const Field& f, int a, int b) {
  const Grid& g = f.grid();
  check_axis(g, a);
  check_axis(g, b);
  auto spec = spectrum_of(f);
  auto* c = reinterpret_cast<double*>(spec.data());
  simd::kernels().mul_ik(g.derivative_wavenumbers(a).data(), c, c, spec.size());
  simd::kernels().mul_ik(g.derivative_wavenumbers(b).data(), c, c, spec.size());
  return from_spectrum(f.grid_ptr(), spec);
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  auto spec = spectrum_of(f);
  std::vector<double> mult(spec.size(), 0.0);
  for (int a = 0; a < g.dim(); ++a) {
    const auto& k = g.derivative_wavenumbers(a);
    for (std::size_t j = 0; j < mult.size(); ++j) mult[j] -= k[j] * k[j];
  }
  auto* c = reinterpret_cast<double*>(spec.data());
  simd::kernels().mul_real(mult.data(), c, c, spec.size());
  return from_spectrum(f.grid_ptr(), spec);
}

Field drop_nyquist(const Field& f) {
  auto spec = spectrum_of(f);
  const auto& nyq = f.grid().nyquist_mask();
  for (std::size_t j = 0; j < spec.size(); ++j) {
    if (nyq[j]) spec[j] = 0.0;
  }
  return from_spectrum(f.grid_ptr(), spec);
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return simd::kernels().dot(a.data(), b.data(), a.size()) * a.grid().cell_volume();
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

// ---------------------------------------------------------------------------
// Sobolev norms

double sobolev_norm(const ComponentView& u, int k) {
  if (k < 0) throw std::invalid_argument("sobolev_norm: order k must be >= 0");
  if (u.components.empty()) return 0.0;
  if (u.weights.size() != u.components.size()) throw std::invalid_argument("sobolev_norm: weight count mismatch");
  const Grid& g = u.components.front()->grid();
  const int n = g.dim();

  std::vector<std::vector<Complex>> spectra;
  spectra.reserve(u.components.size());
  for (const Field* c : u.components) {
    require_same_grid(*u.components.front(), *c);
    spectra.push_back(spectrum_of(*c));
  }

  const double parseval = g.cell_volume() / static_cast<double>(g.total_points());
  const auto& herm = g.hermitian_weight();
  double total = 0.0;
  std::vector<int> current(static_cast<std::size_t>(n), 0);
  for (int order = 0; order <= k; ++order) {
    std::vector<std::vector<int>> alphas;
    multi_indices(n, order, current, 0, alphas);
    for (const auto& alpha : alphas) {
      double sq = 0.0;
      for (std::size_t c = 0; c < spectra.size(); ++c) {
        double comp = 0.0;
        for (std::size_t j = 0; j < spectra[c].size(); ++j) {
          double factor = 1.0;
          for (int a = 0; a < n; ++a) {
            const double kk = g.derivative_wavenumbers(a)[j];
            for (int r = 0; r < alpha[static_cast<std::size_t>(a)]; ++r) factor *= kk;
          }
          comp += herm[j] * factor * factor * std::norm(spectra[c][j]);
        }
        sq += u.weights[c] * comp;
      }
      total += std::sqrt(std::max(sq, 0.0) * parseval);
    }
  }
  return total;
}

double sobolev_norm(const Field& u, int k) { return sobolev_norm(ComponentView{{&u}, {1.0}}, k); }

// ---------------------------------------------------------------------------
// random data

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Field band_limited_random(const GridPtr& grid, std::uint64_t seed, int band) {
  int min_points = grid->points(0);
  for (int a = 1; a < grid->dim(); ++a) min_points = std::min(min_points, grid->points(a));
  if (band < 0 || band > min_points / 4) {
    throw std::invalid_argument("band_limited_random: band " + std::to_string(band) + " exceeds points/4 = " +
                                std::to_string(min_points / 4));
  }
  std::mt19937_64 rng(seed);
  Field noise(grid);
  for (std::size_t p = 0; p < noise.size(); ++p) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    noise[p] = 2.0 * u - 1.0;
  }
  auto spec = spectrum_of(noise);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    bool keep = !grid->nyquist_mask()[j];
    for (int a = 0; a < grid->dim() && keep; ++a) keep = std::abs(grid->modes(a)[j]) <= band;
    if (!keep) spec[j] = 0.0;
  }
  Field out = from_spectrum(grid, spec);
  const double m = out.max_abs();
  if (m > 0.0) out *= 1.0 / m;
  return out;
}

}  // namespace cforge
