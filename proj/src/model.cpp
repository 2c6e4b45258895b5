#include "pmfront/model.hpp"

#include <cmath>
#include <numbers>

namespace pmfront {

namespace {

// Angular measure of the unit sphere surface in N dimensions, i.e. the
// factor turning r^{N-1} dr into a volume element: 1 (line, one side),
// 2*pi (disc), 4*pi (ball).
double angular_factor(int dim) {
  switch (dim) {
    case 1: return 1.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default:
      throw ConfigError("angular_factor: dim must be 1, 2 or 3, got " +
                        std::to_string(dim));
  }
}

void check_field(const std::vector<double>& f, std::size_t n, const char* name) {
  if (f.size() != n) {
    throw ConfigError(std::string("make_state: ") + name + " has " +
                      std::to_string(f.size()) + " cells, grid has " +
                      std::to_string(n));
  }
  for (double x : f) {
    if (!std::isfinite(x)) {
      throw NumericsError(std::string("make_state: non-finite value in ") + name);
    }
    if (x < 0.0) {
      throw ConfigError(std::string("make_state: negative value in ") + name);
    }
  }
}

} // namespace

void validate(const ModelParams& params) {
  if (!(params.m > 1.0)) {
    throw ConfigError("ModelParams: m must exceed 1, got " + std::to_string(params.m));
  }
  if (!(params.chi >= 0.0) || !std::isfinite(params.chi)) {
    throw ConfigError("ModelParams: chi must be finite and >= 0");
  }
  if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha)) {
    throw ConfigError("ModelParams: alpha must be finite and >= 0");
  }
  if (params.dim < 1 || params.dim > 3) {
    throw ConfigError("ModelParams: dim must be 1, 2 or 3, got " +
                      std::to_string(params.dim));
  }
  if (params.dim > 1 && !params.radial) {
    throw ConfigError("ModelParams: dim > 1 requires the radial reduction");
  }
}

double Grid::measure() const {
  double acc = 0.0, comp = 0.0;
  for (double w : weights) {
    double t = acc + w;
    comp += (std::fabs(acc) >= std::fabs(w)) ? (acc - t) + w : (w - t) + acc;
    acc = t;
  }
  return acc + comp;
}

Grid make_grid(int dim, bool radial, double half_length, int n_cells) {
  if (dim < 1 || dim > 3) {
    throw ConfigError("make_grid: dim must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (dim > 1 && !radial) {
    throw ConfigError("make_grid: dim > 1 is only supported through the radial "
                      "reduction (radial = true)");
  }
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw ConfigError("make_grid: half_length must be finite and > 0");
  }
  if (n_cells < 8) {
    throw ConfigError("make_grid: n_cells must be at least 8, got " +
                      std::to_string(n_cells));
  }

  Grid g;
  g.dim = dim;
  g.radial = radial;
  g.n_cells = n_cells;
  g.half_length = half_length;
  g.centers.resize(n_cells);
  g.weights.resize(n_cells);
  g.face_areas.resize(n_cells + 1);

  if (!radial) {
    // Interval (-L, L), cells of width dx, unit face areas.
    g.dx = 2.0 * half_length / n_cells;
    for (int i = 0; i < n_cells; ++i) {
      g.centers[i] = -half_length + (i + 0.5) * g.dx;
      g.weights[i] = g.dx;
    }
    for (int f = 0; f <= n_cells; ++f) g.face_areas[f] = 1.0;
  } else {
    // Radial coordinate (0, L); the r = 0 face has zero area, which encodes
    // the symmetry axis.  Weights are the exact shell measures
    // omega/N * (r_{i+1}^N - r_i^N), so cell sums reproduce ball integrals
    // and the flux-form divergence is the genuine finite-volume operator.
    g.dx = half_length / n_cells;
    const double omega = angular_factor(dim);
    for (int i = 0; i < n_cells; ++i) {
      const double r = (i + 0.5) * g.dx;
      const double r_lo = i * g.dx;
      const double r_hi = (i + 1) * g.dx;
      g.centers[i] = r;
      g.weights[i] = omega / dim *
                     (std::pow(r_hi, dim) - std::pow(r_lo, dim));
    }
    for (int f = 0; f <= n_cells; ++f) {
      const double r = f * g.dx;
      g.face_areas[f] = omega * std::pow(r, dim - 1);
    }
  }
  return g;
}

State make_state(const Grid& grid, std::vector<double> u, std::vector<double> v,
                 double t) {
  check_field(u, static_cast<std::size_t>(grid.n_cells), "u");
  check_field(v, static_cast<std::size_t>(grid.n_cells), "v");
  State s;
  s.u = std::move(u);
  s.v = std::move(v);
  s.t = t;
  return s;
}

double integrate(const std::vector<double>& field, const Grid& grid) {
  if (field.size() != grid.weights.size()) {
    throw ConfigError("integrate: field size " + std::to_string(field.size()) +
                      " does not match grid with " +
                      std::to_string(grid.n_cells) + " cells");
  }
  // Neumaier compensated summation keeps the mass ledger honest over
  // hundreds of thousands of steps.
  double acc = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double term = field[i] * grid.weights[i];
    const double t = acc + term;
    comp += (std::fabs(acc) >= std::fabs(term)) ? (acc - t) + term : (term - t) + acc;
    acc = t;
  }
  return acc + comp;
}

double linf(const std::vector<double>& field) {
  double m = 0.0;
  for (double x : field) m = std::max(m, std::fabs(x));
  return m;
}

double grad_max(const std::vector<double>& field, const Grid& grid) {
  if (field.size() != static_cast<std::size_t>(grid.n_cells)) {
    throw ConfigError("grad_max: field size does not match grid");
  }
  double m = 0.0;
  for (int i = 0; i + 1 < grid.n_cells; ++i) {
    m = std::max(m, std::fabs(field[i + 1] - field[i]) / grid.dx);
  }
  return m;
}

double lap_max(const std::vector<double>& field, const Grid& grid) {
  const int n = grid.n_cells;
  if (field.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("lap_max: field size does not match grid");
  }
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double flux_r =
        (i + 1 < n) ? grid.face_areas[i + 1] * (field[i + 1] - field[i]) / grid.dx : 0.0;
    const double flux_l =
        (i > 0) ? grid.face_areas[i] * (field[i] - field[i - 1]) / grid.dx : 0.0;
    m = std::max(m, std::fabs((flux_r - flux_l) / grid.weights[i]));
  }
  return m;
}

double min_value(const std::vector<double>& field) {
  if (field.empty()) throw ConfigError("min_value: empty field");
  double m = field[0];
  for (double x : field) m = std::min(m, x);
  return m;
}

} // namespace pmfront
