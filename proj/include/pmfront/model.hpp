#pragma once
//
// model.hpp — model parameters, finite-volume mesh, and state for a
// degenerate-diffusion chemotaxis system
//
//     u_t = div( grad(u^m) - chi * u * grad(v) )
//     v_t = lap(v) - alpha * u * v
//
// on an interval (-L, L) (dim = 1) or a ball of radius L reduced to the
// radial coordinate (dim = 2 or 3, radial = true), with zero-flux boundary
// conditions on both fields.  m > 1 makes the diffusion degenerate: compactly
// supported cell densities u stay compactly supported and propagate with a
// sharp front, which is the object this laboratory measures.
//
// The mesh is a uniform cell-centered grid.  Each cell carries a measure
// weight (the angular factor is folded in for radial grids, so sums of
// field*weight are integrals over the full ball), and each face carries an
// area so that flux-form updates conserve mass to rounding error.  The face
// at r = 0 of a radial grid has zero area, which enforces the symmetry axis
// condition automatically.
//

#include <stdexcept>
#include <string>
#include <vector>

namespace pmfront {

// Thrown when a configuration value or argument violates a documented
// precondition.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when the numerics detect an invalid runtime condition (unstable
// time step, non-finite field values, ...).
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelParams {
  double m = 2.0;      // diffusion exponent, > 1 (porous-medium regime)
  double chi = 0.0;    // drift sensitivity toward increasing v, >= 0
  double alpha = 1.0;  // consumption rate of v by u, >= 0
  int dim = 1;         // spatial dimension, 1..3
  bool radial = false; // radial reduction; required when dim > 1

  // Exponent of the pressure-like quantity: supp profiles scale as
  // (R^2 - |x|^2)^d with d = 1/(m-1).
  double d() const { return 1.0 / (m - 1.0); }
};

void validate(const ModelParams& params);

struct Grid {
  int dim = 1;
  bool radial = false;
  int n_cells = 0;
  double half_length = 0.0; // interval half-length, or ball radius
  double dx = 0.0;

  std::vector<double> centers;    // cell-center coordinates (radii if radial)
  std::vector<double> weights;    // cell measures, angular factor included
  std::vector<double> face_areas; // n_cells + 1 face areas, boundaries included

  // Total measure of the discretized domain (sum of cell weights).
  double measure() const;
};

// Build a uniform mesh.  dim = 1 spans (-half_length, half_length); radial
// grids span (0, half_length) with the first center at dx/2.  Requires
// n_cells >= 8 and radial = true whenever dim > 1.
Grid make_grid(int dim, bool radial, double half_length, int n_cells);

struct State {
  std::vector<double> u; // cell density
  std::vector<double> v; // attractant concentration
  double t = 0.0;
};

// Bundle fields into a state after checking sizes, finiteness and
// non-negativity against the grid.
State make_state(const Grid& grid, std::vector<double> u, std::vector<double> v,
                 double t = 0.0);

// Integral of a cell field over the domain (compensated summation, so the
// result is deterministic and accurate to a few ulp even over long runs).
double integrate(const std::vector<double>& field, const Grid& grid);

// Sup norm over cells.
double linf(const std::vector<double>& field);

// Max over interior faces of |f_{i+1} - f_i| / dx: a sup bound for the
// gradient of the piecewise-linear reconstruction.
double grad_max(const std::vector<double>& field, const Grid& grid);

// Sup norm of the discrete zero-flux Laplacian (the same flux-form operator
// the solver applies to v).
double lap_max(const std::vector<double>& field, const Grid& grid);

// Smallest cell value.
double min_value(const std::vector<double>& field);

} // namespace pmfront
