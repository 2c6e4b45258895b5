#include "pmfront/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace pmfront {

namespace {

constexpr double kBetaLowerBound = -0.8300749985791805; // -2*ln(4/3)/ln(2)

// eps * base1^p1 * base2^p2 evaluated in log space; keeps intermediate
// powers of tiny time origins away from under/overflow.
double scaled_power(double eps_pow, double base1, double p1, double base2, double p2) {
  return std::exp(eps_pow + p1 * std::log(base1) + p2 * std::log(base2));
}

double sq(double x) { return x * x; }

// Shared scale for "strictly positive margin" acceptance thresholds.
double margin_floor(double scale) { return 1e-11 * std::max(1.0, scale); }

// Amplitude floor required to dominate the initial bump:
//   K0 * max(1, R0^{2(d0 - d)}).
double initial_amplitude(const ModelParams& params, const BumpSpec& spec) {
  const double d = params.d();
  return spec.K0 * std::max(1.0, std::pow(spec.R0, 2.0 * (spec.d0 - d)));
}

// Pressure scale (4m/(m-1)) * e^{m-1}; at e = initial_amplitude this is the
// aggregation threshold of hypothesis_shrinking.
double pressure_scale(const ModelParams& params, double amplitude) {
  return 4.0 * params.m / (params.m - 1.0) * std::pow(amplitude, params.m - 1.0);
}

// ---- shrinking system -------------------------------------------------------
//
// Raw margins of the three feasibility inequalities for an upper envelope
// with shrinking support, evaluated from profile values (no search-time
// cancellations).  All three must be nonnegative together with the spread
// exponent bracket and the support/amplitude pinning conditions.

struct ShrinkTerms {
  double core = 0.0;    // amplitude growth beats curvature drain
  double annulus = 0.0; // aggregation beats pressure on the outer ring
  double edge = 0.0;    // combined balance at the support edge
};

ShrinkTerms shrink_terms(const ModelParams& params, double chi_mu, double C2,
                         double eps, double tau, double sigma, double beta) {
  const double m = params.m;
  const double N = params.dim;
  const double d = params.d();
  const double chi = params.chi;
  const double le = (m - 1.0) * std::log(eps);

  ShrinkTerms t;
  const double diffusion_core =
      2.0 * N * (m / (m - 1.0)) *
      scaled_power(le, tau, (m - 1.0) * sigma - beta + 1.0, 1.0, 0.0);
  t.core = sigma + diffusion_core - 2.0 * C2 * chi * tau;

  const double pressure =
      (4.0 * m / sq(m - 1.0)) *
      scaled_power(le, 2.0 * tau, (m - 1.0) * sigma - beta, 1.0, 0.0);
  t.annulus = d * chi_mu + d * beta / tau - pressure;

  t.edge = t.core * (5.0 / (9.0 * std::pow(tau, beta))) +
           (d * beta / tau - pressure - 4.0 * d * chi_mu) *
               std::pow(2.0 * tau, 1.0 - beta) / 4.0;
  return t;
}

std::vector<NamedMargin> shrink_margins(const ModelParams& params, const BumpSpec& spec,
                                        const Certificate& cert) {
  const SelfSimilarProfile& p = cert.profile;
  const ShrinkTerms t = shrink_terms(params, cert.chi_mu, cert.C2, p.eps, p.tau,
                                     p.sigma, p.beta);
  const double ebar = initial_amplitude(params, spec);
  const double support_tol = 1e-9 * sq(spec.R0);
  std::vector<NamedMargin> mg;
  mg.push_back({"support_scale_match",
                support_tol - std::fabs(sq(p.eta) * std::pow(p.tau, p.beta) - sq(spec.R0))});
  mg.push_back({"initial_domination",
                p.eps * std::pow(p.tau, p.sigma - p.d * p.beta) - ebar});
  mg.push_back({"core_growth", t.core});
  mg.push_back({"annulus_balance", t.annulus});
  mg.push_back({"edge_balance", t.edge});
  mg.push_back({"spread_exponent_low", p.beta - kBetaLowerBound});
  mg.push_back({"spread_exponent_high", -p.beta});
  mg.push_back({"window_positive", cert.t0});
  return mg;
}

// ---- finite-speed system ----------------------------------------------------

std::vector<NamedMargin> finite_speed_margins(const ModelParams& params,
                                              const BumpSpec& spec,
                                              const Certificate& cert) {
  const double R_envelope = cert.R_envelope;
  const SelfSimilarProfile& p = cert.profile;
  const double m = params.m;
  const double d = params.d();
  const double chi = params.chi;
  const double ebar = initial_amplitude(params, spec);
  const double epow = std::pow(p.eps, m - 1.0);

  std::vector<NamedMargin> mg;
  const double support_tol = 1e-9 * sq(spec.R0);
  mg.push_back({"support_scale_match",
                support_tol - std::fabs(sq(p.eta) * std::pow(p.tau, p.beta) - sq(spec.R0))});
  mg.push_back({"initial_domination",
                p.eps * std::pow(p.tau, p.sigma - d * p.beta) - ebar});
  mg.push_back({"growth_precondition", p.sigma - 2.0 * cert.C2 * chi * p.tau});
  mg.push_back({"annulus_balance",
                p.beta / (2.0 * (m - 1.0)) - (4.0 * m / sq(m - 1.0)) * epow -
                    4.0 * cert.C1 * chi / ((m - 1.0) * spec.R0)});
  mg.push_back({"core_balance",
                (p.sigma - 2.0 * cert.C2 * chi) * (3.0 * spec.R0 / (4.0 * std::pow(p.tau, p.beta))) *
                        std::min(1.0, std::pow(2.0, p.beta - 1.0)) -
                    cert.C1 * chi / (m - 1.0)});
  mg.push_back({"spread_consistency",
                1e-9 * std::max(1.0, p.beta) - std::fabs(p.beta - (m - 1.0) * p.sigma)});
  const double crossing = sq(R_envelope) - sq(p.eta) * std::pow(1.0 + cert.t0 / p.tau, p.beta);
  mg.push_back({"envelope_containment", crossing});
  mg.push_back({"window_positive", cert.t0});
  return mg;
}

// ---- speed-bracket systems --------------------------------------------------
//
// Residual coefficient conditions for the envelope pair: dividing the
// super/subsolution residual by eps*(1+t)^{sigma-1}*h^{d-1} leaves one
// coefficient multiplying h and one multiplying |x-x0|^2.  The attractant
// shape enters through chi*mu*(1 -/+ rate*t) (linear degradation budget) and
// the curvature budget C2.

struct BracketEval {
  double amplitude = 0.0; // h-coefficient margin (sign-adjusted per role)
  double spread = 0.0;    // |x|^2-coefficient margin (sign-adjusted per role)
};

BracketEval bracket_eval(const ModelParams& params, const Certificate& cert, double t) {
  const SelfSimilarProfile& p = cert.profile;
  const double m = params.m;
  const double N = params.dim;
  const double d = params.d();
  const double chi = params.chi;
  const double epow = std::pow(p.eps, m - 1.0);
  const double Q = 4.0 * m / (m - 1.0) * epow;
  const double s = 1.0 + t;

  const double diffusion_h = 2.0 * N * (m / (m - 1.0)) * epow *
                             std::pow(s, (m - 1.0) * p.sigma - p.beta + 1.0);
  const double pressure_x = Q * std::pow(s, (m - 1.0) * p.sigma - 2.0 * p.beta + 1.0);

  BracketEval ev;
  if (cert.role == ProfileRole::upper) {
    const double mu_low = cert.chi_mu * std::max(0.0, 1.0 - cert.structure_rate * t);
    ev.amplitude = p.sigma + diffusion_h - cert.C2 * chi * s;
    ev.spread = d * (p.beta * std::pow(s, -p.beta) - pressure_x +
                     2.0 * mu_low * std::pow(s, 1.0 - p.beta));
  } else {
    const double mu_high = cert.chi_mu * (1.0 + cert.structure_rate * t);
    ev.amplitude = -(p.sigma + diffusion_h + cert.C2 * chi * s);
    ev.spread = -d * (p.beta * std::pow(s, -p.beta) - pressure_x +
                      2.0 * mu_high * std::pow(s, 1.0 - p.beta));
  }
  return ev;
}

std::vector<NamedMargin> bracket_margins(const ModelParams& params, const BumpSpec& spec,
                                         const Certificate& cert) {
  constexpr int kGrid = 64;
  double amp = std::numeric_limits<double>::infinity();
  double spr = amp;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = cert.t_start + (cert.t_end - cert.t_start) * i / kGrid;
    const BracketEval ev = bracket_eval(params, cert, t);
    amp = std::min(amp, ev.amplitude);
    spr = std::min(spr, ev.spread);
  }
  const double beta_pos = std::max(cert.profile.beta, 0.0);
  const double support_max =
      cert.profile.eta * std::pow(1.0 + cert.t_end, 0.5 * beta_pos);
  std::vector<NamedMargin> mg;
  mg.push_back({"amplitude_term", amp});
  mg.push_back({"spread_term", spr});
  mg.push_back({"window_in_structure_ball", sq(spec.R0 + spec.delta) - sq(support_max)});
  mg.push_back({"window_positive", cert.t_end - cert.t_start});
  return mg;
}

// ---- expanding system -------------------------------------------------------

std::vector<NamedMargin> expanding_margins(const ModelParams& params,
                                           const Certificate& cert) {
  const SelfSimilarProfile& p = cert.profile;
  const double m = params.m;
  const double N = params.dim;
  const double chi = params.chi;
  const double epow = std::pow(p.eps, m - 1.0);
  const double pressure = 2.0 * m / (m - 1.0) * epow;
  const double span = cert.L + 1.0; // (tau + t_end) = L + 1 by construction
  // Domain radius, recovered from the uniform-floor start time t0, which was
  // pinned by (tau + t0)^beta = 2 R^2 / eta^2.
  const double R =
      p.eta * std::sqrt(0.5 * std::pow(1.0 - cert.decay_time + cert.t0, p.beta));

  std::vector<NamedMargin> mg;
  mg.push_back({"peak_below_core_level", cert.eps1 - p.eps * std::pow(p.eta, 2.0 * p.d)});
  mg.push_back({"radial_term_budget", -p.sigma / 4.0 - N * pressure});
  mg.push_back({"pressure_balance", pressure - p.beta});
  mg.push_back({"drift_budget_amplitude", -p.sigma / 4.0 - cert.delta * chi * span});
  mg.push_back({"drift_budget_core",
                pressure * p.eta / 4.0 - cert.delta * chi * span});
  mg.push_back({"drift_budget_edge",
                -p.sigma * p.eta * (m - 1.0) / 4.0 -
                    cert.delta * chi * std::pow(span, 1.0 - p.beta)});
  mg.push_back({"covers_domain", std::pow(span, 0.5 * p.beta) - 2.0 * R / p.eta});
  mg.push_back({"floor_window_nonempty",
                std::pow(span, p.beta) - 2.0 * sq(R / p.eta)});
  mg.push_back({"window_positive", cert.L});
  mg.push_back({"sigma_definition",
                1e-9 - std::fabs(p.sigma + (1.0 - p.beta) / (m - 1.0))});
  return mg;
}

double worst_of(const std::vector<NamedMargin>& mg, std::string* name = nullptr) {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& m : mg) {
    if (m.value < w) {
      w = m.value;
      if (name) *name = m.name;
    }
  }
  return w;
}

} // namespace

double profile_eval(const SelfSimilarProfile& p, double x, double t) {
  const double s = p.tau + t;
  if (!(s > 0.0)) {
    throw ConfigError("profile_eval: requires tau + t > 0, got " + std::to_string(s));
  }
  const double h = sq(p.eta) - sq(x - p.x0) / std::pow(s, p.beta);
  if (h <= 0.0) return 0.0;
  return p.eps * std::pow(s, p.sigma) * std::pow(h, p.d);
}

double profile_support_radius(const SelfSimilarProfile& p, double t) {
  const double s = p.tau + t;
  if (!(s > 0.0)) {
    throw ConfigError("profile_support_radius: requires tau + t > 0");
  }
  return p.eta * std::pow(s, 0.5 * p.beta);
}

double profile_peak(const SelfSimilarProfile& p, double t) {
  const double s = p.tau + t;
  if (!(s > 0.0)) {
    throw ConfigError("profile_peak: requires tau + t > 0");
  }
  return p.eps * std::pow(s, p.sigma) * std::pow(p.eta, 2.0 * p.d);
}

double Certificate::worst_margin() const { return worst_of(margins); }

Certificate shrinking_certificate(const ModelParams& params, const BumpSpec& spec,
                                  double C1, double C2, double structure_time) {
  validate(params);
  if (!(C1 >= 0.0) || !(C2 >= 0.0)) {
    throw ConfigError("shrinking_certificate: C1 and C2 must be >= 0");
  }
  if (!(structure_time > 0.0)) {
    throw ConfigError("shrinking_certificate: structure_time must be > 0 "
                      "(the attractant well never formed)");
  }
  const double m = params.m;
  const double d = params.d();
  const double chi_mu = params.chi * spec.mu;
  const double ebar = initial_amplitude(params, spec);
  const double Qbar = pressure_scale(params, ebar);
  const double lebar = (m - 1.0) * std::log(ebar * (1.0 + 1e-12));
  const double floor = margin_floor(std::max(chi_mu, Qbar));

  double best_infeasible = -std::numeric_limits<double>::infinity();
  std::string best_binding = "annulus_balance";

  // Cancelled-form objective: with the amplitude pinned to make the initial
  // domination tight, the time origin drops out of the annulus inequality and
  // the worst margin is concave in sigma (linear core term, concave
  // exponential terms), so a ternary search per (tau, beta) cell is exact.
  for (int jt = 0; jt <= 40; ++jt) {
    const double tau = std::pow(2.0, -jt);
    for (int jb = 0; jb <= 60; ++jb) {
      const double beta = kBetaLowerBound * std::pow(2.0, -jb);
      const double A = chi_mu + beta / tau;
      if (!(A > 0.0)) continue;
      // Annulus inequality upper-bounds sigma: Qbar 2^{(m-1)sigma - beta} < A.
      const double sigma_hi = (std::log2(A / Qbar) + beta) / (m - 1.0);
      if (!(sigma_hi > 1e-13)) {
        const double bound = d * (A - Qbar * std::pow(2.0, -beta));
        if (bound > best_infeasible) {
          best_infeasible = bound;
          best_binding = "annulus_balance";
        }
        continue;
      }
      auto objective = [&](double sigma) {
        const ShrinkTerms t = shrink_terms(params, chi_mu, C2,
                                           std::exp(lebar / (m - 1.0)) *
                                               std::pow(tau, d * beta - sigma),
                                           tau, sigma, beta);
        return std::min({t.core, t.annulus, t.edge});
      };
      double lo = 1e-13, hi = sigma_hi;
      for (int it = 0; it < 120; ++it) {
        const double a = lo + (hi - lo) / 3.0;
        const double b = hi - (hi - lo) / 3.0;
        if (objective(a) < objective(b)) lo = a; else hi = b;
      }
      const double sigma = 0.5 * (lo + hi);
      const double fbest = objective(sigma);
      if (fbest >= floor) {
        Certificate cert;
        cert.system = "shrinking";
        cert.role = ProfileRole::upper;
        cert.profile.d = d;
        cert.profile.x0 = spec.x0;
        cert.profile.tau = tau;
        cert.profile.sigma = sigma;
        cert.profile.beta = beta;
        cert.profile.eta = spec.R0 * std::pow(tau, -0.5 * beta);
        cert.profile.eps = ebar * (1.0 + 1e-12) * std::pow(tau, d * beta - sigma);
        cert.C1 = C1;
        cert.C2 = C2;
        cert.chi_mu = chi_mu;
        cert.structure_time = structure_time;
        cert.t0 = std::min(tau, structure_time);
        cert.t_start = 0.0;
        cert.t_end = cert.t0;
        cert.eps0 = cert.eps1 = cert.L = cert.delta = 0.0;
        cert.decay_time = 0.0;
        if (!std::isfinite(cert.profile.eps) || !std::isfinite(cert.profile.eta)) {
          continue; // amplitude out of double range at this tau; keep searching
        }
        cert.margins = shrink_margins(params, spec, cert);
        std::string binding;
        if (worst_of(cert.margins, &binding) < 0.0) {
          // Raw transcription disagrees with the cancelled search forms by
          // more than the acceptance floor; treat as infeasible candidate.
          if (fbest > best_infeasible) {
            best_infeasible = fbest;
            best_binding = binding;
          }
          continue;
        }
        return cert;
      }
      if (fbest > best_infeasible) {
        best_infeasible = fbest;
        std::string name;
        const ShrinkTerms t = shrink_terms(params, chi_mu, C2,
                                           std::exp(lebar / (m - 1.0)) *
                                               std::pow(tau, d * beta - sigma),
                                           tau, sigma, beta);
        name = (t.annulus <= t.core && t.annulus <= t.edge) ? "annulus_balance"
               : (t.edge <= t.core) ? "edge_balance" : "core_growth";
        best_binding = name;
      }
    }
  }
  throw InfeasibleError(
      "shrinking_certificate: no admissible profile (aggregation strength chi*mu = " +
          std::to_string(chi_mu) + " vs pressure threshold " + std::to_string(Qbar) +
          "); binding inequality: " + best_binding,
      best_binding, best_infeasible);
}

Certificate finite_speed_certificate(const ModelParams& params, const BumpSpec& spec,
                                     double C1, double C2, double R_envelope) {
  validate(params);
  if (!(C1 >= 0.0) || !(C2 >= 0.0)) {
    throw ConfigError("finite_speed_certificate: C1 and C2 must be >= 0");
  }
  if (!(R_envelope > spec.R0)) {
    throw ConfigError("finite_speed_certificate: envelope radius must exceed R0");
  }
  const double m = params.m;
  const double d = params.d();
  const double chi = params.chi;
  const double ebar = initial_amplitude(params, spec);
  const double eps = ebar * (1.0 + 1e-12);
  const double epow = std::pow(eps, m - 1.0);
  const double floor = margin_floor(pressure_scale(params, ebar) + C1 + C2);

  for (int j = 0; j <= 20; ++j) {
    const double sigma = std::pow(2.0, j);
    const double beta = (m - 1.0) * sigma;
    const double pre = sigma - 2.0 * C2 * chi;
    const double annulus = beta / (2.0 * (m - 1.0)) - (4.0 * m / sq(m - 1.0)) * epow -
                           4.0 * C1 * chi / ((m - 1.0) * spec.R0);
    const double core = pre * (3.0 * spec.R0 / 4.0) * std::min(1.0, std::pow(2.0, beta - 1.0)) -
                        C1 * chi / (m - 1.0);
    if (pre >= floor && annulus >= floor && core >= floor) {
      Certificate cert;
      cert.system = "finite_speed";
      cert.role = ProfileRole::upper;
      cert.profile.d = d;
      cert.profile.x0 = spec.x0;
      cert.profile.tau = 1.0;
      cert.profile.sigma = sigma;
      cert.profile.beta = beta;
      cert.profile.eta = spec.R0;
      cert.profile.eps = eps;
      cert.C1 = C1;
      cert.C2 = C2;
      cert.chi_mu = chi * spec.mu;
      cert.R_envelope = R_envelope;
      const double t_hat =
          (std::pow(sq(R_envelope / spec.R0), 1.0 / beta) - 1.0) * (1.0 - 1e-9);
      cert.structure_time = t_hat; // envelope-crossing time plays that role here
      cert.t0 = std::min(1.0, t_hat);
      cert.t_start = 0.0;
      cert.t_end = cert.t0;
      cert.eps0 = cert.eps1 = cert.L = cert.delta = 0.0;
      cert.decay_time = 0.0;
      cert.margins = finite_speed_margins(params, spec, cert);
      if (worst_of(cert.margins) >= 0.0) return cert;
    }
  }
  throw InfeasibleError("finite_speed_certificate: no exponent up to 2^20 absorbs the "
                        "attractant budgets C1 = " + std::to_string(C1) +
                        ", C2 = " + std::to_string(C2),
                        "annulus_balance", 0.0);
}

ExactSpeedProfiles exact_speed_profiles(const ModelParams& params, const BumpSpec& spec,
                                        double gap, double structure_rate, double C1,
                                        double C2) {
  validate(params);
  const double m = params.m;
  const double d = params.d();
  if (std::fabs(spec.d0 - d) > 1e-9 * std::max(1.0, d)) {
    throw ConfigError("exact_speed_profiles: requires the unit-exponent shape "
                      "d0 = 1/(m-1)");
  }
  if (!(gap > 0.0)) {
    throw ConfigError("exact_speed_profiles: gap must be > 0");
  }
  const double chi = params.chi;
  const double chi_mu = chi * spec.mu;
  const double N = params.dim;
  const double beta = 4.0 * m / (m - 1.0) * std::pow(spec.K0, m - 1.0) - 2.0 * chi * spec.mu;
  if (structure_rate <= 0.0) {
    structure_rate = 8.0 * N + 4.0 * params.alpha * spec.K0 * std::pow(sq(spec.R0), spec.d0);
  }
  if (C2 < 0.0) C2 = std::max(2.0 * spec.mu * N, 1e-6);
  if (C1 < 0.0) C1 = std::max(2.0 * spec.mu * (spec.R0 + spec.delta), 1e-6);

  const double floor = margin_floor(std::max(chi_mu, std::fabs(beta)));

  auto build = [&](ProfileRole role) {
    Certificate cert;
    cert.role = role;
    cert.system = role == ProfileRole::upper ? "speed_bracket_upper" : "speed_bracket_lower";
    cert.profile.d = d;
    cert.profile.x0 = spec.x0;
    cert.profile.tau = 1.0;
    cert.profile.eta = spec.R0;
    cert.profile.eps = spec.K0;
    cert.profile.beta = role == ProfileRole::upper ? beta + gap : beta - gap;
    cert.C1 = C1;
    cert.C2 = C2;
    cert.chi_mu = chi_mu;
    cert.structure_rate = structure_rate;
    cert.eps0 = cert.eps1 = cert.L = cert.delta = 0.0;
    cert.structure_time = cert.decay_time = 0.0;

    if (role == ProfileRole::upper) {
      double s = 1.0;
      while (s < 2.0 * C2 * chi + 1.0) s *= 2.0;
      cert.profile.sigma = s;
    } else {
      const double need = std::max({2.0 * N * (m / (m - 1.0)) * std::pow(spec.K0, m - 1.0) +
                                        2.0 * C2 * chi + 1.0,
                                    (1.0 - cert.profile.beta) / (m - 1.0) + 1.0, 1.0});
      double s = 1.0;
      while (s < need) s *= 2.0;
      cert.profile.sigma = -s;
    }

    // Cap the window so the support never leaves the exact-shape ball of the
    // attractant well.
    double t_cap = 1.0;
    if (cert.profile.beta > 0.0) {
      t_cap = std::min(t_cap, std::pow(sq(1.0 + spec.delta / spec.R0),
                                       1.0 / cert.profile.beta) - 1.0);
    }
    if (!(t_cap > 0.0)) {
      throw InfeasibleError("exact_speed_profiles: structure ball admits no window",
                            "window_in_structure_ball", t_cap);
    }

    auto feasible = [&](double T) {
      cert.t_start = 0.0;
      cert.t_end = T;
      const auto mg = bracket_margins(params, spec, cert);
      return worst_of(mg) >= floor;
    };
    if (feasible(t_cap)) {
      cert.t_end = t_cap;
    } else {
      double lo = std::min(t_cap, 1e-9);
      if (!feasible(lo)) {
        cert.t_start = 0.0;
        cert.t_end = lo;
        const auto mg = bracket_margins(params, spec, cert);
        std::string binding;
        const double w = worst_of(mg, &binding);
        throw InfeasibleError(
            "exact_speed_profiles: no validity window (gap too small for the "
            "attractant budgets); binding: " + binding, binding, w);
      }
      double hi = t_cap;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid; else hi = mid;
      }
      cert.t_end = lo;
    }
    cert.t_start = 0.0;
    cert.t0 = cert.t_end;
    cert.margins = bracket_margins(params, spec, cert);
    return cert;
  };

  ExactSpeedProfiles pair;
  pair.beta = beta;
  pair.upper = build(ProfileRole::upper);
  pair.lower = build(ProfileRole::lower);
  return pair;
}

Certificate expanding_certificate(const ModelParams& params, double eps1,
                                  double R0_core, double R_domain,
                                  double delta_request, double decay_time) {
  validate(params);
  if (!(eps1 > 0.0)) {
    throw ConfigError("expanding_certificate: eps1 must be > 0");
  }
  if (!(R0_core > 0.0) || !(R0_core < R_domain)) {
    throw ConfigError("expanding_certificate: need 0 < R0_core < R_domain");
  }
  if (!(decay_time >= 0.0)) {
    throw ConfigError("expanding_certificate: decay_time must be >= 0");
  }
  const double m = params.m;
  const double d = params.d();
  const double N = params.dim;
  const double chi = params.chi;

  // Spread exponent: start from the balance cap (with 2% slack so margins are
  // strictly positive) and halve until the profile peak sits below the core
  // level eps1.
  double beta = 0.98 / (4.0 * N * (m - 1.0) + 1.0);
  double eps = 0.0;
  for (int it = 0;; ++it) {
    if (it > 200) {
      throw InfeasibleError("expanding_certificate: spread exponent underflow",
                            "peak_below_core_level", 0.0);
    }
    eps = std::pow(beta * (m - 1.0) / (2.0 * m), d) * (1.0 + 1e-12);
    if (eps * std::pow(R0_core, 2.0 * d) <= eps1 * (1.0 - 1e-12)) break;
    beta *= 0.5;
  }
  const double sigma = -(1.0 - beta) / (m - 1.0);
  const double span = std::pow(2.0 * R_domain / R0_core, 2.0 / beta) * (1.0 + 1e-9);
  const double L = span - 1.0;

  double delta;
  const double pressure = 2.0 * m / (m - 1.0) * std::pow(eps, m - 1.0);
  if (chi * span > 0.0) {
    delta = std::min({-sigma / (4.0 * chi * span),
                      pressure * R0_core / (4.0 * chi * span),
                      -sigma * R0_core * (m - 1.0) /
                          (4.0 * chi * std::pow(span, 1.0 - beta))}) *
            (1.0 - 1e-9);
  } else {
    delta = delta_request > 0.0 ? delta_request : 1.0;
  }
  if (delta_request > 0.0) delta = std::min(delta, delta_request);

  Certificate cert;
  cert.system = "expanding";
  cert.role = ProfileRole::lower;
  cert.profile.d = d;
  cert.profile.x0 = 0.0;
  cert.profile.tau = 1.0 - decay_time;
  cert.profile.sigma = sigma;
  cert.profile.beta = beta;
  cert.profile.eta = R0_core;
  cert.profile.eps = eps;
  cert.C1 = delta;
  cert.C2 = delta;
  cert.chi_mu = 0.0;
  cert.t_start = decay_time;
  cert.t_end = decay_time + L;
  cert.L = L;
  cert.delta = delta;
  cert.eps1 = eps1;
  cert.eps0 = eps * std::pow(span, sigma) * std::pow(0.5 * sq(R0_core), d);
  cert.t0 = std::pow(2.0 * sq(R_domain / R0_core), 1.0 / beta) - 1.0 + decay_time;
  cert.decay_time = decay_time;
  cert.structure_time = 0.0;
  cert.margins = expanding_margins(params, cert);
  std::string binding;
  const double w = worst_of(cert.margins, &binding);
  if (w < 0.0) {
    throw InfeasibleError("expanding_certificate: margin " + binding +
                          " is negative (" + std::to_string(w) + ")",
                          binding, w);
  }
  return cert;
}

MarginReport check_inequalities(const Certificate& cert, const ModelParams& params,
                                const BumpSpec& spec) {
  validate(params);
  MarginReport rep;
  if (cert.system == "shrinking") {
    rep.margins = shrink_margins(params, spec, cert);
  } else if (cert.system == "finite_speed") {
    rep.margins = finite_speed_margins(params, spec, cert);
  } else if (cert.system == "speed_bracket_upper" ||
             cert.system == "speed_bracket_lower") {
    rep.margins = bracket_margins(params, spec, cert);
  } else if (cert.system == "expanding") {
    rep.margins = expanding_margins(params, cert);
  } else {
    throw ConfigError("check_inequalities: unknown system '" + cert.system + "'");
  }
  rep.worst = worst_of(rep.margins, &rep.worst_name);
  rep.all_nonnegative = rep.worst >= 0.0;
  return rep;
}

DominationResult numeric_domination(const Trace& trace, const Certificate& cert,
                                    const Grid& grid) {
  const double a = cert.t_start;
  const double b = cert.t_end;
  if (!(b > a)) {
    throw ConfigError("numeric_domination: empty certificate window");
  }
  const double slack = 1e-12 * std::max(1.0, std::fabs(b));
  std::vector<const Snapshot*> inside;
  for (const auto& s : trace.snapshots) {
    if (s.t >= a - slack && s.t <= b + slack) inside.push_back(&s);
  }
  if (inside.size() < 3 || inside.front()->t > a + 0.25 * (b - a) ||
      inside.back()->t < b - 0.25 * (b - a)) {
    throw ConfigError("numeric_domination: trace snapshots do not cover the "
                      "certificate window [" + std::to_string(a) + ", " +
                      std::to_string(b) + "]");
  }

  DominationResult res;
  res.holds = true;
  res.worst_violation = -std::numeric_limits<double>::infinity();
  for (const Snapshot* s : inside) {
    const double tol = 1e-8 + 5.0 * grid.dx * linf(s->u);
    res.tol = std::max(res.tol, tol);
    double worst_here = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_cells; ++i) {
      const double g = profile_eval(cert.profile, grid.centers[i], s->t);
      const double diff = cert.role == ProfileRole::upper ? s->u[i] - g : g - s->u[i];
      worst_here = std::max(worst_here, diff);
    }
    res.worst_violation = std::max(res.worst_violation, worst_here);
    if (worst_here > tol) res.holds = false;
  }
  res.snapshots_checked = static_cast<int>(inside.size());
  return res;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::json j;
  j["system"] = cert.system;
  j["role"] = cert.role == ProfileRole::upper ? "upper" : "lower";
  j["profile"] = {{"eps", cert.profile.eps},   {"tau", cert.profile.tau},
                  {"sigma", cert.profile.sigma}, {"beta", cert.profile.beta},
                  {"eta", cert.profile.eta},   {"d", cert.profile.d},
                  {"x0", cert.profile.x0}};
  j["window"] = {cert.t_start, cert.t_end};
  j["constants"] = {{"C1", cert.C1},
                    {"C2", cert.C2},
                    {"chi_mu", cert.chi_mu},
                    {"structure_rate", cert.structure_rate},
                    {"R_envelope", cert.R_envelope},
                    {"t0", cert.t0},
                    {"eps0", cert.eps0},
                    {"eps1", cert.eps1},
                    {"L", cert.L},
                    {"delta", cert.delta},
                    {"structure_time", cert.structure_time},
                    {"decay_time", cert.decay_time}};
  nlohmann::json mg = nlohmann::json::object();
  for (const auto& m : cert.margins) mg[m.name] = m.value;
  j["margins"] = mg;
  return j.dump(2);
}

} // namespace pmfront
