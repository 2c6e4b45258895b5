#pragma once
//
// certificates.hpp — constructive comparison certificates for front motion.
//
// Every certificate wraps a self-similar comparison profile
//
//     g(x, t) = eps * (tau + t)^sigma * max(eta^2 - |x - x0|^2 / (tau + t)^beta, 0)^d,
//
// d = 1/(m-1), together with a role (upper envelope dominating u, or lower
// envelope dominated by u), a validity window, and a list of named margins:
// the certificate is the statement that each margin is the slack of one
// inequality that, taken together, make g a super- or subsolution of the
// system on the window with the claimed ordering at the window start.  The
// builders *search* profile exponents so all margins come out nonnegative and
// throw InfeasibleError (naming the binding inequality) when no admissible
// profile exists — which is itself a meaningful result: the shrinking system,
// for instance, is provably infeasible at and below the aggregation
// threshold, so feasibility flips exactly where the front behavior does.
//
// check_inequalities re-evaluates every margin from the stored profile by a
// direct transcription of the inequality systems, independent of the search
// code, and numeric_domination compares the profile pointwise against
// simulated snapshots with a resolution-aware tolerance.  Certificates
// serialize to JSON for regression against golden files.
//
//   - shrinking_certificate:  upper envelope with shrinking support; needs the
//     aggregation strength chi*mu to beat the pressure threshold.  The support
//     scale eta is pinned to match R0 at t = 0, the amplitude is pinned by
//     domination of the initial bump, and (tau, beta, sigma) are searched:
//     tau descending over powers of two (small windows are easier to certify
//     near the threshold), beta upward from the most negative admissible
//     value, sigma by concave ternary maximization of the worst margin.
//   - finite_speed_certificate: upper envelope with expanding support staying
//     inside a requested envelope ball up to the crossing time of the
//     envelope; sigma doubles until the curvature and gradient budgets of the
//     attractant (C1, C2) are absorbed.
//   - exact_speed_profiles: a pair of envelopes whose support radii move at
//     speeds bracketing the predicted front speed within +-gap * R0 * d-ish
//     factors; the window is bisected so both residual coefficient conditions
//     hold under a linear structure-degradation budget.
//   - expanding_certificate: lower envelope seeded once the attractant has
//     decayed below a drift budget delta; its support swallows the whole
//     domain by the window end, which pins the uniform-positivity floor eps0.
//

#include <string>
#include <vector>

#include "pmfront/initial_data.hpp"
#include "pmfront/model.hpp"
#include "pmfront/solver.hpp"

namespace pmfront {

// Thrown by certificate builders when the inequality system admits no
// profile.  Carries the most nearly feasible margin set found.
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what, std::string binding = {},
                           double margin = 0.0)
      : std::runtime_error(what), binding_inequality(std::move(binding)),
        best_margin(margin) {}
  std::string binding_inequality; // name of the inequality that cannot be met
  double best_margin = 0.0;       // its value at the best candidate found
};

struct SelfSimilarProfile {
  double eps = 1.0;   // amplitude factor
  double tau = 1.0;   // time origin shift (tau + t > 0 on the window)
  double sigma = 0.0; // amplitude exponent
  double beta = 0.0;  // support-spread exponent (support radius eta*(tau+t)^{beta/2})
  double eta = 1.0;   // support scale
  double d = 1.0;     // shape exponent 1/(m-1)
  double x0 = 0.0;    // center
};

// Point evaluation of the profile.  Throws ConfigError if tau + t <= 0.
double profile_eval(const SelfSimilarProfile& p, double x, double t);

// Support radius eta * (tau + t)^{beta/2}.
double profile_support_radius(const SelfSimilarProfile& p, double t);

// Center value eps * (tau + t)^sigma * eta^{2d}.
double profile_peak(const SelfSimilarProfile& p, double t);

enum class ProfileRole { upper, lower };

struct NamedMargin {
  std::string name;
  double value = 0.0;
};

struct Certificate {
  SelfSimilarProfile profile;
  ProfileRole role = ProfileRole::upper;
  std::string system;        // inequality system id: "shrinking",
                             // "finite_speed", "speed_bracket_upper",
                             // "speed_bracket_lower", "expanding"
  double t_start = 0.0;      // validity window
  double t_end = 0.0;
  double C1 = 0.0;           // budget/measured sup |grad v| on the window
  double C2 = 0.0;           // budget/measured sup |lap v| on the window
  double chi_mu = 0.0;       // aggregation strength the margins were checked at
  double structure_rate = 0.0; // linear degradation budget for the well shape
                               // (speed-bracket systems only)
  double R_envelope = 0.0;   // containment ball radius (finite-speed only)

  // Derived quantities; quiet-NaN when not applicable to the system.
  double t0 = 0.0;   // comparison window end (shrinking/finite-speed) or
                     // uniform-positivity start (expanding)
  double eps0 = 0.0; // uniform lower floor reached (expanding)
  double eps1 = 0.0; // core density level consumed by the construction (expanding)
  double L = 0.0;    // window length t_end - t_start (expanding)
  double delta = 0.0; // attractant drift budget (expanding)
  double structure_time = 0.0; // how long the well shape persists (caller-measured)
  double decay_time = 0.0;     // when the attractant fell below delta (caller-measured)

  std::vector<NamedMargin> margins; // all >= 0 on a successfully emitted certificate

  double worst_margin() const;
};

// ---- builders -------------------------------------------------------------

// Upper envelope with shrinking support (requires hypothesis_shrinking to
// hold; at or below the threshold the search throws InfeasibleError, naming
// the quadratic annulus inequality that cannot be met).  structure_time is
// the measured duration over which the attractant keeps the inward-slope
// well shape at half strength; the comparison window is (0, min(tau,
// structure_time)).  C1 is recorded on the certificate but the system's
// inequalities consume only C2.
Certificate shrinking_certificate(const ModelParams& params, const BumpSpec& spec,
                                  double C1, double C2, double structure_time);

// Upper envelope proving the support stays inside |x - x0| < R_envelope on
// (0, t0).  The attractant need not have any well structure; C1 and C2 are
// sup bounds of |grad v| and |lap v| over (0, 1).
Certificate finite_speed_certificate(const ModelParams& params, const BumpSpec& spec,
                                     double C1, double C2, double R_envelope);

struct ExactSpeedProfiles {
  Certificate upper;  // support speed = predicted + gap * R0/2 at t = 0
  Certificate lower;  // support speed = predicted - gap * R0/2 at t = 0
  double beta = 0.0;  // shared spread exponent: R0 * beta / 2 = predicted speed
};

// Envelope pair bracketing the initial front speed of a unit-exponent bump
// (d0 = 1/(m-1) required).  gap > 0 separates the two spread exponents; both
// windows shrink proportionally to gap.  structure_rate, C1, C2 are budgets
// (<= 0 selects scaled defaults) that the simulate path cross-checks against
// the measured attractant.
ExactSpeedProfiles exact_speed_profiles(const ModelParams& params, const BumpSpec& spec,
                                        double gap, double structure_rate = -1.0,
                                        double C1 = -1.0, double C2 = -1.0);

// Lower envelope seeded at decay_time (when max(|grad v|, |lap v|) has fallen
// below the certificate's drift budget delta and u >= eps1 on the core ball
// of radius R0_core) whose support expands to cover B_{R_domain} by the
// window end.  delta_request > 0 caps the emitted budget from above.
// Postcondition: on (t0, t_end), u >= eps0 everywhere in the domain.
Certificate expanding_certificate(const ModelParams& params, double eps1,
                                  double R0_core, double R_domain,
                                  double delta_request, double decay_time);

// ---- verification ---------------------------------------------------------

struct MarginReport {
  std::vector<NamedMargin> margins;
  bool all_nonnegative = false;
  double worst = 0.0;
  std::string worst_name;
};

// Recompute every margin of the certificate's inequality system from the
// stored profile and constants (independent transcription of the systems; no
// search code involved).
MarginReport check_inequalities(const Certificate& cert, const ModelParams& params,
                                const BumpSpec& spec);

struct DominationResult {
  bool holds = false;          // every snapshot obeys the ordering within tol
  double worst_violation = 0.0; // max over snapshots/cells of the signed excess
                               // (u - g for upper role, g - u for lower);
                               // negative = strictly ordered everywhere
  double tol = 0.0;            // largest per-snapshot tolerance applied
  int snapshots_checked = 0;
};

// Pointwise comparison of simulated snapshots against the profile over the
// certificate window, tolerance 1e-8 + 5 * dx * ||u(t)||_inf per snapshot.
// Requires snapshots covering the window (one near each end, three or more
// in total).
DominationResult numeric_domination(const Trace& trace, const Certificate& cert,
                                    const Grid& grid);

// JSON serialization (stable key order, 17 significant digits via the
// shortest-round-trip dump of the JSON library).
std::string certificate_to_json(const Certificate& cert);

} // namespace pmfront
