#pragma once

#include "bmt/measures.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bmt {

/// Test function eta with gradient (one-dimensional samples use index 0).
struct TestFunction {
  std::string label;
  std::function<double(const Vec&)> eta;
  std::function<Vec(const Vec&)> grad;
};

/// Divergence Psi with its second derivative on the open interval (lo, hi).
struct Divergence {
  std::string label;
  std::function<double(double)> psi;
  std::function<double(double)> psi2;
  double lo = -kInf;
  double hi = kInf;
};

Divergence psi_square();      // x^2 on R
Divergence psi_entropy();     // x log x on (0, inf)

/// Default family: linear, centered quadratic, exp(alpha x), sin(omega x)
/// and a softplus ramp, all in the first coordinate. Positive-valued members
/// (for the entropy divergence) are the exponentials.
std::vector<TestFunction> default_family(int d);
std::vector<TestFunction> positive_family(int d);

/// Psi, Psi'' and -1/Psi'' convex on the domain, checked by second
/// differences at 100 points.
bool divergence_is_admissible(const Divergence& psi);

struct InequalityRow {
  std::string inequality;
  std::string function_label;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;   // rhs - lhs
  double sd = 0.0;       // bootstrap sd of (rhs - lhs)
  bool skipped = false;
  bool passed = false;   // lhs <= rhs + 2 sd
};

struct InequalityReport {
  std::vector<InequalityRow> rows;
  bool passed() const;
};

/// Ent^Psi(eta) <= (C_sq/2) E[Psi''(eta) |grad eta|^2].
InequalityReport psi_sobolev_check(const std::vector<Vec>& samples, const std::vector<TestFunction>& family,
                                   const Divergence& psi, double C_sq, int n_boot, std::uint64_t seed);

/// E[eta^q] <= C^q (q-1)^{q/2} E[|grad eta|^q] for the empirically centered eta.
InequalityReport q_poincare_check(const std::vector<Vec>& samples, const std::vector<TestFunction>& family, int q,
                                  double C, int n_boot, std::uint64_t seed);

struct IsoperimetryRow {
  double level = 0.0;
  double r = 0.0;
  double mass = 0.0;            // p[A + rB]
  double conventional = 0.0;    // Phi(Phi^{-1}(p[A]) + r/C)
  double literal = 0.0;         // Phi(p[A] + r/C)
  bool passed = false;          // mass >= conventional - 1e-9
  bool literal_passed = false;
};

struct IsoperimetryReport {
  std::vector<IsoperimetryRow> rows;
  bool passed() const;
};

/// Half-lines A = (-inf, a] with p[A] = level; exact CDF arithmetic.
IsoperimetryReport isoperimetric_check_1d(const TargetMeasure& m, const std::vector<double>& levels,
                                          const std::vector<double>& r_values, double C);

}  // namespace bmt
