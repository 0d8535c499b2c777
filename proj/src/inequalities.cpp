#include "bmt/inequalities.hpp"

#include "bmt/special.hpp"

#include <algorithm>
#include <cmath>

namespace bmt {

Divergence psi_square() {
  return {"x^2", [](double x) { return x * x; }, [](double) { return 2.0; }, -kInf, kInf};
}

Divergence psi_entropy() {
  return {"xlogx", [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; }, [](double x) { return 1.0 / x; }, 0.0,
          kInf};
}

namespace {

Vec unit_grad(int d, double g) {
  Vec v = Vec::Zero(d);
  v[0] = g;
  return v;
}

}  // namespace

std::vector<TestFunction> default_family(int d) {
  std::vector<TestFunction> f;
  f.push_back({"linear", [](const Vec& x) { return x[0]; }, [d](const Vec&) { return unit_grad(d, 1.0); }});
  f.push_back({"quadratic", [](const Vec& x) { return x[0] * x[0]; },
               [d](const Vec& x) { return unit_grad(d, 2.0 * x[0]); }});
  for (double a : {0.5, 1.0}) {
    f.push_back({"exp" + std::to_string(a).substr(0, 3), [a](const Vec& x) { return std::exp(a * x[0]); },
                 [a, d](const Vec& x) { return unit_grad(d, a * std::exp(a * x[0])); }});
  }
  for (double w : {1.0, 4.0}) {
    f.push_back({"sin" + std::to_string(static_cast<int>(w)), [w](const Vec& x) { return std::sin(w * x[0]); },
                 [w, d](const Vec& x) { return unit_grad(d, w * std::cos(w * x[0])); }});
  }
  f.push_back({"softplus", [](const Vec& x) { return std::log1p(std::exp(4.0 * x[0])) / 4.0; },
               [d](const Vec& x) { return unit_grad(d, 1.0 / (1.0 + std::exp(-4.0 * x[0]))); }});
  return f;
}

std::vector<TestFunction> positive_family(int d) {
  std::vector<TestFunction> f;
  for (const auto& t : default_family(d))
    if (t.label.rfind("exp", 0) == 0) f.push_back(t);
  f.push_back({"softplus", [](const Vec& x) { return std::log1p(std::exp(4.0 * x[0])) / 4.0 + 0.1; },
               [d](const Vec& x) { return unit_grad(d, 1.0 / (1.0 + std::exp(-4.0 * x[0]))); }});
  return f;
}

bool divergence_is_admissible(const Divergence& psi) {
  const double lo = std::isfinite(psi.lo) ? psi.lo : -10.0;
  const double hi = std::isfinite(psi.hi) ? psi.hi : 10.0;
  auto convex = [&](const std::function<double(double)>& g) {
    for (int i = 1; i <= 100; ++i) {
      const double x = lo + (hi - lo) * i / 101.0;
      const double h = 1e-3 * std::min(x - lo, hi - x);
      if (g(x + h) + g(x - h) - 2.0 * g(x) < -1e-9 * std::max(1.0, std::abs(g(x)))) return false;
    }
    return true;
  };
  return convex(psi.psi) && convex(psi.psi2) && convex([&](double x) { return -1.0 / psi.psi2(x); });
}

bool InequalityReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const InequalityRow& r) { return r.skipped || r.passed; });
}

bool IsoperimetryReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const IsoperimetryRow& r) { return r.passed; });
}

namespace {

// Bootstrap sd of stat(indices) over n_boot resamples.
template <class Stat>
double bootstrap_sd(std::size_t n, int n_boot, std::uint64_t seed, Stat stat) {
  std::vector<double> vals(n_boot);
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform() * n) % n;
    vals[b] = stat(idx);
  }
  return mean_estimate(vals).sd;
}

}  // namespace

InequalityReport psi_sobolev_check(const std::vector<Vec>& samples, const std::vector<TestFunction>& family,
                                   const Divergence& psi, double C_sq, int n_boot, std::uint64_t seed) {
  InequalityReport rep;
  const std::size_t n = samples.size();
  for (std::size_t fi = 0; fi < family.size(); ++fi) {
    const auto& f = family[fi];
    InequalityRow row;
    row.inequality = "psi_sobolev_" + psi.label;
    row.function_label = f.label;
    std::vector<double> eta(n), energy(n);
    bool in_domain = true;
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] = f.eta(samples[i]);
      if (!(eta[i] > psi.lo && eta[i] < psi.hi)) in_domain = false;
      energy[i] = psi.psi2(eta[i]) * f.grad(samples[i]).squaredNorm();
    }
    if (!in_domain) {
      row.skipped = true;
      rep.rows.push_back(row);
      continue;
    }
    auto stat = [&](auto pick) {
      // Ent^Psi = E psi(eta) - psi(E eta); returns rhs - lhs.
      double s_eta = 0.0, s_psi = 0.0, s_en = 0.0;
      std::size_t m = 0;
      pick([&](std::size_t i) {
        s_eta += eta[i];
        s_psi += psi.psi(eta[i]);
        s_en += energy[i];
        ++m;
      });
      const double lhs = s_psi / m - psi.psi(s_eta / m);
      const double rhs = 0.5 * C_sq * s_en / m;
      return std::pair{lhs, rhs};
    };
    auto [lhs, rhs] = stat([&](auto fn) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
    });
    row.lhs = lhs;
    row.rhs = rhs;
    row.margin = rhs - lhs;
    row.sd = bootstrap_sd(n, n_boot, derive_seed(seed, {fi}), [&](const std::vector<std::size_t>& idx) {
      auto [l, r] = stat([&](auto fn) {
        for (auto i : idx) fn(i);
      });
      return r - l;
    });
    row.passed = row.lhs <= row.rhs + 2.0 * row.sd;
    rep.rows.push_back(row);
  }
  return rep;
}

InequalityReport q_poincare_check(const std::vector<Vec>& samples, const std::vector<TestFunction>& family, int q,
                                  double C, int n_boot, std::uint64_t seed) {
  if (q < 2 || q % 2 != 0) throw InvalidInput("q_poincare_check: q must be even and >= 2");
  InequalityReport rep;
  const std::size_t n = samples.size();
  const double factor = std::pow(C, q) * std::pow(q - 1.0, 0.5 * q);
  for (std::size_t fi = 0; fi < family.size(); ++fi) {
    const auto& f = family[fi];
    InequalityRow row;
    row.inequality = "q_poincare_" + std::to_string(q);
    row.function_label = f.label;
    std::vector<double> eta(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] = f.eta(samples[i]);
      g[i] = std::pow(f.grad(samples[i]).norm(), q);
    }
    auto stat = [&](const auto& idx_begin, const auto& idx_end) {
      double mean = 0.0;
      std::size_t m = 0;
      for (auto it = idx_begin; it != idx_end; ++it) {
        mean += eta[*it];
        ++m;
      }
      mean /= m;
      double l = 0.0, r = 0.0;
      for (auto it = idx_begin; it != idx_end; ++it) {
        l += std::pow(eta[*it] - mean, q);
        r += g[*it];
      }
      return std::pair{l / m, factor * r / m};
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    auto [lhs, rhs] = stat(all.begin(), all.end());
    row.lhs = lhs;
    row.rhs = rhs;
    row.margin = rhs - lhs;
    row.sd = bootstrap_sd(n, n_boot, derive_seed(seed, {fi}), [&](const std::vector<std::size_t>& idx) {
      auto [l, r] = stat(idx.begin(), idx.end());
      return r - l;
    });
    row.passed = row.lhs <= row.rhs + 2.0 * row.sd;
    rep.rows.push_back(row);
  }
  return rep;
}

IsoperimetryReport isoperimetric_check_1d(const TargetMeasure& m, const std::vector<double>& levels,
                                          const std::vector<double>& r_values, double C) {
  if (m.dim() != 1 || !m.has_cdf()) throw InvalidInput("isoperimetry: needs a 1D target with CDF");
  IsoperimetryReport rep;
  for (double level : levels) {
    const double a = m.quantile(level);
    const double mass_a = m.cdf(a);
    for (double r : r_values) {
      IsoperimetryRow row;
      row.level = level;
      row.r = r;
      row.mass = m.cdf(a + r);
      row.conventional = normal_cdf(normal_quantile(mass_a) + r / C);
      row.literal = normal_cdf(mass_a + r / C);
      row.passed = row.mass >= row.conventional - 1e-9;
      row.literal_passed = row.mass >= row.literal - 1e-9;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace bmt
