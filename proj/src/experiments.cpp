#include "bmt/experiments.hpp"

#include "bmt/bounds.hpp"
#include "bmt/inequalities.hpp"
#include "bmt/malliavin.hpp"
#include "bmt/posterior.hpp"
#include "bmt/special.hpp"
#include "bmt/stein.hpp"
#include "bmt/wiener_maps.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef BMT_VERSION
#define BMT_VERSION "0.1.0"
#endif

namespace bmt {

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> c = {
      {"simulate", "Foellmer ensemble and endpoint law X_1 ~ p", "Foellmer process: endpoint law of the drift SDE"},
      {"contraction", "|DX_1|^2 per path against the almost-sure bound",
       "contraction theorem for the Brownian transport map; Groenwall closed forms"},
      {"localization", "posterior barycenters, Tr K_t^q, density identity",
       "stochastic localization: p_t = p^{X_t,1-t} and the barycenter martingale"},
      {"inequalities", "Psi-Sobolev, q-Poincare and isoperimetry on samples",
       "functional inequalities transported by a Lipschitz map"},
      {"stein", "Stein kernel from the transport map, discrepancy, CLT rate",
       "Stein kernel lemma and the W2 CLT bound"},
      {"counterexample", "L(eps) growth along eta_eps, tube hits",
       "causal optimal transport is not a Cameron-Martin contraction"},
      {"wiener_ot", "Cameron-Martin ratio of the optimal transport map on Wiener space",
       "optimal transport map is a Cameron-Martin contraction with constant max{1/sqrt(kappa),1}"},
      {"entropy", "H(p|gamma) against (1/2) int E|v|^2", "entropy identity of the Foellmer drift"},
  };
  return c;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

TargetMeasure build_measure(const MeasureSpec& s) {
  const int d = s.dim;
  auto need_1d = [&] {
    if (d != 1) throw InvalidInput("measure." + s.kind + ": requires measure.dim = 1");
  };
  if (s.kind == "gaussian") return make_gaussian(Vec::Constant(d, s.mean), s.var * Mat::Identity(d, d));
  if (s.kind == "truncated_gaussian") {
    need_1d();
    return make_truncated_gaussian(s.sigma);
  }
  if (s.kind == "uniform_interval") {
    need_1d();
    return make_uniform_interval(s.S, s.lower);
  }
  if (s.kind == "uniform_ball") return make_uniform_ball(s.S, d);
  if (s.kind == "mixture") {
    MixtureSpec m;
    Vec a = Vec::Zero(d);
    a[0] = s.R;
    m.atoms = {a, -a};
    m.weights = {0.5, 0.5};
    return make_gaussian_mixture(m);
  }
  if (s.kind == "isotropic_uniform") return make_isotropic_uniform(d);
  throw InvalidInput("unknown measure kind " + s.kind);
}

std::shared_ptr<const TimeGrid> build_grid(const GridSpec& g) {
  auto grid = std::make_shared<TimeGrid>(g.kind == "uniform" ? TimeGrid::uniform(g.steps, g.eps_end)
                                                             : TimeGrid::geometric(g.rho, g.eps_end));
  grid->validate();
  return grid;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Vec> draw_samples(const TargetMeasure& m, std::size_t n, std::uint64_t seed) {
  if (!m.has_sampler()) throw InvalidInput("target has no sampler");
  std::vector<Vec> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = m.sample(rng);
  }
  return out;
}

CsvTable trajectory_table(const Ensemble& e, std::size_t max_paths) {
  std::vector<std::string> header = {"path_id", "t"};
  const int d = e.paths.empty() ? 1 : static_cast<int>(e.paths.front().endpoint.size());
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
  CsvTable t(header);
  for (std::size_t p = 0; p < std::min(max_paths, e.paths.size()); ++p) {
    const auto& tr = e.paths[p];
    if (tr.failed || tr.states.cols() == 0) continue;
    auto row = [&](double time, const Vec& x) {
      std::vector<std::string> cells = {std::to_string(p), format_number(time)};
      for (int i = 0; i < d; ++i) cells.push_back(format_number(x[i]));
      t.add_row(cells);
    };
    for (int k = 0; k < tr.states.cols(); ++k) row(tr.grid->nodes[k], tr.states.col(k));
    row(1.0, tr.endpoint);
  }
  return t;
}

ExperimentResult run_simulate(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  const auto grid = build_grid(cfg.grid);
  const Ensemble e = simulate_ensemble(m, grid, cfg.n_paths, cfg.seed, cfg.workers, cfg.save_paths > 0);
  log << "simulated " << cfg.n_paths << " paths on " << grid->steps() << " steps, failures " << e.failures << "\n";
  const EndpointReport rep = endpoint_distribution_check(e, m, cfg.ks_threshold, derive_seed(cfg.seed, {99}));
  r.checks.push_back({"endpoint_law",
                      rep.passed,
                      {{"n", double(rep.n)}, {"ks", rep.ks}, {"threshold", rep.threshold}, {"max_z", rep.max_z}},
                      m.dim() == 1 ? "KS against the target CDF" : "moment z-scores below 4"});
  r.checks.push_back({"failure_rate", e.failure_fraction() <= 0.01, {{"fraction", e.failure_fraction()}}, ""});
  r.tables.emplace_back("trajectories.csv", trajectory_table(e, cfg.save_paths));
  std::vector<std::string> header = {"path_id"};
  for (int i = 0; i < m.dim(); ++i) header.push_back("x" + std::to_string(i));
  CsvTable ends(header);
  for (std::size_t p = 0; p < e.paths.size(); ++p) {
    if (e.paths[p].failed) continue;
    std::vector<std::string> cells = {std::to_string(p)};
    for (int i = 0; i < m.dim(); ++i) cells.push_back(format_number(e.paths[p].endpoint[i]));
    ends.add_row(cells);
  }
  r.tables.emplace_back("endpoints.csv", std::move(ends));
  return r;
}

CsvTable gronwall_table(const BoundProfile& p, double& worst) {
  CsvTable t({"t", "theta", "gronwall_closed", "gronwall_quadrature"});
  worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double time = i / 50.0;
    const auto closed = gronwall_integral(p, time);
    const double quad = gronwall_quadrature(p, time);
    worst = std::max(worst, std::abs(closed.value - quad) / std::abs(quad));
    t.add(time, p.theta(time), closed.value, quad);
  }
  return t;
}

ExperimentResult run_contraction(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  const auto grid = build_grid(cfg.grid);
  const BoundProfile prof = profile_for(m);
  log << "regime " << to_string(prof.regime) << ", constant_sq " << format_number(prof.constant_sq) << "\n";
  const auto norms = malliavin_norms_sq(m, grid, cfg.n_paths, cfg.seed, cfg.workers);
  std::size_t failed = 0;
  for (double v : norms) failed += std::isnan(v);
  if (prof.trivial()) {
    r.checks.push_back({"almost_sure_bound", true, {}, "no almost-sure bound for this target"});
  } else {
    const VerifyReport v = verify_ensemble(norms, prof, cfg.slack);
    r.checks.push_back({"almost_sure_bound",
                        v.passed,
                        {{"n", double(v.n)},
                         {"violations", double(v.violations)},
                         {"max_ratio", v.max_ratio},
                         {"constant_sq", v.constant_sq},
                         {"slack", cfg.slack}},
                        to_string(prof.regime)});
  }
  const MeanEstimate mom = moment_estimate(norms, cfg.moment);
  r.checks.push_back({"moment_finite",
                      std::isfinite(mom.mean) && failed <= norms.size() / 100,
                      {{"m", double(cfg.moment)}, {"mean", mom.mean}, {"std_error", mom.std_error},
                       {"failed_paths", double(failed)}},
                      "E|DX_1|^{2m}"});
  CsvTable nt({"path_id", "t", "malliavin_norm"});
  for (std::size_t i = 0; i < norms.size(); ++i) nt.add(i, 1.0, std::sqrt(norms[i]));
  r.tables.emplace_back("malliavin_norms.csv", std::move(nt));
  if (!prof.trivial() && prof.regime != Regime::mixture) {
    double worst = 0.0;
    r.tables.emplace_back("bounds.csv", gronwall_table(prof, worst));
    r.checks.push_back({"gronwall_closed_form", worst < 1e-8, {{"max_relative_error", worst}}, ""});
  }
  return r;
}

ExperimentResult run_localization(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  const auto grid = build_grid(cfg.grid);
  const Ensemble e = simulate_ensemble(m, grid, cfg.n_paths, cfg.seed, cfg.workers, true);
  log << "simulated " << cfg.n_paths << " paths for localization\n";
  CsvTable gt({"path_id", "t", "gamma_q"});
  double worst = 0.0;
  const std::size_t n_diag = std::min<std::size_t>(std::max<std::size_t>(cfg.save_paths, 1), e.paths.size());
  for (std::size_t p = 0; p < n_diag; ++p) {
    if (e.paths[p].failed) continue;
    const auto diag = localization_diagnostics(m, e.paths[p], cfg.q);
    for (std::size_t k = 0; k < diag.times.size(); ++k) gt.add(p, diag.times[k], diag.gamma_q[k]);
    worst = std::max(worst, diag.density_identity_error);
  }
  r.tables.emplace_back("gamma.csv", std::move(gt));
  if (m.dim() == 1)
    r.checks.push_back({"density_identity", worst < 1e-8, {{"max_relative_error", worst}}, "p_t against p^{X_t,1-t}"});
  const MartingaleReport mr = barycenter_martingale_check(m, e);
  r.checks.push_back({"barycenter_martingale", mr.passed, {{"max_z", mr.max_z}, {"initial", mr.initial}}, ""});
  CsvTable bt({"t", "mean", "std_error", "initial"});
  for (std::size_t k = 0; k < mr.times.size(); ++k) bt.add(mr.times[k], mr.mean[k], mr.std_error[k], mr.initial);
  r.tables.emplace_back("barycenter.csv", std::move(bt));
  return r;
}

double inequality_constant_sq(const TargetMeasure& m) {
  const BoundProfile p = profile_for(m);
  return p.constant_sq;
}

ExperimentResult run_inequalities(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  const double C_sq = inequality_constant_sq(m);
  log << "constant C^2 = " << format_number(C_sq) << "\n";
  if (!std::isfinite(C_sq)) {
    r.checks.push_back({"inequalities", true, {}, "no finite constant for this target"});
    return r;
  }
  const auto samples = draw_samples(m, cfg.n_paths, derive_seed(cfg.seed, {1}));
  const int d = m.dim();
  std::vector<InequalityReport> reps = {
      psi_sobolev_check(samples, default_family(d), psi_square(), C_sq, cfg.n_boot, derive_seed(cfg.seed, {2})),
      psi_sobolev_check(samples, positive_family(d), psi_entropy(), C_sq, cfg.n_boot, derive_seed(cfg.seed, {3})),
      q_poincare_check(samples, default_family(d), 2, std::sqrt(C_sq), cfg.n_boot, derive_seed(cfg.seed, {4})),
      q_poincare_check(samples, default_family(d), 4, std::sqrt(C_sq), cfg.n_boot, derive_seed(cfg.seed, {5})),
  };
  CsvTable t({"inequality", "function_label", "lhs", "rhs", "margin", "sd", "verdict"});
  std::size_t violations = 0;
  for (const auto& rep : reps)
    for (const auto& row : rep.rows) {
      t.add(row.inequality, row.function_label, row.lhs, row.rhs, row.margin, row.sd,
            std::string(row.skipped ? "skipped" : row.passed ? "pass" : "fail"));
      violations += !row.skipped && !row.passed;
    }
  r.tables.emplace_back("inequalities.csv", std::move(t));
  r.checks.push_back({"sobolev_poincare", violations == 0, {{"violations", double(violations)}, {"C_sq", C_sq}}, ""});

  // Gaussian extremals: linear functions for the variance forms, exp(x/2) for
  // the entropy form. exp(x) is an extremal too but its bootstrap sd is
  // unreliable (lognormal tails). Two-sided, so 3 sd.
  if (m.label() == "gaussian") {
    std::size_t off = 0, checked = 0;
    for (const auto& rep : reps)
      for (const auto& row : rep.rows) {
        const bool extremal = (row.function_label == "linear" && row.inequality != "q_poincare_4") ||
                              (row.inequality == "psi_sobolev_xlogx" && row.function_label == "exp0.5");
        if (!extremal || row.skipped) continue;
        ++checked;
        off += std::abs(row.margin) > 3.0 * row.sd + 1e-12;
      }
    r.checks.push_back({"gaussian_equality", off == 0, {{"checked", double(checked)}, {"off", double(off)}}, ""});
  }

  if (d == 1 && m.has_cdf()) {
    const auto iso = isoperimetric_check_1d(m, {0.01, 0.1, 0.25, 0.5, 0.75, 0.9}, {0.05, 0.1, 0.5, 1.0, 2.0},
                                            std::sqrt(C_sq));
    CsvTable it({"level", "r", "mass", "conventional", "literal", "verdict", "literal_verdict"});
    std::size_t literal_fail = 0;
    for (const auto& row : iso.rows) {
      it.add(row.level, row.r, row.mass, row.conventional, row.literal, row.passed, row.literal_passed);
      literal_fail += !row.literal_passed;
    }
    r.tables.emplace_back("isoperimetry.csv", std::move(it));
    r.checks.push_back({"isoperimetry",
                        iso.passed(),
                        {{"rows", double(iso.rows.size())}, {"literal_form_failures", double(literal_fail)}},
                        "Phi(Phi^{-1}(p[A]) + r/C); the literal form is reported only"});
  }
  return r;
}

// Classical 1D kernel: tau(x) p(x) = int_x^hi (y - mu) p(y) dy.
double classical_kernel(const TargetMeasure& m, double mu, double x) {
  auto [lo, hi] = m.model().support_1d();
  if (x <= lo || x >= hi) return 0.0;
  const double px = m.pdf(x);
  if (!(px > 0.0)) return 0.0;
  const double upper = std::isfinite(hi) ? hi : std::max(x, mu) + 40.0 * std::sqrt(moments_1d(m).second);
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double y) { return (y - mu) * m.pdf(y); }, x, upper, 15, 1e-13);
  return v / px;
}

ExperimentResult run_stein(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  if (m.dim() != 1) throw InvalidInput("stein: the experiment runs on one-dimensional targets");
  const auto [mu, var] = moments_1d(m);
  const bool chi_sq = cfg.statistic == "chi_square";
  const SteinFunction chi = chi_sq ? chi_square_statistic() : centered_statistic(mu);
  SteinOptions o;
  o.n_outer = cfg.n_paths;
  o.n_inner = static_cast<int>(cfg.n_inner);
  o.s_nodes = cfg.s_nodes;
  o.bins = cfg.bins;
  o.min_count = cfg.min_count;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  o.grid = build_grid(cfg.grid);
  const auto t0 = Clock::now();
  const SteinKernelEstimate e = stein_kernel_estimate(m, chi, o);
  log << "stein kernel: " << e.F.size() << " outer paths, " << e.tau.size() << " bins, "
      << std::chrono::duration<double>(Clock::now() - t0).count() << " s\n";

  // Oracle per bin: average of the classical kernel over the bin's paths.
  const bool have_oracle = (!chi_sq && m.has_cdf()) || (chi_sq && m.label() == "gaussian" && mu == 0.0 && var == 1.0);
  std::vector<double> oracle(e.tau.size(), 0.0);
  std::vector<std::size_t> in_bin(e.tau.size(), 0);
  if (have_oracle) {
    for (double f : e.F) {
      auto it = std::upper_bound(e.bin_hi.begin(), e.bin_hi.end(), f);
      const std::size_t b = std::min<std::size_t>(it - e.bin_hi.begin(), e.tau.size() - 1);
      const double x = f + e.chi_mean;  // value of chi
      oracle[b] += chi_sq ? 2.0 * (x + 1.0) : classical_kernel(m, mu, x + mu);
      ++in_bin[b];
    }
    for (std::size_t b = 0; b < oracle.size(); ++b) oracle[b] /= std::max<std::size_t>(1, in_bin[b]);
  }
  CsvTable kt({"bin_lo", "bin_hi", "bin_center", "tau", "tau_sd", "count", "oracle"});
  std::size_t off = 0, negative = 0;
  for (std::size_t b = 0; b < e.tau.size(); ++b) {
    const double sd = std::max(e.tau_sd[b], 1e-9);
    kt.add(e.bin_lo[b], e.bin_hi[b], e.bin_center[b], e.tau[b], e.tau_sd[b], e.counts[b],
           have_oracle ? oracle[b] : std::nan(""));
    if (have_oracle) off += std::abs(e.tau[b] - oracle[b]) > 3.0 * sd;
    negative += e.tau[b] < -3.0 * sd;
  }
  r.tables.emplace_back("stein_kernel.csv", std::move(kt));
  if (have_oracle)
    r.checks.push_back({"kernel_oracle", off == 0, {{"bins", double(e.tau.size())}, {"bins_off", double(off)}},
                        "per-bin agreement within 3 sd"});
  r.checks.push_back({"kernel_nonnegative", negative == 0, {{"negative_bins", double(negative)}}, ""});

  // Identity on fresh samples of chi(Y) - E chi.
  std::vector<double> fresh;
  for (const auto& y : draw_samples(m, std::max<std::size_t>(cfg.n_paths, 10000), derive_seed(cfg.seed, {7})))
    fresh.push_back(chi.chi(y) - e.chi_mean);
  const auto rows = stein_identity_check(e, fresh, 200, derive_seed(cfg.seed, {8}));
  CsvTable st({"eta", "residual", "sd", "bin_allowance", "verdict"});
  bool id_ok = true;
  for (const auto& row : rows) {
    st.add(row.label, row.residual, row.sd, row.bin_allowance, row.passed);
    id_ok = id_ok && row.passed;
  }
  r.tables.emplace_back("stein_identity.csv", std::move(st));
  r.checks.push_back({"stein_identity", id_ok, {}, "residual < 3 sd + bin allowance"});

  // W2^2 against the discrepancy.
  double w2;
  if (!chi_sq && m.has_cdf()) {
    w2 = w2_squared_quantile([&](double u) { return m.quantile(u) - mu; });
  } else {
    w2 = w2_squared_empirical(fresh);
  }
  double disc_var = 0.0;
  const double n_tot = static_cast<double>(e.F.size());
  for (std::size_t b = 0; b < e.tau.size(); ++b)
    disc_var += std::pow(e.counts[b] / n_tot * 2.0 * (e.tau[b] - 1.0) * e.tau_sd[b], 2);
  const double disc_slack = 3.0 * std::sqrt(disc_var) + (chi_sq || !m.has_cdf() ? 10.0 / std::sqrt(n_tot) : 0.0);
  r.checks.push_back({"w2_below_discrepancy",
                      w2 <= e.discrepancy_sq + disc_slack,
                      {{"w2_sq", w2}, {"discrepancy_sq", e.discrepancy_sq}, {"slack", disc_slack}},
                      ""});

  // CLT rate for standardized sums.
  const CltReport clt = clt_rate_check(
      [&](Rng& rng) { return chi.chi(m.sample(rng)); }, cfg.clt_n, cfg.clt_mc, e.tau_sq_mean / std::max(var, 1e-300),
      derive_seed(cfg.seed, {9}));
  CsvTable ct({"n", "w2_sq", "bound", "n_w2_sq"});
  for (const auto& row : clt.rows) ct.add(row.n, row.w2_sq, row.bound, row.scaled);
  r.tables.emplace_back("clt.csv", std::move(ct));
  r.checks.push_back({"clt_bound", clt.bound_holds, {{"resolution", clt.resolution}}, "W2^2 <= 2(E|tau|^2+1)/n"});
  r.checks.push_back({"clt_rate", clt.ratio < 3.0, {{"ratio", clt.ratio}}, "max/min of n W2^2"});
  return r;
}

ExperimentResult run_counterexample(const ExperimentConfig& cfg, std::ostream& log) {
  ExperimentResult r;
  const MillsData data = make_mills_data(cfg.measure.kind == "truncated_gaussian" ? cfg.measure.sigma : 1.0);
  const double root_err = std::abs(mills_prime(data.c_star) - 1.0 / 3.0);
  r.checks.push_back({"mills_root", root_err < 1e-12, {{"c", data.c_star}, {"residual", root_err}}, ""});
  std::size_t viol = 0;
  for (double s : {1.0, 2.0}) viol += sandwich_check(make_mills_data(s), 1e-3, 10000).violations;
  r.checks.push_back({"sandwich", viol == 0, {{"violations", double(viol)}}, "sigma in {1, 2}, eps = 1e-3"});
  const EpsilonCurve curve = growth_curve(data, cfg.eps_list);
  CsvTable et({"eps", "L", "log_floor"});
  bool floor_ok = true;
  for (std::size_t i = 0; i < curve.eps_values.size(); ++i) {
    et.add(curve.eps_values[i], curve.L_values[i], curve.log_floor[i]);
    floor_ok = floor_ok && curve.L_values[i] * curve.L_values[i] >= curve.log_floor[i];
  }
  r.tables.emplace_back("growth.csv", std::move(et));
  r.checks.push_back({"floor", floor_ok, {}, "L^2 >= floor for every eps"});
  r.checks.push_back({"slope", curve.slope >= 0.9 / 128.0, {{"slope", curve.slope}, {"required", 0.9 / 128.0}}, ""});
  CsvTable ct({"C", "eps"});
  for (double C : {1.0, 2.0, 5.0, 10.0}) ct.add(C, eps_exceeding(data, C));
  r.tables.emplace_back("exceeding.csv", std::move(ct));
  const TubeReport tube = tube_hit(data, cfg.tube_eps, cfg.tube_delta, cfg.tube_paths, cfg.tube_paths / 10,
                                   derive_seed(cfg.seed, {1}), cfg.workers);
  log << "tube: " << tube.plain_hits << "/" << tube.plain_paths << " plain hits\n";
  r.checks.push_back({"tube_hit",
                      tube.plain_hits > 0,
                      {{"plain_hits", double(tube.plain_hits)},
                       {"plain_paths", double(tube.plain_paths)},
                       {"plain_fraction", double(tube.plain_hits) / tube.plain_paths},
                       {"guided_estimate", tube.guided_estimate},
                       {"guided_std_error", tube.guided_std_error}},
                      "plain simulation"});
  r.checks.push_back({"tube_nonempty_guided",
                      tube.guided_hits > 0,
                      {{"guided_hits", double(tube.guided_hits)}, {"guided_paths", double(tube.guided_paths)}},
                      "paths under an equivalent drift-shifted law"});
  CsvTable tt({"plain_paths", "plain_hits", "guided_paths", "guided_hits", "guided_estimate", "guided_std_error"});
  tt.add(tube.plain_paths, tube.plain_hits, tube.guided_paths, tube.guided_hits, tube.guided_estimate,
         tube.guided_std_error);
  r.tables.emplace_back("tube.csv", std::move(tt));
  return r;
}

double map_deviation(const TargetMeasure& m, const std::function<double(double)>& expected) {
  const OtMap1D T(m);
  double worst = 0.0;
  for (int i = 0; i <= 800; ++i) {
    const double x = -4.0 + i / 100.0;
    worst = std::max(worst, std::abs(T(x) - expected(x)));
  }
  return worst;
}

ExperimentResult run_wiener_ot(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream&) {
  ExperimentResult r;
  if (!(m.kappa() >= 0.0)) throw InvalidInput("wiener_ot: target must be log-concave");
  const auto rep = wiener_ot_contraction_check(m, m.kappa(), cfg.ot_pairs, cfg.seed);
  r.checks.push_back({"contraction",
                      rep.violations == 0,
                      {{"pairs", double(rep.pairs)}, {"violations", double(rep.violations)},
                       {"max_ratio", rep.max_ratio}, {"bound", rep.bound}},
                      ""});
  const double id = map_deviation(make_standard_gaussian(1), [](double x) { return x; });
  const double shift = map_deviation(make_gaussian(Vec::Constant(1, 0.7), Mat::Identity(1, 1)),
                                     [](double x) { return x + 0.7; });
  const double scale = map_deviation(make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, 0.5)),
                                     [](double x) { return std::sqrt(0.5) * x; });
  r.checks.push_back({"exact_maps",
                      std::max({id, shift, scale}) < 1e-10,
                      {{"identity", id}, {"shift", shift}, {"scale", scale}},
                      "sup deviation on [-4, 4]"});
  const double hi = std::max(rep.bound == kInf ? rep.max_ratio : rep.bound, rep.max_ratio);
  const int nb = 40;
  std::vector<std::size_t> hist(nb, 0);
  for (double v : rep.ratios) hist[std::min(nb - 1, static_cast<int>(v / hi * nb))]++;
  CsvTable ht({"bin_lo", "bin_hi", "count"});
  for (int b = 0; b < nb; ++b) ht.add(b * hi / nb, (b + 1) * hi / nb, hist[b]);
  r.tables.emplace_back("ot_ratios.csv", std::move(ht));
  return r;
}

ExperimentResult run_entropy(const ExperimentConfig& cfg, const TargetMeasure& m, std::ostream& log) {
  ExperimentResult r;
  const auto grid = build_grid(cfg.grid);
  const Ensemble e = simulate_ensemble(m, grid, cfg.n_paths, cfg.seed, cfg.workers, false);
  const EntropyReport rep = entropy_identity_check(m, e);
  log << "entropy " << format_number(rep.entropy) << ", path integral " << format_number(rep.path_integral) << "\n";
  r.checks.push_back({"entropy_identity",
                      rep.relative_error < 0.05,
                      {{"entropy", rep.entropy}, {"path_integral", rep.path_integral}, {"std_error", rep.std_error},
                       {"relative_error", rep.relative_error}},
                      ""});
  CsvTable t({"quantity", "value"});
  t.add("entropy", rep.entropy);
  t.add("path_integral", rep.path_integral);
  t.add("std_error", rep.std_error);
  t.add("relative_error", rep.relative_error);
  r.tables.emplace_back("entropy.csv", std::move(t));
  return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  ExperimentResult r;
  if (cfg.experiment == "counterexample") {
    r = run_counterexample(cfg, log);
  } else {
    const TargetMeasure m = build_measure(cfg.measure);
    log << "measure " << m.label() << " (d = " << m.dim() << ")\n";
    if (cfg.experiment == "simulate") r = run_simulate(cfg, m, log);
    else if (cfg.experiment == "contraction") r = run_contraction(cfg, m, log);
    else if (cfg.experiment == "localization") r = run_localization(cfg, m, log);
    else if (cfg.experiment == "inequalities") r = run_inequalities(cfg, m, log);
    else if (cfg.experiment == "stein") r = run_stein(cfg, m, log);
    else if (cfg.experiment == "wiener_ot") r = run_wiener_ot(cfg, m, log);
    else if (cfg.experiment == "entropy") r = run_entropy(cfg, m, log);
    else throw InvalidInput("unknown experiment " + cfg.experiment);
  }
  r.experiment = cfg.experiment;
  return r;
}

int run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  std::ofstream logf(out / "run.log", std::ios::binary);
  std::ostringstream body;
  const auto t0 = Clock::now();
  logf << "bmt " << BMT_VERSION << " (compiler " << __VERSION__ << ", Eigen " << EIGEN_WORLD_VERSION << "."
       << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << ")\n";
  logf << "experiment " << cfg.experiment << ", seed " << cfg.seed << ", workers " << cfg.workers << "\n";
  logf << "config:\n" << cfg.to_config().serialize();
  nlohmann::ordered_json summary;
  summary["experiment"] = cfg.experiment;
  summary["seed"] = cfg.seed;
  int code = 0;
  try {
    const ExperimentResult r = run_experiment(cfg, body);
    for (const auto& [name, table] : r.tables) table.write(out / name);
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
      nlohmann::ordered_json j;
      j["name"] = c.name;
      j["verdict"] = c.passed ? "pass" : "fail";
      for (const auto& [k, v] : c.values) j["values"][k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(format_number(v));
      if (!c.note.empty()) j["note"] = c.note;
      checks.push_back(j);
      body << (c.passed ? "PASS " : "FAIL ") << c.name << "\n";
    }
    summary["checks"] = checks;
    summary["verdict"] = r.passed() ? "pass" : "fail";
    code = r.passed() ? 0 : 2;
  } catch (const std::exception& ex) {
    summary["verdict"] = "error";
    summary["error"] = ex.what();
    body << "error: " << ex.what() << "\n";
    code = 1;
  }
  std::ofstream(out / "summary.json", std::ios::binary) << summary.dump(2) << "\n";
  logf << body.str();
  logf << "elapsed " << std::chrono::duration<double>(Clock::now() - t0).count() << " s, exit code " << code << "\n";
  return code;
}

}  // namespace bmt
