#include "bmt/config.hpp"

#include "bmt/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace bmt {

ConfigError::ConfigError(int line, std::string key, const std::string& what)
    : InvalidInput((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                   (key.empty() ? std::string() : "key '" + key + "': ") + what),
      line_(line),
      key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool to_real(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

bool to_int(std::string_view s, long long& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool to_uint(std::string_view s, std::uint64_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

// Returns an error message, empty when the value is acceptable.
using Check = std::function<std::string(std::string_view)>;

Check one_of(std::vector<std::string> options) {
  return [options](std::string_view v) -> std::string {
    for (const auto& o : options)
      if (v == o) return {};
    std::string msg = "expected one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}

Check real_in(double lo, double hi, bool open_lo, bool open_hi) {
  return [=](std::string_view v) -> std::string {
    double x;
    if (!to_real(v, x)) return "not a finite number";
    if (x < lo || x > hi || (open_lo && x == lo) || (open_hi && x == hi))
      return "out of range " + std::string(open_lo ? "(" : "[") + format_number(lo) + ", " + format_number(hi) +
             (open_hi ? ")" : "]");
    return {};
  };
}

Check int_in(long long lo, long long hi) {
  return [=](std::string_view v) -> std::string {
    long long x;
    if (!to_int(v, x)) return "not an integer";
    if (x < lo || x > hi) return "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    return {};
  };
}

Check any_uint() {
  return [](std::string_view v) -> std::string {
    std::uint64_t x;
    return to_uint(v, x) ? std::string() : "not an unsigned integer";
  };
}

Check text() {
  return [](std::string_view v) -> std::string { return v.empty() ? "empty value" : std::string(); };
}

Check eps_list_check() {
  return [](std::string_view v) -> std::string {
    double prev = 0.5;
    for (auto item : split_list(v)) {
      double x;
      if (!to_real(item, x)) return "list entry '" + std::string(item) + "' is not a number";
      if (!(x > 0.0 && x < prev)) return "entries must decrease within (0, 1/2)";
      prev = x;
    }
    return {};
  };
}

Check int_list_check(long long lo, long long hi) {
  return [=](std::string_view v) -> std::string {
    for (auto item : split_list(v)) {
      long long x;
      if (!to_int(item, x) || x < lo || x > hi)
        return "list entry '" + std::string(item) + "' outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }
    return {};
  };
}

struct Key {
  KeyDoc doc;
  Check check;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {{"experiment", "enum", "", "simulate|contraction|localization|inequalities|stein|counterexample|wiener_ot|entropy"},
       one_of({"simulate", "contraction", "localization", "inequalities", "stein", "counterexample", "wiener_ot",
               "entropy"})},
      {{"seed", "uint", "1", "master seed"}, any_uint()},
      {{"workers", "int", "$BMT_WORKERS or cores", "worker threads; never changes results"}, int_in(1, 1024)},
      {{"out", "path", "out", "output directory"}, text()},
      {{"n_paths", "int", "1000", "paths or samples"}, int_in(1, 100000000)},
      {{"grid.kind", "enum", "geometric", "geometric|uniform"}, one_of({"geometric", "uniform"})},
      {{"grid.rho", "real", "0.9", "geometric ratio in (0,1)"}, real_in(0.0, 1.0, true, true)},
      {{"grid.eps_end", "real", "0.0001", "final sliver length in (0,1/2)"}, real_in(0.0, 0.5, true, true)},
      {{"grid.steps", "int", "100", "uniform grid steps"}, int_in(1, 1000000)},
      {{"measure.kind", "enum", "gaussian",
        "gaussian|truncated_gaussian|uniform_interval|uniform_ball|mixture|isotropic_uniform"},
       one_of({"gaussian", "truncated_gaussian", "uniform_interval", "uniform_ball", "mixture", "isotropic_uniform"})},
      {{"measure.dim", "int", "1", "dimension"}, int_in(1, 64)},
      {{"measure.mean", "real", "0", "gaussian: mean of every coordinate"}, real_in(-1e6, 1e6, false, false)},
      {{"measure.var", "real", "1", "gaussian: variance of every coordinate"}, real_in(0.0, 1e6, true, false)},
      {{"measure.sigma", "real", "1", "truncated_gaussian: sigma >= 1"}, real_in(1.0, 1e6, false, false)},
      {{"measure.S", "real", "1", "uniform_interval length, uniform_ball diameter"}, real_in(0.0, 1e6, true, false)},
      {{"measure.lower", "real", "0", "uniform_interval left end"}, real_in(-1e6, 1e6, false, false)},
      {{"measure.R", "real", "1", "mixture: atoms at +-R e_1 with weights 1/2"}, real_in(0.0, 100.0, false, false)},
      {{"moment", "int", "1", "contraction: moment order m of |DX_1|^2"}, int_in(1, 8)},
      {{"q", "real", "2", "localization: exponent of Tr K_t^q"}, real_in(0.0, 64.0, true, false)},
      {{"slack", "real", "0.05", "contraction: relative slack on the bound"}, real_in(0.0, 1.0, false, false)},
      {{"ks_threshold", "real", "0.02", "simulate: KS threshold"}, real_in(0.0, 1.0, true, true)},
      {{"save_paths", "int", "20", "simulate/localization: trajectories written to CSV"}, int_in(0, 1000000)},
      {{"n_boot", "int", "200", "inequalities: bootstrap resamples"}, int_in(10, 100000)},
      {{"stein.statistic", "enum", "identity", "identity|chi_square"}, one_of({"identity", "chi_square"})},
      {{"stein.n_inner", "int", "4", "inner replicas per Mehler node"}, int_in(1, 1000)},
      {{"stein.s_nodes", "int", "16", "Mehler quadrature nodes"}, int_in(1, 128)},
      {{"stein.bins", "int", "25", "quantile bins"}, int_in(1, 1000)},
      {{"stein.min_count", "int", "200", "minimum paths per bin"}, int_in(1, 100000000)},
      {{"clt.n", "int list", "25,100,400", "sample sizes for the CLT rate"}, int_list_check(1, 100000)},
      {{"clt.mc", "int", "100000", "replicates per sample size"}, int_in(100, 100000000)},
      {{"eps_list", "real list", "0.01,0.001,0.0001,1e-05,1e-06", "counterexample: decreasing eps values"},
       eps_list_check()},
      {{"tube.eps", "real", "0.05", "counterexample: tube eps"}, real_in(0.0, 0.5, true, true)},
      {{"tube.delta", "real", "0.2", "counterexample: tube half-width"}, real_in(0.0, 100.0, true, false)},
      {{"tube.paths", "int", "100000", "counterexample: simulated paths"}, int_in(1, 100000000)},
      {{"ot.pairs", "int", "10000", "wiener_ot: (omega, h) pairs"}, int_in(1, 100000000)},
  };
  return k;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.doc.key == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<KeyDoc>& config_schema() {
  static const std::vector<KeyDoc> docs = [] {
    std::vector<KeyDoc> d;
    for (const auto& k : keys()) d.push_back(k.doc);
    return d;
  }();
  return docs;
}

void Config::set(const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError(0, key, "unknown key");
  const std::string v(trim(value));
  if (v.find_first_of("#\n") != std::string::npos) throw ConfigError(0, key, "value may not contain '#' or newlines");
  if (auto err = k->check(v); !err.empty()) throw ConfigError(0, key, err);
  entries_[key] = v;
}

Config Config::parse(std::string_view text) {
  Config c;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, "", "empty key");
    const Key* k = find_key(key);
    if (!k) throw ConfigError(line_no, key, "unknown key");
    if (c.entries_.count(key)) throw ConfigError(line_no, key, "duplicate key");
    if (auto err = k->check(value); !err.empty()) throw ConfigError(line_no, key, err);
    c.entries_[key] = value;
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw ConfigError(0, "", "cannot read " + file.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig ExperimentConfig::from(const Config& c) {
  if (!c.has("experiment")) throw ConfigError(0, "experiment", "required key missing");
  ExperimentConfig e;
  auto real = [&](const char* key, double& dst) {
    if (c.has(key)) to_real(c.raw(key), dst);
  };
  auto integer = [&](const char* key, auto& dst) {
    if (!c.has(key)) return;
    long long v = 0;
    to_int(c.raw(key), v);
    dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
  };
  auto str = [&](const char* key, std::string& dst) {
    if (c.has(key)) dst = c.raw(key);
  };
  str("experiment", e.experiment);
  if (c.has("seed")) to_uint(c.raw("seed"), e.seed);
  e.workers = default_workers();
  integer("workers", e.workers);
  str("out", e.out);
  integer("n_paths", e.n_paths);
  str("grid.kind", e.grid.kind);
  real("grid.rho", e.grid.rho);
  real("grid.eps_end", e.grid.eps_end);
  integer("grid.steps", e.grid.steps);
  str("measure.kind", e.measure.kind);
  integer("measure.dim", e.measure.dim);
  real("measure.mean", e.measure.mean);
  real("measure.var", e.measure.var);
  real("measure.sigma", e.measure.sigma);
  real("measure.S", e.measure.S);
  real("measure.lower", e.measure.lower);
  real("measure.R", e.measure.R);
  integer("moment", e.moment);
  real("q", e.q);
  real("slack", e.slack);
  real("ks_threshold", e.ks_threshold);
  integer("save_paths", e.save_paths);
  integer("n_boot", e.n_boot);
  str("stein.statistic", e.statistic);
  integer("stein.n_inner", e.n_inner);
  integer("stein.s_nodes", e.s_nodes);
  integer("stein.bins", e.bins);
  integer("stein.min_count", e.min_count);
  if (c.has("clt.n")) {
    e.clt_n.clear();
    for (auto item : split_list(c.raw("clt.n"))) {
      long long v = 0;
      to_int(item, v);
      e.clt_n.push_back(static_cast<int>(v));
    }
  }
  integer("clt.mc", e.clt_mc);
  if (c.has("eps_list")) {
    e.eps_list.clear();
    for (auto item : split_list(c.raw("eps_list"))) {
      double v = 0.0;
      to_real(item, v);
      e.eps_list.push_back(v);
    }
  }
  real("tube.eps", e.tube_eps);
  real("tube.delta", e.tube_delta);
  integer("tube.paths", e.tube_paths);
  integer("ot.pairs", e.ot_pairs);
  if (e.measure.kind == "uniform_ball" && e.measure.dim < 1) throw ConfigError(0, "measure.dim", "must be >= 1");
  return e;
}

Config ExperimentConfig::to_config() const {
  Config c;
  auto num = [](double x) { return format_number(x); };
  auto list = [](const auto& v, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
  };
  c.set("experiment", experiment);
  c.set("seed", std::to_string(seed));
  c.set("workers", std::to_string(workers));
  c.set("out", out);
  c.set("n_paths", std::to_string(n_paths));
  c.set("grid.kind", grid.kind);
  c.set("grid.rho", num(grid.rho));
  c.set("grid.eps_end", num(grid.eps_end));
  c.set("grid.steps", std::to_string(grid.steps));
  c.set("measure.kind", measure.kind);
  c.set("measure.dim", std::to_string(measure.dim));
  c.set("measure.mean", num(measure.mean));
  c.set("measure.var", num(measure.var));
  c.set("measure.sigma", num(measure.sigma));
  c.set("measure.S", num(measure.S));
  c.set("measure.lower", num(measure.lower));
  c.set("measure.R", num(measure.R));
  c.set("moment", std::to_string(moment));
  c.set("q", num(q));
  c.set("slack", num(slack));
  c.set("ks_threshold", num(ks_threshold));
  c.set("save_paths", std::to_string(save_paths));
  c.set("n_boot", std::to_string(n_boot));
  c.set("stein.statistic", statistic);
  c.set("stein.n_inner", std::to_string(n_inner));
  c.set("stein.s_nodes", std::to_string(s_nodes));
  c.set("stein.bins", std::to_string(bins));
  c.set("stein.min_count", std::to_string(min_count));
  c.set("clt.n", list(clt_n, [](int v) { return std::to_string(v); }));
  c.set("clt.mc", std::to_string(clt_mc));
  c.set("eps_list", list(eps_list, num));
  c.set("tube.eps", num(tube_eps));
  c.set("tube.delta", num(tube_delta));
  c.set("tube.paths", std::to_string(tube_paths));
  c.set("ot.pairs", std::to_string(ot_pairs));
  return c;
}

}  // namespace bmt
