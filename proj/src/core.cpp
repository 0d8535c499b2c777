#include "bmt/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace bmt {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = splitmix64(master);
  for (auto c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vec Rng::normal_vector(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

int default_workers() {
  if (const char* env = std::getenv("BMT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t w = std::clamp<std::size_t>(workers <= 0 ? 1 : workers, 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < n; i += w) fn(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  e.mean = compensated_sum(values) / static_cast<double>(e.n);
  if (e.n > 1) {
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [m = e.mean](double v) { return (v - m) * (v - m); });
    e.sd = std::sqrt(compensated_sum(sq) / static_cast<double>(e.n - 1));
    e.std_error = e.sd / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

}  // namespace bmt
