#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Input rejected at a precondition check.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation requested outside the domain where the quantity is defined
// (for instance t >= 1 for the drift).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Total posterior mass underflowed; the caller has to refine the step.
class PosteriorDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogTwoPi = 1.83787706640934548356;

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed and a list of counters.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream (master, c0, c1, ...). Depends only on its arguments, so
/// serial and parallel runs draw identical numbers for every path.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters);

/// Per-stream generator. Normals come from the Box-Muller transform on the
/// 64-bit Mersenne twister so the bit pattern does not depend on the
/// standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();            // in (0, 1)
  double normal();
  Vec normal_vector(int n);
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Worker count: BMT_WORKERS if set, else hardware concurrency (>= 1).
int default_workers();

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index is handled by
/// exactly one call; callers write results into index-addressed storage so
/// the outcome is independent of the worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

}  // namespace bmt
