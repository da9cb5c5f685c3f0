#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rovi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid user-facing input: bad dimensions, malformed config, unknown
/// preset, violated preconditions. Maps to CLI exit code 1.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at runtime: singular map, diverged chains, iteration
/// caps exceeded. Maps to CLI exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream seed derived from a master seed. Every parallel unit
/// of work (restart, chain, method) gets its own stream id so results do
/// not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream = 0) {
  return Rng(derive_seed(master, stream));
}

namespace parallel {

/// Worker count for OpenMP regions: hardware/omp maximum, optionally capped
/// by the ROVI_THREADS environment variable.
int threads();

/// Fixed chunk size of all deterministic blocked reductions. Partial sums
/// are formed per block and combined in block order, so results are
/// bit-identical for any thread count.
inline constexpr int kReductionBlock = 512;

inline int block_count(long n) {
  return static_cast<int>((n + kReductionBlock - 1) / kReductionBlock);
}

}  // namespace parallel

}  // namespace rovi
