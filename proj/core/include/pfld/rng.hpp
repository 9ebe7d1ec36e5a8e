#pragma once

#include <cstdint>
#include <random>

#include "pfld/common.hpp"

namespace pfld {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Derives a stream seed from (run seed, stream id, step). Order matters.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t step);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  Vector normal_vector(Eigen::Index dim);
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace pfld
