#include "pfld/rng.hpp"

namespace pfld {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t step) {
  return mix64(mix64(mix64(run_seed) ^ stream) ^ (step * 0xd1b54a32d192ed03ULL));
}

Vector Rng::normal_vector(Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal();
  return v;
}

}  // namespace pfld
