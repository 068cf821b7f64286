#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace seob {

// SplitMix64 finalizer, used to derive engine seeds and independent sub-streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable, splittable generator. The engine is std::mt19937_64 seeded with
// splitmix64(seed); uniforms take the top 53 bits of each draw. Nothing here
// goes through <random> distributions, whose output is implementation-defined,
// so streams are reproducible across standard libraries and languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1).
  double open_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // Independent child stream; children of the same parent and stream id are identical.
  Rng split(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
  }

  // Flat Dirichlet draw on the simplex of dimension n.
  Eigen::VectorXd simplex_point(int n) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = -std::log(open_uniform());
    return x / x.sum();
  }

  // Simplex point with every coordinate at least `floor` (floor * n < 1).
  Eigen::VectorXd interior_simplex_point(int n, double floor) {
    Eigen::VectorXd x = simplex_point(n);
    return (1.0 - floor * n) * x.array() + floor;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace seob
