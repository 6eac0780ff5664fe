#ifndef KMATCH_TESTS_SUPPORT_HPP
#define KMATCH_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "kmatch/graph.hpp"
#include "kmatch/seed.hpp"

namespace kmatch::testing {

/// Simple graph with `m` distinct random pairs on n vertices, weights in [1, wmax].
inline std::vector<Edge> random_graph(Vertex n, std::size_t m, std::int64_t wmax, Rng& rng) {
  std::uniform_int_distribution<Vertex> pick(0, n - 1);
  std::uniform_int_distribution<std::int64_t> weight(1, wmax);
  std::set<std::pair<Vertex, Vertex>> used;
  std::vector<Edge> out;
  const std::size_t cap = static_cast<std::size_t>(n) * (n - 1) / 2;
  while (out.size() < m && used.size() < cap) {
    Vertex a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    out.push_back({a, b, weight(rng)});
  }
  return out;
}

/// Wilson score interval lower bound for a binomial proportion, z standard deviations.
inline double wilson_lower(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double z2 = z * z;
  const double nn = static_cast<double>(n);
  const double centre = p + z2 / (2 * nn);
  const double spread = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  return (centre - spread) / (1 + z2 / nn);
}

}  // namespace kmatch::testing

#endif  // KMATCH_TESTS_SUPPORT_HPP
