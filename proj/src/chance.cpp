#include "duelist/chance.hpp"

#include <stdexcept>
#include <string>

namespace duelist {

void ChanceConfig::validate() const {
  if (min_n < 1 || min_n > max_n) throw std::invalid_argument("chance grid bounds are inconsistent");
  if (n < min_n || n > max_n) {
    throw std::invalid_argument("chance grid size " + std::to_string(n) + " outside [" + std::to_string(min_n) +
                                ", " + std::to_string(max_n) + "]");
  }
  if (full_chance_depth < 0) throw std::invalid_argument("full chance depth must be >= 0");
}

std::vector<double> grid(int n) {
  if (n < 1) throw std::invalid_argument("grid size must be >= 1");
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = (k + 0.5) / n;
  return g;
}

int chance_children(int turns_from_root, const ChanceConfig& cfg) {
  return turns_from_root <= cfg.full_chance_depth ? cfg.n * cfg.n : 1;
}

long raw_expansions(int actions0, int actions1, int turns_from_root, const ChanceConfig& cfg) {
  return static_cast<long>(actions0) * actions1 * chance_children(turns_from_root, cfg);
}

std::vector<ChanceChild> expand_turn(const Dex& dex, const BattleState& state, const Action& a0,
                                     const Action& a1, int turns_from_root, const ChanceConfig& cfg) {
  std::vector<ChanceChild> out;
  if (turns_from_root > cfg.full_chance_depth) {
    ChanceChild c;
    auto avg = average_luck_source();
    resolve_turn_into(dex, state, a0, a1, avg, c.state, nullptr);
    out.push_back(std::move(c));
    return out;
  }
  const auto g = grid(cfg.n);
  const double w = 1.0 / (static_cast<double>(cfg.n) * cfg.n);
  out.resize(g.size() * g.size());
  std::size_t k = 0;
  for (double r0 : g) {
    for (double r1 : g) {
      auto& c = out[k++];
      FixedPairSource rng(r0, r1);
      resolve_turn_into(dex, state, a0, a1, rng, c.state, nullptr);
      c.weight = w;
      c.r0 = r0;
      c.r1 = r1;
    }
  }
  return out;
}

}  // namespace duelist
