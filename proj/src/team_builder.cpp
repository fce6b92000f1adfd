#include "duelist/team_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "duelist/hash.hpp"
#include "duelist/team.hpp"

namespace duelist {

namespace {

bool chance(std::mt19937_64& rng, double p) { return p > 0.0 && std::uniform_real_distribution<double>(0, 1)(rng) < p; }

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

SpeciesId fresh_species(const Dex& dex, const Team& team, std::mt19937_64& rng) {
  std::vector<SpeciesId> free;
  for (const auto& sp : dex.all_species()) {
    if (std::none_of(team.begin(), team.end(), [&](const Build& b) { return b.species == sp.id; })) free.push_back(sp.id);
  }
  return pick(free, rng);
}

void mutate(Team& team, const Dex& dex, double rate, std::mt19937_64& rng) {
  for (auto& b : team) {
    if (chance(rng, rate)) {
      b = random_build(dex, fresh_species(dex, team, rng), rng);
      continue;
    }
    const auto& sp = dex.species(b.species);
    for (auto& m : b.moves) {
      if (!chance(rng, rate)) continue;
      std::vector<MoveId> options;
      for (auto l : sp.learnset) {
        if (std::find(b.moves.begin(), b.moves.end(), l) == b.moves.end()) options.push_back(l);
      }
      if (!options.empty()) m = pick(options, rng);
    }
    if (chance(rng, rate)) b.ability = pick(sp.abilities, rng);
    if (chance(rng, rate) && dex.item_count() > 0) {
      const auto roll = std::uniform_int_distribution<std::size_t>(0, dex.item_count())(rng);
      b.item = roll == dex.item_count() ? kNoItem : ItemId(static_cast<std::uint16_t>(roll));
    }
  }
}

}  // namespace

void GaConfig::validate() const {
  if (population_size < 4) throw std::invalid_argument("population size must be >= 4");
  if (generations_max < 1) throw std::invalid_argument("generations-max must be >= 1");
  if (fitness_battles < 1) throw std::invalid_argument("fitness battles must be >= 1");
  if (!(selection_fraction >= 0.0 && selection_fraction <= 1.0)) {
    throw std::invalid_argument("selection fraction must lie in [0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("mutation rate must lie in [0, 1]");
  if (team_size < 1 || team_size > kMaxTeam) throw std::invalid_argument("team size must lie in [1, 6]");
}

std::vector<Team> init_population(const std::vector<Team>& seeds, const GaConfig& cfg, const Dex& dex) {
  cfg.validate();
  if (seeds.size() > static_cast<std::size_t>(cfg.population_size)) {
    throw std::invalid_argument("more seed teams than population slots");
  }
  std::vector<Team> pop;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (auto v = team_violation(dex, seeds[i]); !v.empty()) {
      throw std::invalid_argument("seed team " + std::to_string(i) + ": " + v);
    }
    pop.push_back(seeds[i]);
  }
  std::mt19937_64 rng(mix64(cfg.rng_seed));
  while (pop.size() < static_cast<std::size_t>(cfg.population_size)) pop.push_back(random_team(dex, rng, cfg.team_size));
  return pop;
}

double fitness(const Team& team, const std::vector<Team>& pool, const GaConfig& cfg, const Dex& dex,
               const FitnessSetup& setup) {
  if (pool.empty()) throw std::invalid_argument("fitness needs a non-empty opponent pool");
  double score = 0.0;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const auto m = run_match(dex, setup.ours, setup.theirs, team, pool[p], cfg.fitness_battles,
                             mix64(cfg.rng_seed ^ 0xf17e55ULL) + p, setup.match);
    score += m.wins_a + 0.5 * m.draws;
  }
  return score / (static_cast<double>(pool.size()) * cfg.fitness_battles);
}

std::vector<Team> next_generation(const std::vector<Team>& population, const std::vector<double>& fitnesses,
                                  const GaConfig& cfg, const Dex& dex, std::mt19937_64& rng) {
  cfg.validate();
  if (population.size() != fitnesses.size()) throw std::invalid_argument("population and fitness sizes differ");
  const int size = static_cast<int>(population.size());
  if (size < 2) throw std::invalid_argument("population too small to breed");
  std::vector<int> order(size);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });
  const int keep = std::clamp(static_cast<int>(std::ceil(cfg.selection_fraction * size)), 2, size);

  std::vector<Team> next;
  for (int i = 0; i < keep; ++i) next.push_back(population[order[i]]);
  std::uniform_int_distribution<int> parent(0, keep - 1);
  while (static_cast<int>(next.size()) < size) {
    const int a = parent(rng);
    int b = parent(rng);
    while (b == a) b = parent(rng);
    const auto& pa = population[order[a]];
    const auto& pb = population[order[b]];
    Team child;
    const std::size_t slots = std::max(pa.size(), pb.size());
    for (std::size_t k = 0; k < slots; ++k) {
      const Team& from = k >= pb.size() ? pa : k >= pa.size() ? pb : (chance(rng, 0.5) ? pb : pa);
      const Team& other = &from == &pa ? pb : pa;
      Build gene = from[k];
      const auto taken = [&](SpeciesId s) {
        return std::any_of(child.begin(), child.end(), [&](const Build& c) { return c.species == s; });
      };
      if (taken(gene.species)) {
        if (k < other.size() && !taken(other[k].species)) {
          gene = other[k];
        } else {
          gene = random_build(dex, fresh_species(dex, child, rng), rng);
        }
      }
      child.push_back(std::move(gene));
    }
    mutate(child, dex, cfg.mutation_rate, rng);
    next.push_back(std::move(child));
  }
  return next;
}

EvolveResult evolve(const GaConfig& cfg, const Dex& dex, const std::vector<Team>& pool, const FitnessSetup& setup,
                    const std::vector<Team>& seeds) {
  auto population = init_population(seeds, cfg, dex);
  std::mt19937_64 rng(mix64(cfg.rng_seed + 1));
  std::map<std::string, double> known;  // team JSON -> fitness
  EvolveResult out;
  for (int gen = 0; gen < cfg.generations_max; ++gen) {
    std::vector<double> fit;
    for (const auto& team : population) {
      const auto key = team_to_json(dex, team).dump();
      auto it = known.find(key);
      if (it == known.end()) it = known.emplace(key, fitness(team, pool, cfg, dex, setup)).first;
      fit.push_back(it->second);
    }
    const double best = *std::max_element(fit.begin(), fit.end());
    const double mean = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(fit.size());
    out.log.push_back({gen, best, mean});
    spdlog::info("generation {}: best {:.3f}, mean {:.3f}", gen, best, mean);

    if (best >= cfg.fitness_threshold || gen + 1 == cfg.generations_max) {
      std::vector<int> order(fit.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fit[a] > fit[b]; });
      for (int i : order) {
        out.teams.push_back(population[i]);
        out.fitnesses.push_back(fit[i]);
      }
      break;
    }
    population = next_generation(population, fit, cfg, dex, rng);
  }
  return out;
}

}  // namespace duelist
