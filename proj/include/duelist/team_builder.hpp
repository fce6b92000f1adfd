#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "duelist/arena.hpp"

namespace duelist {

struct GaConfig {
  int population_size = 20;
  int generations_max = 10;
  int fitness_battles = 4;  // per pool team
  double selection_fraction = 0.25;
  double mutation_rate = 0.1;
  double fitness_threshold = 0.9;
  std::uint64_t rng_seed = 7;
  int team_size = kMaxTeam;

  // Throws std::invalid_argument.
  void validate() const;
};

// Who plays the fitness battles: `ours` pilots the candidate team, `theirs`
// the pool team.
struct FitnessSetup {
  AgentSpec ours;
  AgentSpec theirs;
  MatchConfig match;
};

// Seeds first, then random legal teams. Throws std::invalid_argument naming
// the first violation of an illegal seed, or when there are more seeds than
// population slots.
std::vector<Team> init_population(const std::vector<Team>& seeds, const GaConfig& cfg, const Dex& dex);

// Score of `team` against every pool team over cfg.fitness_battles battles
// each, draws counting one half. The battle seeds depend only on
// cfg.rng_seed and the pool index, so a team's fitness never changes
// between generations.
double fitness(const Team& team, const std::vector<Team>& pool, const GaConfig& cfg, const Dex& dex,
               const FitnessSetup& setup);

// Keeps the best ceil(selection_fraction * size) teams (at least two) and
// fills the rest with children of two distinct survivors: per-slot uniform
// crossover, species-clause repair, then per-gene mutation (species swap,
// move swap within the learnset, ability reroll, item reroll).
std::vector<Team> next_generation(const std::vector<Team>& population, const std::vector<double>& fitnesses,
                                  const GaConfig& cfg, const Dex& dex, std::mt19937_64& rng);

struct GenerationLog {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
};

struct EvolveResult {
  std::vector<Team> teams;        // last evaluated population, best first
  std::vector<double> fitnesses;  // matching `teams`
  std::vector<GenerationLog> log;
};

// Evaluates and breeds until a team reaches cfg.fitness_threshold or
// cfg.generations_max evaluation rounds have run.
EvolveResult evolve(const GaConfig& cfg, const Dex& dex, const std::vector<Team>& pool, const FitnessSetup& setup,
                    const std::vector<Team>& seeds = {});

}  // namespace duelist
