#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace duelist {

// Supplies the random numbers a turn consumes. Every draw is labelled with
// the side the event impacts (see the event labelling table in engine.hpp).
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  // A number in [0, 1) for an event impacting `side`.
  virtual double draw(int side) = 0;
};

// One fixed number per side: every draw for a side returns that side's number.
class FixedPairSource final : public RandomSource {
 public:
  FixedPairSource(double side0, double side1) : numbers_{side0, side1} {}
  double draw(int side) override { return numbers_[side]; }
  double number(int side) const { return numbers_[side]; }

 private:
  double numbers_[2];
};

// Every draw returns 0.5.
FixedPairSource average_luck_source();

// Independent uniform draws from a seeded generator; the sequence of draws is
// recorded so a turn can be replayed bit-exactly.
class SeededSource final : public RandomSource {
 public:
  explicit SeededSource(std::uint64_t seed) : engine_(seed) {}
  double draw(int side) override;
  // Returns and clears the draws made since the previous call.
  std::vector<double> take_draws();

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> dist_{0.0, 1.0};
  std::vector<double> draws_;
};

// Plays back a recorded draw sequence. Throws std::out_of_range when exhausted.
class ReplaySource final : public RandomSource {
 public:
  explicit ReplaySource(std::vector<double> draws) : draws_(std::move(draws)) {}
  double draw(int side) override;
  bool exhausted() const { return next_ == draws_.size(); }

 private:
  std::vector<double> draws_;
  std::size_t next_ = 0;
};

}  // namespace duelist
