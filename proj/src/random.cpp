#include "duelist/random.hpp"

#include <stdexcept>

namespace duelist {

FixedPairSource average_luck_source() { return FixedPairSource(0.5, 0.5); }

double SeededSource::draw(int /*side*/) {
  double r = dist_(engine_);
  draws_.push_back(r);
  return r;
}

std::vector<double> SeededSource::take_draws() {
  std::vector<double> out;
  out.swap(draws_);
  return out;
}

double ReplaySource::draw(int /*side*/) {
  if (next_ >= draws_.size()) throw std::out_of_range("replay draw sequence exhausted");
  return draws_[next_++];
}

}  // namespace duelist
