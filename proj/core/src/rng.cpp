#include "dopo/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace dopo {

void NormalStream::fill(std::uint64_t step, std::span<double> out) const {
  SplitMix64 gen(splitmix64(key_ ^ (step * 0x9e3779b97f4a7c15ULL)));
  // Boost's normal distribution is a ziggurat and keeps no cached state.
  boost::random::normal_distribution<double> normal;
  for (double& x : out) x = normal(gen);
}

}  // namespace dopo
