#include "fabolas/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fabolas/random.hpp"

namespace fabolas {

double branin(double x1, double x2) {
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double u = x2 - b * x1 * x1 + c * x1 - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

ObjectiveResult synthetic_mf_eval(const Eigen::VectorXd& x, double s, std::optional<std::uint64_t> noise_seed) {
  if (x.size() != 2) throw std::invalid_argument("synthetic_mf_eval: x must have 2 entries");
  if (!(x[0] >= -5.0 && x[0] <= 10.0 && x[1] >= 0.0 && x[1] <= 15.0))
    throw std::invalid_argument("synthetic_mf_eval: x outside the Branin domain");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("synthetic_mf_eval: s must lie in (0, 1]");
  double y = branin(x[0], x[1]) / 300.0 + 0.3 * (1.0 - s) * (1.0 - s) * (1.0 + x[1] / 15.0);
  if (noise_seed) {
    Rng rng(*noise_seed);
    std::normal_distribution<double> normal(0.0, kSyntheticNoiseSd);
    y += normal(rng);
  }
  const double z = 0.01 + s * (1.0 + 4.0 * (x[0] + 5.0) / 15.0);
  return {y, z};
}

SearchSpace synthetic_space() {
  return SearchSpace({{"x1", -5.0, 10.0, false}, {"x2", 0.0, 15.0, false}}, 1.0 / 512.0);
}

ObjectiveResult SyntheticObjective::evaluate(const Eigen::VectorXd& config, double s, std::uint64_t seed) {
  return synthetic_mf_eval(config, s, noisy_ ? std::optional<std::uint64_t>(seed) : std::nullopt);
}

}  // namespace fabolas
