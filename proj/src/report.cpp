#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "fabolas/experiment.hpp"

namespace fabolas {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::optional<double> quality(const RecordRow& r) {
  if (!r.incumbent || r.invalid) return std::nullopt;
  if (r.true_loss) return r.true_loss;
  return r.predicted_incumbent_loss;
}

// last incumbent quality with elapsed <= t
std::optional<double> quality_at(const ExperimentRecord& rec, double t) {
  std::optional<double> out;
  for (const auto& r : rec.rows) {
    if (r.elapsed > t) break;
    if (auto q = quality(r)) out = q;
  }
  return out;
}

}  // namespace

std::vector<ReportRow> report(const std::vector<ExperimentRecord>& records, const std::vector<double>& grid) {
  std::map<std::string, std::vector<const ExperimentRecord*>> by_strategy;
  for (const auto& r : records) by_strategy[r.strategy].push_back(&r);
  std::vector<double> times = grid;
  std::sort(times.begin(), times.end());

  std::vector<ReportRow> out;
  for (const auto& [name, recs] : by_strategy) {
    for (double t : times) {
      ReportRow row;
      row.strategy = name;
      row.time = t;
      std::vector<double> values;
      bool missing = false;
      for (const auto* rec : recs) {
        const auto q = quality_at(*rec, t);
        if (!q) {
          missing = true;
          break;
        }
        values.push_back(*q);
      }
      if (!missing) {
        row.median = percentile(values, 0.5);
        row.q25 = percentile(values, 0.25);
        row.q75 = percentile(values, 0.75);
      }
      out.push_back(row);
    }
  }
  return out;
}

std::vector<double> default_grid(const std::vector<ExperimentRecord>& records, int n) {
  if (n < 1) throw std::invalid_argument("default_grid: n must be >= 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : records) {
    for (const auto& row : r.rows) {
      if (row.elapsed > 0.0) lo = std::min(lo, row.elapsed);
      hi = std::max(hi, row.elapsed);
    }
  }
  if (!std::isfinite(lo)) return {};
  if (n == 1 || hi <= lo) return {hi};
  std::vector<double> grid(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) grid[i] = std::exp(a + (b - a) * i / (n - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "strategy,time,median,q25,q75\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); };
  for (const auto& r : rows) out += r.strategy + "," + num(r.time) + "," + opt(r.median) + "," + opt(r.q25) + "," + opt(r.q75) + "\n";
  return out;
}

ExperimentRecord offline_validate(const ExperimentRecord& record, Objective& objective, std::uint64_t validation_seed) {
  ExperimentRecord out = record;
  std::map<std::vector<double>, std::optional<double>> cache;
  for (auto& row : out.rows) {
    if (!row.incumbent) continue;
    const std::vector<double> key(row.incumbent->data(), row.incumbent->data() + row.incumbent->size());
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::optional<double> loss;
      try {
        const ObjectiveResult res = objective.evaluate(*row.incumbent, 1.0, validation_seed);
        if (std::isfinite(res.loss)) loss = res.loss;
      } catch (const EvaluationFailure&) {
      }
      it = cache.emplace(key, loss).first;
    }
    row.true_loss = it->second;
    row.invalid = !it->second.has_value();
  }
  return out;
}

}  // namespace fabolas
