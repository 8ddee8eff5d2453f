#include "wsn/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wsn/errors.hpp"

namespace wsn {

const char* to_string(SocLevel level) {
  switch (level) {
    case SocLevel::VeryLow: return "very_low";
    case SocLevel::Low: return "low";
    case SocLevel::Medium: return "medium";
    case SocLevel::High: return "high";
    case SocLevel::VeryHigh: return "very_high";
  }
  return "?";
}

SocLevel discretize_soc(double soc) {
  if (!(soc >= 0.0 && soc <= 100.0)) {
    throw std::out_of_range("discretize_soc: soc outside [0,100]: " + std::to_string(soc));
  }
  const int bin = std::min(4, static_cast<int>(soc / 20.0));
  return static_cast<SocLevel>(bin);
}

void CostSchedule::validate() const {
  const std::pair<const char*, double> entries[] = {
      {"costs.hop", hop},       {"costs.sink", sink},     {"costs.sense", sense},
      {"costs.idle", idle},     {"costs.sleep", sleep},   {"costs.report", report},
      {"costs.local_compute", local_compute}};
  for (const auto& [key, value] : entries) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string(key) + ": must be a finite value >= 0");
    }
  }
}

const char* to_string(CostKind kind) {
  switch (kind) {
    case CostKind::Hop: return "hop";
    case CostKind::Sink: return "sink";
    case CostKind::Sense: return "sense";
    case CostKind::Idle: return "idle";
    case CostKind::Sleep: return "sleep";
    case CostKind::Report: return "report";
    case CostKind::LocalCompute: return "local_compute";
    case CostKind::LongRange: return "long_range";
  }
  return "?";
}

EnergyLedger::EnergyLedger(std::size_t n, double initial_soc)
    : soc_(n, to_units(initial_soc)), usage_(n, 0) {
  if (initial_soc < 0.0 || initial_soc > 100.0) {
    throw ConfigError("initial SoC must lie in [0,100]");
  }
}

std::int64_t EnergyLedger::to_units(double points) {
  return std::llround(points * static_cast<double>(kUnitsPerPoint));
}

std::size_t EnergyLedger::index(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= soc_.size()) {
    throw std::out_of_range("EnergyLedger: node id " + std::to_string(id) + " out of range");
  }
  return static_cast<std::size_t>(id);
}

std::size_t EnergyLedger::alive_count() const {
  return static_cast<std::size_t>(
      std::count_if(soc_.begin(), soc_.end(), [](std::int64_t u) { return u > 0; }));
}

std::int64_t EnergyLedger::total_units() const {
  return std::accumulate(soc_.begin(), soc_.end(), std::int64_t{0});
}

std::vector<double> EnergyLedger::soc_vector() const {
  std::vector<double> out(soc_.size());
  std::transform(soc_.begin(), soc_.end(), out.begin(), to_points);
  return out;
}

NodeMask EnergyLedger::alive_mask() const {
  NodeMask mask(soc_.size());
  for (std::size_t i = 0; i < soc_.size(); ++i) mask[i] = soc_[i] > 0 ? 1 : 0;
  return mask;
}

std::int64_t EnergyLedger::apply_cost(NodeId id, double cost, CostKind kind) {
  const auto i = index(id);
  if (soc_[i] <= 0) {
    throw SimulationError("apply_cost: node " + std::to_string(id) + " is dead");
  }
  if (!(cost >= 0.0)) throw SimulationError("apply_cost: negative cost");
  const std::int64_t removed = std::min(soc_[i], to_units(cost));
  soc_[i] -= removed;
  charged_[static_cast<std::size_t>(kind)] += removed;
  return removed;
}

void EnergyLedger::set_soc(NodeId id, double soc) {
  if (soc < 0.0 || soc > 100.0) throw std::out_of_range("set_soc: soc outside [0,100]");
  soc_[index(id)] = to_units(soc);
}

void EnergyLedger::decay_usage() {
  for (auto& u : usage_) u /= 2;
}

std::int64_t EnergyLedger::charged_units_total() const {
  return std::accumulate(charged_.begin(), charged_.end(), std::int64_t{0});
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_variance(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double mean = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

SocStats soc_stats(const EnergyLedger& ledger) {
  if (ledger.size() == 0) throw std::invalid_argument("soc_stats: empty ledger");
  const auto values = ledger.soc_vector();
  SocStats s;
  s.mean = mean_of(values);
  s.variance = population_variance(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.alive_count = ledger.alive_count();
  return s;
}

double alive_soc_percentile(const EnergyLedger& ledger, double q) {
  std::vector<std::int64_t> alive;
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const auto u = ledger.soc_units(static_cast<NodeId>(i));
    if (u > 0) alive.push_back(u);
  }
  if (alive.empty()) return 0.0;
  std::sort(alive.begin(), alive.end());
  const auto n = alive.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return EnergyLedger::to_points(alive[rank - 1]);
}

}  // namespace wsn
