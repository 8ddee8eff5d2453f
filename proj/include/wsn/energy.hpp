#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "wsn/topology.hpp"

namespace wsn {

enum class SocLevel : std::uint8_t { VeryLow, Low, Medium, High, VeryHigh };
inline constexpr int kSocLevels = 5;

const char* to_string(SocLevel level);

/// Five uniform bins: [0,20), [20,40), [40,60), [60,80), [80,100].
/// Throws std::out_of_range outside [0, 100].
SocLevel discretize_soc(double soc);

/// SoC points removed per event. All entries are non-negative.
struct CostSchedule {
  double hop = 2.0;             // per forwarding hop, charged to the sender
  double sink = 8.0;            // per transmission to the sink
  double sense = 1.0;           // per sensing event
  double idle = 0.0;            // per episode while awake
  double sleep = 0.0;           // per episode asleep
  double report = 0.1;          // per cloud state report
  double local_compute = 0.05;  // per on-node Q-learning decision

  void validate() const;

  friend bool operator==(const CostSchedule&, const CostSchedule&) = default;
};

enum class CostKind : std::uint8_t { Hop, Sink, Sense, Idle, Sleep, Report, LocalCompute, LongRange };
inline constexpr std::size_t kCostKinds = 8;

const char* to_string(CostKind kind);

/// Per-node state of charge with alive flags and route-usage counters.
///
/// SoC is held in fixed point (1e-6 percentage points) so that energy audits
/// balance exactly; the public accessors speak percent.
class EnergyLedger {
 public:
  static constexpr std::int64_t kUnitsPerPoint = 1'000'000;
  static constexpr std::int64_t kFullUnits = 100 * kUnitsPerPoint;

  explicit EnergyLedger(std::size_t n, double initial_soc = 100.0);

  static std::int64_t to_units(double points);
  static double to_points(std::int64_t units) {
    return static_cast<double>(units) / static_cast<double>(kUnitsPerPoint);
  }

  std::size_t size() const { return soc_.size(); }
  double soc(NodeId id) const { return to_points(soc_units(id)); }
  std::int64_t soc_units(NodeId id) const { return soc_.at(index(id)); }
  bool alive(NodeId id) const { return soc_units(id) > 0; }
  int usage(NodeId id) const { return usage_.at(index(id)); }
  std::size_t alive_count() const;
  std::int64_t total_units() const;
  std::vector<double> soc_vector() const;
  NodeMask alive_mask() const;

  /// soc <- max(0, soc - cost). Returns the units actually removed.
  /// Throws SimulationError when the node is already dead.
  std::int64_t apply_cost(NodeId id, double cost, CostKind kind);

  /// Fixture helper; does not touch the charge counters.
  void set_soc(NodeId id, double soc);

  void record_usage(NodeId id) { ++usage_.at(index(id)); }
  /// Integer halving of every usage counter (windowed hotspot memory).
  void decay_usage();

  const std::array<std::int64_t, kCostKinds>& charged_units() const { return charged_; }
  std::int64_t charged_units_total() const;
  void reset_charges() { charged_.fill(0); }

 private:
  std::size_t index(NodeId id) const;

  std::vector<std::int64_t> soc_;
  std::vector<int> usage_;
  std::array<std::int64_t, kCostKinds> charged_{};
};

struct SocStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance; dead nodes count as 0
  double min = 0.0;
  double max = 0.0;
  std::size_t alive_count = 0;
};

SocStats soc_stats(const EnergyLedger& ledger);

/// Population mean/variance of an arbitrary SoC sample.
double mean_of(const std::vector<double>& values);
double population_variance(const std::vector<double>& values);

/// Nearest-rank percentile (q in [0,1]) of the alive nodes' SoC.
double alive_soc_percentile(const EnergyLedger& ledger, double q);

}  // namespace wsn
