#pragma once

#include <span>

#include "wsn/routing_graph.hpp"

namespace wsn {

enum class Mode { Local, Cloud };

const char* to_string(Mode mode);

struct DelayParams {
  double packet_bits = 2000.0;          // L
  double link_rate_bps = 250000.0;      // R
  double processing_s = 0.002;          // t_p per node
  double service_rate = 40.0;           // mu, packets/s
  double local_decision_s = 0.002;      // T_Q
  double state_bits = 8000.0;           // s
  double action_bits = 2000.0;          // a
  double uplink_bps = 1'000'000.0;      // b
  double cloud_compute_s = 0.005;       // T_compute
  double episode_duration_s = 1.0;      // converts per-episode packet counts to lambda_h
  double cluster_setup_s = 0.060;       // re-clustering setup time (cluster baseline)
  bool queue_sum_mode = false;          // sum per-hop waits instead of the averaged form

  void validate() const;

  friend bool operator==(const DelayParams&, const DelayParams&) = default;
};

/// M/M/1 waiting time lambda / (mu^2 (1 - lambda/mu)). Throws UnstableQueueError
/// when lambda >= mu.
double queue_wait(double lambda_h, double mu);

/// T_D = (s + a) / b + T_compute.
double cloud_decision_delay(const DelayParams& params);

struct DelayResult {
  double seconds = 0.0;
  bool unstable = false;  // seconds is +inf when set
};

/// End-to-end delay of one packet over H = hop_arrival_rates.size() hops. Entry h
/// is the arrival rate at the node transmitting hop h. The per-hop transmission,
/// processing and averaged queue terms are summed over the hops, then the
/// decision term (T_Q locally, T_D in the cloud) is added once.
DelayResult end_to_end_delay(std::span<const double> hop_arrival_rates, const DelayParams& params,
                             Mode mode);

/// Convenience overload: the senders are every node of `path` but the last,
/// and `node_rates` maps node id to arrival rate.
DelayResult end_to_end_delay(const CandidatePath& path, std::span<const double> node_rates,
                             const DelayParams& params, Mode mode);

}  // namespace wsn
