#include "wsn/delay.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wsn/errors.hpp"

namespace wsn {

const char* to_string(Mode mode) { return mode == Mode::Local ? "local" : "cloud"; }

void DelayParams::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"delay.packet_bits", packet_bits},         {"delay.link_rate_bps", link_rate_bps},
      {"delay.service_rate", service_rate},       {"delay.uplink_bps", uplink_bps},
      {"delay.episode_duration_s", episode_duration_s}};
  for (const auto& [key, v] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + ": must be > 0");
  }
  const std::pair<const char*, double> non_negative[] = {
      {"delay.processing_s", processing_s},   {"delay.local_decision_s", local_decision_s},
      {"delay.state_bits", state_bits},       {"delay.action_bits", action_bits},
      {"delay.cloud_compute_s", cloud_compute_s}, {"delay.cluster_setup_s", cluster_setup_s}};
  for (const auto& [key, v] : non_negative) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + ": must be >= 0");
  }
}

double queue_wait(double lambda_h, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("queue_wait: mu must be > 0");
  if (lambda_h < 0.0) throw std::invalid_argument("queue_wait: negative arrival rate");
  if (lambda_h >= mu) {
    throw UnstableQueueError("queue_wait: arrival rate " + std::to_string(lambda_h) +
                             " >= service rate " + std::to_string(mu));
  }
  return lambda_h / (mu * mu * (1.0 - lambda_h / mu));
}

double cloud_decision_delay(const DelayParams& params) {
  if (!(params.uplink_bps > 0.0)) throw std::invalid_argument("cloud_decision_delay: b must be > 0");
  return (params.state_bits + params.action_bits) / params.uplink_bps + params.cloud_compute_s;
}

DelayResult end_to_end_delay(std::span<const double> hop_arrival_rates, const DelayParams& params,
                             Mode mode) {
  const double decision =
      mode == Mode::Local ? params.local_decision_s : cloud_decision_delay(params);
  const auto hops = hop_arrival_rates.size();
  if (hops == 0) return {decision, false};

  double wait_sum = 0.0;
  for (double rate : hop_arrival_rates) {
    if (rate >= params.service_rate) return {std::numeric_limits<double>::infinity(), true};
    wait_sum += queue_wait(rate, params.service_rate);
  }

  const double per_hop = params.packet_bits / params.link_rate_bps + params.processing_s;
  double total = 0.0;
  if (params.queue_sum_mode) {
    total = static_cast<double>(hops) * per_hop + wait_sum;
  } else {
    // Each hop carries the path-average queue wait.
    const double mean_wait = wait_sum / static_cast<double>(hops);
    for (std::size_t h = 0; h < hops; ++h) total += per_hop + mean_wait;
  }
  return {total + decision, false};
}

DelayResult end_to_end_delay(const CandidatePath& path, std::span<const double> node_rates,
                             const DelayParams& params, Mode mode) {
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    rates.push_back(node_rates[static_cast<std::size_t>(path.nodes[i])]);
  }
  return end_to_end_delay(rates, params, mode);
}

}  // namespace wsn
