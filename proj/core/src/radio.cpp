#include "greenmon/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace greenmon {

void RadioParams::validate() const {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw ConfigError("radio.loss_prob", "must be in [0, 1]");
  if (!(dup_prob >= 0.0 && dup_prob <= 1.0)) throw ConfigError("radio.dup_prob", "must be in [0, 1]");
  if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms)) {
    throw ConfigError("radio.latency_ms", "must be >= 0");
  }
}

Radio::Radio(RadioParams params) : params_(params), rng_(params.seed) { params_.validate(); }

std::vector<DeliveryEvent> Radio::transmit(std::span<const std::uint8_t> packet_bytes,
                                           VirtualTime t) {
  if (packet_bytes.size() != kPacketSize) {
    throw std::invalid_argument("radio frames must be exactly 13 bytes");
  }
  const double u_loss = rng_.uniform();
  const double u_dup = rng_.uniform();
  const std::uint64_t order = next_order_++;
  ++counters_.transmitted;

  // u in [0,1): loss_prob = 1 always loses, 0 never does.
  if (u_loss < params_.loss_prob) {
    ++counters_.lost;
    return {};
  }

  DeliveryEvent ev;
  std::copy(packet_bytes.begin(), packet_bytes.end(), ev.packet_bytes.begin());
  ev.transmit_t = t;
  ev.arrival_t = t + params_.latency_ms / 1000.0;
  ev.transmit_order = order;

  std::vector<DeliveryEvent> scheduled{ev};
  if (u_dup < params_.dup_prob) {
    ++counters_.duplicated;
    scheduled.push_back(ev);
  }
  for (std::size_t i = 0; i < scheduled.size(); ++i) {
    pending_.emplace(std::make_tuple(ev.arrival_t, order, static_cast<int>(i)), scheduled[i]);
  }
  return scheduled;
}

std::vector<DeliveryEvent> Radio::drain_deliveries(VirtualTime up_to_t) {
  if (up_to_t < last_drain_t_) {
    throw std::invalid_argument("drain time moved backwards");
  }
  last_drain_t_ = up_to_t;
  std::vector<DeliveryEvent> out;
  auto it = pending_.begin();
  while (it != pending_.end() && std::get<0>(it->first) <= up_to_t) {
    out.push_back(it->second);
    it = pending_.erase(it);
  }
  counters_.delivered += out.size();
  return out;
}

VirtualTime Radio::next_arrival() const {
  if (pending_.empty()) return std::numeric_limits<double>::infinity();
  return std::get<0>(pending_.begin()->first);
}

}  // namespace greenmon
