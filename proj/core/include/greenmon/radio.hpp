#pragma once

// Single-hop lossy medium between every mote and the sink.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "greenmon/channel.hpp"
#include "greenmon/mote.hpp"
#include "greenmon/random.hpp"

namespace greenmon {

struct RadioParams {
  double loss_prob = 0.02;
  double dup_prob = 0.01;
  double latency_ms = 50.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DeliveryEvent {
  PacketBytes packet_bytes{};
  VirtualTime transmit_t = 0.0;
  VirtualTime arrival_t = 0.0;
  /// Position of the originating transmit() call; breaks arrival ties.
  std::uint64_t transmit_order = 0;

  bool operator==(const DeliveryEvent&) const = default;
};

struct RadioCounters {
  std::uint64_t transmitted = 0;
  std::uint64_t lost = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delivered = 0;  // drained so far
};

class Radio {
 public:
  explicit Radio(RadioParams params);

  /// Schedules zero, one or two deliveries at t + latency. Two uniforms are
  /// drawn per call (loss, then duplication) so the stream position depends only
  /// on the number of transmissions. Throws std::invalid_argument unless the
  /// frame is exactly 13 bytes.
  std::vector<DeliveryEvent> transmit(std::span<const std::uint8_t> packet_bytes, VirtualTime t);

  /// Removes and returns every pending delivery with arrival_t <= up_to_t,
  /// ordered by (arrival_t, transmit order). Throws std::invalid_argument if
  /// up_to_t precedes the previous drain.
  std::vector<DeliveryEvent> drain_deliveries(VirtualTime up_to_t);

  /// Earliest pending arrival, or +inf.
  VirtualTime next_arrival() const;
  std::size_t pending() const { return pending_.size(); }

  const RadioParams& params() const { return params_; }
  const RadioCounters& counters() const { return counters_; }

 private:
  RadioParams params_;
  RandomStream rng_;
  RadioCounters counters_;
  // Keyed by (arrival_t, transmit order, copy index).
  std::map<std::tuple<VirtualTime, std::uint64_t, int>, DeliveryEvent> pending_;
  std::uint64_t next_order_ = 0;
  VirtualTime last_drain_t_ = 0.0;
};

}  // namespace greenmon
