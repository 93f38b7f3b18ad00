#include "psguard/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "psguard/error.hpp"

namespace psguard {
namespace {

FeatureMetadata feature(std::string name, Direction dir, bool flow_wide = false) {
  FeatureMetadata m;
  m.name = std::move(name);
  m.direction = dir;
  m.is_flow_wide_aggregate = flow_wide;
  return m;
}

}  // namespace

SynthOutput synthesize(std::size_t n_rows, std::uint64_t seed) {
  if (n_rows < kSynthMinRows) {
    throw Error(ErrorKind::Usage, "synth",
                "need at least " + std::to_string(kSynthMinRows) + " rows, got " + std::to_string(n_rows));
  }

  std::vector<FeatureMetadata> cat;
  auto dst_port = feature("dst_port", Direction::Forward);
  dst_port.is_critical_identifier = true;
  auto protocol = feature("protocol", Direction::None);
  protocol.is_protocol_id = true;
  auto service = feature("service", Direction::None);
  service.is_functional_integrity = true;
  cat.push_back(dst_port);
  cat.push_back(protocol);
  cat.push_back(service);
  cat.push_back(feature("bwd_pkt_len_mean", Direction::Backward, true));
  cat.push_back(feature("bwd_iat_mean", Direction::Backward, true));
  cat.push_back(feature("conn_count_dst", Direction::Interflow));
  cat.push_back(feature("bwd_pkts", Direction::Backward));
  cat.push_back(feature("fwd_pkt_len_std", Direction::Forward, true));
  cat.push_back(feature("fwd_iat_mean", Direction::Forward, true));
  cat.push_back(feature("fwd_iat_std", Direction::Forward, true));
  cat.push_back(feature("fwd_pkts", Direction::Forward));
  cat.push_back(feature("fwd_bytes", Direction::Forward));
  cat.push_back(feature("fwd_pkt_len_max", Direction::Forward));
  cat.push_back(feature("flow_duration", Direction::Bidirectional));
  cat.push_back(feature("src_port", Direction::Forward));
  cat.push_back(feature("fwd_ttl", Direction::Forward));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_port(1024, 65535);
  std::uniform_int_distribution<int> pick4(0, 3);
  std::uniform_int_distribution<int> pick_service(0, 5);
  std::uniform_int_distribution<int> ttl_offset(0, 31);
  constexpr std::array<int, 4> kCommonPorts = {53, 80, 443, 8080};
  constexpr std::array<int, 4> kRarePorts = {22, 23, 445, 3389};

  std::string csv;
  for (const auto& m : cat) csv += m.name + ",";
  csv += "label\n";

  char buf[512];
  for (std::size_t i = 0; i < n_rows; ++i) {
    const int y = unit(rng) < 0.3 ? 1 : 0;
    const double s = y;

    const int port = (y == 1 && unit(rng) < 0.5) ? kRarePorts[pick4(rng)] : kCommonPorts[pick4(rng)];
    const int proto = unit(rng) < (y ? 0.45 : 0.75) ? 6 : 17;
    const int svc = pick_service(rng);
    const double bwd_len = std::max(0.0, 600.0 - 300.0 * s + 120.0 * gauss(rng));
    const double bwd_iat = std::max(0.01, 50.0 - 30.0 * s + 15.0 * gauss(rng));
    std::poisson_distribution<int> conns(4.0 + 8.0 * s);
    const int conn_count = conns(rng);

    const double fwd_pkts = std::max(1.0, std::round(200.0 + 60.0 * gauss(rng) - 50.0 * s));
    const double fwd_bytes = std::max(0.0, std::round(480.0 * fwd_pkts + 6000.0 * gauss(rng)));
    const double bwd_pkts = std::max(0.0, std::round(0.9 * fwd_pkts + 20.0 * gauss(rng)));
    const double len_max = std::max(40.0, std::round(900.0 + 200.0 * gauss(rng) - 150.0 * s));
    const double len_std = std::max(0.0, 0.35 * len_max + 25.0 * gauss(rng));
    const double iat_mean = std::max(0.1, 30.0 + 8.0 * gauss(rng) - 6.0 * s);
    const double iat_std = std::max(0.0, 0.6 * iat_mean + 1.8 * gauss(rng));
    const double duration = std::max(0.001, 2.0 + 0.6 * gauss(rng) - 0.5 * s);
    const int sport = any_port(rng);
    const int ttl = 32 + 8 * y + ttl_offset(rng);

    std::snprintf(buf, sizeof buf,
                  "%d,%d,%d,%.3f,%.3f,%d,%.0f,%.3f,%.3f,%.3f,%.0f,%.0f,%.0f,%.3f,%d,%d,%s\n", port, proto,
                  svc, bwd_len, bwd_iat, conn_count, bwd_pkts, len_std, iat_mean, iat_std, fwd_pkts, fwd_bytes,
                  len_max, duration, sport, ttl, y ? "Malicious" : "Benign");
    csv += buf;
  }

  MorphMap morphs;
  morphs.entries = {
      {"payload_padding", {"fwd_bytes", "fwd_pkt_len_max"}, MorphDirection::Increase},
      {"packet_injection", {"fwd_pkts", "fwd_bytes"}, MorphDirection::Increase},
      {"interarrival_delay", {"flow_duration"}, MorphDirection::Increase},
      {"ttl_rewrite", {"fwd_ttl"}, MorphDirection::Either},
      {"source_port_rotation", {"src_port"}, MorphDirection::Either},
  };
  return {std::move(csv), MetadataCatalog(std::move(cat)), std::move(morphs)};
}

}  // namespace psguard
