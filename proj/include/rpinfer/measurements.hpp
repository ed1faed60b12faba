#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpinfer/world.hpp"

namespace rpinfer {

struct PingSample {
    std::string vp_id;
    Ipv4 target_ip;
    double rtt_ms = 0.0;
    int reply_ttl = 0;  // 0..255
    std::int64_t timestamp = 0;

    bool operator==(const PingSample&) const = default;
};

struct RttEstimate {
    Ipv4 target_ip;
    std::string vp_id;
    double rtt_min_ms = 0.0;
    int sample_count = 0;
    bool filtered = false;  // true when no sample survived the filters
    std::string filter_reason;
};

struct TracerouteHop {
    int index = 0;
    std::optional<Ipv4> ip;  // missing for non-responding hops
    std::optional<double> rtt_ms;

    bool operator==(const TracerouteHop&) const = default;
};

struct TraceroutePath {
    std::string measurement_id;
    std::vector<TracerouteHop> hops;  // indices strictly increasing

    bool operator==(const TraceroutePath&) const = default;
};

struct AliasSet {
    std::optional<std::string> router_id;
    std::vector<Ipv4> ips;
};

struct Router {
    std::string router_id;
    Asn asn = 0;
    std::set<Ipv4> interfaces;
    std::set<std::string> next_hop_ixps;

    bool multi_ixp() const { return next_hop_ixps.size() > 1; }
};

// Traceroute triplet evidencing traffic crossing an exchange fabric
// between two of its members.
struct IxpCrossing {
    std::string path_id;
    Asn near_asn = 0;
    std::string ixp_id;
    Asn far_asn = 0;
    Ipv4 triplet[3];

    bool operator==(const IxpCrossing&) const = default;
};

// Hop pair {member IP, exchange LAN IP}: layer-3 adjacency between the
// member's router and the exchange fabric.
struct IxpNextHop {
    Ipv4 member_ip;
    std::string ixp_id;
    std::string path_id;
};

struct PrivateAdjacencies {
    // normalized (smaller asn, larger asn) -> interfaces observed on the link
    std::map<std::pair<Asn, Asn>, std::set<Ipv4>> pairs;
    // member-side interface -> AS neighbors seen across it
    std::map<Ipv4, std::set<Asn>> neighbors_by_interface;
    std::set<Ipv4> interfaces;  // all interfaces on private links
};

// TTL-match/TTL-switch filter over one (vantage point, target) series.
// The initial TTL is inferred as the smallest of {64, 255} covering the
// reply TTL; looking glasses sit on the LAN (hop distance 0), probes may
// be one router away. A series mixing initial-TTL families indicates
// different devices replying and is discarded wholesale.
std::vector<PingSample> ttl_filter(const std::vector<PingSample>& series,
                                   const VantagePoint& vp);

// A vantage point more than vp_sanity_ms from its own route server is not
// where its record claims; drop it. Missing measurement keeps the VP.
bool vp_sanity_keep(const VantagePoint& vp,
                    std::optional<double> rtt_to_route_server_ms,
                    double vp_sanity_ms = 1.0,
                    std::vector<std::string>* warnings = nullptr);

RttEstimate aggregate_rtt_min(const std::vector<PingSample>& accepted,
                              const VantagePoint& vp, Ipv4 target);

std::vector<IxpCrossing> detect_ixp_crossings(const TraceroutePath& path,
                                              const WorldModel& world);

std::vector<IxpNextHop> extract_ixp_next_hops(const std::vector<TraceroutePath>& paths,
                                              const WorldModel& world);

PrivateAdjacencies extract_private_adjacencies(const std::vector<TraceroutePath>& paths,
                                               const WorldModel& world);

// Groups alias sets into routers. Overlapping sets merge; each router's
// interfaces must resolve to a single AS. Member interfaces and next-hop
// sources not covered by any set become singleton routers.
std::vector<Router> build_routers(const std::vector<AliasSet>& alias_sets,
                                  const std::vector<IxpNextHop>& next_hops,
                                  const WorldModel& world,
                                  std::vector<std::string>* diagnostics = nullptr);

// File loaders for the measurement inputs.
std::vector<PingSample> load_pings_csv(const std::string& path);
std::vector<TraceroutePath> load_traces_jsonl(const std::string& path);
std::vector<AliasSet> load_alias_sets_jsonl(const std::string& path);

}  // namespace rpinfer
