#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpinfer/measurements.hpp"
#include "rpinfer/world.hpp"

namespace rpinfer {

enum class Verdict { Local, Remote, Unknown };
enum class Step { PortCapacity, RttColo, MultiIxp, PrivateVoting, None };

std::string to_string(Verdict v);
std::string to_string(Step s);
Verdict verdict_from_string(const std::string& name);
Step step_from_string(const std::string& name);

// Packet-speed envelope: probes travel at most v_max and, over distance d,
// at least v_min(d) = a * (ln(d) - b), capped at v_max.
struct SpeedModel {
    double v_max_mps = (4.0 / 9.0) * 299792458.0;
    double v_min_coeff_a = 1e7;
    double v_min_offset_b = 3.0;
    enum class LogUnit { Meters, Kilometers };
    LogUnit log_unit = LogUnit::Meters;

    double v_min_mps(double distance_m) const;
};

struct FeasibleRange {
    double d_min_km = 0.0;
    double d_max_km = 0.0;
};

// Distance ring around a vantage point compatible with a measured minimum
// RTT. d_max = v_max * RTT. d_min is the fixed point of d = v_min(d) * RTT'
// solved by bisection, where RTT' drops one millisecond for vantage points
// that round RTTs up to whole milliseconds. Throws DataError for rtt <= 0.
FeasibleRange feasible_range(double rtt_min_ms, RttResolution resolution,
                             const SpeedModel& model = {});

struct IfaceKey {
    Ipv4 ip;
    std::string ixp_id;

    auto operator<=>(const IfaceKey&) const = default;
};

struct InferenceResult {
    MemberInterface interface;
    Verdict verdict = Verdict::Unknown;
    Step step = Step::None;
    nlohmann::json evidence = nlohmann::json::object();
};

enum class MemberClassKind { Local, Remote, Hybrid, Unknown };

std::string to_string(MemberClassKind k);

struct MemberClass {
    Asn asn = 0;
    MemberClassKind cls = MemberClassKind::Unknown;
};

struct PipelineConfig {
    SpeedModel speed;
    double vp_sanity_ms = 1.0;
    double metro_threshold_km = 50.0;
    int vote_quorum = 3;
    double baseline_threshold_ms = 10.0;
    // RTTs above this are flagged in evidence as a strong remote hint.
    double advisory_remote_ms = 2.0;
    bool strict_colo = false;
    int max_step = 5;  // running only a stage prefix never changes its verdicts
    std::map<std::string, std::set<Asn>> step1_exemptions;  // legacy low-capacity ports
    std::vector<std::string> target_ixps;                   // empty: all exchanges
};

struct MeasurementInputs {
    std::vector<PingSample> pings;
    std::vector<TraceroutePath> traces;
    std::vector<AliasSet> alias_sets;
};

struct BaselineResult {
    IfaceKey key;
    Verdict verdict = Verdict::Unknown;
};

struct PipelineOutput {
    std::vector<InferenceResult> results;  // sorted by (ixp_id, ip)
    std::vector<MemberClass> member_classes;
    std::vector<BaselineResult> baseline;  // plain RTT-threshold comparator
    std::map<IfaceKey, RttEstimate> estimates;
    std::vector<std::string> dropped_vps;
    std::vector<std::string> warnings;
};

struct StepOutcome {
    Verdict verdict = Verdict::Unknown;
    nlohmann::json evidence = nlohmann::json::object();
};

// Step 1: a port smaller than the smallest physical port the exchange
// sells can only be a virtual (reseller) port. No verdict when either
// capacity is unknown or the AS is allow-listed.
std::optional<StepOutcome> step1_port_capacity(const MemberInterface& iface,
                                               const IxpRecord& ixp,
                                               const std::set<Asn>& exempt_asns);

// Step 3: intersect the RTT-derived ring with facility presence.
StepOutcome step3_colo_rtt(const MemberInterface& iface, const IxpRecord& ixp,
                           const VantagePoint& vp, const RttEstimate& estimate,
                           const WorldModel& world, const PipelineConfig& config,
                           const std::map<std::string, double>& vp_facility_km);

// Aggregate of steps 1-3 verdicts for one (AS, exchange) pair. Both flags
// can hold at once: an AS may own a reseller port and a physical port at
// the same exchange.
struct Prior {
    bool local = false;
    bool remote = false;
    std::optional<FeasibleRange> local_range;   // from the RTT ring, when present
    std::optional<FeasibleRange> remote_range;
};

// Step 4: propagate verdicts across the exchanges one router peers with.
// Keys of the returned map are exchange ids.
std::map<std::string, StepOutcome> step4_multi_ixp(
    const Router& router, const std::map<std::pair<Asn, std::string>, Prior>& priors,
    const WorldModel& world, const PipelineConfig& config);

// Step 5: facility voting over the private AS neighbors of the member's
// router, in the spirit of constrained facility search. feasible_ixp_facilities
// limits the exchange's candidate facilities when an RTT ring is known.
std::optional<StepOutcome> step5_private_voting(
    Asn asn, const std::string& ixp_id, const std::vector<Router>& routers,
    const PrivateAdjacencies& priv, const WorldModel& world,
    const PipelineConfig& config,
    const std::optional<std::set<std::string>>& feasible_ixp_facilities);

PipelineOutput run_pipeline(const WorldModel& world, const MeasurementInputs& inputs,
                            const PipelineConfig& config = {});

std::vector<MemberClass> classify_members(const std::vector<InferenceResult>& results);

}  // namespace rpinfer
