#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rpinfer/ingest.hpp"
#include "rpinfer/inference.hpp"
#include "rpinfer/measurements.hpp"

namespace rpinfer {

// Generator knobs. Member programs are expressed as membership-count
// fractions; the per-exchange member count is exact, the mix is
// rounded down and backfilled with plain colocated locals.
struct SynthConfig {
    std::uint64_t seed = 1;
    int n_ixps = 30;
    int members_per_ixp = 100;

    double remote_fraction = 0.27;    // of memberships
    double reseller_fraction = 0.15;  // fractional-port customers, subset of remote
    double wide_area_fraction = 0.15; // of exchanges
    double far_local_share = 0.35;    // locals of wide-area exchanges at the far site
    double near_remote_share = 0.20;  // remotes parked one suburb over

    // Memberships designed to resolve through the propagation stages.
    double multi_local_share = 0.02;
    double multi_remote_share = 0.04;
    double hybrid_share = 0.01;
    double voting_share = 0.01;
    double unknown_share = 0.04;  // all channels blanked; stays unclassified

    double port_record_prob_local = 0.5;
    double colo_record_prob_local = 1.0;

    int samples_per_target = 24;
    double jitter_mean_ms = 0.2;  // additive exponential jitter
    double spike_prob = 0.02;     // transient inflation, absorbed by the minimum
    double spike_ms = 60.0;

    int metro_count = 12;
    int facilities_per_metro_min = 3;
    int facilities_per_metro_max = 5;
    double lat_min = 35.0, lat_max = 60.0;
    double lon_min = -10.0, lon_max = 30.0;
    double metro_min_km = 180.0;
    double metro_radius_km = 12.0;
    double suburb_km_min = 70.0, suburb_km_max = 110.0;
    double remote_min_km = 250.0, remote_max_km = 950.0;
    double multi_remote_min_km = 1800.0, multi_remote_max_km = 2600.0;
    double wide_area_min_km = 1450.0;

    double second_vp_share = 0.2;
    double bad_vp_share = 0.15;  // probes with inflated route-server RTTs

    double corrupt_capacity_fraction = 0.0;  // port records rewritten at random
    double label_flip_fraction = 0.0;        // emitted labels flipped vs truth

    // Sampled packet speed stays this far above the lower envelope so the
    // rounded minimum never lands outside the ring.
    double speed_margin = 0.10;
    double speed_floor_frac = 0.75;
    int neighbors_per_voter = 5;

    SpeedModel speed;
};

struct SampleAudit {
    Ipv4 target;
    std::string vp_id;
    double distance_km = 0.0;
    double base_ms = 0.0;   // distance / sampled speed
    double jitter_ms = 0.0; // everything added on top of base
};

struct Scenario {
    SynthConfig config;
    std::vector<Document> documents;  // dataset documents, labels excluded
    Document labels_document;
    WorldModel world;
    std::vector<PingSample> pings;
    std::vector<TraceroutePath> traces;
    std::vector<AliasSet> alias_sets;
    std::map<IfaceKey, Verdict> ground_truth;
    std::vector<SampleAudit> audit;
    IngestReport ingest_report;
};

// Deterministic: the seed fixes every draw. Throws ConfigError for
// infeasible geometry or contradictory fractions.
Scenario generate(const SynthConfig& config);

// The generator's embedded truth; the comparison oracle for the pipeline.
std::map<IfaceKey, Verdict> oracle_classify(const Scenario& scenario);

MeasurementInputs scenario_inputs(const Scenario& scenario);

// Emits the same file formats the ingest/infer commands consume:
// dataset/*.json, pings.csv, traces.jsonl, aliases.jsonl, labels.json.
void write_scenario(const Scenario& scenario, const std::string& directory);

}  // namespace rpinfer
