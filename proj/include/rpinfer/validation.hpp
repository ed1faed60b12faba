#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpinfer/inference.hpp"
#include "rpinfer/world.hpp"

namespace rpinfer {

struct LabeledSets {
    std::set<IfaceKey> vd_r;  // labeled remote
    std::set<IfaceKey> vd_l;  // labeled local
};

struct InferredSets {
    std::set<IfaceKey> inf_r;
    std::set<IfaceKey> inf_l;
};

// Ratios are absent (not zero) when their denominator is empty.
struct MetricsReport {
    std::optional<double> cov, fpr, fnr, pre, acc;

    long n_vd = 0;
    long n_inf = 0;
    long n_inf_and_vd = 0;
    long n_inf_and_vd_l = 0;
    long n_inf_and_vd_r = 0;
    long n_inf_r_and_vd = 0;
    long n_inf_r_vd_r = 0;
    long n_inf_r_vd_l = 0;
    long n_inf_l_vd_r = 0;
    long n_inf_l_vd_l = 0;
};

// COV = |INF∩VD|/|VD|, FPR = |INF_R∩VD_L|/|INF∩VD_L|,
// FNR = |INF_L∩VD_R|/|INF∩VD_R|, PRE = |INF_R∩VD_R|/|INF_R∩VD|,
// ACC = (|INF_R∩VD_R|+|INF_L∩VD_L|)/|INF∩VD|.
// Unknown verdicts never enter INF; unlabeled inferences never count.
// Throws DataError when a key carries both labels or both verdicts.
MetricsReport compute_metrics(const InferredSets& inferred, const LabeledSets& labels);

struct PerStepMetrics {
    std::map<Step, MetricsReport> steps;  // only steps that produced verdicts
    MetricsReport combined;
};

PerStepMetrics per_step_metrics(const std::vector<InferenceResult>& results,
                                const LabeledSets& labels);

InferredSets results_to_sets(const std::vector<InferenceResult>& results);

// Expands member-level labels to the member's interfaces at the exchange;
// interface-level labels pass through (membership in the world model is
// not required for those).
LabeledSets labels_to_sets(const std::vector<ValidationLabel>& labels,
                           const WorldModel& world);

// Member-level roll-up: an AS counts as remote at an exchange when any of
// its interfaces there is remote.
std::map<std::pair<Asn, std::string>, Verdict> rollup_member_level(
    const std::vector<InferenceResult>& results);

}  // namespace rpinfer
