#include "rpinfer/validation.hpp"

#include <algorithm>

namespace rpinfer {

namespace {

long count_intersection(const std::set<IfaceKey>& a, const std::set<IfaceKey>& b) {
    long n = 0;
    for (const auto& k : a) n += b.count(k);
    return n;
}

std::optional<double> ratio(long num, long den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport compute_metrics(const InferredSets& inferred, const LabeledSets& labels) {
    for (const auto& k : labels.vd_r) {
        if (labels.vd_l.count(k)) {
            throw DataError("overlapping labels for " + k.ip.str() + "@" + k.ixp_id);
        }
    }
    for (const auto& k : inferred.inf_r) {
        if (inferred.inf_l.count(k)) {
            throw DataError("conflicting verdicts for " + k.ip.str() + "@" + k.ixp_id);
        }
    }

    std::set<IfaceKey> vd(labels.vd_r);
    vd.insert(labels.vd_l.begin(), labels.vd_l.end());
    std::set<IfaceKey> inf(inferred.inf_r);
    inf.insert(inferred.inf_l.begin(), inferred.inf_l.end());

    MetricsReport m;
    m.n_vd = static_cast<long>(vd.size());
    m.n_inf = static_cast<long>(inf.size());
    m.n_inf_and_vd = count_intersection(inf, vd);
    m.n_inf_and_vd_l = count_intersection(inf, labels.vd_l);
    m.n_inf_and_vd_r = count_intersection(inf, labels.vd_r);
    m.n_inf_r_and_vd = count_intersection(inferred.inf_r, vd);
    m.n_inf_r_vd_r = count_intersection(inferred.inf_r, labels.vd_r);
    m.n_inf_r_vd_l = count_intersection(inferred.inf_r, labels.vd_l);
    m.n_inf_l_vd_r = count_intersection(inferred.inf_l, labels.vd_r);
    m.n_inf_l_vd_l = count_intersection(inferred.inf_l, labels.vd_l);

    m.cov = ratio(m.n_inf_and_vd, m.n_vd);
    m.fpr = ratio(m.n_inf_r_vd_l, m.n_inf_and_vd_l);
    m.fnr = ratio(m.n_inf_l_vd_r, m.n_inf_and_vd_r);
    m.pre = ratio(m.n_inf_r_vd_r, m.n_inf_r_and_vd);
    m.acc = ratio(m.n_inf_r_vd_r + m.n_inf_l_vd_l, m.n_inf_and_vd);
    return m;
}

InferredSets results_to_sets(const std::vector<InferenceResult>& results) {
    InferredSets out;
    for (const auto& r : results) {
        const IfaceKey key{r.interface.ip, r.interface.ixp_id};
        if (r.verdict == Verdict::Remote) out.inf_r.insert(key);
        if (r.verdict == Verdict::Local) out.inf_l.insert(key);
    }
    return out;
}

LabeledSets labels_to_sets(const std::vector<ValidationLabel>& labels,
                           const WorldModel& world) {
    LabeledSets out;
    const auto add = [&](const IfaceKey& key, LabelClass c) {
        (c == LabelClass::Remote ? out.vd_r : out.vd_l).insert(key);
    };
    for (const auto& label : labels) {
        if (label.ip) {
            add({*label.ip, label.ixp_id}, label.label);
        } else if (label.asn) {
            for (const auto& [ip, iface] : world.interfaces) {
                if (iface.asn == *label.asn && iface.ixp_id == label.ixp_id) {
                    add({ip, label.ixp_id}, label.label);
                }
            }
        }
    }
    for (const auto& k : out.vd_r) {
        if (out.vd_l.count(k)) {
            throw DataError("overlapping labels for " + k.ip.str() + "@" + k.ixp_id);
        }
    }
    return out;
}

PerStepMetrics per_step_metrics(const std::vector<InferenceResult>& results,
                                const LabeledSets& labels) {
    PerStepMetrics out;
    std::map<Step, std::vector<InferenceResult>> by_step;
    for (const auto& r : results) {
        if (r.step != Step::None) by_step[r.step].push_back(r);
    }
    for (const auto& [step, rs] : by_step) {
        out.steps[step] = compute_metrics(results_to_sets(rs), labels);
    }
    out.combined = compute_metrics(results_to_sets(results), labels);
    return out;
}

std::map<std::pair<Asn, std::string>, Verdict> rollup_member_level(
    const std::vector<InferenceResult>& results) {
    std::map<std::pair<Asn, std::string>, Verdict> out;
    for (const auto& r : results) {
        if (r.verdict == Verdict::Unknown) continue;
        auto [it, inserted] =
            out.emplace(std::make_pair(r.interface.asn, r.interface.ixp_id), r.verdict);
        if (!inserted && r.verdict == Verdict::Remote) it->second = Verdict::Remote;
    }
    return out;
}

}  // namespace rpinfer
