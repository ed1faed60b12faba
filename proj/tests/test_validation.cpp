#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rpinfer/synth.hpp"
#include "rpinfer/validation.hpp"

using namespace rpinfer;

namespace {

IfaceKey key(int i) {
    return IfaceKey{Ipv4{0x50510000u + static_cast<std::uint32_t>(i)}, "x"};
}

// Exhaustive confusion-cell enumeration over explicit verdict maps; the
// independent oracle for the set-algebra implementation.
struct OracleCounts {
    long vd = 0, inf = 0, both = 0, both_l = 0, both_r = 0;
    long rr = 0, rl = 0, lr = 0, ll = 0, inf_r_vd = 0;
};

OracleCounts enumerate(const std::map<IfaceKey, Verdict>& inferred,
                       const std::map<IfaceKey, LabelClass>& labeled) {
    OracleCounts c;
    std::set<IfaceKey> keys;
    for (const auto& [k, v] : inferred) keys.insert(k);
    for (const auto& [k, v] : labeled) keys.insert(k);
    for (const auto& k : keys) {
        const auto inf_it = inferred.find(k);
        const auto lab_it = labeled.find(k);
        const bool has_lab = lab_it != labeled.end();
        const bool is_inf = inf_it != inferred.end() && inf_it->second != Verdict::Unknown;
        if (has_lab) ++c.vd;
        if (is_inf) ++c.inf;
        if (is_inf && has_lab) {
            const Verdict inf = inf_it->second;
            const LabelClass lab = lab_it->second;
            ++c.both;
            if (lab == LabelClass::Local) ++c.both_l;
            if (lab == LabelClass::Remote) ++c.both_r;
            if (inf == Verdict::Remote) ++c.inf_r_vd;
            if (inf == Verdict::Remote && lab == LabelClass::Remote) ++c.rr;
            if (inf == Verdict::Remote && lab == LabelClass::Local) ++c.rl;
            if (inf == Verdict::Local && lab == LabelClass::Remote) ++c.lr;
            if (inf == Verdict::Local && lab == LabelClass::Local) ++c.ll;
        }
    }
    return c;
}

std::pair<InferredSets, LabeledSets> to_sets(
    const std::map<IfaceKey, Verdict>& inferred,
    const std::map<IfaceKey, LabelClass>& labeled) {
    InferredSets inf;
    for (const auto& [k, v] : inferred) {
        if (v == Verdict::Remote) inf.inf_r.insert(k);
        if (v == Verdict::Local) inf.inf_l.insert(k);
    }
    LabeledSets lab;
    for (const auto& [k, v] : labeled) {
        (v == LabelClass::Remote ? lab.vd_r : lab.vd_l).insert(k);
    }
    return {inf, lab};
}

}  // namespace

TEST_CASE("perfect agreement scores perfectly") {
    std::map<IfaceKey, Verdict> inferred;
    std::map<IfaceKey, LabelClass> labeled;
    for (int i = 0; i < 10; ++i) {
        const bool remote = i % 2 == 0;
        inferred[key(i)] = remote ? Verdict::Remote : Verdict::Local;
        labeled[key(i)] = remote ? LabelClass::Remote : LabelClass::Local;
    }
    const auto [inf, lab] = to_sets(inferred, labeled);
    const auto m = compute_metrics(inf, lab);
    CHECK(*m.cov == 1.0);
    CHECK(*m.fpr == 0.0);
    CHECK(*m.fnr == 0.0);
    CHECK(*m.pre == 1.0);
    CHECK(*m.acc == 1.0);
}

TEST_CASE("hand-enumerated confusion sets") {
    // labels: a,b remote; c,d local. inferred: a remote, b local, c remote,
    // e local (unlabeled).
    std::map<IfaceKey, Verdict> inferred{{key(0), Verdict::Remote},
                                         {key(1), Verdict::Local},
                                         {key(2), Verdict::Remote},
                                         {key(4), Verdict::Local}};
    std::map<IfaceKey, LabelClass> labeled{{key(0), LabelClass::Remote},
                                           {key(1), LabelClass::Remote},
                                           {key(2), LabelClass::Local},
                                           {key(3), LabelClass::Local}};
    const auto [inf, lab] = to_sets(inferred, labeled);
    const auto m = compute_metrics(inf, lab);
    CHECK(*m.cov == doctest::Approx(0.75));
    CHECK(*m.fpr == doctest::Approx(1.0));
    CHECK(*m.fnr == doctest::Approx(0.5));
    CHECK(*m.pre == doctest::Approx(0.5));
    CHECK(*m.acc == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ratios with empty denominators are absent, not zero") {
    std::map<IfaceKey, Verdict> inferred{{key(0), Verdict::Remote}};
    std::map<IfaceKey, LabelClass> labeled{{key(0), LabelClass::Remote}};
    const auto [inf, lab] = to_sets(inferred, labeled);
    const auto m = compute_metrics(inf, lab);
    CHECK_FALSE(m.fpr.has_value());  // nothing labeled local was inferred
    CHECK(m.cov.has_value());
    CHECK(*m.acc == 1.0);
}

TEST_CASE("overlapping labels are rejected") {
    LabeledSets lab;
    lab.vd_r.insert(key(0));
    lab.vd_l.insert(key(0));
    CHECK_THROWS_AS(compute_metrics({}, lab), DataError);
}

TEST_CASE("metrics equal brute-force enumeration on random sets") {
    std::mt19937_64 rng(71);
    for (int round = 0; round < 1000; ++round) {
        std::map<IfaceKey, Verdict> inferred;
        std::map<IfaceKey, LabelClass> labeled;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            const auto k = key(static_cast<int>(rng() % 30));
            switch (rng() % 3) {
                case 0: inferred[k] = Verdict::Remote; break;
                case 1: inferred[k] = Verdict::Local; break;
                default: inferred[k] = Verdict::Unknown; break;
            }
            if (rng() % 2) {
                labeled[key(static_cast<int>(rng() % 30))] =
                    rng() % 2 ? LabelClass::Remote : LabelClass::Local;
            }
        }
        const auto [inf, lab] = to_sets(inferred, labeled);
        const auto m = compute_metrics(inf, lab);
        const auto c = enumerate(inferred, labeled);

        CHECK(m.n_vd == c.vd);
        CHECK(m.n_inf == c.inf);
        CHECK(m.n_inf_and_vd == c.both);
        CHECK(m.n_inf_r_vd_r == c.rr);
        CHECK(m.n_inf_r_vd_l == c.rl);
        CHECK(m.n_inf_l_vd_r == c.lr);
        CHECK(m.n_inf_l_vd_l == c.ll);
        // Exact rational equality: same integer numerators and denominators.
        if (c.vd > 0) CHECK(*m.cov == static_cast<double>(c.both) / c.vd);
        if (c.both_l > 0) CHECK(*m.fpr == static_cast<double>(c.rl) / c.both_l);
        if (c.both_r > 0) CHECK(*m.fnr == static_cast<double>(c.lr) / c.both_r);
        if (c.inf_r_vd > 0) CHECK(*m.pre == static_cast<double>(c.rr) / c.inf_r_vd);
        if (c.both > 0) CHECK(*m.acc == static_cast<double>(c.rr + c.ll) / c.both);
    }
}

TEST_CASE("metrics are invariant under interface relabeling") {
    std::mt19937_64 rng(72);
    std::map<IfaceKey, Verdict> inferred;
    std::map<IfaceKey, LabelClass> labeled;
    for (int i = 0; i < 20; ++i) {
        inferred[key(i)] = rng() % 2 ? Verdict::Remote : Verdict::Local;
        if (rng() % 2) labeled[key(i)] = rng() % 2 ? LabelClass::Remote : LabelClass::Local;
    }
    const auto [inf1, lab1] = to_sets(inferred, labeled);
    const auto m1 = compute_metrics(inf1, lab1);

    // Bijective rename: shift every address by a constant.
    std::map<IfaceKey, Verdict> inferred2;
    std::map<IfaceKey, LabelClass> labeled2;
    for (const auto& [k, v] : inferred) {
        inferred2[IfaceKey{Ipv4{k.ip.value + 7000}, k.ixp_id}] = v;
    }
    for (const auto& [k, v] : labeled) {
        labeled2[IfaceKey{Ipv4{k.ip.value + 7000}, k.ixp_id}] = v;
    }
    const auto [inf2, lab2] = to_sets(inferred2, labeled2);
    const auto m2 = compute_metrics(inf2, lab2);
    CHECK(m1.cov == m2.cov);
    CHECK(m1.acc == m2.acc);
    CHECK(m1.pre == m2.pre);
    CHECK(m1.fpr == m2.fpr);
    CHECK(m1.fnr == m2.fnr);
}

TEST_CASE("accuracy decomposes into the error cells") {
    std::mt19937_64 rng(73);
    for (int round = 0; round < 200; ++round) {
        std::map<IfaceKey, Verdict> inferred;
        std::map<IfaceKey, LabelClass> labeled;
        for (int i = 0; i < 25; ++i) {
            if (rng() % 2) inferred[key(i)] = rng() % 2 ? Verdict::Remote : Verdict::Local;
            if (rng() % 2) labeled[key(i)] = rng() % 2 ? LabelClass::Remote : LabelClass::Local;
        }
        const auto [inf, lab] = to_sets(inferred, labeled);
        const auto m = compute_metrics(inf, lab);
        if (!m.acc) continue;
        const double lhs = m.n_inf_and_vd * *m.acc + m.n_inf_r_vd_l + m.n_inf_l_vd_r;
        CHECK(lhs == doctest::Approx(static_cast<double>(m.n_inf_and_vd)).epsilon(1e-12));
    }
}

TEST_CASE("per-step restriction and the combined row") {
    std::vector<InferenceResult> results;
    LabeledSets labels;
    for (int i = 0; i < 12; ++i) {
        InferenceResult r;
        r.interface.ip = key(i).ip;
        r.interface.ixp_id = "x";
        r.interface.asn = 65000 + i;
        if (i < 6) {
            r.verdict = Verdict::Remote;
            r.step = Step::PortCapacity;
        } else {
            r.verdict = Verdict::Unknown;
            r.step = Step::None;
        }
        results.push_back(r);
        (i % 3 == 0 ? labels.vd_l : labels.vd_r).insert(key(i));
    }
    const auto per_step = per_step_metrics(results, labels);
    CHECK(per_step.steps.count(Step::PortCapacity) == 1);
    CHECK(per_step.steps.count(Step::RttColo) == 0);
    // The combined row is exactly compute_metrics over everything.
    const auto direct = compute_metrics(results_to_sets(results), labels);
    CHECK(per_step.combined.acc == direct.acc);
    CHECK(per_step.combined.cov == direct.cov);
    CHECK(per_step.combined.n_inf == direct.n_inf);
}

TEST_CASE("five percent label noise costs about five points of accuracy") {
    SynthConfig cfg;
    cfg.seed = 77;
    cfg.n_ixps = 10;
    cfg.members_per_ixp = 80;
    cfg.label_flip_fraction = 0.05;
    const auto scenario = generate(cfg);
    const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});

    // Labels as emitted (files), not the oracle: 5% are flipped.
    LabeledSets noisy;
    for (const auto& rec : scenario.labels_document.records) {
        const IfaceKey k{Ipv4::parse(rec.at("ip").get<std::string>()),
                         rec.at("ixp_id").get<std::string>()};
        (rec.at("label") == "Remote" ? noisy.vd_r : noisy.vd_l).insert(k);
    }
    const auto m = compute_metrics(results_to_sets(out.results), noisy);
    REQUIRE(m.acc.has_value());
    CHECK(*m.acc == doctest::Approx(0.95).epsilon(0.025));
}

TEST_CASE("member-level rollup marks any-remote members remote") {
    std::vector<InferenceResult> results(3);
    results[0].interface.asn = 1;
    results[0].interface.ixp_id = "x";
    results[0].verdict = Verdict::Local;
    results[1].interface.asn = 1;
    results[1].interface.ixp_id = "x";
    results[1].verdict = Verdict::Remote;
    results[2].interface.asn = 2;
    results[2].interface.ixp_id = "x";
    results[2].verdict = Verdict::Unknown;
    const auto rollup = rollup_member_level(results);
    CHECK(rollup.at({1, "x"}) == Verdict::Remote);
    CHECK(rollup.count({2, "x"}) == 0);
}
