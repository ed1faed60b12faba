// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. argv[1] is the path to the CLI binary, used
// by the byte-determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "rpinfer/json_io.hpp"
#include "rpinfer/measurements.hpp"
#include "rpinfer/report.hpp"
#include "rpinfer/synth.hpp"
#include "rpinfer/validation.hpp"

using namespace rpinfer;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ": " << detail << "\n";
    if (!pass) ++g_failures;
}

LabeledSets truth_sets(const Scenario& scenario) {
    LabeledSets out;
    for (const auto& [key, verdict] : oracle_classify(scenario)) {
        (verdict == Verdict::Remote ? out.vd_r : out.vd_l).insert(key);
    }
    return out;
}

MetricsReport score(const Scenario& scenario, const PipelineOutput& out) {
    return compute_metrics(results_to_sets(out.results), truth_sets(scenario));
}

// C1: twenty seeded scenarios at the documented scale; accuracy and
// coverage against the generator's oracle, under a runtime ceiling.
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_acc = 1.0;
    long agree = 0, classified = 0, covered = 0, labeled = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_ixps = 30;
        cfg.members_per_ixp = 100;
        cfg.remote_fraction = 0.27;
        cfg.wide_area_fraction = 0.15;
        const auto scenario = generate(cfg);
        const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});
        const auto m = score(scenario, out);
        worst_acc = std::min(worst_acc, m.acc.value_or(0.0));
        agree += m.n_inf_r_vd_r + m.n_inf_l_vd_l;
        classified += m.n_inf_and_vd;
        covered += m.n_inf_and_vd;
        labeled += m.n_vd;
    }
    const double acc = static_cast<double>(agree) / classified;
    const double cov = static_cast<double>(covered) / labeled;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << "20 scenarios, ACC=" << acc << " (floor " << worst_acc << "), COV=" << cov
       << ", " << seconds << " s";
    report("C1 synthetic end-to-end accuracy",
           acc >= 0.95 && cov >= 0.93 && worst_acc >= 0.93 && seconds < 60.0, os.str());
}

// C2: on all-wide-area scenarios the flat 10 ms threshold misfires on far
// locals while the ring+colocation pipeline does not.
void criterion_2() {
    long base_rl = 0, base_inf_l = 0;
    long pipe_rl = 0, pipe_inf_l = 0;
    for (std::uint64_t seed = 31; seed <= 35; ++seed) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_ixps = 12;
        cfg.members_per_ixp = 80;
        cfg.wide_area_fraction = 1.0;
        const auto scenario = generate(cfg);
        const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});
        const auto labels = truth_sets(scenario);

        InferredSets base;
        for (const auto& b : out.baseline) {
            (b.verdict == Verdict::Remote ? base.inf_r : base.inf_l).insert(b.key);
        }
        const auto mb = compute_metrics(base, labels);
        base_rl += mb.n_inf_r_vd_l;
        base_inf_l += mb.n_inf_and_vd_l;
        const auto mp = score(scenario, out);
        pipe_rl += mp.n_inf_r_vd_l;
        pipe_inf_l += mp.n_inf_and_vd_l;
    }
    const double base_fpr = static_cast<double>(base_rl) / base_inf_l;
    const double pipe_fpr = static_cast<double>(pipe_rl) / pipe_inf_l;
    std::ostringstream os;
    os << "baseline FPR=" << base_fpr << ", pipeline FPR=" << pipe_fpr;
    report("C2 baseline superiority", base_fpr >= 0.15 && pipe_fpr <= 0.05, os.str());
}

// Independent fixed-point solver for the ring's inner radius.
double oracle_d_min_km(double rtt_eff_ms, const SpeedModel& m, double d_max_m) {
    const double t = rtt_eff_ms / 1000.0;
    const auto f = [&](double d) { return d - m.v_min_mps(d) * t; };
    double lo = -1, hi = -1, prev = d_max_m;
    for (int i = 199999; i >= 1; --i) {
        const double d = d_max_m * i / 200000;
        if (f(d) < 0.0 && f(prev) >= 0.0) {
            lo = d;
            hi = prev;
            break;
        }
        prev = d;
    }
    if (lo < 0) return 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / 1000.0;
}

void criterion_3() {
    SpeedModel m;
    const auto ring = feasible_range(4.0, RttResolution::SubMillisecond, m);
    const double oracle = oracle_d_min_km(4.0, m, m.v_max_mps * 0.004);
    std::ostringstream os;
    os << "d_max=" << ring.d_max_km << " km, d_min=" << ring.d_min_km
       << " km (oracle " << oracle << ")";
    report("C3 geometry of the 4 ms ring",
           ring.d_max_km >= 532.0 && ring.d_max_km <= 534.0 &&
               std::abs(ring.d_min_km - oracle) <= 1.0 &&
               std::abs(ring.d_min_km - 395.5) <= 1.0,
           os.str());
}

// C4: with clean data only resellers carry fractional ports, so the
// port-capacity stage is perfectly precise; 4% record corruption may cost
// at most five points.
void criterion_4() {
    const auto step1_precision = [](double corruption, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_ixps = 15;
        cfg.members_per_ixp = 100;
        cfg.corrupt_capacity_fraction = corruption;
        const auto scenario = generate(cfg);
        const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});
        const auto truth = oracle_classify(scenario);
        long tp = 0, fp = 0;
        for (const auto& r : out.results) {
            if (r.step != Step::PortCapacity) continue;
            if (truth.at({r.interface.ip, r.interface.ixp_id}) == Verdict::Remote) {
                ++tp;
            } else {
                ++fp;
            }
        }
        return std::pair<long, long>{tp, fp};
    };

    long tp_clean = 0, fp_clean = 0, tp_noise = 0, fp_noise = 0;
    for (std::uint64_t seed = 51; seed <= 55; ++seed) {
        const auto clean = step1_precision(0.0, seed);
        tp_clean += clean.first;
        fp_clean += clean.second;
        const auto noisy = step1_precision(0.04, seed);
        tp_noise += noisy.first;
        fp_noise += noisy.second;
    }
    const double clean_pre = static_cast<double>(tp_clean) / (tp_clean + fp_clean);
    const double noisy_pre = static_cast<double>(tp_noise) / (tp_noise + fp_noise);
    std::ostringstream os;
    os << "clean precision=" << clean_pre << " (n=" << tp_clean + fp_clean
       << "), corrupted precision=" << noisy_pre << " (n=" << tp_noise + fp_noise << ")";
    report("C4 port-capacity precision", clean_pre == 1.0 && noisy_pre >= 0.95, os.str());
}

void criterion_5() {
    std::mt19937_64 rng(505);
    const auto key = [](int i) {
        return IfaceKey{Ipv4{0x50510000u + static_cast<std::uint32_t>(i)}, "x"};
    };
    bool ok = true;
    for (int round = 0; round < 1000 && ok; ++round) {
        std::map<IfaceKey, Verdict> inferred;
        std::map<IfaceKey, LabelClass> labeled;
        const int n = 1 + static_cast<int>(rng() % 50);
        for (int i = 0; i < n; ++i) {
            const auto k = key(static_cast<int>(rng() % 40));
            switch (rng() % 3) {
                case 0: inferred[k] = Verdict::Remote; break;
                case 1: inferred[k] = Verdict::Local; break;
                default: break;
            }
            if (rng() % 2) {
                labeled[key(static_cast<int>(rng() % 40))] =
                    rng() % 2 ? LabelClass::Remote : LabelClass::Local;
            }
        }
        InferredSets inf;
        for (const auto& [k, v] : inferred) {
            (v == Verdict::Remote ? inf.inf_r : inf.inf_l).insert(k);
        }
        LabeledSets lab;
        for (const auto& [k, v] : labeled) {
            (v == LabelClass::Remote ? lab.vd_r : lab.vd_l).insert(k);
        }
        const auto m = compute_metrics(inf, lab);

        // Exhaustive enumeration over the key union.
        long vd = 0, infn = 0, both = 0, both_l = 0, both_r = 0;
        long rr = 0, rl = 0, lr = 0, ll = 0, r_and_vd = 0;
        std::set<IfaceKey> keys;
        for (const auto& [k, v] : inferred) keys.insert(k);
        for (const auto& [k, v] : labeled) keys.insert(k);
        for (const auto& k : keys) {
            const bool is_inf = inferred.count(k) > 0;
            const bool is_lab = labeled.count(k) > 0;
            if (is_lab) ++vd;
            if (is_inf) ++infn;
            if (is_inf && is_lab) {
                ++both;
                const bool inf_r = inferred.at(k) == Verdict::Remote;
                const bool lab_r = labeled.at(k) == LabelClass::Remote;
                if (!lab_r) ++both_l;
                if (lab_r) ++both_r;
                if (inf_r) ++r_and_vd;
                if (inf_r && lab_r) ++rr;
                if (inf_r && !lab_r) ++rl;
                if (!inf_r && lab_r) ++lr;
                if (!inf_r && !lab_r) ++ll;
            }
        }
        ok = ok && m.n_vd == vd && m.n_inf == infn && m.n_inf_and_vd == both &&
             m.n_inf_r_vd_r == rr && m.n_inf_r_vd_l == rl && m.n_inf_l_vd_r == lr &&
             m.n_inf_l_vd_l == ll;
        if (vd > 0) ok = ok && *m.cov == static_cast<double>(both) / vd;
        if (both_l > 0) ok = ok && *m.fpr == static_cast<double>(rl) / both_l;
        if (both_r > 0) ok = ok && *m.fnr == static_cast<double>(lr) / both_r;
        if (r_and_vd > 0) ok = ok && *m.pre == static_cast<double>(rr) / r_and_vd;
        if (both > 0) ok = ok && *m.acc == static_cast<double>(rr + ll) / both;
    }
    report("C5 metric oracle equivalence", ok, "1000 random labeled/inferred set pairs");
}

void criterion_6() {
    // The same two-exchange world the unit oracle uses, at full volume.
    WorldModel world;
    for (int i = 0; i < 3; ++i) {
        IxpRecord ixp;
        ixp.ixp_id = "x" + std::to_string(i);
        ixp.prefixes.push_back(Prefix::parse("80.81." + std::to_string(i) + ".0/24"));
        world.ixps.emplace(ixp.ixp_id, std::move(ixp));
    }
    std::vector<std::string> pool;
    int n_iface = 0;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            MemberInterface iface;
            iface.ip = Ipv4::parse("80.81." + std::to_string(i) + "." +
                                   std::to_string(10 + k));
            iface.asn = 65001 + (n_iface++ % 5);
            iface.ixp_id = "x" + std::to_string(i);
            pool.push_back(iface.ip.str());
            world.interfaces.emplace(iface.ip, iface);
        }
        pool.push_back("80.81." + std::to_string(i) + ".99");  // no interface record
    }
    for (Asn asn = 65001; asn <= 65006; ++asn) {
        world.routing.emplace_back(
            Prefix::parse("5.0." + std::to_string(asn - 65000) + ".0/24"), asn);
        pool.push_back("5.0." + std::to_string(asn - 65000) + ".1");
    }
    pool.push_back("9.9.9.9");
    world.finalize();

    const auto oracle = [&](const TraceroutePath& path) {
        std::vector<IxpCrossing> out;
        for (std::size_t i = 0; i + 2 < path.hops.size(); ++i) {
            const auto &h1 = path.hops[i], &h2 = path.hops[i + 1], &h3 = path.hops[i + 2];
            if (!(h2.index == h1.index + 1 && h3.index == h2.index + 1)) continue;
            if (!h1.ip || !h2.ip || !h3.ip) continue;
            const auto ixp = world.ixp_of_ip(*h2.ip);
            if (!ixp) continue;
            const auto mid = world.interfaces.find(*h2.ip);
            if (mid == world.interfaces.end()) continue;
            const auto a1 = world.asn_of_ip(*h1.ip);
            const auto a3 = world.asn_of_ip(*h3.ip);
            if (!a1 || !a3) continue;
            if (!(*a3 == mid->second.asn && *a1 != mid->second.asn)) continue;
            if (!world.is_member(*ixp, *a1) || !world.is_member(*ixp, mid->second.asn)) {
                continue;
            }
            IxpCrossing c;
            c.path_id = path.measurement_id;
            c.near_asn = *a1;
            c.ixp_id = *ixp;
            c.far_asn = mid->second.asn;
            c.triplet[0] = *h1.ip;
            c.triplet[1] = *h2.ip;
            c.triplet[2] = *h3.ip;
            out.push_back(c);
        }
        return out;
    };

    std::mt19937_64 rng(606);
    bool ok = true;
    long crossings = 0;
    for (int round = 0; round < 10000 && ok; ++round) {
        TraceroutePath path;
        path.measurement_id = "p" + std::to_string(round);
        const int n = 2 + static_cast<int>(rng() % 9);
        int index = 1;
        for (int i = 0; i < n; ++i) {
            TracerouteHop hop;
            if (rng() % 7 == 0) index += 1 + static_cast<int>(rng() % 2);
            hop.index = index++;
            if (rng() % 12 != 0) hop.ip = Ipv4::parse(pool[rng() % pool.size()]);
            path.hops.push_back(hop);
        }
        const auto got = detect_ixp_crossings(path, world);
        ok = ok && got == oracle(path);
        crossings += static_cast<long>(got.size());
    }
    std::ostringstream os;
    os << "10000 random paths, " << crossings << " crossings, exact match";
    report("C6 crossing-detector oracle", ok, os.str());
}

// C7: the full chain through the CLI twice; outputs must be byte-identical.
void criterion_7(const char* binary) {
    if (!binary) {
        report("C7 determinism", false, "no CLI binary path supplied");
        return;
    }
    const auto root = fs::temp_directory_path() / "rpinfer-acceptance-c7";
    fs::remove_all(root);
    fs::create_directories(root);
    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);

    const auto run_chain = [&](const std::string& tag) {
        const auto dir = root / tag;
        fs::create_directories(dir);
        std::ostringstream os;
        os << binary << " synth --out " << dir.string()
           << " --seed 7 --ixps 8 --members-per-ixp 50 2>/dev/null"
           << " && " << binary << " ingest --in " << (dir / "dataset").string()
           << " --out " << (dir / "world.json").string() << " 2>/dev/null"
           << " && " << binary << " infer --world " << (dir / "world.json").string()
           << " --pings " << (dir / "pings.csv").string() << " --traces "
           << (dir / "traces.jsonl").string() << " --aliases "
           << (dir / "aliases.jsonl").string() << " --out "
           << (dir / "results.json").string() << " 2>/dev/null"
           << " && " << binary << " validate --results " << (dir / "results.json").string()
           << " --labels " << (dir / "labels.json").string() << " --out "
           << (dir / "metrics.json").string() << " 2>/dev/null";
        return std::system(os.str().c_str());
    };
    const int rc1 = run_chain("a");
    const int rc2 = run_chain("b");
    bool ok = rc1 == 0 && rc2 == 0;
    std::string detail = "chain exit codes " + std::to_string(rc1) + "/" +
                         std::to_string(rc2);
    if (ok) {
        const auto bytes = [&](const std::string& tag, const char* name) {
            return read_text_file((root / tag / name).string());
        };
        const bool results_same = bytes("a", "results.json") == bytes("b", "results.json");
        const bool metrics_same = bytes("a", "metrics.json") == bytes("b", "metrics.json");
        ok = results_same && metrics_same;
        detail = std::string("results.json ") + (results_same ? "identical" : "DIFFER") +
                 ", metrics.json " + (metrics_same ? "identical" : "DIFFER");
    }
    report("C7 determinism", ok, detail);
    fs::remove_all(root);
}

void criterion_8() {
    bool ok = true;
    std::ostringstream os;

    // Hand-checked pairs around the 50 km threshold: ~60.1 km apart is
    // wide-area, ~44.5 km is not.
    {
        WorldModel world;
        IxpRecord wide;
        wide.ixp_id = "w";
        IxpRecord tight;
        tight.ixp_id = "t";
        const auto add_fac = [&](const std::string& id, double lat, double lon,
                                 IxpRecord& ixp) {
            FacilityRecord f;
            f.facility_id = id;
            f.location = GeoPoint{lat, lon};
            f.hosted_ixps.insert(ixp.ixp_id);
            ixp.facility_ids.insert(id);
            world.facilities.emplace(id, std::move(f));
        };
        add_fac("w1", 52.0, 4.0, wide);
        add_fac("w2", 52.0, 4.88, wide);  // ~60.1 km east
        add_fac("t1", 52.0, 6.0, tight);
        add_fac("t2", 52.40, 6.0, tight);  // ~44.5 km north
        world.ixps.emplace("w", std::move(wide));
        world.ixps.emplace("t", std::move(tight));
        world.finalize();
        const auto vw = classify_wide_area(world.ixps.at("w"), world);
        const auto vt = classify_wide_area(world.ixps.at("t"), world);
        ok = ok && vw.is_wide_area && !vt.is_wide_area;
        os << "60km pair wide=" << vw.is_wide_area << ", 44km pair wide=" << vt.is_wide_area;
    }

    // Frozen ellipsoidal references on city pairs (spot sample; the full
    // table lives in the geo unit suite).
    struct Row {
        double lat1, lon1, lat2, lon2, km;
    };
    const Row rows[] = {
        {52.3702, 4.8952, 51.5074, -0.1278, 358.447},
        {51.5074, -0.1278, 44.4268, 26.1025, 2096.717},
        {40.4168, -3.7038, 60.1699, 24.9384, 2952.960},
        {38.7223, -9.1393, 50.4501, 30.5234, 3359.319},
        {59.3293, 18.0686, 60.1699, 24.9384, 397.219},
    };
    double worst = 0.0;
    for (const auto& row : rows) {
        const double km =
            geodesic_km(GeoPoint{row.lat1, row.lon1}, GeoPoint{row.lat2, row.lon2});
        worst = std::max(worst, std::abs(km - row.km) / row.km);
    }
    ok = ok && worst < 0.005;
    os << ", worst geodesic error " << worst * 100 << "%";
    report("C8 wide-area classification and geodesics", ok, os.str());
}

}  // namespace

int main(int argc, char** argv) {
    const char* binary = argc > 1 ? argv[1] : nullptr;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(binary);
    criterion_8();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
