#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpinfer/report.hpp"
#include "rpinfer/synth.hpp"

using namespace rpinfer;

namespace {

InferenceResult result(const std::string& ip, Asn asn, const std::string& ixp,
                       Verdict v, Step s) {
    InferenceResult r;
    r.interface.ip = Ipv4::parse(ip);
    r.interface.asn = asn;
    r.interface.ixp_id = ixp;
    r.verdict = v;
    r.step = s;
    return r;
}

std::vector<InferenceResult> sample_results() {
    return {
        result("80.81.0.10", 65001, "x0", Verdict::Local, Step::RttColo),
        result("80.81.0.11", 65002, "x0", Verdict::Remote, Step::PortCapacity),
        result("80.81.0.12", 65003, "x0", Verdict::Remote, Step::MultiIxp),
        result("80.81.0.13", 65004, "x0", Verdict::Unknown, Step::None),
        result("80.81.1.10", 65001, "x1", Verdict::Local, Step::PrivateVoting),
    };
}

// x0 spans Amsterdam and Vienna (wide-area); x1 sits in one site.
WorldModel sample_world() {
    WorldModel world;
    const auto add_ixp = [&](const std::string& id, const std::string& lan) {
        IxpRecord x;
        x.ixp_id = id;
        x.prefixes.push_back(Prefix::parse(lan));
        world.ixps.emplace(id, std::move(x));
    };
    add_ixp("x0", "80.81.0.0/24");
    add_ixp("x1", "80.81.1.0/24");
    const auto add_fac = [&](const std::string& id, GeoPoint at, const std::string& ixp) {
        FacilityRecord f;
        f.facility_id = id;
        f.location = at;
        f.hosted_ixps.insert(ixp);
        world.ixps.at(ixp).facility_ids.insert(id);
        world.facilities.emplace(id, std::move(f));
    };
    add_fac("ams", GeoPoint{52.3702, 4.8952}, "x0");
    add_fac("vie", GeoPoint{48.2082, 16.3738}, "x0");
    add_fac("lon", GeoPoint{51.5074, -0.1278}, "x1");
    world.finalize();
    return world;
}

ReportBundle sample_bundle() {
    const auto results = sample_results();
    return build_report(results, classify_members(results), sample_world());
}

}  // namespace

TEST_CASE("per-exchange tallies and shares") {
    const auto bundle = sample_bundle();
    REQUIRE(bundle.per_ixp.size() == 2);
    const auto& x0 = bundle.per_ixp[0];
    CHECK(x0.ixp_id == "x0");
    CHECK(x0.interfaces == 4);
    CHECK(x0.local == 1);
    CHECK(x0.remote == 2);
    CHECK(x0.unknown == 1);
    CHECK(x0.local_share == doctest::Approx(1.0 / 3.0));
    CHECK(x0.remote_share == doctest::Approx(2.0 / 3.0));
    CHECK(x0.unknown_share == doctest::Approx(0.25));
    CHECK(x0.wide_area);
    CHECK(x0.max_pairwise_km > 900.0);
    CHECK_FALSE(bundle.per_ixp[1].wide_area);
}

TEST_CASE("step contribution shares sum to one over classified interfaces") {
    const auto bundle = sample_bundle();
    for (const auto& row : bundle.per_step) {
        double sum = 0.0;
        long classified = 0;
        for (const auto& [step, share] : row.shares) sum += share;
        for (const auto& [step, n] : row.counts) classified += n;
        if (classified > 0) CHECK(sum == doctest::Approx(1.0));
    }
    // The aggregate row counts everything.
    CHECK(bundle.per_step[0].ixp_id == "all");
    long total = 0;
    for (const auto& [step, n] : bundle.per_step[0].counts) total += n;
    CHECK(total == 4);
}

TEST_CASE("an exchange with only unknowns reports zero shares without crashing") {
    std::vector<InferenceResult> results = {
        result("80.81.0.10", 65001, "x0", Verdict::Unknown, Step::None)};
    const auto bundle = build_report(results, classify_members(results), sample_world());
    REQUIRE(bundle.per_ixp.size() == 1);
    CHECK(bundle.per_ixp[0].local_share == 0.0);
    CHECK(bundle.per_ixp[0].remote_share == 0.0);
    CHECK(bundle.per_ixp[0].unknown_share == 1.0);
}

TEST_CASE("member class rows cover all four classes") {
    const auto bundle = sample_bundle();
    REQUIRE(bundle.member_classes.size() == 4);
    CHECK(bundle.member_classes[0].cls == "Local");
    double share_sum = 0.0;
    for (const auto& row : bundle.member_classes) share_sum += row.share;
    CHECK(share_sum == doctest::Approx(1.0));
}

TEST_CASE("csv headers are frozen") {
    const auto bundle = sample_bundle();
    CHECK(per_ixp_csv(bundle).rfind(
              "ixp_id,interfaces,local,remote,unknown,local_share,remote_share,"
              "unknown_share,wide_area,max_pairwise_km\n",
              0) == 0);
    CHECK(per_step_csv(bundle).rfind(
              "ixp_id,port_capacity,rtt_colo,multi_ixp,private_voting,"
              "port_capacity_share,rtt_colo_share,multi_ixp_share,private_voting_share\n",
              0) == 0);
    CHECK(member_class_csv(bundle).rfind("class,count,share\n", 0) == 0);
}

TEST_CASE("report json key sets are stable") {
    const auto body = report_json(sample_bundle());
    REQUIRE(body.contains("per_ixp"));
    REQUIRE(body.contains("per_step"));
    REQUIRE(body.contains("member_classes"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : body.at("per_ixp")[0].items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"interfaces", "ixp_id", "local", "local_share",
                                           "max_pairwise_km", "remote", "remote_share",
                                           "unknown", "unknown_share", "wide_area"});
}

TEST_CASE("report shares track the generated remote fraction") {
    SynthConfig cfg;
    cfg.seed = 23;
    cfg.n_ixps = 10;
    cfg.members_per_ixp = 60;
    cfg.remote_fraction = 0.40;
    cfg.reseller_fraction = 0.20;
    const auto scenario = generate(cfg);
    const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});
    const auto bundle = build_report(out.results, out.member_classes, scenario.world);
    long remote = 0, classified = 0;
    for (const auto& row : bundle.per_ixp) {
        remote += row.remote;
        classified += row.local + row.remote;
    }
    CHECK(static_cast<double>(remote) / classified == doctest::Approx(0.40).epsilon(0.08));
}

TEST_CASE("facility geojson emits points and optional rings") {
    SynthConfig cfg;
    cfg.seed = 24;
    cfg.n_ixps = 4;
    cfg.members_per_ixp = 20;
    const auto scenario = generate(cfg);
    const auto out = run_pipeline(scenario.world, scenario_inputs(scenario), {});

    const auto plain = facilities_geojson(scenario.world, out.results);
    CHECK(plain.at("type") == "FeatureCollection");
    std::size_t points = 0;
    for (const auto& f : plain.at("features")) {
        if (f.at("geometry").at("type") == "Point") ++points;
    }
    CHECK(points == scenario.world.facilities.size());

    const std::string ixp = scenario.world.ixps.begin()->first;
    const auto ringed = facilities_geojson(scenario.world, out.results, ixp);
    std::size_t polygons = 0;
    for (const auto& f : ringed.at("features")) {
        if (f.at("geometry").at("type") == "Polygon") ++polygons;
    }
    CHECK(polygons > 0);
}
