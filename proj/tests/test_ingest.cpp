#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "rpinfer/ingest.hpp"
#include "rpinfer/json_io.hpp"

using namespace rpinfer;
using nlohmann::json;

namespace {

Document doc(const std::string& name, const std::string& kind, SourceTag source,
             json records) {
    Document d;
    d.name = name;
    d.kind = kind;
    d.source = source;
    d.records = std::move(records);
    return d;
}

// Minimal consistent dataset: one exchange, one facility, three members.
std::vector<Document> base_docs() {
    std::vector<Document> docs;
    docs.push_back(doc("ixps.json", "ixps", SourceTag::Website,
                       json::array({{{"ixp_id", "x1"},
                                     {"name", "X1"},
                                     {"prefixes", json::array({"80.81.192.0/21"})},
                                     {"facility_ids", json::array({"f1"})},
                                     {"min_physical_capacity_mbps", 1000}}})));
    docs.push_back(doc("facilities.json", "facilities", SourceTag::PDB,
                       json::array({{{"facility_id", "f1"},
                                     {"name", "F one"},
                                     {"latitude", 52.3},
                                     {"longitude", 4.9},
                                     {"hosted_asns", json::array({64500})}}})));
    docs.push_back(doc("interfaces.json", "interfaces", SourceTag::Website,
                       json::array({{{"ip", "80.81.192.1"}, {"asn", 64500}, {"ixp_id", "x1"}},
                                    {{"ip", "80.81.192.2"}, {"asn", 64501}, {"ixp_id", "x1"}},
                                    {{"ip", "80.81.192.3"}, {"asn", 64502}, {"ixp_id", "x1"}}})));
    return docs;
}

std::string world_fingerprint(const WorldModel& world) {
    return world_to_json(world).dump();
}

}  // namespace

TEST_CASE("resolve_conflicts follows source precedence") {
    using Entry = std::pair<std::string, SourceTag>;
    CHECK(resolve_conflicts<std::string>({Entry{"A", SourceTag::PDB},
                                          Entry{"B", SourceTag::Website}}) == "B");
    CHECK(resolve_conflicts<std::string>({Entry{"A", SourceTag::HE}}) == "A");
    CHECK(resolve_conflicts<std::string>({Entry{"A", SourceTag::PCH},
                                          Entry{"B", SourceTag::HE},
                                          Entry{"C", SourceTag::PDB}}) == "B");
    CHECK_THROWS_AS(resolve_conflicts<std::string>({}), DataError);
}

TEST_CASE("resolve_conflicts is order independent") {
    std::vector<std::pair<Asn, SourceTag>> entries = {
        {10, SourceTag::PCH}, {20, SourceTag::PDB}, {30, SourceTag::HE},
        {40, SourceTag::Custom}};
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        std::shuffle(entries.begin(), entries.end(), rng);
        CHECK(resolve_conflicts(entries) == 30u);
    }
}

TEST_CASE("same-precedence ties pick the smallest value and are logged") {
    std::vector<std::string> log;
    const auto v = resolve_conflicts<std::string>(
        {{"beta", SourceTag::PDB}, {"alpha", SourceTag::PDB}}, ConflictDomain::General,
        &log);
    CHECK(v == "alpha");
    CHECK(log.size() == 1);
}

TEST_CASE("inflect outranks everyone for facility coordinates only") {
    using Coord = std::pair<double, double>;
    CHECK(resolve_conflicts<Coord>({{Coord{1, 1}, SourceTag::PDB},
                                    {Coord{2, 2}, SourceTag::Inflect}},
                                   ConflictDomain::FacilityCoordinates) == Coord{2, 2});
    // In the general domain Inflect ranks below PDB.
    CHECK(resolve_conflicts<std::string>({{"pdb", SourceTag::PDB},
                                          {"inflect", SourceTag::Inflect}}) == "pdb");
}

TEST_CASE("agreeing sources merge without conflicts") {
    auto docs = base_docs();
    docs.push_back(doc("pch.json", "interfaces", SourceTag::PCH,
                       json::array({{{"ip", "80.81.192.1"}, {"asn", 64500},
                                     {"ixp_id", "x1"}}})));
    const auto result = parse_world(docs);
    CHECK(result.world.interfaces.size() == 3);
    CHECK(result.world.interfaces.at(Ipv4::parse("80.81.192.1")).asn == 64500u);
    CHECK(result.report.sources.at("PCH").at("interfaces").conflicts == 0);
}

TEST_CASE("losing source gets the conflict counted") {
    auto docs = base_docs();
    docs.push_back(doc("pch.json", "interfaces", SourceTag::PCH,
                       json::array({{{"ip", "80.81.192.1"}, {"asn", 65999},
                                     {"ixp_id", "x1"}}})));
    const auto result = parse_world(docs);
    CHECK(result.world.interfaces.at(Ipv4::parse("80.81.192.1")).asn == 64500u);
    CHECK(result.report.sources.at("PCH").at("interfaces").conflicts == 1);
    CHECK(result.report.sources.at("Website").at("interfaces").conflicts == 0);
}

TEST_CASE("identity ingestion keeps exact counts") {
    std::vector<Document> docs;
    docs.push_back(doc("ixps.json", "ixps", SourceTag::Website,
                       json::array({{{"ixp_id", "x1"},
                                     {"prefixes",
                                      json::array({"80.81.0.0/24", "80.81.1.0/24",
                                                   "80.81.2.0/24"})}}})));
    json ifaces = json::array();
    for (int i = 0; i < 10; ++i) {
        ifaces.push_back({{"ip", "80.81.0." + std::to_string(i + 1)},
                          {"asn", 64500 + i},
                          {"ixp_id", "x1"}});
    }
    docs.push_back(doc("interfaces.json", "interfaces", SourceTag::Website, ifaces));
    const auto result = parse_world(docs);
    CHECK(result.world.ixps.at("x1").prefixes.size() == 3);
    CHECK(result.world.interfaces.size() == 10);
    CHECK(result.report.sources.at("Website").at("prefixes").total == 3);
    CHECK(result.report.sources.at("Website").at("interfaces").total == 10);
    CHECK(result.report.sources.at("Website").at("interfaces").unique == 10);
}

TEST_CASE("accounting: conflicts never exceed totals, unique tracks sole sources") {
    auto docs = base_docs();
    docs.push_back(doc("he.json", "interfaces", SourceTag::HE,
                       json::array({{{"ip", "80.81.192.2"}, {"asn", 60000},
                                     {"ixp_id", "x1"}},
                                    {{"ip", "80.81.192.9"}, {"asn", 60009},
                                     {"ixp_id", "x1"}}})));
    const auto result = parse_world(docs);
    for (const auto& [source, kinds] : result.report.sources) {
        for (const auto& [kind, counts] : kinds) {
            CHECK(counts.conflicts <= counts.total);
            CHECK(counts.unique <= counts.total);
        }
    }
    // 80.81.192.9 comes only from HE.
    CHECK(result.report.sources.at("HE").at("interfaces").unique == 1);
    CHECK(result.report.sources.at("HE").at("interfaces").conflicts == 1);
    CHECK(result.world.interfaces.size() == 4);

    // Distinct merged entries equal the per-source totals minus the
    // overlap double-counting: 3 (Website) + 2 (HE) - 1 shared key = 4.
    long totals = 0;
    for (const auto& [source, kinds] : result.report.sources) {
        if (kinds.count("interfaces")) totals += kinds.at("interfaces").total;
    }
    CHECK(totals - 1 == static_cast<long>(result.world.interfaces.size()));
}

TEST_CASE("merge is idempotent under reserialization") {
    auto docs = base_docs();
    std::vector<Document> reserialized;
    for (const auto& d : docs) {
        const json round = json::parse(
            json{{"kind", d.kind}, {"source", to_string(d.source)}, {"records", d.records}}
                .dump());
        reserialized.push_back(Document::from_json(d.name, round));
    }
    CHECK(world_fingerprint(parse_world(docs).world) ==
          world_fingerprint(parse_world(reserialized).world));
}

TEST_CASE("merge result is independent of document order") {
    auto docs = base_docs();
    docs.push_back(doc("pch.json", "interfaces", SourceTag::PCH,
                       json::array({{{"ip", "80.81.192.1"}, {"asn", 65999},
                                     {"ixp_id", "x1"}}})));
    const auto fingerprint = world_fingerprint(parse_world(docs).world);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(docs.begin(), docs.end(), rng);
        CHECK(world_fingerprint(parse_world(docs).world) == fingerprint);
    }
}

TEST_CASE("interface outside its exchange's LANs is quarantined") {
    auto docs = base_docs();
    docs[2].records.push_back(
        json{{"ip", "9.9.9.9"}, {"asn", 64777}, {"ixp_id", "x1"}});
    const auto result = parse_world(docs);
    CHECK(result.world.interfaces.count(Ipv4::parse("9.9.9.9")) == 0);
    bool found = false;
    for (const auto& q : result.report.quarantine) {
        if (q.key == "9.9.9.9") found = true;
    }
    CHECK(found);
}

TEST_CASE("non-positive asn is quarantined") {
    auto docs = base_docs();
    docs[2].records.push_back(
        json{{"ip", "80.81.192.7"}, {"asn", 0}, {"ixp_id", "x1"}});
    const auto result = parse_world(docs);
    CHECK(result.world.interfaces.count(Ipv4::parse("80.81.192.7")) == 0);
    CHECK_FALSE(result.report.quarantine.empty());
}

TEST_CASE("facility with out-of-range coordinates is quarantined") {
    auto docs = base_docs();
    docs[1].records.push_back(json{{"facility_id", "f2"},
                                   {"latitude", 123.0},
                                   {"longitude", 4.0}});
    const auto result = parse_world(docs);
    CHECK(result.world.facilities.count("f2") == 0);
    bool found = false;
    for (const auto& q : result.report.quarantine) {
        if (q.key == "f2") found = true;
    }
    CHECK(found);
}

TEST_CASE("overlapping peering LANs within one exchange are quarantined") {
    auto docs = base_docs();
    docs[0].records[0]["prefixes"].push_back("80.81.192.0/24");  // inside the /21
    const auto result = parse_world(docs);
    CHECK(result.world.ixps.at("x1").prefixes.size() == 1);
    bool found = false;
    for (const auto& q : result.report.quarantine) {
        if (q.kind == "prefixes") found = true;
    }
    CHECK(found);
}

TEST_CASE("conflicting labels at equal precedence are quarantined") {
    auto docs = base_docs();
    docs.push_back(doc("l1.json", "labels", SourceTag::Custom,
                       json::array({{{"ixp_id", "x1"}, {"ip", "80.81.192.1"},
                                     {"label", "Local"}}})));
    docs.push_back(doc("l2.json", "labels", SourceTag::Custom,
                       json::array({{{"ixp_id", "x1"}, {"ip", "80.81.192.1"},
                                     {"label", "Remote"}}})));
    const auto result = parse_world(docs);
    CHECK(result.world.labels.empty());
    bool found = false;
    for (const auto& q : result.report.quarantine) {
        if (q.kind == "labels") found = true;
    }
    CHECK(found);
    // Higher precedence wins instead of quarantining.
    docs.pop_back();
    docs.push_back(doc("l2.json", "labels", SourceTag::Website,
                       json::array({{{"ixp_id", "x1"}, {"ip", "80.81.192.1"},
                                     {"label", "Remote"}}})));
    const auto resolved = parse_world(docs);
    REQUIRE(resolved.world.labels.size() == 1);
    CHECK(resolved.world.labels[0].label == LabelClass::Remote);
}

TEST_CASE("unknown exchange references raise link errors") {
    auto docs = base_docs();
    docs[2].records.push_back(
        json{{"ip", "80.81.192.8"}, {"asn", 64999}, {"ixp_id", "nope"}});
    CHECK_THROWS_AS(parse_world(docs), LinkError);
}

TEST_CASE("dangling facility references are dropped with a note") {
    auto docs = base_docs();
    docs[0].records[0]["facility_ids"].push_back("ghost");
    const auto result = parse_world(docs);
    CHECK(result.world.ixps.at("x1").facility_ids.count("ghost") == 0);
    bool noted = false;
    for (const auto& q : result.report.quarantine) {
        if (q.reason.find("ghost") != std::string::npos) noted = true;
    }
    CHECK(noted);
}

TEST_CASE("exchange-facility cross references close in both directions") {
    auto docs = base_docs();
    // f2 claims to host x1 without x1 listing it.
    docs[1].records.push_back(json{{"facility_id", "f2"},
                                   {"latitude", 50.0},
                                   {"longitude", 5.0},
                                   {"hosted_ixps", json::array({"x1"})}});
    const auto result = parse_world(docs);
    CHECK(result.world.ixps.at("x1").facility_ids.count("f2") == 1);
    CHECK(result.world.facilities.at("f1").hosted_ixps.count("x1") == 1);
    CHECK(result.world.facilities_of_ixp("x1").size() == 2);
}

TEST_CASE("intra-source duplicates collapse to the smallest value with a warning") {
    auto docs = base_docs();
    docs[2].records.push_back(
        json{{"ip", "80.81.192.1"}, {"asn", 64400}, {"ixp_id", "x1"}});
    const auto result = parse_world(docs);
    CHECK(result.world.interfaces.at(Ipv4::parse("80.81.192.1")).asn == 64400u);
    CHECK_FALSE(result.report.warnings.empty());
}

TEST_CASE("malformed records name the file and offset") {
    auto docs = base_docs();
    docs[2].records.push_back(json{{"ip", "not-an-ip"}, {"asn", 1}, {"ixp_id", "x1"}});
    try {
        parse_world(docs);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("interfaces.json") != std::string::npos);
        CHECK(msg.find("record 3") != std::string::npos);
    }
}

TEST_CASE("documents with unknown kinds are rejected") {
    CHECK_THROWS_AS(Document::from_json("z.json", json{{"kind", "mystery"},
                                                       {"source", "Website"},
                                                       {"records", json::array()}}),
                    ParseError);
    CHECK_THROWS_AS(Document::from_json("z.json", json{{"kind", "ixps"},
                                                       {"source", "martian"},
                                                       {"records", json::array()}}),
                    ParseError);
}

TEST_CASE("world model json round-trips") {
    auto docs = base_docs();
    docs.push_back(doc("vps.json", "vps", SourceTag::Custom,
                       json::array({{{"vp_id", "lg1"},
                                     {"kind", "LookingGlass"},
                                     {"ixp_id", "x1"},
                                     {"facility_id", "f1"},
                                     {"rtt_resolution", "IntegerRoundedUp"},
                                     {"route_server_ip", "80.81.192.254"}}})));
    docs.push_back(doc("routing.json", "routing", SourceTag::Custom,
                       json::array({{{"prefix", "5.0.0.0/24"}, {"asn", 64500}}})));
    const auto world = parse_world(docs).world;
    const auto round = world_from_json(world_to_json(world));
    CHECK(world_to_json(round).dump() == world_to_json(world).dump());
    CHECK(round.vps.at("lg1").route_server_ip == Ipv4::parse("80.81.192.254"));
    CHECK(round.asn_of_ip(Ipv4::parse("5.0.0.77")) == 64500u);
    CHECK(round.ixp_of_ip(Ipv4::parse("80.81.192.1")) == std::string("x1"));
}
