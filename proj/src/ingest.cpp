#include "rpinfer/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rpinfer {

namespace {

using nlohmann::json;

const char* kKnownKinds[] = {"ixps",   "interfaces", "facilities", "port_pricing",
                             "labels", "vps",        "routing"};

bool known_kind(const std::string& kind) {
    return std::find(std::begin(kKnownKinds), std::end(kKnownKinds), kind) !=
           std::end(kKnownKinds);
}

[[noreturn]] void record_error(const Document& doc, std::size_t index,
                               const std::string& what) {
    throw ParseError(doc.name + ": record " + std::to_string(index) + ": " + what);
}

template <typename Fn>
void guarded(const Document& doc, std::size_t index, Fn&& fn) {
    try {
        fn();
    } catch (const json::exception& e) {
        record_error(doc, index, e.what());
    } catch (const ParseError& e) {
        record_error(doc, index, e.what());
    }
}

template <typename V>
std::string value_text(const V& v) {
    if constexpr (std::is_same_v<V, std::string>) {
        return v;
    } else if constexpr (std::is_same_v<V, LabelClass>) {
        return to_string(v);
    } else if constexpr (std::is_same_v<V, std::pair<double, double>>) {
        std::ostringstream os;
        os << v.first << "," << v.second;
        return os.str();
    } else if constexpr (std::is_same_v<V, std::vector<double>>) {
        std::ostringstream os;
        for (double x : v) os << x << ",";
        return os.str();
    } else {
        std::ostringstream os;
        os << v;
        return os.str();
    }
}

// Candidate values for one key of one dataset.
template <typename V>
struct Candidates {
    std::vector<std::pair<V, SourceTag>> entries;

    void add(V value, SourceTag source) {
        entries.emplace_back(std::move(value), source);
    }
    bool empty() const { return entries.empty(); }
};

struct Accounting {
    IngestReport* report;

    void total(SourceTag source, const std::string& kind, long n = 1) {
        report->sources[to_string(source)][kind].total += n;
    }
    void unique(const std::set<std::string>& contributing, const std::string& kind) {
        if (contributing.size() == 1) {
            report->sources[*contributing.begin()][kind].unique += 1;
        }
    }
    void conflict(SourceTag source, const std::string& kind) {
        report->sources[to_string(source)][kind].conflicts += 1;
    }
};

// Reduces one key's candidates: intra-source disagreements collapse to the
// lexicographic minimum (logged), then precedence picks the winner and
// losing sources with differing values are counted as conflicts.
template <typename V>
V merge_key(const Candidates<V>& cands, const std::string& kind, const std::string& key,
            ConflictDomain domain, Accounting& acc, std::vector<std::string>& warnings) {
    std::map<SourceTag, std::vector<V>> per_source;
    for (const auto& [value, source] : cands.entries) per_source[source].push_back(value);

    std::vector<std::pair<V, SourceTag>> reduced;
    for (auto& [source, values] : per_source) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.size() > 1) {
            warnings.push_back(kind + " '" + key + "': source " + to_string(source) +
                               " supplied " + std::to_string(values.size()) +
                               " distinct values; keeping '" + value_text(values.front()) +
                               "'");
        }
        reduced.emplace_back(values.front(), source);
    }

    V winner = resolve_conflicts(reduced, domain);
    for (const auto& [value, source] : reduced) {
        if (!(value == winner)) acc.conflict(source, kind);
    }
    return winner;
}

template <typename V>
std::set<std::string> contributing_sources(const Candidates<V>& cands) {
    std::set<std::string> out;
    for (const auto& [value, source] : cands.entries) out.insert(to_string(source));
    return out;
}

std::optional<double> opt_number(const json& rec, const char* field) {
    if (!rec.contains(field) || rec.at(field).is_null()) return std::nullopt;
    return rec.at(field).get<double>();
}

}  // namespace

template <typename Value>
Value resolve_conflicts(std::vector<std::pair<Value, SourceTag>> entries,
                        ConflictDomain domain, std::vector<std::string>* tie_log) {
    if (entries.empty()) throw DataError("resolve_conflicts: empty candidate list");
    std::stable_sort(entries.begin(), entries.end(),
                     [&](const auto& a, const auto& b) {
                         const int ra = precedence_rank(a.second, domain);
                         const int rb = precedence_rank(b.second, domain);
                         if (ra != rb) return ra < rb;
                         return a.first < b.first;
                     });
    if (tie_log) {
        const int top = precedence_rank(entries.front().second, domain);
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (precedence_rank(entries[i].second, domain) != top) break;
            if (!(entries[i].first == entries.front().first)) {
                tie_log->push_back("tie at precedence level " + std::to_string(top) +
                                   "; picked '" + value_text(entries.front().first) + "'");
                break;
            }
        }
    }
    return entries.front().first;
}

template std::string resolve_conflicts<std::string>(
    std::vector<std::pair<std::string, SourceTag>>, ConflictDomain,
    std::vector<std::string>*);
template Asn resolve_conflicts<Asn>(std::vector<std::pair<Asn, SourceTag>>,
                                    ConflictDomain, std::vector<std::string>*);
template double resolve_conflicts<double>(std::vector<std::pair<double, SourceTag>>,
                                          ConflictDomain, std::vector<std::string>*);
template std::pair<double, double> resolve_conflicts<std::pair<double, double>>(
    std::vector<std::pair<std::pair<double, double>, SourceTag>>, ConflictDomain,
    std::vector<std::string>*);
template std::vector<double> resolve_conflicts<std::vector<double>>(
    std::vector<std::pair<std::vector<double>, SourceTag>>, ConflictDomain,
    std::vector<std::string>*);
template LabelClass resolve_conflicts<LabelClass>(
    std::vector<std::pair<LabelClass, SourceTag>>, ConflictDomain,
    std::vector<std::string>*);

Document Document::from_json(const std::string& name, const json& body) {
    Document doc;
    doc.name = name;
    try {
        doc.kind = body.at("kind").get<std::string>();
        doc.source = source_tag_from_string(body.at("source").get<std::string>());
        doc.records = body.at("records");
    } catch (const json::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
    if (!known_kind(doc.kind)) throw ParseError(name + ": unknown kind '" + doc.kind + "'");
    if (!doc.records.is_array()) throw ParseError(name + ": 'records' must be an array");
    return doc;
}

std::vector<Document> load_documents(const std::string& directory) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory)) {
        throw ParseError("not a directory: " + directory);
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Document> docs;
    for (const auto& path : paths) {
        std::ifstream in(path);
        json body;
        try {
            in >> body;
        } catch (const json::exception& e) {
            throw ParseError(path.filename().string() + ": " + e.what());
        }
        docs.push_back(Document::from_json(path.filename().string(), body));
    }
    return docs;
}

IngestResult parse_world(const std::vector<Document>& documents) {
    IngestResult out;
    WorldModel& world = out.world;
    IngestReport& report = out.report;
    Accounting acc{&report};

    struct IxpMeta {
        Candidates<std::string> name;
        Candidates<double> min_capacity;
        Candidates<std::vector<double>> options;
        std::set<std::string> facility_ids;
        std::set<std::string> sources;
    };
    struct FacilityMeta {
        Candidates<std::string> name;
        Candidates<std::pair<double, double>> coords;
        std::set<Asn> hosted_asns;
        std::set<std::string> hosted_ixps;
        std::set<std::string> sources;
        SourceTag best_source = SourceTag::Custom;
    };
    struct InterfaceMeta {
        Candidates<Asn> asn;
        Candidates<double> port;
        Candidates<std::string> ixp;
        SourceTag best_source = SourceTag::Custom;
    };
    struct LabelMeta {
        Candidates<LabelClass> label;
        LabelProvenance provenance = LabelProvenance::Operator;
    };

    std::map<std::string, IxpMeta> ixp_meta;
    std::map<Prefix, Candidates<std::string>> prefix_claims;
    std::map<Ipv4, InterfaceMeta> iface_meta;
    std::map<std::string, FacilityMeta> fac_meta;
    // key: (ixp_id, "ip:<addr>" | "asn:<n>")
    std::map<std::pair<std::string, std::string>, LabelMeta> label_meta;
    std::map<std::string, Candidates<std::string>> vp_meta;  // value: canonical json
    std::map<Prefix, Candidates<Asn>> route_meta;

    for (const auto& doc : documents) {
        std::size_t index = 0;
        for (const auto& rec : doc.records) {
            guarded(doc, index, [&] {
                if (doc.kind == "ixps") {
                    const auto id = rec.at("ixp_id").get<std::string>();
                    auto& meta = ixp_meta[id];
                    meta.sources.insert(to_string(doc.source));
                    if (rec.contains("name")) {
                        meta.name.add(rec.at("name").get<std::string>(), doc.source);
                    }
                    acc.total(doc.source, "ixps");
                    for (const auto& ptext : rec.value("prefixes", json::array())) {
                        const Prefix p = Prefix::parse(ptext.get<std::string>());
                        prefix_claims[p].add(id, doc.source);
                        acc.total(doc.source, "prefixes");
                    }
                    for (const auto& f : rec.value("facility_ids", json::array())) {
                        meta.facility_ids.insert(f.get<std::string>());
                    }
                    if (auto cap = opt_number(rec, "min_physical_capacity_mbps")) {
                        meta.min_capacity.add(*cap, doc.source);
                    }
                    if (rec.contains("capacity_options_mbps")) {
                        auto opts = rec.at("capacity_options_mbps").get<std::vector<double>>();
                        std::sort(opts.begin(), opts.end());
                        meta.options.add(std::move(opts), doc.source);
                    }
                } else if (doc.kind == "interfaces") {
                    const Ipv4 ip = Ipv4::parse(rec.at("ip").get<std::string>());
                    auto& meta = iface_meta[ip];
                    meta.asn.add(rec.at("asn").get<Asn>(), doc.source);
                    meta.ixp.add(rec.at("ixp_id").get<std::string>(), doc.source);
                    if (auto cap = opt_number(rec, "port_capacity_mbps")) {
                        meta.port.add(*cap, doc.source);
                    }
                    if (precedence_rank(doc.source) < precedence_rank(meta.best_source)) {
                        meta.best_source = doc.source;
                    }
                    acc.total(doc.source, "interfaces");
                } else if (doc.kind == "facilities") {
                    const auto id = rec.at("facility_id").get<std::string>();
                    auto& meta = fac_meta[id];
                    meta.sources.insert(to_string(doc.source));
                    if (rec.contains("name")) {
                        meta.name.add(rec.at("name").get<std::string>(), doc.source);
                    }
                    if (rec.contains("latitude") || rec.contains("longitude")) {
                        meta.coords.add({rec.at("latitude").get<double>(),
                                         rec.at("longitude").get<double>()},
                                        doc.source);
                    }
                    for (const auto& a : rec.value("hosted_asns", json::array())) {
                        meta.hosted_asns.insert(a.get<Asn>());
                    }
                    for (const auto& x : rec.value("hosted_ixps", json::array())) {
                        meta.hosted_ixps.insert(x.get<std::string>());
                    }
                    if (precedence_rank(doc.source) < precedence_rank(meta.best_source)) {
                        meta.best_source = doc.source;
                    }
                    acc.total(doc.source, "facilities");
                } else if (doc.kind == "port_pricing") {
                    const auto id = rec.at("ixp_id").get<std::string>();
                    auto& meta = ixp_meta[id];
                    meta.min_capacity.add(rec.at("min_physical_capacity_mbps").get<double>(),
                                          doc.source);
                    if (rec.contains("capacity_options_mbps")) {
                        auto opts = rec.at("capacity_options_mbps").get<std::vector<double>>();
                        std::sort(opts.begin(), opts.end());
                        meta.options.add(std::move(opts), doc.source);
                    }
                    acc.total(doc.source, "port_pricing");
                } else if (doc.kind == "labels") {
                    const auto ixp = rec.at("ixp_id").get<std::string>();
                    std::string key;
                    if (rec.contains("ip") && !rec.at("ip").is_null()) {
                        key = "ip:" + Ipv4::parse(rec.at("ip").get<std::string>()).str();
                    } else {
                        key = "asn:" + std::to_string(rec.at("asn").get<Asn>());
                    }
                    auto& meta = label_meta[{ixp, key}];
                    const auto text = rec.at("label").get<std::string>();
                    if (text != "Local" && text != "Remote") {
                        throw ParseError("unknown label '" + text + "'");
                    }
                    meta.label.add(text == "Local" ? LabelClass::Local : LabelClass::Remote,
                                   doc.source);
                    if (rec.value("provenance", "Operator") == std::string("Website")) {
                        meta.provenance = LabelProvenance::Website;
                    }
                    acc.total(doc.source, "labels");
                } else if (doc.kind == "vps") {
                    const auto id = rec.at("vp_id").get<std::string>();
                    vp_meta[id].add(rec.dump(), doc.source);
                    acc.total(doc.source, "vps");
                } else if (doc.kind == "routing") {
                    const Prefix p = Prefix::parse(rec.at("prefix").get<std::string>());
                    route_meta[p].add(rec.at("asn").get<Asn>(), doc.source);
                    acc.total(doc.source, "routing");
                }
            });
            ++index;
        }
    }

    // --- Exchanges ---
    for (auto& [id, meta] : ixp_meta) {
        IxpRecord ixp;
        ixp.ixp_id = id;
        if (!meta.name.empty()) {
            ixp.name = merge_key(meta.name, "ixps", id, ConflictDomain::General, acc,
                                 report.warnings);
        }
        if (!meta.min_capacity.empty()) {
            double cap = merge_key(meta.min_capacity, "port_pricing", id,
                                   ConflictDomain::General, acc, report.warnings);
            if (cap > 0) {
                ixp.min_physical_capacity_mbps = cap;
            } else {
                report.quarantine.push_back(
                    {"port_pricing", id, "min_physical_capacity must be positive", ""});
            }
        }
        if (!meta.options.empty()) {
            ixp.capacity_options_mbps = merge_key(meta.options, "port_pricing", id,
                                                  ConflictDomain::General, acc,
                                                  report.warnings);
        }
        ixp.facility_ids = meta.facility_ids;
        if (!meta.sources.empty()) acc.unique(meta.sources, "ixps");
        world.ixps.emplace(id, std::move(ixp));
    }

    // --- Peering LAN ownership, resolved per exact prefix ---
    for (auto& [prefix, cands] : prefix_claims) {
        const std::string owner = merge_key(cands, "prefixes", prefix.str(),
                                            ConflictDomain::General, acc, report.warnings);
        acc.unique(contributing_sources(cands), "prefixes");
        auto it = world.ixps.find(owner);
        if (it == world.ixps.end()) {
            throw LinkError("prefix " + prefix.str() + " references unknown exchange '" +
                            owner + "'");
        }
        bool overlap = false;
        for (const auto& existing : it->second.prefixes) {
            if (existing.overlaps(prefix)) {
                report.quarantine.push_back({"prefixes", prefix.str(),
                                             "overlaps " + existing.str() +
                                                 " within exchange " + owner,
                                             ""});
                overlap = true;
                break;
            }
        }
        if (!overlap) it->second.prefixes.push_back(prefix);
    }
    for (auto& [id, ixp] : world.ixps) {
        std::sort(ixp.prefixes.begin(), ixp.prefixes.end());
    }

    // --- Facilities ---
    for (auto& [id, meta] : fac_meta) {
        FacilityRecord fac;
        fac.facility_id = id;
        fac.source = meta.best_source;
        acc.unique(meta.sources, "facilities");
        if (!meta.name.empty()) {
            fac.name = merge_key(meta.name, "facilities", id, ConflictDomain::General, acc,
                                 report.warnings);
        }
        if (!meta.coords.empty()) {
            const auto [lat, lon] =
                merge_key(meta.coords, "facilities", id,
                          ConflictDomain::FacilityCoordinates, acc, report.warnings);
            if (valid_coordinates(lat, lon)) {
                fac.location = GeoPoint{lat, lon};
            } else {
                report.quarantine.push_back({"facilities", id, "coordinates out of range",
                                             to_string(meta.best_source)});
                continue;  // record quarantined entirely
            }
        }
        fac.hosted_asns = meta.hosted_asns;
        fac.hosted_ixps = meta.hosted_ixps;
        world.facilities.emplace(id, std::move(fac));
    }

    // --- Interfaces ---
    for (auto& [ip, meta] : iface_meta) {
        MemberInterface iface;
        iface.ip = ip;
        iface.source = meta.best_source;
        iface.asn = merge_key(meta.asn, "interfaces", ip.str(), ConflictDomain::General,
                              acc, report.warnings);
        iface.ixp_id = merge_key(meta.ixp, "interfaces", ip.str(), ConflictDomain::General,
                                 acc, report.warnings);
        acc.unique(contributing_sources(meta.asn), "interfaces");
        if (!meta.port.empty()) {
            iface.port_capacity_mbps = merge_key(meta.port, "interfaces", ip.str(),
                                                 ConflictDomain::General, acc,
                                                 report.warnings);
        }
        if (iface.asn == 0) {
            report.quarantine.push_back(
                {"interfaces", ip.str(), "asn must be positive", to_string(iface.source)});
            continue;
        }
        auto it = world.ixps.find(iface.ixp_id);
        if (it == world.ixps.end()) {
            throw LinkError("interface " + ip.str() + " references unknown exchange '" +
                            iface.ixp_id + "'");
        }
        int covering = 0;
        for (const auto& prefix : it->second.prefixes) {
            if (prefix.contains(ip)) ++covering;
        }
        if (covering != 1) {
            report.quarantine.push_back(
                {"interfaces", ip.str(),
                 covering == 0 ? "ip outside the exchange's peering LANs"
                               : "ip covered by multiple peering LANs",
                 to_string(iface.source)});
            continue;
        }
        world.interfaces.emplace(ip, std::move(iface));
    }

    // --- Labels ---
    for (auto& [key, meta] : label_meta) {
        const auto& [ixp, subject] = key;
        if (!world.ixps.count(ixp)) {
            throw LinkError("label for '" + subject + "' references unknown exchange '" +
                            ixp + "'");
        }
        int top = 99;
        for (const auto& [v, s] : meta.label.entries) top = std::min(top, precedence_rank(s));
        std::set<LabelClass> distinct;
        for (const auto& [v, s] : meta.label.entries) {
            if (precedence_rank(s) == top) distinct.insert(v);
        }
        if (distinct.size() > 1) {
            report.quarantine.push_back(
                {"labels", ixp + "/" + subject, "conflicting Local/Remote labels", ""});
            continue;
        }
        ValidationLabel label;
        label.ixp_id = ixp;
        label.label = merge_key(meta.label, "labels", ixp + "/" + subject,
                                ConflictDomain::General, acc, report.warnings);
        label.provenance = meta.provenance;
        if (subject.rfind("ip:", 0) == 0) {
            label.ip = Ipv4::parse(subject.substr(3));
        } else {
            label.asn = static_cast<Asn>(std::stoul(subject.substr(4)));
        }
        world.labels.push_back(std::move(label));
    }
    std::sort(world.labels.begin(), world.labels.end(),
              [](const ValidationLabel& a, const ValidationLabel& b) {
                  return std::tie(a.ixp_id, a.ip, a.asn) < std::tie(b.ixp_id, b.ip, b.asn);
              });

    // --- Vantage points ---
    for (auto& [id, cands] : vp_meta) {
        const std::string body = merge_key(cands, "vps", id, ConflictDomain::General, acc,
                                           report.warnings);
        const json rec = json::parse(body);
        VantagePoint vp;
        vp.vp_id = id;
        vp.kind = rec.value("kind", "LookingGlass") == std::string("AtlasProbe")
                      ? VpKind::AtlasProbe
                      : VpKind::LookingGlass;
        vp.ixp_id = rec.at("ixp_id").get<std::string>();
        if (rec.contains("latitude") && rec.contains("longitude")) {
            vp.location = GeoPoint{rec.at("latitude").get<double>(),
                                   rec.at("longitude").get<double>()};
        }
        if (rec.contains("facility_id") && !rec.at("facility_id").is_null()) {
            vp.facility_id = rec.at("facility_id").get<std::string>();
        }
        vp.rtt_resolution = rec.value("rtt_resolution", "IntegerRoundedUp") ==
                                    std::string("SubMillisecond")
                                ? RttResolution::SubMillisecond
                                : RttResolution::IntegerRoundedUp;
        if (rec.contains("route_server_ip") && !rec.at("route_server_ip").is_null()) {
            vp.route_server_ip = Ipv4::parse(rec.at("route_server_ip").get<std::string>());
        }
        if (!world.ixps.count(vp.ixp_id)) {
            throw LinkError("vantage point '" + id + "' references unknown exchange '" +
                            vp.ixp_id + "'");
        }
        world.vps.emplace(id, std::move(vp));
    }

    // --- Routed prefixes ---
    for (auto& [prefix, cands] : route_meta) {
        const Asn asn = merge_key(cands, "routing", prefix.str(), ConflictDomain::General,
                                  acc, report.warnings);
        world.routing.emplace_back(prefix, asn);
    }

    // Cross-reference closure between exchanges and facilities. Dangling
    // facility references are dropped with a note; colocation data is the
    // noisiest dataset and must not abort the merge.
    for (auto& [id, ixp] : world.ixps) {
        std::set<std::string> resolved;
        for (const auto& fid : ixp.facility_ids) {
            if (world.facilities.count(fid)) {
                resolved.insert(fid);
                world.facilities.at(fid).hosted_ixps.insert(id);
            } else {
                report.quarantine.push_back(
                    {"ixps", id, "unknown facility_id '" + fid + "' dropped", ""});
            }
        }
        ixp.facility_ids = std::move(resolved);
    }
    for (auto& [fid, fac] : world.facilities) {
        std::set<std::string> resolved;
        for (const auto& xid : fac.hosted_ixps) {
            if (world.ixps.count(xid)) {
                resolved.insert(xid);
                world.ixps.at(xid).facility_ids.insert(fid);
            } else {
                report.quarantine.push_back(
                    {"facilities", fid, "unknown hosted exchange '" + xid + "' dropped", ""});
            }
        }
        fac.hosted_ixps = std::move(resolved);
    }

    world.finalize();
    world.quarantine = report.quarantine;
    return out;
}

}  // namespace rpinfer
