#include "rpinfer/measurements.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rpinfer {

namespace {

using nlohmann::json;

int initial_ttl_for(int reply_ttl) { return reply_ttl <= 64 ? 64 : 255; }

// Resolves a hop to an AS: exchange interfaces through the interface
// table, everything else through the routed prefixes.
std::optional<Asn> hop_asn(const WorldModel& world, Ipv4 ip) {
    return world.asn_of_ip(ip);
}

}  // namespace

std::vector<PingSample> ttl_filter(const std::vector<PingSample>& series,
                                   const VantagePoint& vp) {
    const int slack = vp.kind == VpKind::AtlasProbe ? 1 : 0;
    std::vector<PingSample> accepted;
    std::set<int> families;
    for (const auto& sample : series) {
        if (sample.reply_ttl < 0 || sample.reply_ttl > 255) continue;
        const int initial = initial_ttl_for(sample.reply_ttl);
        if (initial - sample.reply_ttl <= slack) {
            accepted.push_back(sample);
            families.insert(initial);
        }
    }
    if (families.size() > 1) return {};  // TTL switch: different devices replying
    return accepted;
}

bool vp_sanity_keep(const VantagePoint& vp,
                    std::optional<double> rtt_to_route_server_ms, double vp_sanity_ms,
                    std::vector<std::string>* warnings) {
    if (!rtt_to_route_server_ms) {
        if (warnings) {
            warnings->push_back("vp '" + vp.vp_id +
                                "': no route-server measurement; kept unverified");
        }
        return true;
    }
    return *rtt_to_route_server_ms < vp_sanity_ms;
}

RttEstimate aggregate_rtt_min(const std::vector<PingSample>& accepted,
                              const VantagePoint& vp, Ipv4 target) {
    RttEstimate est;
    est.target_ip = target;
    est.vp_id = vp.vp_id;
    if (accepted.empty()) {
        est.filtered = true;
        est.filter_reason = "no samples survived TTL filtering";
        return est;
    }
    est.rtt_min_ms = accepted.front().rtt_ms;
    for (const auto& s : accepted) est.rtt_min_ms = std::min(est.rtt_min_ms, s.rtt_ms);
    est.sample_count = static_cast<int>(accepted.size());
    return est;
}

std::vector<IxpCrossing> detect_ixp_crossings(const TraceroutePath& path,
                                              const WorldModel& world) {
    std::vector<IxpCrossing> out;
    const auto& hops = path.hops;
    for (std::size_t i = 0; i + 2 < hops.size(); ++i) {
        const auto& h1 = hops[i];
        const auto& h2 = hops[i + 1];
        const auto& h3 = hops[i + 2];
        // A triplet must be three consecutive responding hops.
        if (h2.index != h1.index + 1 || h3.index != h2.index + 1) continue;
        if (!h1.ip || !h2.ip || !h3.ip) continue;

        const auto ixp = world.ixp_of_ip(*h2.ip);
        if (!ixp) continue;
        const auto mid_iface = world.interfaces.find(*h2.ip);
        if (mid_iface == world.interfaces.end()) continue;
        const Asn mid_asn = mid_iface->second.asn;

        const auto a1 = hop_asn(world, *h1.ip);
        const auto a3 = hop_asn(world, *h3.ip);
        if (!a1 || !a3) continue;
        if (*a3 != mid_asn) continue;
        if (*a1 == mid_asn) continue;
        if (!world.is_member(*ixp, *a1) || !world.is_member(*ixp, mid_asn)) continue;

        IxpCrossing crossing;
        crossing.path_id = path.measurement_id;
        crossing.near_asn = *a1;
        crossing.ixp_id = *ixp;
        crossing.far_asn = mid_asn;
        crossing.triplet[0] = *h1.ip;
        crossing.triplet[1] = *h2.ip;
        crossing.triplet[2] = *h3.ip;
        out.push_back(crossing);
    }
    return out;
}

std::vector<IxpNextHop> extract_ixp_next_hops(const std::vector<TraceroutePath>& paths,
                                              const WorldModel& world) {
    std::vector<IxpNextHop> out;
    for (const auto& path : paths) {
        const auto& hops = path.hops;
        for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
            const auto& a = hops[i];
            const auto& b = hops[i + 1];
            if (b.index != a.index + 1 || !a.ip || !b.ip) continue;
            const auto ixp = world.ixp_of_ip(*b.ip);
            if (!ixp) continue;
            if (world.ixp_of_ip(*a.ip)) continue;  // fabric-to-fabric, not a member hop
            const auto asn = hop_asn(world, *a.ip);
            if (!asn || !world.is_member(*ixp, *asn)) continue;
            out.push_back({*a.ip, *ixp, path.measurement_id});
        }
    }
    return out;
}

PrivateAdjacencies extract_private_adjacencies(const std::vector<TraceroutePath>& paths,
                                               const WorldModel& world) {
    PrivateAdjacencies out;
    for (const auto& path : paths) {
        const auto& hops = path.hops;
        for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
            const auto& a = hops[i];
            const auto& b = hops[i + 1];
            if (b.index != a.index + 1 || !a.ip || !b.ip) continue;
            if (world.ixp_of_ip(*a.ip) || world.ixp_of_ip(*b.ip)) continue;
            const auto asn_a = hop_asn(world, *a.ip);
            const auto asn_b = hop_asn(world, *b.ip);
            if (!asn_a || !asn_b || *asn_a == *asn_b) continue;
            const auto key = std::minmax(*asn_a, *asn_b);
            out.pairs[{key.first, key.second}].insert(*a.ip);
            out.pairs[{key.first, key.second}].insert(*b.ip);
            out.neighbors_by_interface[*a.ip].insert(*asn_b);
            out.neighbors_by_interface[*b.ip].insert(*asn_a);
            out.interfaces.insert(*a.ip);
            out.interfaces.insert(*b.ip);
        }
    }
    return out;
}

std::vector<Router> build_routers(const std::vector<AliasSet>& alias_sets,
                                  const std::vector<IxpNextHop>& next_hops,
                                  const WorldModel& world,
                                  std::vector<std::string>* diagnostics) {
    // Union-find over interfaces so overlapping alias sets merge.
    std::map<Ipv4, Ipv4> parent;
    std::function<Ipv4(Ipv4)> find = [&](Ipv4 x) {
        while (parent.at(x) != x) {
            parent[x] = parent.at(parent.at(x));
            x = parent.at(x);
        }
        return x;
    };
    auto ensure = [&](Ipv4 x) {
        parent.try_emplace(x, x);
    };
    auto unite = [&](Ipv4 a, Ipv4 b) {
        ensure(a);
        ensure(b);
        const Ipv4 ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    };

    std::map<Ipv4, std::string> provided_names;
    for (const auto& set : alias_sets) {
        if (set.ips.empty()) continue;
        for (const auto& ip : set.ips) ensure(ip);
        for (std::size_t i = 1; i < set.ips.size(); ++i) unite(set.ips[0], set.ips[i]);
        if (set.router_id) {
            auto [it, inserted] = provided_names.emplace(set.ips.front(), *set.router_id);
            if (!inserted && it->second > *set.router_id) it->second = *set.router_id;
        }
    }
    // Singleton sets for interfaces only seen in the world or as next-hop
    // sources; alias resolution never covers everything.
    for (const auto& [ip, iface] : world.interfaces) ensure(ip);
    for (const auto& hop : next_hops) ensure(hop.member_ip);

    std::map<Ipv4, std::set<Ipv4>> groups;
    for (const auto& [ip, _] : parent) groups[find(ip)].insert(ip);

    std::vector<Router> routers;
    for (const auto& [root, ips] : groups) {
        std::set<Asn> asns;
        for (const auto& ip : ips) {
            if (auto asn = world.asn_of_ip(ip)) asns.insert(*asn);
        }
        if (asns.empty()) {
            if (diagnostics) {
                diagnostics->push_back("alias set at " + root.str() +
                                       ": no interface resolves to an AS; rejected");
            }
            continue;
        }
        if (asns.size() > 1) {
            if (diagnostics) {
                std::ostringstream os;
                os << "alias set at " << root.str() << ": spans " << asns.size()
                   << " ASes; rejected";
                diagnostics->push_back(os.str());
            }
            continue;
        }
        Router router;
        router.asn = *asns.begin();
        router.interfaces = ips;
        std::string name;
        for (const auto& ip : ips) {
            auto it = provided_names.find(ip);
            if (it != provided_names.end() && (name.empty() || it->second < name)) {
                name = it->second;
            }
        }
        router.router_id = name.empty() ? "r-" + root.str() : name;
        routers.push_back(std::move(router));
    }

    std::map<Ipv4, Router*> by_iface;
    for (auto& router : routers) {
        for (const auto& ip : router.interfaces) by_iface[ip] = &router;
    }
    for (const auto& hop : next_hops) {
        if (auto it = by_iface.find(hop.member_ip); it != by_iface.end()) {
            it->second->next_hop_ixps.insert(hop.ixp_id);
        }
    }

    std::sort(routers.begin(), routers.end(),
              [](const Router& a, const Router& b) { return a.router_id < b.router_id; });
    return routers;
}

std::vector<PingSample> load_pings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<PingSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("vp_id,", 0) == 0) continue;  // header
        std::array<std::string, 5> fields;
        std::size_t field = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (field >= fields.size()) {
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": too many fields");
                }
                fields[field++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (field != 5) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected vp_id,target_ip,rtt_ms,reply_ttl,timestamp");
        }
        try {
            PingSample s;
            s.vp_id = fields[0];
            s.target_ip = Ipv4::parse(fields[1]);
            s.rtt_ms = std::stod(fields[2]);
            s.reply_ttl = std::stoi(fields[3]);
            s.timestamp = std::stoll(fields[4]);
            if (!std::isfinite(s.rtt_ms) || s.rtt_ms < 0) {
                throw ParseError("rtt_ms must be finite and non-negative");
            }
            if (s.reply_ttl < 0 || s.reply_ttl > 255) {
                throw ParseError("reply_ttl out of range");
            }
            out.push_back(std::move(s));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<TraceroutePath> load_traces_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<TraceroutePath> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            TraceroutePath p;
            p.measurement_id = rec.at("measurement_id").get<std::string>();
            int last_index = -1;
            for (const auto& hop : rec.at("hops")) {
                TracerouteHop h;
                h.index = hop.at(0).get<int>();
                if (!hop.at(1).is_null()) h.ip = Ipv4::parse(hop.at(1).get<std::string>());
                if (hop.size() > 2 && !hop.at(2).is_null()) {
                    h.rtt_ms = hop.at(2).get<double>();
                }
                if (h.index <= last_index) {
                    throw ParseError("hop indices must be strictly increasing");
                }
                last_index = h.index;
                p.hops.push_back(std::move(h));
            }
            out.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<AliasSet> load_alias_sets_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<AliasSet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            AliasSet set;
            if (rec.contains("router_id") && !rec.at("router_id").is_null()) {
                set.router_id = rec.at("router_id").get<std::string>();
            }
            for (const auto& ip : rec.at("ips")) {
                set.ips.push_back(Ipv4::parse(ip.get<std::string>()));
            }
            out.push_back(std::move(set));
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace rpinfer
