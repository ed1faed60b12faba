#include "rpinfer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace rpinfer {

namespace {

using nlohmann::json;

constexpr double kSphereRadiusKm = 6371.0088;

double deg2rad(double d) { return d * M_PI / 180.0; }
double rad2deg(double r) { return r * 180.0 / M_PI; }

// Spherical destination point; close enough to the ellipsoid for band
// placement, the generator re-measures everything with geodesic_km.
GeoPoint destination(const GeoPoint& origin, double bearing_deg, double dist_km) {
    const double delta = dist_km / kSphereRadiusKm;
    const double theta = deg2rad(bearing_deg);
    const double phi1 = deg2rad(origin.latitude);
    const double lam1 = deg2rad(origin.longitude);
    const double phi2 = std::asin(std::sin(phi1) * std::cos(delta) +
                                  std::cos(phi1) * std::sin(delta) * std::cos(theta));
    const double lam2 =
        lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                          std::cos(delta) - std::sin(phi1) * std::sin(phi2));
    double lon = rad2deg(lam2);
    while (lon > 180.0) lon -= 360.0;
    while (lon < -180.0) lon += 360.0;
    return GeoPoint{rad2deg(phi2), lon};
}

std::string zero_pad(int v, int width) {
    std::ostringstream os;
    os << v;
    std::string s = os.str();
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

struct FacSynth {
    std::string id;
    GeoPoint point;
    int metro = 0;
    bool suburb = false;
};

struct IxpSynth {
    std::string id;
    int index = 0;
    int home_metro = 0;
    int ordinal = 0;  // order among exchanges homed in the same metro
    bool wide = false;
    std::vector<int> fac_idx;  // indices into the facility list
    Prefix lan;
    Ipv4 route_server;
};

struct VpSynth {
    std::string vp_id;
    int ixp = 0;
    int fac_idx = 0;
    VpKind kind = VpKind::LookingGlass;
    RttResolution resolution = RttResolution::IntegerRoundedUp;
    bool bad = false;  // parked on a management LAN; must be filtered out
};

enum class ProgramKind { A, B, C, H, D, E, F, G };

struct MembershipSynth {
    Asn asn = 0;
    int ixp = 0;
    Ipv4 iface_ip;
    Verdict truth = Verdict::Unknown;
    bool responsive = true;
    GeoPoint location;
    int ttl_family = 255;
    double speed_mps = 0.0;
    std::optional<double> port_mbps;
};

}  // namespace

std::map<IfaceKey, Verdict> oracle_classify(const Scenario& scenario) {
    return scenario.ground_truth;
}

MeasurementInputs scenario_inputs(const Scenario& scenario) {
    return MeasurementInputs{scenario.pings, scenario.traces, scenario.alias_sets};
}

Scenario generate(const SynthConfig& cfg) {
    if (cfg.n_ixps < 1 || cfg.n_ixps > 250) throw ConfigError("n_ixps out of range");
    if (cfg.members_per_ixp < 2 || cfg.members_per_ixp > 200) {
        throw ConfigError("members_per_ixp out of range (2..200)");
    }
    if (cfg.metro_count < 2) throw ConfigError("need at least two metros");
    if (cfg.reseller_fraction > cfg.remote_fraction + 1e-9) {
        throw ConfigError("reseller_fraction cannot exceed remote_fraction");
    }
    if (cfg.remote_fraction < 0 || cfg.remote_fraction > 0.9) {
        throw ConfigError("remote_fraction out of range");
    }
    const GeoPoint corner_a{cfg.lat_min, cfg.lon_min};
    const GeoPoint corner_b{cfg.lat_max, cfg.lon_max};
    const double diagonal_km = geodesic_km(corner_a, corner_b);
    if (cfg.remote_max_km > diagonal_km) {
        throw ConfigError("remote_max_km exceeds the geography extent");
    }
    if (cfg.wide_area_fraction > 0 && cfg.wide_area_min_km > diagonal_km) {
        throw ConfigError("wide_area_min_km exceeds the geography extent");
    }

    Scenario scenario;
    scenario.config = cfg;

    std::mt19937_64 rng(cfg.seed);
    auto rnd = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
    auto rnd_int = [&](int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(rng);
    };
    auto rnd_range = [&](double a, double b) { return a + (b - a) * rnd(); };
    auto rnd_exp = [&](double mean) {
        return std::exponential_distribution<double>(1.0 / mean)(rng);
    };

    // ---- Metros ----
    std::vector<GeoPoint> metros;
    for (int attempt = 0; attempt < 20000 && static_cast<int>(metros.size()) < cfg.metro_count;
         ++attempt) {
        GeoPoint p{rnd_range(cfg.lat_min + 1.0, cfg.lat_max - 1.0),
                   rnd_range(cfg.lon_min + 1.0, cfg.lon_max - 1.0)};
        bool ok = true;
        for (const auto& m : metros) {
            if (geodesic_km(m, p) < cfg.metro_min_km) {
                ok = false;
                break;
            }
        }
        if (ok) metros.push_back(p);
    }
    if (static_cast<int>(metros.size()) < cfg.metro_count) {
        throw ConfigError("metro placement infeasible for the configured extent");
    }

    if (cfg.wide_area_fraction > 0) {
        bool any_far_pair = false;
        for (std::size_t i = 0; i < metros.size() && !any_far_pair; ++i) {
            for (std::size_t j = i + 1; j < metros.size(); ++j) {
                if (geodesic_km(metros[i], metros[j]) >= cfg.wide_area_min_km) {
                    any_far_pair = true;
                    break;
                }
            }
        }
        if (!any_far_pair) {
            throw ConfigError("no metro pair satisfies wide_area_min_km");
        }
    }

    // ---- Facilities (clustered per metro, plus one suburb site each) ----
    std::vector<FacSynth> facs;
    std::vector<std::vector<int>> metro_facs(metros.size());
    std::vector<int> metro_suburb(metros.size(), -1);
    for (std::size_t m = 0; m < metros.size(); ++m) {
        const int n = rnd_int(cfg.facilities_per_metro_min, cfg.facilities_per_metro_max);
        for (int k = 0; k < n; ++k) {
            FacSynth fac;
            fac.id = "fac-" + zero_pad(static_cast<int>(m), 2) + "-" + zero_pad(k, 2);
            fac.point = destination(metros[m], rnd_range(0.0, 360.0),
                                    rnd_range(0.0, cfg.metro_radius_km));
            fac.metro = static_cast<int>(m);
            metro_facs[m].push_back(static_cast<int>(facs.size()));
            facs.push_back(fac);
        }
        FacSynth suburb;
        suburb.id = "fac-" + zero_pad(static_cast<int>(m), 2) + "-sub";
        suburb.point = destination(metros[m], rnd_range(0.0, 360.0),
                                   rnd_range(cfg.suburb_km_min, cfg.suburb_km_max));
        suburb.metro = static_cast<int>(m);
        suburb.suburb = true;
        metro_suburb[m] = static_cast<int>(facs.size());
        facs.push_back(suburb);
    }

    // ---- Exchanges ----
    std::vector<int> wide_pick(cfg.n_ixps);
    for (int i = 0; i < cfg.n_ixps; ++i) wide_pick[i] = i;
    std::shuffle(wide_pick.begin(), wide_pick.end(), rng);
    std::set<int> wide_set(wide_pick.begin(),
                           wide_pick.begin() +
                               static_cast<long>(std::lround(cfg.wide_area_fraction *
                                                             cfg.n_ixps)));

    std::vector<IxpSynth> ixps(cfg.n_ixps);
    std::vector<int> metro_ordinal(metros.size(), 0);
    for (int i = 0; i < cfg.n_ixps; ++i) {
        IxpSynth& x = ixps[i];
        x.index = i;
        x.id = "ixp-" + zero_pad(i, 2);
        x.home_metro = i % cfg.metro_count;
        x.ordinal = metro_ordinal[x.home_metro]++;
        const auto& home = metro_facs[x.home_metro];
        if (x.ordinal <= 1) {
            x.fac_idx.push_back(home[0]);
            if (home.size() > 1) x.fac_idx.push_back(home[1]);
        } else {
            // Later exchanges in a metro avoid the shared hub sites so that
            // same-metro pairs without a common facility exist.
            const std::size_t start = std::min<std::size_t>(2, home.size() - 1);
            x.fac_idx.push_back(home[start]);
            if (home.size() > start + 1) x.fac_idx.push_back(home[start + 1]);
        }
        x.wide = wide_set.count(i) > 0;
        if (x.wide) {
            std::vector<int> candidates;
            for (std::size_t m = 0; m < metros.size(); ++m) {
                if (static_cast<int>(m) == x.home_metro) continue;
                if (geodesic_km(metros[x.home_metro], metros[m]) >= cfg.wide_area_min_km) {
                    candidates.push_back(static_cast<int>(m));
                }
            }
            if (candidates.empty()) {
                x.wide = false;
            } else {
                const int far_metro = candidates[rnd_int(0, static_cast<int>(candidates.size()) - 1)];
                x.fac_idx.push_back(metro_facs[far_metro].back());
            }
        }
        x.lan = Prefix::parse("80.81." + std::to_string(i) + ".0/24");
        x.route_server = Ipv4{x.lan.network + 1};
    }

    // ---- Vantage points ----
    std::vector<VpSynth> vps;
    for (const auto& x : ixps) {
        VpSynth lg;
        lg.vp_id = "lg-" + x.id;
        lg.ixp = x.index;
        lg.fac_idx = x.fac_idx[0];
        vps.push_back(lg);
        if (x.fac_idx.size() > 1 && !facs[x.fac_idx[1]].suburb && rnd() < cfg.second_vp_share) {
            VpSynth lg2;
            lg2.vp_id = "lg2-" + x.id;
            lg2.ixp = x.index;
            lg2.fac_idx = x.fac_idx[1];
            vps.push_back(lg2);
        }
        if (rnd() < cfg.bad_vp_share) {
            VpSynth bad;
            bad.vp_id = "ra-" + x.id;
            bad.ixp = x.index;
            bad.fac_idx = x.fac_idx[0];
            bad.kind = VpKind::AtlasProbe;
            bad.resolution = RttResolution::SubMillisecond;
            bad.bad = true;
            vps.push_back(bad);
        }
    }
    std::vector<int> primary_vp(cfg.n_ixps, -1);
    for (std::size_t v = 0; v < vps.size(); ++v) {
        if (!vps[v].bad && primary_vp[vps[v].ixp] < 0) primary_vp[vps[v].ixp] = static_cast<int>(v);
    }

    // ---- Program counts ----
    const long total = static_cast<long>(cfg.n_ixps) * cfg.members_per_ixp;
    long nD = static_cast<long>(cfg.multi_local_share * total / 2.0);
    long nE = static_cast<long>(cfg.multi_remote_share * total / 2.0);
    long nF = static_cast<long>(cfg.hybrid_share * total / 2.0);
    long nG = static_cast<long>(cfg.voting_share * total / 2.0);
    long nH = static_cast<long>(cfg.unknown_share * total);
    long nB = static_cast<long>(cfg.reseller_fraction * total);
    const long remote_total = static_cast<long>(cfg.remote_fraction * total);

    // Remote budget: B and C are fully remote, E twice per program, F and G
    // once. Shrink the propagation programs when the budget is tight.
    auto remote_spend = [&] { return nB + 2 * nE + nF + nG; };
    while (remote_spend() > remote_total && nE > 0) --nE;
    while (remote_spend() > remote_total && nF > 0) --nF;
    while (remote_spend() > remote_total && nG > 0) --nG;
    long nC = remote_total - remote_spend();
    if (nC < 0) throw ConfigError("remote_fraction too small for reseller_fraction");

    // ---- Pair selection ----
    std::vector<int> quota(cfg.n_ixps, cfg.members_per_ixp);
    std::vector<std::pair<int, int>> pairs_shared, pairs_same_unshared, pairs_cross;
    for (int i = 0; i < cfg.n_ixps; ++i) {
        for (int j = i + 1; j < cfg.n_ixps; ++j) {
            const auto& a = ixps[i];
            const auto& b = ixps[j];
            std::set<int> fa(a.fac_idx.begin(), a.fac_idx.end());
            std::set<int> fb(b.fac_idx.begin(), b.fac_idx.end());
            std::vector<int> common;
            std::set_intersection(fa.begin(), fa.end(), fb.begin(), fb.end(),
                                  std::back_inserter(common));
            if (a.home_metro == b.home_metro) {
                if (!common.empty()) {
                    pairs_shared.emplace_back(i, j);
                } else {
                    pairs_same_unshared.emplace_back(i, j);
                }
            } else if (common.empty()) {
                std::vector<GeoPoint> pa, pb;
                for (int f : a.fac_idx) pa.push_back(facs[f].point);
                for (int f : b.fac_idx) pb.push_back(facs[f].point);
                const auto gap = min_cross_distance_km(pa, pb);
                if (gap && *gap >= 200.0) pairs_cross.emplace_back(i, j);
            }
        }
    }

    struct PairProg {
        ProgramKind kind;
        int x, y;
        bool shared_variant = true;
    };
    std::vector<PairProg> pair_progs;
    const auto reserve_pairs = [&](ProgramKind kind, long count,
                                   const std::vector<std::pair<int, int>>& primary,
                                   const std::vector<std::pair<int, int>>& secondary) {
        long reserved = 0;
        std::size_t pi = 0, si = 0;
        for (long k = 0; k < count; ++k) {
            bool done = false;
            const bool prefer_secondary = kind == ProgramKind::E && (k % 2 == 1);
            for (int source = 0; source < 2 && !done; ++source) {
                const bool use_secondary = (source == 0) == prefer_secondary;
                const auto& list = use_secondary ? secondary : primary;
                auto& cursor = use_secondary ? si : pi;
                for (std::size_t step = 0; step < list.size(); ++step) {
                    const auto& [x, y] = list[(cursor + step) % list.size()];
                    if (quota[x] > 0 && quota[y] > 0) {
                        quota[x]--;
                        quota[y]--;
                        pair_progs.push_back({kind, x, y, !use_secondary});
                        cursor = (cursor + step + 1) % std::max<std::size_t>(list.size(), 1);
                        done = true;
                        break;
                    }
                }
            }
            if (done) ++reserved;
        }
        return reserved;
    };

    const long dRes = reserve_pairs(ProgramKind::D, nD, pairs_shared, {});
    const long eRes = reserve_pairs(ProgramKind::E, nE, pairs_shared, pairs_same_unshared);
    const long fRes = reserve_pairs(ProgramKind::F, nF, pairs_cross, {});
    const long gRes = reserve_pairs(ProgramKind::G, nG, pairs_cross, {});
    nC += 2 * (nE - eRes) + (nF - fRes) + (nG - gRes);  // unplaced programs fall back

    long singles_budget = total - 2 * (dRes + eRes + fRes + gRes);
    long nA = singles_budget - nB - nC - nH;
    if (nA < 0) throw ConfigError("program shares exceed the membership budget");

    // ---- Allocation helpers ----
    Asn next_asn = 65000;
    const auto new_asn = [&] { return next_asn++; };
    std::map<Asn, Prefix> as_prefixes;
    const auto as_prefix = [&](Asn asn) {
        auto it = as_prefixes.find(asn);
        if (it != as_prefixes.end()) return it->second;
        const long idx = asn - 64000;
        if (idx < 0 || idx >= 250L * 250L) throw ConfigError("AS space exhausted");
        Prefix p;
        p.network = (5u << 24) | (static_cast<std::uint32_t>(idx / 250) << 16) |
                    (static_cast<std::uint32_t>(idx % 250) << 8);
        p.length = 24;
        as_prefixes.emplace(asn, p);
        return p;
    };
    const auto as_ip = [&](Asn asn, int host) { return Ipv4{as_prefix(asn).network + host}; };

    std::vector<int> iface_counter(cfg.n_ixps, 10);
    const auto new_iface = [&](int ixp) {
        const int host = iface_counter[ixp]++;
        if (host > 254) throw ConfigError("peering LAN exhausted");
        return Ipv4{ixps[ixp].lan.network + host};
    };

    std::vector<Asn> probe_asns;
    for (int i = 0; i < 8; ++i) probe_asns.push_back(64500 + i);
    for (Asn p : probe_asns) as_prefix(p);
    const auto probe_ip = [&](int i) {
        return as_ip(probe_asns[i % probe_asns.size()], 7);
    };

    std::map<int, std::set<Asn>> hosted;          // facility index -> recorded tenants
    std::map<int, std::vector<Asn>> voters;       // facility index -> colocated locals
    std::vector<MembershipSynth> memberships;
    std::vector<std::vector<std::pair<Ipv4, Asn>>> registry(cfg.n_ixps);

    const double phys_options[4] = {1000, 10000, 40000, 100000};
    const double frac_options[3] = {100, 200, 500};

    const auto sample_speed = [&](double dist_km) {
        const double d_m = dist_km * 1000.0;
        const double vmin = cfg.speed.v_min_mps(d_m);
        double lo = std::max(vmin * (1.0 + cfg.speed_margin),
                             cfg.speed_floor_frac * cfg.speed.v_max_mps);
        lo = std::min(lo, 0.999 * cfg.speed.v_max_mps);
        if (lo < vmin) throw ConfigError("speed window collapsed; distance too large");
        return rnd_range(lo, cfg.speed.v_max_mps);
    };

    const auto add_membership = [&](Asn asn, int ixp, Verdict truth, bool responsive,
                                    GeoPoint loc, std::optional<double> port) {
        MembershipSynth m;
        m.asn = asn;
        m.ixp = ixp;
        m.iface_ip = new_iface(ixp);
        m.truth = truth;
        m.responsive = responsive;
        m.location = loc;
        m.ttl_family = rnd() < 0.5 ? 64 : 255;
        m.speed_mps = sample_speed(
            geodesic_km(facs[vps[primary_vp[ixp]].fac_idx].point, loc));
        m.port_mbps = port;
        registry[ixp].emplace_back(m.iface_ip, asn);
        memberships.push_back(m);
        return memberships.size() - 1;
    };

    const auto vp_point_of = [&](int ixp) {
        return facs[vps[primary_vp[ixp]].fac_idx].point;
    };

    const auto record_colo = [&](Asn asn, int fac_idx) { hosted[fac_idx].insert(asn); };

    // Remote router placement: a free point at the requested range from the
    // exchange's primary vantage point.
    const auto remote_point = [&](int ixp, double min_km, double max_km) {
        return destination(vp_point_of(ixp), rnd_range(0.0, 360.0),
                           rnd_range(min_km, max_km));
    };

    // ---- Singles ----
    int rotor = 0;
    const auto next_ixp_with_quota = [&] {
        for (int step = 0; step < cfg.n_ixps; ++step) {
            const int i = (rotor + step) % cfg.n_ixps;
            if (quota[i] > 0) {
                rotor = (i + 1) % cfg.n_ixps;
                quota[i]--;
                return i;
            }
        }
        throw ConfigError("membership quota exhausted early");
    };

    for (long k = 0; k < nA; ++k) {
        const int x = next_ixp_with_quota();
        const Asn asn = new_asn();
        const auto& ix = ixps[x];
        int fac_idx;
        const bool far_local = ix.wide && rnd() < cfg.far_local_share &&
                               facs[ix.fac_idx.back()].metro != ix.home_metro;
        if (far_local) {
            fac_idx = ix.fac_idx.back();
        } else {
            const int pick = rnd_int(0, static_cast<int>(ix.fac_idx.size()) - 1);
            fac_idx = ix.fac_idx[pick];
            if (facs[fac_idx].metro != ix.home_metro) fac_idx = ix.fac_idx[0];
        }
        std::optional<double> port;
        if (rnd() < cfg.port_record_prob_local) port = phys_options[rnd_int(0, 3)];
        const bool recorded = rnd() < cfg.colo_record_prob_local;
        if (recorded) record_colo(asn, fac_idx);
        add_membership(asn, x, Verdict::Local, true, facs[fac_idx].point, port);
        if (recorded && !facs[fac_idx].suburb) voters[fac_idx].push_back(asn);
    }

    for (long k = 0; k < nB; ++k) {
        const int x = next_ixp_with_quota();
        const Asn asn = new_asn();
        GeoPoint loc;
        bool placed = false;
        if (rnd() < 0.4) {
            // Colocated reseller customer: parked at a real facility that
            // does not host this exchange.
            const auto vp = vp_point_of(x);
            std::vector<int> candidates;
            const std::set<int> own(ixps[x].fac_idx.begin(), ixps[x].fac_idx.end());
            for (std::size_t f = 0; f < facs.size(); ++f) {
                if (facs[f].suburb || own.count(static_cast<int>(f))) continue;
                const double d = geodesic_km(vp, facs[f].point);
                if (d >= cfg.remote_min_km && d <= cfg.remote_max_km) {
                    candidates.push_back(static_cast<int>(f));
                }
            }
            if (!candidates.empty()) {
                const int f = candidates[rnd_int(0, static_cast<int>(candidates.size()) - 1)];
                loc = facs[f].point;
                record_colo(asn, f);
                placed = true;
            }
        }
        if (!placed) loc = remote_point(x, cfg.remote_min_km, cfg.remote_max_km);
        add_membership(asn, x, Verdict::Remote, true, loc,
                       frac_options[rnd_int(0, 2)]);
    }

    for (long k = 0; k < nC; ++k) {
        const int x = next_ixp_with_quota();
        const Asn asn = new_asn();
        std::optional<double> port;
        if (rnd() < cfg.port_record_prob_local) port = phys_options[rnd_int(0, 3)];
        if (rnd() < cfg.near_remote_share) {
            // Suburb remote: low RTT, yet parked outside every exchange site.
            const int f = metro_suburb[ixps[x].home_metro];
            record_colo(asn, f);
            add_membership(asn, x, Verdict::Remote, true, facs[f].point, port);
        } else {
            GeoPoint loc = remote_point(x, cfg.remote_min_km, cfg.remote_max_km);
            if (rnd() < 0.6) {
                const auto vp = vp_point_of(x);
                std::vector<int> candidates;
                const std::set<int> own(ixps[x].fac_idx.begin(), ixps[x].fac_idx.end());
                for (std::size_t f = 0; f < facs.size(); ++f) {
                    if (facs[f].suburb || own.count(static_cast<int>(f))) continue;
                    const double d = geodesic_km(vp, facs[f].point);
                    if (d >= cfg.remote_min_km && d <= cfg.remote_max_km) {
                        candidates.push_back(static_cast<int>(f));
                    }
                }
                if (!candidates.empty()) {
                    const int f =
                        candidates[rnd_int(0, static_cast<int>(candidates.size()) - 1)];
                    loc = facs[f].point;
                    record_colo(asn, f);
                }
            }
            add_membership(asn, x, Verdict::Remote, true, loc, port);
        }
    }

    for (long k = 0; k < nH; ++k) {
        const int x = next_ixp_with_quota();
        const Asn asn = new_asn();
        const int fac_idx = ixps[x].fac_idx[0];
        // Physically local, but every data channel is blank.
        add_membership(asn, x, Verdict::Local, false, facs[fac_idx].point, std::nullopt);
    }

    // ---- Pair programs ----
    struct TraceSpec {
        std::vector<std::pair<int, Ipv4>> hops;  // (index, ip)
    };
    std::vector<TraceSpec> trace_specs;
    int probe_rotor = 0;

    const auto pick_target = [&](int ixp, Asn not_asn) -> std::optional<std::pair<Ipv4, Asn>> {
        const auto& list = registry[ixp];
        if (list.empty()) return std::nullopt;
        for (int attempt = 0; attempt < 50; ++attempt) {
            const auto& cand = list[rnd_int(0, static_cast<int>(list.size()) - 1)];
            if (cand.second != not_asn) return cand;
        }
        return std::nullopt;
    };

    const auto wan_paths = [&](Asn asn, Ipv4 wan, int x, int y) {
        for (int ixp : {x, y}) {
            const auto target = pick_target(ixp, asn);
            if (!target) continue;
            TraceSpec spec;
            spec.hops = {{1, probe_ip(probe_rotor++)},
                         {2, wan},
                         {3, target->first},
                         {4, as_ip(target->second, 250)}};
            trace_specs.push_back(spec);
        }
    };

    for (const auto& prog : pair_progs) {
        const int x = prog.x, y = prog.y;
        const Asn asn = new_asn();
        const Ipv4 wan = as_ip(asn, 1);

        if (prog.kind == ProgramKind::D) {
            std::set<int> fx(ixps[x].fac_idx.begin(), ixps[x].fac_idx.end());
            int shared = -1;
            for (int f : ixps[y].fac_idx) {
                if (fx.count(f)) {
                    shared = f;
                    break;
                }
            }
            if (shared < 0) continue;  // pair list guarantees this never happens
            record_colo(asn, shared);
            const std::size_t mx = add_membership(asn, x, Verdict::Local, true,
                                                  facs[shared].point, std::nullopt);
            const std::size_t my = add_membership(asn, y, Verdict::Local, false,
                                                  facs[shared].point, std::nullopt);
            scenario.alias_sets.push_back(
                {"rt-" + std::to_string(asn),
                 {wan, memberships[mx].iface_ip, memberships[my].iface_ip}});
            wan_paths(asn, wan, x, y);
        } else if (prog.kind == ProgramKind::E) {
            const GeoPoint loc =
                remote_point(x, cfg.multi_remote_min_km, cfg.multi_remote_max_km);
            const std::size_t mx =
                add_membership(asn, x, Verdict::Remote, true, loc, std::nullopt);
            const std::size_t my =
                add_membership(asn, y, Verdict::Remote, false, loc, std::nullopt);
            scenario.alias_sets.push_back(
                {"rt-" + std::to_string(asn),
                 {wan, memberships[mx].iface_ip, memberships[my].iface_ip}});
            wan_paths(asn, wan, x, y);
        } else if (prog.kind == ProgramKind::F) {
            const int anchor_fac = ixps[x].fac_idx[0];
            record_colo(asn, anchor_fac);
            const std::size_t mx = add_membership(asn, x, Verdict::Local, true,
                                                  facs[anchor_fac].point, std::nullopt);
            const std::size_t my = add_membership(asn, y, Verdict::Remote, false,
                                                  facs[anchor_fac].point, std::nullopt);
            scenario.alias_sets.push_back(
                {"rt-" + std::to_string(asn),
                 {wan, memberships[mx].iface_ip, memberships[my].iface_ip}});
            wan_paths(asn, wan, x, y);
        } else if (prog.kind == ProgramKind::G) {
            // Voting member: dark on every direct channel; its private
            // neighbors place its router at one facility of exchange x.
            int best_fac = -1;
            for (int f : ixps[x].fac_idx) {
                if (facs[f].metro != ixps[x].home_metro) continue;
                if (voters.count(f) &&
                    static_cast<int>(voters[f].size()) >= cfg.neighbors_per_voter - 1 &&
                    (best_fac < 0 || voters[f].size() > voters[best_fac].size())) {
                    best_fac = f;
                }
            }
            std::optional<Asn> minority;
            for (const auto& [f, list] : voters) {
                if (f != best_fac && facs[f].metro != ixps[x].home_metro && !list.empty()) {
                    minority = list[0];
                    break;
                }
            }
            if (best_fac < 0 || !minority) {
                // Not enough colocated locals to vote; emit two plain locals
                // so the membership count stays exact.
                for (int ixp : {x, y}) {
                    const Asn sub = new_asn();
                    const int f = ixps[ixp].fac_idx[0];
                    record_colo(sub, f);
                    add_membership(sub, ixp, Verdict::Local, true, facs[f].point,
                                   std::nullopt);
                }
                continue;
            }
            const Ipv4 priv = as_ip(asn, 3);
            const std::size_t mx = add_membership(asn, x, Verdict::Local, false,
                                                  facs[best_fac].point, std::nullopt);
            const std::size_t my = add_membership(asn, y, Verdict::Remote, false,
                                                  facs[best_fac].point, std::nullopt);
            scenario.alias_sets.push_back(
                {"rt-" + std::to_string(asn),
                 {wan, priv, memberships[mx].iface_ip, memberships[my].iface_ip}});
            wan_paths(asn, wan, x, y);
            std::vector<Asn> neighbors(voters[best_fac].begin(),
                                       voters[best_fac].begin() +
                                           (cfg.neighbors_per_voter - 1));
            neighbors.push_back(*minority);
            for (Asn n : neighbors) {
                TraceSpec spec;
                spec.hops = {{1, probe_ip(probe_rotor++)}, {2, as_ip(n, 9)}, {3, priv}};
                trace_specs.push_back(spec);
            }
        }
    }

    for (int q : quota) {
        if (q != 0) throw ConfigError("internal: membership quota not exhausted");
    }

    // ---- Ping emission ----
    std::sort(memberships.begin(), memberships.end(),
              [](const MembershipSynth& a, const MembershipSynth& b) {
                  return std::tie(a.ixp, a.iface_ip) < std::tie(b.ixp, b.iface_ip);
              });

    const std::int64_t t0 = 1523088000;  // fixed campaign start
    const auto record_rtt = [&](const VpSynth& vp, double raw) {
        return vp.resolution == RttResolution::IntegerRoundedUp ? std::ceil(raw) : raw;
    };

    for (const auto& vp : vps) {
        // Route-server series; the sanity filter feeds on these.
        const double rs_base = vp.bad ? rnd_range(1.3, 2.6) : rnd_range(0.2, 0.45);
        for (int k = 0; k < cfg.samples_per_target; ++k) {
            PingSample s;
            s.vp_id = vp.vp_id;
            s.target_ip = ixps[vp.ixp].route_server;
            const double jitter = rnd_exp(cfg.jitter_mean_ms * 0.3);
            s.rtt_ms = record_rtt(vp, rs_base + jitter);
            s.reply_ttl = 255 - (vp.kind == VpKind::AtlasProbe ? 1 : 0);
            s.timestamp = t0 + k * 7200;
            scenario.pings.push_back(s);
        }
    }

    for (const auto& m : memberships) {
        if (!m.responsive) continue;
        for (const auto& vp : vps) {
            if (vp.ixp != m.ixp || vp.bad) continue;
            const double d_km = geodesic_km(facs[vp.fac_idx].point, m.location);
            const double d_m = d_km * 1000.0;
            double base;
            if (cfg.speed.v_min_mps(d_m) <= 0.0) {
                base = rnd_range(0.05, 0.3);  // same rack; the band is open above
            } else {
                base = d_m / m.speed_mps * 1000.0;
            }
            for (int k = 0; k < cfg.samples_per_target; ++k) {
                double jitter = rnd_exp(cfg.jitter_mean_ms);
                if (rnd() < cfg.spike_prob) jitter += cfg.spike_ms * (0.5 + rnd());
                PingSample s;
                s.vp_id = vp.vp_id;
                s.target_ip = m.iface_ip;
                s.rtt_ms = record_rtt(vp, base + jitter);
                s.reply_ttl = m.ttl_family - (vp.kind == VpKind::AtlasProbe ? 1 : 0);
                s.timestamp = t0 + k * 7200;
                scenario.pings.push_back(s);
                scenario.audit.push_back({m.iface_ip, vp.vp_id, d_km, base, jitter});
            }
        }
    }

    // ---- Traceroutes ----
    int trace_id = 0;
    for (const auto& spec : trace_specs) {
        TraceroutePath p;
        p.measurement_id = "tr-" + zero_pad(trace_id++, 6);
        for (const auto& [index, ip] : spec.hops) {
            p.hops.push_back({index, ip, std::nullopt});
        }
        scenario.traces.push_back(std::move(p));
    }

    // ---- Documents ----
    json ixp_records = json::array();
    json pricing_records = json::array();
    for (const auto& x : ixps) {
        json facs_of = json::array();
        for (int f : x.fac_idx) facs_of.push_back(facs[f].id);
        ixp_records.push_back(json{{"ixp_id", x.id},
                                   {"name", "Exchange " + x.id},
                                   {"prefixes", json::array({x.lan.str()})},
                                   {"facility_ids", facs_of}});
        pricing_records.push_back(
            json{{"ixp_id", x.id},
                 {"min_physical_capacity_mbps", 1000.0},
                 {"capacity_options_mbps", json::array({1000.0, 10000.0, 40000.0, 100000.0})}});
    }

    json iface_records = json::array();
    for (const auto& m : memberships) {
        json rec{{"ip", m.iface_ip.str()}, {"asn", m.asn}, {"ixp_id", ixps[m.ixp].id}};
        if (m.port_mbps) rec["port_capacity_mbps"] = *m.port_mbps;
        iface_records.push_back(std::move(rec));
    }
    if (cfg.corrupt_capacity_fraction > 0) {
        const double market[9] = {100, 200, 500, 1000, 2500, 5000, 10000, 40000, 100000};
        for (auto& rec : iface_records) {
            if (!rec.contains("port_capacity_mbps")) continue;
            if (rnd() < cfg.corrupt_capacity_fraction) {
                rec["port_capacity_mbps"] = market[rnd_int(0, 8)];
            }
        }
    }

    json fac_records = json::array();
    for (std::size_t f = 0; f < facs.size(); ++f) {
        json hosted_asns = json::array();
        if (auto it = hosted.find(static_cast<int>(f)); it != hosted.end()) {
            for (Asn a : it->second) hosted_asns.push_back(a);
        }
        json hosted_ixps = json::array();
        for (const auto& x : ixps) {
            if (std::find(x.fac_idx.begin(), x.fac_idx.end(), static_cast<int>(f)) !=
                x.fac_idx.end()) {
                hosted_ixps.push_back(x.id);
            }
        }
        fac_records.push_back(json{{"facility_id", facs[f].id},
                                   {"name", facs[f].id},
                                   {"latitude", facs[f].point.latitude},
                                   {"longitude", facs[f].point.longitude},
                                   {"hosted_asns", hosted_asns},
                                   {"hosted_ixps", hosted_ixps}});
    }

    json vp_records = json::array();
    for (const auto& vp : vps) {
        vp_records.push_back(json{{"vp_id", vp.vp_id},
                                  {"kind", to_string(vp.kind)},
                                  {"ixp_id", ixps[vp.ixp].id},
                                  {"facility_id", facs[vp.fac_idx].id},
                                  {"rtt_resolution", to_string(vp.resolution)},
                                  {"route_server_ip", ixps[vp.ixp].route_server.str()}});
    }

    json route_records = json::array();
    for (const auto& [asn, prefix] : as_prefixes) {
        route_records.push_back(json{{"prefix", prefix.str()}, {"asn", asn}});
    }

    const auto make_doc = [](std::string name, std::string kind, SourceTag source,
                             json records) {
        Document doc;
        doc.name = std::move(name);
        doc.kind = std::move(kind);
        doc.source = source;
        doc.records = std::move(records);
        return doc;
    };
    scenario.documents.push_back(
        make_doc("ixps.json", "ixps", SourceTag::Website, std::move(ixp_records)));
    scenario.documents.push_back(make_doc("port_pricing.json", "port_pricing",
                                          SourceTag::Website, std::move(pricing_records)));
    scenario.documents.push_back(make_doc("interfaces.json", "interfaces",
                                          SourceTag::Website, std::move(iface_records)));
    scenario.documents.push_back(
        make_doc("facilities.json", "facilities", SourceTag::PDB, std::move(fac_records)));
    scenario.documents.push_back(
        make_doc("vps.json", "vps", SourceTag::Custom, std::move(vp_records)));
    scenario.documents.push_back(
        make_doc("routing.json", "routing", SourceTag::Custom, std::move(route_records)));

    // Ground truth and (optionally noised) labels.
    json label_records = json::array();
    for (const auto& m : memberships) {
        scenario.ground_truth[{m.iface_ip, ixps[m.ixp].id}] = m.truth;
        Verdict emitted = m.truth;
        if (cfg.label_flip_fraction > 0 && rnd() < cfg.label_flip_fraction) {
            emitted = emitted == Verdict::Local ? Verdict::Remote : Verdict::Local;
        }
        label_records.push_back(json{{"ixp_id", ixps[m.ixp].id},
                                     {"ip", m.iface_ip.str()},
                                     {"label", to_string(emitted)},
                                     {"provenance", "Operator"}});
    }
    scenario.labels_document =
        make_doc("labels.json", "labels", SourceTag::Custom, std::move(label_records));

    auto ingested = parse_world(scenario.documents);
    if (!ingested.report.quarantine.empty()) {
        throw DataError("generator produced quarantined records: " +
                        ingested.report.quarantine.front().reason);
    }
    scenario.world = std::move(ingested.world);
    scenario.ingest_report = std::move(ingested.report);
    return scenario;
}

void write_scenario(const Scenario& scenario, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(directory) / "dataset");

    const auto doc_json = [](const Document& doc) {
        return json{{"kind", doc.kind},
                    {"source", to_string(doc.source)},
                    {"records", doc.records}};
    };
    for (const auto& doc : scenario.documents) {
        std::ofstream out(fs::path(directory) / "dataset" / doc.name);
        out << doc_json(doc).dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(directory) / "labels.json");
        out << doc_json(scenario.labels_document).dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(directory) / "pings.csv");
        out << "vp_id,target_ip,rtt_ms,reply_ttl,timestamp\n";
        out.precision(6);
        for (const auto& s : scenario.pings) {
            out << s.vp_id << ',' << s.target_ip.str() << ',' << s.rtt_ms << ','
                << s.reply_ttl << ',' << s.timestamp << '\n';
        }
    }
    {
        std::ofstream out(fs::path(directory) / "traces.jsonl");
        for (const auto& p : scenario.traces) {
            json hops = json::array();
            for (const auto& h : p.hops) {
                json hop = json::array();
                hop.push_back(h.index);
                hop.push_back(h.ip ? json(h.ip->str()) : json(nullptr));
                hop.push_back(h.rtt_ms ? json(*h.rtt_ms) : json(nullptr));
                hops.push_back(std::move(hop));
            }
            out << json{{"measurement_id", p.measurement_id}, {"hops", hops}}.dump()
                << "\n";
        }
    }
    {
        std::ofstream out(fs::path(directory) / "aliases.jsonl");
        for (const auto& set : scenario.alias_sets) {
            json ips = json::array();
            for (const auto& ip : set.ips) ips.push_back(ip.str());
            json rec{{"ips", std::move(ips)}};
            if (set.router_id) rec["router_id"] = *set.router_id;
            out << rec.dump() << "\n";
        }
    }
}

}  // namespace rpinfer
