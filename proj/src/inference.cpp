#include "rpinfer/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rpinfer {

namespace {

using nlohmann::json;

json range_json(const FeasibleRange& r) {
    return json{{"d_min_km", r.d_min_km}, {"d_max_km", r.d_max_km}};
}

std::vector<GeoPoint> points_of(const WorldModel& world, const std::set<std::string>& ids) {
    return world.facility_points(ids);
}

std::set<std::string> intersect(const std::set<std::string>& a,
                                const std::set<std::string>& b) {
    std::set<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::inserter(out, out.begin()));
    return out;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Local: return "Local";
        case Verdict::Remote: return "Remote";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string to_string(Step s) {
    switch (s) {
        case Step::PortCapacity: return "PortCapacity";
        case Step::RttColo: return "RttColo";
        case Step::MultiIxp: return "MultiIxp";
        case Step::PrivateVoting: return "PrivateVoting";
        case Step::None: return "None";
    }
    return "None";
}

Verdict verdict_from_string(const std::string& name) {
    if (name == "Local") return Verdict::Local;
    if (name == "Remote") return Verdict::Remote;
    if (name == "Unknown") return Verdict::Unknown;
    throw ParseError("unknown verdict: '" + name + "'");
}

Step step_from_string(const std::string& name) {
    if (name == "PortCapacity") return Step::PortCapacity;
    if (name == "RttColo") return Step::RttColo;
    if (name == "MultiIxp") return Step::MultiIxp;
    if (name == "PrivateVoting") return Step::PrivateVoting;
    if (name == "None") return Step::None;
    throw ParseError("unknown step: '" + name + "'");
}

std::string to_string(MemberClassKind k) {
    switch (k) {
        case MemberClassKind::Local: return "Local";
        case MemberClassKind::Remote: return "Remote";
        case MemberClassKind::Hybrid: return "Hybrid";
        case MemberClassKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

double SpeedModel::v_min_mps(double distance_m) const {
    if (distance_m <= 0.0) return -std::numeric_limits<double>::infinity();
    const double d = log_unit == LogUnit::Meters ? distance_m : distance_m / 1000.0;
    return std::min(v_max_mps, v_min_coeff_a * (std::log(d) - v_min_offset_b));
}

FeasibleRange feasible_range(double rtt_min_ms, RttResolution resolution,
                             const SpeedModel& model) {
    if (!(rtt_min_ms > 0.0) || !std::isfinite(rtt_min_ms)) {
        throw DataError("feasible_range: rtt must be positive and finite");
    }
    const double d_max_m = model.v_max_mps * (rtt_min_ms / 1000.0);
    FeasibleRange out{0.0, d_max_m / 1000.0};

    // Integer-rounding vantage points report ceil(rtt); the true value may
    // be up to one millisecond lower, which only relaxes the lower bound.
    const double rtt_eff_ms =
        resolution == RttResolution::IntegerRoundedUp ? rtt_min_ms - 1.0 : rtt_min_ms;
    if (rtt_eff_ms <= 0.0) return out;
    const double t = rtt_eff_ms / 1000.0;

    const auto residual = [&](double d_m) { return d_m - model.v_min_mps(d_m) * t; };

    // The residual's minimum sits at d = a*t; if it is non-negative there,
    // the lower-speed constraint never binds.
    const double probe = std::clamp(model.v_min_coeff_a * t, 1e-3, d_max_m);
    if (residual(probe) >= 0.0) return out;

    // residual(d_max) >= 0 because v_min caps at v_max and t <= rtt, so the
    // sign change between probe and d_max brackets the fixed point.
    double lo = probe, hi = d_max_m;
    for (int i = 0; i < 200 && (hi - lo) > 1e-4; ++i) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    out.d_min_km = 0.5 * (lo + hi) / 1000.0;
    return out;
}

std::optional<StepOutcome> step1_port_capacity(const MemberInterface& iface,
                                               const IxpRecord& ixp,
                                               const std::set<Asn>& exempt_asns) {
    if (!iface.port_capacity_mbps || !ixp.min_physical_capacity_mbps) return std::nullopt;
    if (exempt_asns.count(iface.asn)) return std::nullopt;
    if (*iface.port_capacity_mbps < *ixp.min_physical_capacity_mbps) {
        StepOutcome out;
        out.verdict = Verdict::Remote;
        out.evidence = json{{"port_capacity_mbps", *iface.port_capacity_mbps},
                            {"min_physical_capacity_mbps", *ixp.min_physical_capacity_mbps},
                            {"rule", "fractional_port"}};
        return out;
    }
    return std::nullopt;
}

StepOutcome step3_colo_rtt(const MemberInterface& iface, const IxpRecord& ixp,
                           const VantagePoint& vp, const RttEstimate& estimate,
                           const WorldModel& world, const PipelineConfig& config,
                           const std::map<std::string, double>& vp_facility_km) {
    StepOutcome out;
    if (estimate.filtered) {
        out.verdict = Verdict::Unknown;
        out.evidence = json{{"rule", "no_rtt_estimate"}, {"reason", estimate.filter_reason}};
        return out;
    }
    const FeasibleRange ring =
        feasible_range(estimate.rtt_min_ms, vp.rtt_resolution, config.speed);

    std::vector<std::string> ixp_feasible;
    std::vector<std::string> member_feasible;
    for (const auto& [fid, km] : vp_facility_km) {
        if (km < ring.d_min_km || km > ring.d_max_km) continue;
        const auto& fac = world.facilities.at(fid);
        if (fac.hosted_ixps.count(ixp.ixp_id)) ixp_feasible.push_back(fid);
        if (fac.hosted_asns.count(iface.asn)) member_feasible.push_back(fid);
    }

    out.evidence = json{{"vp_id", vp.vp_id},
                        {"rtt_min_ms", estimate.rtt_min_ms},
                        {"d_min_km", ring.d_min_km},
                        {"d_max_km", ring.d_max_km},
                        {"feasible_ixp_facilities", ixp_feasible},
                        {"feasible_member_facilities", member_feasible}};
    if (estimate.rtt_min_ms > config.advisory_remote_ms) {
        out.evidence["rtt_above_advisory_threshold"] = true;
    }

    if (ixp_feasible.empty()) {
        out.verdict = Verdict::Remote;
        out.evidence["rule"] = "no_feasible_ixp_facility";
        return out;
    }
    for (const auto& fid : ixp_feasible) {
        if (world.facilities.at(fid).hosted_asns.count(iface.asn)) {
            out.verdict = Verdict::Local;
            out.evidence["rule"] = "colocated_at_feasible_ixp_facility";
            out.evidence["facility"] = fid;
            return out;
        }
    }
    if (!member_feasible.empty()) {
        out.verdict = Verdict::Remote;
        out.evidence["rule"] = "member_only_in_non_ixp_facility";
        return out;
    }
    out.verdict = Verdict::Unknown;
    out.evidence["rule"] = "member_not_located";
    return out;
}

std::map<std::string, StepOutcome> step4_multi_ixp(
    const Router& router, const std::map<std::pair<Asn, std::string>, Prior>& priors,
    const WorldModel& world, const PipelineConfig& config) {
    std::map<std::string, StepOutcome> out;
    if (!router.multi_ixp()) return out;

    const std::set<std::string>& involved = router.next_hop_ixps;
    std::map<std::string, std::set<std::string>> fac;
    for (const auto& ixp : involved) fac[ixp] = world.facilities_of_ixp(ixp);

    std::set<std::string> common_all;
    bool first = true;
    for (const auto& ixp : involved) {
        common_all = first ? fac[ixp] : intersect(common_all, fac[ixp]);
        first = false;
    }

    const auto prior_of = [&](const std::string& ixp) -> const Prior* {
        auto it = priors.find({router.asn, ixp});
        return it == priors.end() ? nullptr : &it->second;
    };

    const std::set<std::string> as_facilities = world.facilities_of_asn(router.asn);
    const bool local_allowed = !config.strict_colo || !as_facilities.empty();

    // Case 1: one local anchor plus a facility shared by every involved
    // exchange puts the router at that shared site.
    if (local_allowed && !common_all.empty()) {
        for (const auto& ixp : involved) {
            const Prior* p = prior_of(ixp);
            if (p && p->local) {
                for (const auto& target : involved) {
                    StepOutcome o;
                    o.verdict = Verdict::Local;
                    o.evidence = json{{"router_id", router.router_id},
                                      {"case", "local_shared_facility"},
                                      {"prior_ixp", ixp},
                                      {"common_facilities",
                                       std::vector<std::string>(common_all.begin(),
                                                                common_all.end())}};
                    out[target] = std::move(o);
                }
                return out;
            }
        }
    }

    // Case 2: a remote anchor extends to every involved exchange when they
    // all share a site, or when every involved exchange lies closer to the
    // anchor exchange than the router possibly can.
    for (const auto& anchor : involved) {
        const Prior* p = prior_of(anchor);
        if (!p || !p->remote) continue;
        std::string rule;
        if (!common_all.empty()) {
            rule = "remote_shared_facility";
        } else if (p->remote_range) {
            const double d_lower_km = p->remote_range->d_min_km;
            const auto anchor_points = points_of(world, fac[anchor]);
            bool all_below = !anchor_points.empty();
            for (const auto& ixp : involved) {
                if (ixp == anchor) continue;
                const auto other_points = points_of(world, fac[ixp]);
                const auto max_km = max_cross_distance_km(other_points, anchor_points);
                if (!max_km || *max_km >= d_lower_km) {
                    all_below = false;
                    break;
                }
            }
            if (all_below) rule = "remote_distance_bound";
        }
        if (rule.empty()) continue;
        for (const auto& target : involved) {
            StepOutcome o;
            o.verdict = Verdict::Remote;
            o.evidence = json{{"router_id", router.router_id},
                              {"case", rule},
                              {"prior_ixp", anchor}};
            if (p->remote_range) o.evidence["anchor_ring"] = range_json(*p->remote_range);
            out[target] = std::move(o);
        }
        return out;
    }

    // Case 3: a local anchor at one exchange, with the others either
    // sharing no site with it or sitting farther than the router's
    // candidate sites spread, splits the router's peerings.
    if (local_allowed) {
        for (const auto& anchor : involved) {
            const Prior* p = prior_of(anchor);
            if (!p || !p->local) continue;
            const std::set<std::string> candidate_sites =
                intersect(as_facilities, fac[anchor]);
            const auto spread = max_spread_km(points_of(world, candidate_sites));
            std::vector<std::string> remote_subset;
            std::vector<std::string> rules;
            for (const auto& ixp : involved) {
                if (ixp == anchor) continue;
                if (intersect(fac[anchor], fac[ixp]).empty()) {
                    remote_subset.push_back(ixp);
                    rules.push_back("hybrid_no_shared_facility");
                    continue;
                }
                if (spread) {
                    const auto gap = min_cross_distance_km(points_of(world, fac[anchor]),
                                                           points_of(world, fac[ixp]));
                    if (gap && *gap > *spread) {
                        remote_subset.push_back(ixp);
                        rules.push_back("hybrid_distance_bound");
                    }
                }
            }
            if (remote_subset.empty()) continue;
            StepOutcome anchor_outcome;
            anchor_outcome.verdict = Verdict::Local;
            anchor_outcome.evidence = json{{"router_id", router.router_id},
                                           {"case", "hybrid_local_anchor"},
                                           {"prior_ixp", anchor}};
            out[anchor] = std::move(anchor_outcome);
            for (std::size_t i = 0; i < remote_subset.size(); ++i) {
                StepOutcome o;
                o.verdict = Verdict::Remote;
                o.evidence = json{{"router_id", router.router_id},
                                  {"case", rules[i]},
                                  {"prior_ixp", anchor}};
                out[remote_subset[i]] = std::move(o);
            }
            return out;
        }
    }
    return out;
}

std::optional<StepOutcome> step5_private_voting(
    Asn asn, const std::string& ixp_id, const std::vector<Router>& routers,
    const PrivateAdjacencies& priv, const WorldModel& world,
    const PipelineConfig& config,
    const std::optional<std::set<std::string>>& feasible_ixp_facilities) {
    const auto ixp_it = world.ixps.find(ixp_id);
    if (ixp_it == world.ixps.end()) return std::nullopt;

    for (const auto& router : routers) {
        if (router.asn != asn || !router.multi_ixp()) continue;
        bool related = router.next_hop_ixps.count(ixp_id) > 0;
        if (!related) {
            for (const auto& ip : router.interfaces) {
                if (auto owner = world.ixp_of_ip(ip); owner && *owner == ixp_id) {
                    related = true;
                    break;
                }
            }
        }
        if (!related) continue;

        std::set<Asn> neighbors;
        for (const auto& ip : router.interfaces) {
            auto it = priv.neighbors_by_interface.find(ip);
            if (it == priv.neighbors_by_interface.end()) continue;
            for (Asn n : it->second) {
                if (n != asn) neighbors.insert(n);
            }
        }

        std::vector<Asn> resolved;
        std::map<std::string, int> votes;
        for (Asn n : neighbors) {
            const auto facs = world.facilities_of_asn(n);
            if (facs.empty()) continue;
            resolved.push_back(n);
            for (const auto& f : facs) ++votes[f];
        }
        if (static_cast<int>(resolved.size()) < config.vote_quorum) continue;

        std::set<std::string> f_common;
        for (const auto& [f, count] : votes) {
            if (2 * count > static_cast<int>(resolved.size())) f_common.insert(f);
        }
        const std::set<std::string> f_ixp = feasible_ixp_facilities
                                                ? *feasible_ixp_facilities
                                                : world.facilities_of_ixp(ixp_id);
        const auto inter = intersect(f_ixp, f_common);

        Verdict verdict = inter.size() == 1 ? Verdict::Local : Verdict::Remote;
        if (verdict == Verdict::Local && config.strict_colo &&
            !world.facilities_of_asn(asn).count(*inter.begin())) {
            continue;  // strict mode: uncorroborated local vote is no inference
        }

        StepOutcome out;
        out.verdict = verdict;
        out.evidence = json{{"router_id", router.router_id},
                            {"neighbors_resolved", resolved.size()},
                            {"votes", votes},
                            {"f_common",
                             std::vector<std::string>(f_common.begin(), f_common.end())},
                            {"f_ixp", std::vector<std::string>(f_ixp.begin(), f_ixp.end())},
                            {"intersection",
                             std::vector<std::string>(inter.begin(), inter.end())}};
        return out;
    }
    return std::nullopt;
}

std::vector<MemberClass> classify_members(const std::vector<InferenceResult>& results) {
    std::map<Asn, std::pair<bool, bool>> flags;  // (has_local, has_remote)
    for (const auto& r : results) {
        auto& f = flags[r.interface.asn];
        if (r.verdict == Verdict::Local) f.first = true;
        if (r.verdict == Verdict::Remote) f.second = true;
    }
    std::vector<MemberClass> out;
    for (const auto& [asn, f] : flags) {
        MemberClass mc;
        mc.asn = asn;
        if (f.first && f.second) {
            mc.cls = MemberClassKind::Hybrid;
        } else if (f.first) {
            mc.cls = MemberClassKind::Local;
        } else if (f.second) {
            mc.cls = MemberClassKind::Remote;
        } else {
            mc.cls = MemberClassKind::Unknown;
        }
        out.push_back(mc);
    }
    return out;
}

PipelineOutput run_pipeline(const WorldModel& world, const MeasurementInputs& inputs,
                            const PipelineConfig& config) {
    PipelineOutput out;

    std::set<std::string> targets(config.target_ixps.begin(), config.target_ixps.end());
    if (!targets.empty()) {
        for (const auto& t : targets) {
            if (!world.ixps.count(t)) throw DataError("unknown exchange: '" + t + "'");
        }
    }
    const auto targeted = [&](const std::string& ixp) {
        return targets.empty() || targets.count(ixp) > 0;
    };

    std::map<IfaceKey, InferenceResult> results;
    for (const auto& [ip, iface] : world.interfaces) {
        if (!targeted(iface.ixp_id)) continue;
        InferenceResult r;
        r.interface = iface;
        results.emplace(IfaceKey{ip, iface.ixp_id}, std::move(r));
    }

    const auto assign = [&](const IfaceKey& key, Verdict v, Step s, json evidence) {
        auto it = results.find(key);
        if (it == results.end() || it->second.verdict != Verdict::Unknown) return false;
        it->second.verdict = v;
        it->second.step = s;
        it->second.evidence = std::move(evidence);
        return true;
    };

    // ---- Step 1: fractional ports mark reseller customers ----
    if (config.max_step >= 1) {
        for (auto& [key, r] : results) {
            const auto& ixp = world.ixps.at(r.interface.ixp_id);
            std::set<Asn> exempt;
            if (auto it = config.step1_exemptions.find(ixp.ixp_id);
                it != config.step1_exemptions.end()) {
                exempt = it->second;
            }
            if (auto o = step1_port_capacity(r.interface, ixp, exempt)) {
                assign(key, o->verdict, Step::PortCapacity, std::move(o->evidence));
            }
        }
    }

    // ---- Step 2: minimum RTT per interface, TTL-filtered, sane VPs only ----
    std::map<IfaceKey, std::vector<RttEstimate>> candidates;
    std::map<std::string, FeasibleRange> ring_by_iface;  // keyed by ip text, for priors
    std::map<std::string, std::map<std::string, double>> vp_fac_km;
    if (config.max_step >= 2) {
        std::map<std::pair<std::string, Ipv4>, std::vector<PingSample>> series;
        std::set<std::string> unknown_vps;
        for (const auto& s : inputs.pings) {
            if (!world.vps.count(s.vp_id)) {
                unknown_vps.insert(s.vp_id);
                continue;
            }
            series[{s.vp_id, s.target_ip}].push_back(s);
        }
        for (const auto& vp : unknown_vps) {
            out.warnings.push_back("pings from unknown vp '" + vp + "' ignored");
        }

        std::map<std::string, std::optional<double>> rs_rtt;
        for (const auto& [vp_id, vp] : world.vps) {
            if (!vp.route_server_ip) continue;
            auto it = series.find({vp_id, *vp.route_server_ip});
            if (it == series.end()) continue;
            const auto accepted = ttl_filter(it->second, vp);
            const auto est = aggregate_rtt_min(accepted, vp, *vp.route_server_ip);
            if (!est.filtered) {
                // Rounded-up minimums carry up to 1 ms of slack; compare the
                // effective value, same as the ring's lower bound does.
                const double adj = vp.rtt_resolution == RttResolution::IntegerRoundedUp
                                       ? est.rtt_min_ms - 1.0
                                       : est.rtt_min_ms;
                rs_rtt[vp_id] = adj;
            }
        }
        std::set<std::string> sane_vps;
        for (const auto& [vp_id, vp] : world.vps) {
            auto it = rs_rtt.find(vp_id);
            const std::optional<double> rs =
                it == rs_rtt.end() ? std::nullopt : it->second;
            if (vp_sanity_keep(vp, rs, config.vp_sanity_ms, &out.warnings)) {
                sane_vps.insert(vp_id);
            } else {
                out.dropped_vps.push_back(vp_id);
            }
        }

        for (const auto& [key, samples] : series) {
            const auto& [vp_id, target] = key;
            if (!sane_vps.count(vp_id)) continue;
            const auto iface_it = world.interfaces.find(target);
            if (iface_it == world.interfaces.end()) continue;  // route servers etc.
            const auto& vp = world.vps.at(vp_id);
            if (vp.ixp_id != iface_it->second.ixp_id) continue;
            if (!targeted(iface_it->second.ixp_id)) continue;
            const auto accepted = ttl_filter(samples, vp);
            candidates[{target, iface_it->second.ixp_id}].push_back(
                aggregate_rtt_min(accepted, vp, target));
        }

        // Distance cache: vantage point -> facility, computed once.
        for (const auto& [vp_id, vp] : world.vps) {
            if (!sane_vps.count(vp_id)) continue;
            const auto point = world.vp_point(vp);
            if (!point) continue;
            auto& cache = vp_fac_km[vp_id];
            for (const auto& [fid, fac] : world.facilities) {
                if (fac.location) cache[fid] = geodesic_km(*point, *fac.location);
            }
        }
    }

    // Smallest usable minimum wins when several vantage points cover the
    // same exchange; disagreement between them is logged after step 3.
    for (auto& [key, ests] : candidates) {
        std::stable_sort(ests.begin(), ests.end(),
                         [](const RttEstimate& a, const RttEstimate& b) {
                             if (a.filtered != b.filtered) return !a.filtered;
                             if (a.rtt_min_ms != b.rtt_min_ms) {
                                 return a.rtt_min_ms < b.rtt_min_ms;
                             }
                             return a.vp_id < b.vp_id;
                         });
        out.estimates.emplace(key, ests.front());
    }

    // Baseline comparator: flat RTT threshold, no colocation knowledge.
    for (const auto& [key, est] : out.estimates) {
        if (est.filtered) continue;
        BaselineResult b;
        b.key = key;
        b.verdict =
            est.rtt_min_ms > config.baseline_threshold_ms ? Verdict::Remote : Verdict::Local;
        out.baseline.push_back(b);
    }

    // ---- Step 3: RTT ring + colocation ----
    std::map<IfaceKey, std::set<std::string>> feasible_ixp_facs;
    if (config.max_step >= 3) {
        for (auto& [key, r] : results) {
            auto cand_it = candidates.find(key);
            if (cand_it == candidates.end()) continue;
            const auto& chosen = out.estimates.at(key);
            if (chosen.filtered) continue;
            const auto& vp = world.vps.at(chosen.vp_id);
            const auto& ixp = world.ixps.at(r.interface.ixp_id);
            const auto cache_it = vp_fac_km.find(chosen.vp_id);
            if (cache_it == vp_fac_km.end()) continue;  // VP has no coordinates
            const auto outcome = step3_colo_rtt(r.interface, ixp, vp, chosen, world,
                                                config, cache_it->second);

            // Keep the ring and the exchange's feasible sites for later steps.
            const auto ring =
                feasible_range(chosen.rtt_min_ms, vp.rtt_resolution, config.speed);
            ring_by_iface[key.ip.str()] = ring;
            std::set<std::string> feas(
                outcome.evidence.at("feasible_ixp_facilities").begin(),
                outcome.evidence.at("feasible_ixp_facilities").end());
            feasible_ixp_facs[key] = std::move(feas);

            if (outcome.verdict != Verdict::Unknown) {
                const bool used =
                    assign(key, outcome.verdict, Step::RttColo, outcome.evidence);
                if (used && cand_it->second.size() > 1) {
                    for (const auto& other : cand_it->second) {
                        if (other.vp_id == chosen.vp_id || other.filtered) continue;
                        const auto& ovp = world.vps.at(other.vp_id);
                        const auto oc = vp_fac_km.find(other.vp_id);
                        if (oc == vp_fac_km.end()) continue;
                        const auto alt = step3_colo_rtt(r.interface, ixp, ovp, other,
                                                        world, config, oc->second);
                        if (alt.verdict != Verdict::Unknown &&
                            alt.verdict != outcome.verdict) {
                            out.warnings.push_back(
                                "vp disagreement on " + key.ip.str() + "@" + key.ixp_id +
                                ": " + chosen.vp_id + "=" + to_string(outcome.verdict) +
                                " vs " + other.vp_id + "=" + to_string(alt.verdict));
                        }
                    }
                }
            }
        }
    }

    // Priors for the propagation steps are frozen after steps 1-3.
    std::map<std::pair<Asn, std::string>, Prior> priors;
    for (const auto& [key, r] : results) {
        if (r.verdict == Verdict::Unknown) continue;
        auto& prior = priors[{r.interface.asn, r.interface.ixp_id}];
        std::optional<FeasibleRange> ring;
        if (auto it = ring_by_iface.find(key.ip.str());
            it != ring_by_iface.end() && r.step == Step::RttColo) {
            ring = it->second;
        }
        if (r.verdict == Verdict::Local) {
            prior.local = true;
            if (ring && !prior.local_range) prior.local_range = ring;
        } else {
            prior.remote = true;
            if (ring && !prior.remote_range) prior.remote_range = ring;
        }
    }

    // ---- Step 4: multi-exchange routers ----
    std::vector<Router> routers;
    PrivateAdjacencies priv;
    if (config.max_step >= 4) {
        const auto next_hops = extract_ixp_next_hops(inputs.traces, world);
        routers = build_routers(inputs.alias_sets, next_hops, world, &out.warnings);
        priv = extract_private_adjacencies(inputs.traces, world);

        for (const auto& router : routers) {
            if (!router.multi_ixp()) continue;
            bool has_prior = false;
            for (const auto& ixp : router.next_hop_ixps) {
                if (priors.count({router.asn, ixp})) has_prior = true;
            }
            if (!has_prior) continue;
            const auto verdicts = step4_multi_ixp(router, priors, world, config);
            for (const auto& [ixp, outcome] : verdicts) {
                if (!targeted(ixp)) continue;
                for (auto& [key, r] : results) {
                    if (r.interface.asn != router.asn || key.ixp_id != ixp) continue;
                    assign(key, outcome.verdict, Step::MultiIxp, outcome.evidence);
                }
            }
        }
    }

    // ---- Step 5: private-interconnection voting, last resort ----
    if (config.max_step >= 5) {
        for (auto& [key, r] : results) {
            if (r.verdict != Verdict::Unknown) continue;
            std::optional<std::set<std::string>> feas;
            if (auto it = feasible_ixp_facs.find(key); it != feasible_ixp_facs.end()) {
                feas = it->second;
            }
            const auto outcome = step5_private_voting(
                r.interface.asn, key.ixp_id, routers, priv, world, config, feas);
            if (outcome) {
                assign(key, outcome->verdict, Step::PrivateVoting, outcome->evidence);
            }
        }
    }

    // ---- Finalize ----
    for (auto& [key, r] : results) {
        if (r.verdict != Verdict::Unknown) continue;
        r.step = Step::None;
        if (r.evidence.empty()) {
            auto est = out.estimates.find(key);
            if (est == out.estimates.end()) {
                r.evidence = json{{"reason", "no usable rtt estimate"}};
            } else if (est->second.filtered) {
                r.evidence = json{{"reason", est->second.filter_reason}};
            } else {
                r.evidence = json{{"reason", "unresolved after all steps"}};
            }
        }
    }
    for (auto& [key, r] : results) out.results.push_back(std::move(r));
    std::sort(out.results.begin(), out.results.end(),
              [](const InferenceResult& a, const InferenceResult& b) {
                  return std::tie(a.interface.ixp_id, a.interface.ip) <
                         std::tie(b.interface.ixp_id, b.interface.ip);
              });
    out.member_classes = classify_members(out.results);
    std::sort(out.baseline.begin(), out.baseline.end(),
              [](const BaselineResult& a, const BaselineResult& b) { return a.key < b.key; });
    return out;
}

}  // namespace rpinfer
