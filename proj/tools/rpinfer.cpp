// Command-line front end: ingest -> infer -> validate -> report, plus a
// synthetic scenario generator that emits the same file formats.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rpinfer/ingest.hpp"
#include "rpinfer/inference.hpp"
#include "rpinfer/json_io.hpp"
#include "rpinfer/report.hpp"
#include "rpinfer/synth.hpp"
#include "rpinfer/validation.hpp"

namespace {

using namespace rpinfer;
using nlohmann::json;

bool g_json_logs = false;

void log_line(const std::string& level, const std::string& msg) {
    if (g_json_logs) {
        std::cerr << json{{"level", level}, {"msg", msg}}.dump() << "\n";
    } else {
        std::cerr << level << ": " << msg << "\n";
    }
}

struct InferOptions {
    std::string world_path;
    std::string pings_path;
    std::string traces_path;
    std::string aliases_path;
    std::string out_path;
    std::vector<std::string> ixps;
    PipelineConfig config;
    double v_max_mps = SpeedModel{}.v_max_mps;
    double v_min_coeff_a = SpeedModel{}.v_min_coeff_a;
    double v_min_offset_b = SpeedModel{}.v_min_offset_b;
    std::vector<std::string> exemptions;  // "ixp:asn"
};

json pipeline_config_json(const PipelineConfig& c) {
    json exempt = json::object();
    for (const auto& [ixp, asns] : c.step1_exemptions) exempt[ixp] = asns;
    return json{{"v_max_mps", c.speed.v_max_mps},
                {"v_min_coeff_a", c.speed.v_min_coeff_a},
                {"v_min_offset_b", c.speed.v_min_offset_b},
                {"vp_sanity_ms", c.vp_sanity_ms},
                {"metro_threshold_km", c.metro_threshold_km},
                {"vote_quorum", c.vote_quorum},
                {"baseline_threshold_ms", c.baseline_threshold_ms},
                {"advisory_remote_ms", c.advisory_remote_ms},
                {"strict_colo", c.strict_colo},
                {"max_step", c.max_step},
                {"step1_exemptions", exempt},
                {"target_ixps", c.target_ixps}};
}

int cmd_ingest(const std::string& in_dir, const std::string& out_path,
               std::string report_path) {
    const auto docs = load_documents(in_dir);
    auto result = parse_world(docs);

    RunManifest manifest;
    manifest.command = "ingest";
    manifest.created_unix = manifest_timestamp();
    for (const auto& doc : docs) {
        manifest.input_digests[doc.name] = fnv1a_hex(doc.records.dump());
    }
    json world = world_to_json(result.world);
    world["manifest"] = manifest_json(manifest);
    save_json_file(out_path, world);

    if (report_path.empty()) {
        report_path =
            (std::filesystem::path(out_path).parent_path() / "ingest_report.json").string();
    }
    json report = ingest_report_json(result.report);
    report["manifest"] = manifest_json(manifest);
    save_json_file(report_path, report);

    log_line("info", "ingested " + std::to_string(result.world.interfaces.size()) +
                         " interfaces across " + std::to_string(result.world.ixps.size()) +
                         " exchanges; " + std::to_string(result.report.quarantine.size()) +
                         " quarantined");
    return 0;
}

int cmd_infer(const InferOptions& opt) {
    PipelineConfig config = opt.config;
    config.speed.v_max_mps = opt.v_max_mps;
    config.speed.v_min_coeff_a = opt.v_min_coeff_a;
    config.speed.v_min_offset_b = opt.v_min_offset_b;
    config.target_ixps = opt.ixps;
    for (const auto& text : opt.exemptions) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("exemption must be <ixp_id>:<asn>, got '" + text + "'");
        }
        config.step1_exemptions[text.substr(0, colon)].insert(
            static_cast<Asn>(std::stoul(text.substr(colon + 1))));
    }

    const WorldModel world = world_from_json(load_json_file(opt.world_path));
    MeasurementInputs inputs;
    RunManifest manifest;
    manifest.command = "infer";
    manifest.created_unix = manifest_timestamp();
    manifest.config = pipeline_config_json(config);
    manifest.input_digests["world"] = digest_file(opt.world_path);
    if (!opt.pings_path.empty()) {
        inputs.pings = load_pings_csv(opt.pings_path);
        manifest.input_digests["pings"] = digest_file(opt.pings_path);
    }
    if (!opt.traces_path.empty()) {
        inputs.traces = load_traces_jsonl(opt.traces_path);
        manifest.input_digests["traces"] = digest_file(opt.traces_path);
    }
    if (!opt.aliases_path.empty()) {
        inputs.alias_sets = load_alias_sets_jsonl(opt.aliases_path);
        manifest.input_digests["aliases"] = digest_file(opt.aliases_path);
    }

    const auto output = run_pipeline(world, inputs, config);
    save_json_file(opt.out_path, results_to_json(output, manifest));

    long local = 0, remote = 0, unknown = 0;
    for (const auto& r : output.results) {
        if (r.verdict == Verdict::Local) ++local;
        if (r.verdict == Verdict::Remote) ++remote;
        if (r.verdict == Verdict::Unknown) ++unknown;
    }
    log_line("info", "inferred " + std::to_string(local) + " local, " +
                         std::to_string(remote) + " remote, " + std::to_string(unknown) +
                         " unknown");
    for (const auto& w : output.warnings) log_line("warn", w);
    return 0;
}

int cmd_validate(const std::string& results_path, const std::string& labels_path,
                 const std::string& world_path, const std::string& out_path,
                 bool rollup) {
    const auto loaded = results_from_json(load_json_file(results_path));

    const json labels_body = load_json_file(labels_path);
    const Document labels_doc = Document::from_json(
        std::filesystem::path(labels_path).filename().string(), labels_body);
    if (labels_doc.kind != "labels") {
        throw DataError(labels_path + ": expected a labels document");
    }
    std::vector<ValidationLabel> labels;
    bool needs_world = false;
    for (const auto& rec : labels_doc.records) {
        ValidationLabel label;
        label.ixp_id = rec.at("ixp_id").get<std::string>();
        if (rec.contains("ip") && !rec.at("ip").is_null()) {
            label.ip = Ipv4::parse(rec.at("ip").get<std::string>());
        } else {
            label.asn = rec.at("asn").get<Asn>();
            needs_world = true;
        }
        label.label = rec.at("label").get<std::string>() == "Remote" ? LabelClass::Remote
                                                                     : LabelClass::Local;
        labels.push_back(std::move(label));
    }
    WorldModel world;
    if (needs_world) {
        if (world_path.empty()) {
            throw DataError("labels carry member-level entries; pass --world");
        }
        world = world_from_json(load_json_file(world_path));
    }
    const LabeledSets sets = labels_to_sets(labels, world);

    const auto per_step = per_step_metrics(loaded.results, sets);
    std::optional<MetricsReport> baseline;
    if (!loaded.baseline.empty()) {
        InferredSets b;
        for (const auto& r : loaded.baseline) {
            (r.verdict == Verdict::Remote ? b.inf_r : b.inf_l).insert(r.key);
        }
        baseline = compute_metrics(b, sets);
    }

    RunManifest manifest;
    manifest.command = "validate";
    manifest.created_unix = manifest_timestamp();
    manifest.input_digests["results"] = digest_file(results_path);
    manifest.input_digests["labels"] = digest_file(labels_path);

    json out = metrics_to_json(per_step, baseline, manifest);
    if (rollup) {
        const auto verdicts = rollup_member_level(loaded.results);
        std::map<std::pair<Asn, std::string>, Verdict> truth;
        for (const auto& label : labels) {
            if (!label.asn) continue;
            auto [it, inserted] = truth.emplace(
                std::make_pair(*label.asn, label.ixp_id),
                label.label == LabelClass::Remote ? Verdict::Remote : Verdict::Local);
            if (!inserted && label.label == LabelClass::Remote) it->second = Verdict::Remote;
        }
        long agree = 0, total = 0;
        for (const auto& [key, v] : verdicts) {
            auto it = truth.find(key);
            if (it == truth.end()) continue;
            ++total;
            if (it->second == v) ++agree;
        }
        json ml{{"members_inferred", verdicts.size()},
                {"members_labeled", truth.size()},
                {"compared", total}};
        if (total > 0) ml["agreement"] = static_cast<double>(agree) / total;
        out["member_level"] = ml;
    }
    save_json_file(out_path, out);

    const auto& c = per_step.combined;
    std::ostringstream os;
    os << "combined:";
    if (c.acc) os << " acc=" << *c.acc;
    if (c.cov) os << " cov=" << *c.cov;
    if (c.pre) os << " pre=" << *c.pre;
    log_line("info", os.str());
    return 0;
}

int cmd_report(const std::string& results_path, const std::string& world_path,
               const std::string& out_dir, bool geojson, const std::string& rings_ixp,
               double metro_km) {
    const auto loaded = results_from_json(load_json_file(results_path));
    const WorldModel world = world_from_json(load_json_file(world_path));
    const auto bundle = build_report(loaded.results, loaded.member_classes, world, metro_km);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "per_ixp.csv").string(), per_ixp_csv(bundle));
    write_text_file((fs::path(out_dir) / "per_step.csv").string(), per_step_csv(bundle));
    write_text_file((fs::path(out_dir) / "member_classes.csv").string(),
                    member_class_csv(bundle));

    RunManifest manifest;
    manifest.command = "report";
    manifest.created_unix = manifest_timestamp();
    manifest.input_digests["results"] = digest_file(results_path);
    manifest.input_digests["world"] = digest_file(world_path);
    json body = report_json(bundle);
    body["manifest"] = manifest_json(manifest);
    save_json_file((fs::path(out_dir) / "report.json").string(), body);

    if (geojson) {
        json geo = facilities_geojson(world, loaded.results, rings_ixp);
        geo["manifest"] = manifest_json(manifest);  // foreign member, RFC 7946 allows it
        save_json_file((fs::path(out_dir) / "facilities.geojson").string(), geo);
    }
    log_line("info", "report written to " + out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"remote peering inference toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (TOML-style)");
    app.add_flag("--json-logs", g_json_logs, "structured diagnostics on stderr");
    app.set_version_flag("--version", std::string(rpinfer::kToolName) + " " +
                                          rpinfer::kToolVersion);

    // ingest
    std::string in_dir, out_path, report_path;
    auto* ingest = app.add_subcommand("ingest", "merge dataset documents into a world model");
    ingest->add_option("--in", in_dir, "directory of dataset documents")
        ->required()
        ->check(CLI::ExistingDirectory);
    ingest->add_option("--out", out_path, "world model output")->required();
    ingest->add_option("--report", report_path, "ingest report output");

    // infer
    InferOptions inf;
    auto* infer = app.add_subcommand("infer", "classify member interfaces");
    infer->add_option("--world", inf.world_path, "world model")->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--pings", inf.pings_path, "ping log csv")->check(CLI::ExistingFile);
    infer->add_option("--traces", inf.traces_path, "traceroute jsonl")
        ->check(CLI::ExistingFile);
    infer->add_option("--aliases", inf.aliases_path, "alias sets jsonl")
        ->check(CLI::ExistingFile);
    infer->add_option("--ixp", inf.ixps, "restrict to these exchanges");
    infer->add_option("--out", inf.out_path, "results output")->required();
    infer->add_option("--v-max-mps", inf.v_max_mps, "maximum probe speed (m/s)");
    infer->add_option("--v-min-coeff-a", inf.v_min_coeff_a, "lower speed envelope coefficient");
    infer->add_option("--v-min-offset-b", inf.v_min_offset_b, "lower speed envelope offset");
    infer->add_option("--vp-sanity-ms", inf.config.vp_sanity_ms,
                      "drop vantage points at or above this route-server RTT");
    infer->add_option("--metro-km", inf.config.metro_threshold_km,
                      "metro distance threshold (km)");
    infer->add_option("--quorum", inf.config.vote_quorum, "private-voting quorum");
    infer->add_option("--baseline-ms", inf.config.baseline_threshold_ms,
                      "baseline RTT threshold (ms)");
    infer->add_option("--advisory-ms", inf.config.advisory_remote_ms,
                      "RTT advisory marker (ms)");
    infer->add_flag("--strict-colo", inf.config.strict_colo,
                    "require member facility data for propagation-step local verdicts");
    infer->add_option("--max-step", inf.config.max_step, "run stages 1..N only")
        ->check(CLI::Range(1, 5));
    infer->add_option("--exempt", inf.exemptions,
                      "legacy-port allowlist entries, <ixp_id>:<asn>");

    // validate
    std::string v_results, v_labels, v_world, v_out;
    bool v_rollup = false;
    auto* validate = app.add_subcommand("validate", "score results against labels");
    validate->add_option("--results", v_results, "results json")->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--labels", v_labels, "labels document")->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--world", v_world, "world model (for member-level labels)")
        ->check(CLI::ExistingFile);
    validate->add_option("--out", v_out, "metrics output")->required();
    validate->add_flag("--rollup-member", v_rollup, "add member-level agreement");

    // synth
    SynthConfig syn;
    std::string syn_out;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic scenario");
    synth->add_option("--out", syn_out, "output directory")->required();
    synth->add_option("--seed", syn.seed, "rng seed");
    synth->add_option("--ixps", syn.n_ixps, "exchange count");
    synth->add_option("--members-per-ixp", syn.members_per_ixp, "memberships per exchange");
    synth->add_option("--remote-frac", syn.remote_fraction, "remote membership fraction");
    synth->add_option("--reseller-frac", syn.reseller_fraction,
                      "fractional-port membership fraction");
    synth->add_option("--wide-frac", syn.wide_area_fraction, "wide-area exchange fraction");
    synth->add_option("--unknown-frac", syn.unknown_share, "blank-member fraction");
    synth->add_option("--jitter-ms", syn.jitter_mean_ms, "mean RTT jitter (ms)");
    synth->add_option("--corrupt-capacity", syn.corrupt_capacity_fraction,
                      "fraction of port records rewritten at random");
    synth->add_option("--label-flip", syn.label_flip_fraction,
                      "fraction of emitted labels flipped");

    // report
    std::string r_results, r_world, r_out, r_rings;
    bool r_geojson = false;
    double r_metro_km = 50.0;
    auto* report = app.add_subcommand("report", "summarize results");
    report->add_option("--results", r_results, "results json")->required()
        ->check(CLI::ExistingFile);
    report->add_option("--world", r_world, "world model")->required()
        ->check(CLI::ExistingFile);
    report->add_option("--out-dir", r_out, "output directory")->required();
    report->add_flag("--geojson", r_geojson, "emit facilities geojson");
    report->add_option("--rings", r_rings, "add feasibility rings for this exchange");
    report->add_option("--metro-km", r_metro_km, "metro distance threshold (km)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(in_dir, out_path, report_path);
        if (infer->parsed()) return cmd_infer(inf);
        if (validate->parsed()) return cmd_validate(v_results, v_labels, v_world, v_out,
                                                    v_rollup);
        if (synth->parsed()) {
            const auto scenario = rpinfer::generate(syn);
            rpinfer::write_scenario(scenario, syn_out);
            log_line("info", "scenario with " + std::to_string(scenario.ground_truth.size()) +
                                 " memberships written to " + syn_out);
            return 0;
        }
        if (report->parsed()) {
            return cmd_report(r_results, r_world, r_out, r_geojson, r_rings, r_metro_km);
        }
    } catch (const std::exception& e) {
        log_line("error", e.what());
        return 2;
    }
    return 1;
}
