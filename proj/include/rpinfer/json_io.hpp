#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpinfer/ingest.hpp"
#include "rpinfer/inference.hpp"
#include "rpinfer/validation.hpp"

namespace rpinfer {

// FNV-1a over raw bytes, hex-encoded; stable input fingerprints for
// run manifests.
std::string fnv1a_hex(const std::string& bytes);
std::string digest_file(const std::string& path);

// Honors SOURCE_DATE_EPOCH so identical runs can emit identical bytes.
std::int64_t manifest_timestamp();

struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, std::string> input_digests;
    std::int64_t created_unix = 0;
};

nlohmann::json manifest_json(const RunManifest& manifest);

nlohmann::json world_to_json(const WorldModel& world);
WorldModel world_from_json(const nlohmann::json& body);

nlohmann::json ingest_report_json(const IngestReport& report);

nlohmann::json results_to_json(const PipelineOutput& output, const RunManifest& manifest);

struct LoadedResults {
    std::vector<InferenceResult> results;
    std::vector<BaselineResult> baseline;
    std::vector<MemberClass> member_classes;
};
LoadedResults results_from_json(const nlohmann::json& body);

nlohmann::json metrics_report_json(const MetricsReport& m);
nlohmann::json metrics_to_json(const PerStepMetrics& per_step,
                               const std::optional<MetricsReport>& baseline,
                               const RunManifest& manifest);

// Plain file helpers; write is atomic enough for this tool (tmp + rename
// is unnecessary, outputs are regenerated wholesale).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);
nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& body);

}  // namespace rpinfer
