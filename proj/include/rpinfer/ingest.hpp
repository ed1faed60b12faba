#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpinfer/world.hpp"

namespace rpinfer {

// One input document: a named JSON payload with top-level
// {"kind": ..., "source": ..., "records": [...]}.
struct Document {
    std::string name;    // file name, used in diagnostics
    std::string kind;    // ixps | interfaces | facilities | port_pricing | labels | vps | routing
    SourceTag source = SourceTag::Custom;
    nlohmann::json records;

    static Document from_json(const std::string& name, const nlohmann::json& body);
};

struct SourceCounts {
    long total = 0;      // records contributed by the source
    long unique = 0;     // keys only this source supplied
    long conflicts = 0;  // values overridden by a higher-precedence source
};

struct IngestReport {
    // source name -> kind -> counters
    std::map<std::string, std::map<std::string, SourceCounts>> sources;
    std::vector<QuarantineEntry> quarantine;
    std::vector<std::string> warnings;
};

struct IngestResult {
    WorldModel world;
    IngestReport report;
};

// Merges all documents into a single world model. Cross-source conflicts
// are resolved by source precedence; entries violating type invariants
// are quarantined (kept in the report, excluded from the model).
// References to unknown exchanges raise LinkError.
IngestResult parse_world(const std::vector<Document>& documents);

// Picks the value backed by the highest-precedence source. Ties within a
// precedence level resolve to the lexicographically smallest value and
// are appended to tie_log when provided.
template <typename Value>
Value resolve_conflicts(std::vector<std::pair<Value, SourceTag>> entries,
                        ConflictDomain domain = ConflictDomain::General,
                        std::vector<std::string>* tie_log = nullptr);

// Loads every *.json file in a directory as a Document.
std::vector<Document> load_documents(const std::string& directory);

extern template std::string resolve_conflicts<std::string>(
    std::vector<std::pair<std::string, SourceTag>>, ConflictDomain,
    std::vector<std::string>*);

}  // namespace rpinfer
