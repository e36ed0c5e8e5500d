#pragma once

#include <string>

#include <json.hpp>

#include "sct/queue_sim.hpp"

namespace sct {

using json = nlohmann::ordered_json;

json to_json(const CostEstimate& est);

/// Writes human-diffable JSON (2-space indent, trailing newline).
void write_json(const std::string& path, const json& doc);
json read_json(const std::string& path);

/// Run manifest: resolved config, seed, build id, artifact list, timestamp.
/// Timestamps live only here; result files stay byte-stable.
void write_manifest(const std::string& path, const std::string& subcommand, const json& config,
                    uint64_t seed, int workers, const std::vector<std::string>& artifacts);

std::string build_id();

/// Cell-by-cell agreement between two region-label CSVs in the
/// `w1,w2,control_index,active` schema. Keys present in only one file are
/// ignored; returns matched/compared plus the fraction.
struct AgreementResult {
    long compared = 0;
    long matched = 0;
    double fraction() const { return compared ? static_cast<double>(matched) / compared : 1.0; }
};
AgreementResult compare_label_csvs(const std::string& path_a, const std::string& path_b);

}  // namespace sct
