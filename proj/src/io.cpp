#include "sct/io.hpp"

#include <chrono>
#include <fstream>
#include <unordered_map>

#include "sct/errors.hpp"

#ifndef SCT_BUILD_ID
#define SCT_BUILD_ID "unversioned"
#endif

namespace sct {

json to_json(const CostEstimate& est) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"replications", est.replications},
                {"horizon", est.horizon}};
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ArtifactMissing("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactMissing("cannot open: " + path);
    return json::parse(in);
}

std::string build_id() { return SCT_BUILD_ID; }

void write_manifest(const std::string& path, const std::string& subcommand, const json& config,
                    uint64_t seed, int workers, const std::vector<std::string>& artifacts) {
    const auto now = std::chrono::system_clock::now();
    json doc;
    doc["subcommand"] = subcommand;
    doc["config"] = config;
    doc["seed"] = seed;
    doc["workers"] = workers;
    doc["build_id"] = build_id();
    doc["artifacts"] = artifacts;
    doc["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    write_json(path, doc);
}

AgreementResult compare_label_csvs(const std::string& path_a, const std::string& path_b) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ArtifactMissing("cannot open label CSV: " + path);
        std::unordered_map<std::string, int> rows;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            const auto last = line.rfind(',');
            if (last == std::string::npos) continue;
            rows[line.substr(0, last)] = std::stoi(line.substr(last + 1));
        }
        return rows;
    };
    const auto a = load(path_a);
    const auto b = load(path_b);
    AgreementResult result;
    for (const auto& [key, val] : a) {
        const auto it = b.find(key);
        if (it == b.end()) continue;
        ++result.compared;
        if (it->second == val) ++result.matched;
    }
    return result;
}

}  // namespace sct
