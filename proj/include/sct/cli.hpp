#pragma once

#include <string>

namespace sct::cli {

struct Options {
    std::string subcommand;
    std::string config_path;
    long seed_override = -1;  // -1: keep config seed
    int workers = 0;          // 0: all cores
    std::string out_override;
};

/// Runs one subcommand; writes manifest.json, result.json and any artifacts
/// into the resolved output directory. Returns 0 on success; on failure writes
/// a machine-readable error.json and returns nonzero.
int run(const Options& opts);

}  // namespace sct::cli
