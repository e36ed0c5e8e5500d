#pragma once

#include <stdexcept>
#include <string>

namespace sct {

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct OutsideWedge : std::runtime_error {
    explicit OutsideWedge(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleWorkload : std::runtime_error {
    explicit InfeasibleWorkload(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownCase : std::runtime_error {
    explicit UnknownCase(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionViolated : std::runtime_error {
    explicit PreconditionViolated(const std::string& what) : std::runtime_error(what) {}
};

struct GridTooCoarse : std::runtime_error {
    explicit GridTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

struct DivergedLoss : std::runtime_error {
    explicit DivergedLoss(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidProbabilities : std::runtime_error {
    explicit InvalidProbabilities(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct ArtifactMissing : std::runtime_error {
    explicit ArtifactMissing(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sct
