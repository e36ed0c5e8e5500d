#pragma once

#include <cstdint>

#include "sct/linalg.hpp"
#include "sct/rng.hpp"

namespace sct {

/// Brownian motion with constant drift xi and covariance cov.
struct BrownianSpec {
    VectorXd xi;
    CovarianceMatrix cov;

    BrownianSpec(VectorXd drift, CovarianceMatrix covariance);
    int dim() const { return static_cast<int>(xi.size()); }
};

/// Uniform time grid on [0, T] with num_steps * dt = T.
struct TimeGrid {
    double horizon;
    double dt;
    int num_steps;

    TimeGrid(double T, int steps);
};

/// Batched Brownian increments, row (rep * num_steps + step), column = dimension.
/// Each row is xi*dt + L*sqrt(dt)*zeta with zeta standard normal.
struct IncrementBatch {
    int batch = 0;
    int num_steps = 0;
    int dim = 0;
    MatrixXd data;  // (batch*num_steps) x dim

    Eigen::Block<MatrixXd, 1> row(int rep, int step) { return data.row(rep * num_steps + step); }
    Eigen::Block<const MatrixXd, 1> row(int rep, int step) const {
        return data.row(rep * num_steps + step);
    }
};

/// Deterministic for a fixed seed; replication r draws from sub-stream `stream_offset + r`,
/// so distinct replications are independent and may be generated in parallel.
IncrementBatch sample_increments(const BrownianSpec& spec, const TimeGrid& grid, int batch,
                                 uint64_t seed, uint64_t stream_offset = 0,
                                 NormalMethod method = NormalMethod::inverse_cdf);

/// Zero-drift Brownian part only (L*sqrt(dt)*zeta), same stream layout as sample_increments.
IncrementBatch sample_noise(const BrownianSpec& spec, const TimeGrid& grid, int batch,
                            uint64_t seed, uint64_t stream_offset = 0,
                            NormalMethod method = NormalMethod::inverse_cdf);

}  // namespace sct
