#include "sct/brownian.hpp"

#include <cmath>

#include "sct/errors.hpp"

namespace sct {

BrownianSpec::BrownianSpec(VectorXd drift, CovarianceMatrix covariance)
    : xi(std::move(drift)), cov(std::move(covariance)) {
    if (xi.size() != cov.dim()) throw DimensionMismatch("drift/covariance dimensions disagree");
}

TimeGrid::TimeGrid(double T, int steps) : horizon(T), dt(T / steps), num_steps(steps) {
    if (steps < 1 || !(dt > 0.0)) throw ConfigInvalid("time grid requires dt > 0");
}

namespace {

IncrementBatch sample_impl(const BrownianSpec& spec, const TimeGrid& grid, int batch,
                           uint64_t seed, uint64_t stream_offset, NormalMethod method,
                           bool with_drift) {
    if (batch < 1) throw ConfigInvalid("batch must be >= 1");
    const int d = spec.dim();
    const MatrixXd L = cholesky(spec.cov) * std::sqrt(grid.dt);
    const VectorXd mean = with_drift ? VectorXd(spec.xi * grid.dt) : VectorXd(VectorXd::Zero(d));

    IncrementBatch out;
    out.batch = batch;
    out.num_steps = grid.num_steps;
    out.dim = d;
    out.data.resize(static_cast<Eigen::Index>(batch) * grid.num_steps, d);

    VectorXd z(d);
    for (int rep = 0; rep < batch; ++rep) {
        CounterRng rng(seed, stream_offset + static_cast<uint64_t>(rep), method);
        for (int k = 0; k < grid.num_steps; ++k) {
            for (int j = 0; j < d; ++j) z[j] = rng.normal();
            out.data.row(static_cast<Eigen::Index>(rep) * grid.num_steps + k) =
                (mean + L * z).transpose();
        }
    }
    return out;
}

}  // namespace

IncrementBatch sample_increments(const BrownianSpec& spec, const TimeGrid& grid, int batch,
                                 uint64_t seed, uint64_t stream_offset, NormalMethod method) {
    return sample_impl(spec, grid, batch, seed, stream_offset, method, true);
}

IncrementBatch sample_noise(const BrownianSpec& spec, const TimeGrid& grid, int batch,
                            uint64_t seed, uint64_t stream_offset, NormalMethod method) {
    return sample_impl(spec, grid, batch, seed, stream_offset, method, false);
}

}  // namespace sct
