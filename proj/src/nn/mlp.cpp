#include "sct/nn/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sct/errors.hpp"
#include "sct/rng.hpp"

namespace sct::nn {

namespace {

inline double elu_fn(double x) { return x > 0.0 ? x : std::exp(x) - 1.0; }
inline double elu_d(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace

Mlp Mlp::create(int input, int hidden, int hidden_layers, int output, uint64_t seed) {
    Mlp net;
    std::vector<int> dims;
    dims.push_back(input);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden);
    dims.push_back(output);

    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        CounterRng rng(seed, static_cast<uint64_t>(l));
        const int in = dims[l], out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));  // Glorot uniform
        Mat w(in, out);
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j) w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
        net.W.push_back(std::move(w));
        net.b.push_back(Mat::Zero(1, out));
    }
    return net;
}

Mat Mlp::forward(const Mat& X) const {
    Mat a = X;
    for (std::size_t l = 0; l < W.size(); ++l) {
        Mat z = (a * W[l]).rowwise() + b[l].row(0);
        if (l + 1 < W.size())
            z = (z.array() > 0.0).select(z.array(), z.array().min(0.0).exp() - 1.0);
        a = std::move(z);
    }
    return a;
}

Eigen::VectorXd Mlp::forward_vec(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0).transpose();
}

double Mlp::forward_scalar(const Eigen::VectorXd& x) const { return forward(x.transpose())(0, 0); }

Mat Mlp::input_jvp(const Mat& X, const Eigen::VectorXd& direction) const {
    Mat a = X;
    Mat t = direction.transpose().replicate(X.rows(), 1);
    for (std::size_t l = 0; l < W.size(); ++l) {
        Mat z = (a * W[l]).rowwise() + b[l].row(0);
        Mat tz = t * W[l];
        if (l + 1 < W.size()) {
            Mat d = (z.array() > 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()),
                                             z.array().min(0.0).exp());
            a = (z.array() > 0.0).select(z.array(), z.array().min(0.0).exp() - 1.0);
            t = tz.cwiseProduct(d);
        } else {
            a = std::move(z);
            t = std::move(tz);
        }
    }
    return t;
}

bool Mlp::finite() const {
    for (const auto& m : W)
        if (!m.allFinite()) return false;
    for (const auto& m : b)
        if (!m.allFinite()) return false;
    return true;
}

void Mlp::save(const std::string& path) const {
    nlohmann::json header;
    header["format"] = "sct-mlp-v1";
    header["activation"] = "elu";
    auto shapes = nlohmann::json::array();
    for (std::size_t l = 0; l < W.size(); ++l)
        shapes.push_back({{"in", W[l].rows()}, {"out", W[l].cols()}});
    header["layers"] = shapes;
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactMissing("cannot open checkpoint for writing: " + path);
    const char magic[4] = {'S', 'C', 'T', 'W'};
    out.write(magic, 4);
    const uint32_t len = static_cast<uint32_t>(hs.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (std::size_t l = 0; l < W.size(); ++l) {
        // Eigen default storage is column-major; write row-major for a stable layout.
        for (Eigen::Index i = 0; i < W[l].rows(); ++i)
            for (Eigen::Index j = 0; j < W[l].cols(); ++j) {
                const double v = W[l](i, j);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
        for (Eigen::Index j = 0; j < b[l].cols(); ++j) {
            const double v = b[l](0, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
}

Mlp Mlp::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactMissing("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SCTW", 4) != 0) throw ConfigInvalid("bad checkpoint magic: " + path);
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    std::string hs(len, '\0');
    in.read(hs.data(), len);
    const auto header = nlohmann::json::parse(hs);
    if (header.at("format") != "sct-mlp-v1") throw ConfigInvalid("unknown checkpoint format");

    Mlp net;
    for (const auto& layer : header.at("layers")) {
        const Eigen::Index rows = layer.at("in").get<Eigen::Index>();
        const Eigen::Index cols = layer.at("out").get<Eigen::Index>();
        Mat w(rows, cols), bias(1, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                double v;
                in.read(reinterpret_cast<char*>(&v), 8);
                w(i, j) = v;
            }
        for (Eigen::Index j = 0; j < cols; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            bias(0, j) = v;
        }
        net.W.push_back(std::move(w));
        net.b.push_back(std::move(bias));
    }
    if (!in) throw ConfigInvalid("checkpoint truncated: " + path);
    return net;
}

MlpVars bind_params(Tape& tape, const Mlp& net) {
    MlpVars vars;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        vars.W_ids.push_back(tape.leaf(net.W[l]));
        vars.b_ids.push_back(tape.leaf(net.b[l]));
    }
    return vars;
}

int mlp_forward(Tape& tape, const MlpVars& vars, int x) {
    int a = x;
    const std::size_t L = vars.W_ids.size();
    for (std::size_t l = 0; l < L; ++l) {
        int z = tape.add_rowvec(tape.matmul(a, vars.W_ids[l]), vars.b_ids[l]);
        a = (l + 1 < L) ? tape.elu(z) : z;
    }
    return a;
}

std::pair<int, int> mlp_forward_jvp(Tape& tape, const MlpVars& vars, int x,
                                    const Eigen::VectorXd& direction) {
    auto r = mlp_forward_with_jvps(tape, vars, x, {direction});
    return {r.output, r.jvps[0]};
}

ForwardWithJvps mlp_forward_with_jvps(Tape& tape, const MlpVars& vars, int x,
                                      const std::vector<Eigen::VectorXd>& directions) {
    const Eigen::Index rows = tape.val(x).rows();
    int a = x;
    std::vector<int> tangents;
    tangents.reserve(directions.size());
    for (const auto& dir : directions)
        tangents.push_back(tape.constant(dir.transpose().replicate(rows, 1)));

    const std::size_t L = vars.W_ids.size();
    for (std::size_t l = 0; l < L; ++l) {
        int z = tape.add_rowvec(tape.matmul(a, vars.W_ids[l]), vars.b_ids[l]);
        if (l + 1 < L) {
            int dz = tape.elu_prime(z);
            for (auto& t : tangents) t = tape.hadamard(tape.matmul(t, vars.W_ids[l]), dz);
            a = tape.elu(z);
        } else {
            for (auto& t : tangents) t = tape.matmul(t, vars.W_ids[l]);
            a = z;
        }
    }
    return {a, std::move(tangents)};
}

void Adam::step(std::vector<Mat*> params, const std::vector<const Mat*>& grads, double lr) {
    if (m_.empty()) {
        for (auto* p : params) {
            m_.push_back(Mat::Zero(p->rows(), p->cols()));
            v_.push_back(Mat::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat& g = *grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        const Mat mhat = m_[i] / bc1;
        const Mat vhat = v_[i] / bc2;
        *params[i] -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt() +
                                              Mat::Constant(g.rows(), g.cols(), eps_));
    }
}

}  // namespace sct::nn
