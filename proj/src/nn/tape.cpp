#include "sct/nn/tape.hpp"
#include <memory>

#include <cmath>

namespace sct::nn {

int Tape::push(Mat value, bool needs, std::function<void(Tape&)> bw) {
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs;
    node.backward = std::move(bw);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::accumulate(int id, const Mat& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
}

int Tape::constant(Mat v) { return push(std::move(v), false, nullptr); }

int Tape::leaf(Mat v) { return push(std::move(v), true, nullptr); }

int Tape::matmul(int a, int b) {
    Mat v = nodes_[a].value * nodes_[b].value;
    const bool needs = nodes_[a].needs_grad || nodes_[b].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, b, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            if (t.nodes_[a].needs_grad) t.accumulate(a, g * t.nodes_[b].value.transpose());
            if (t.nodes_[b].needs_grad) t.accumulate(b, t.nodes_[a].value.transpose() * g);
        };
    }
    return out;
}

int Tape::add(int a, int b) {
    Mat v = nodes_[a].value + nodes_[b].value;
    const bool needs = nodes_[a].needs_grad || nodes_[b].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, b, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            t.accumulate(a, g);
            t.accumulate(b, g);
        };
    }
    return out;
}

int Tape::sub(int a, int b) {
    Mat v = nodes_[a].value - nodes_[b].value;
    const bool needs = nodes_[a].needs_grad || nodes_[b].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, b, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            t.accumulate(a, g);
            if (t.nodes_[b].needs_grad) t.accumulate(b, -g);
        };
    }
    return out;
}

int Tape::add_rowvec(int a, int bias) {
    Mat v = nodes_[a].value.rowwise() + nodes_[bias].value.row(0);
    const bool needs = nodes_[a].needs_grad || nodes_[bias].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, bias, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            t.accumulate(a, g);
            if (t.nodes_[bias].needs_grad) t.accumulate(bias, g.colwise().sum());
        };
    }
    return out;
}

int Tape::scale(int a, double s) {
    Mat v = nodes_[a].value * s;
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, s, out](Tape& t) { t.accumulate(a, t.nodes_[out].grad * s); };
    }
    return out;
}

int Tape::hadamard(int a, int b) {
    Mat v = nodes_[a].value.cwiseProduct(nodes_[b].value);
    const bool needs = nodes_[a].needs_grad || nodes_[b].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, b, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            if (t.nodes_[a].needs_grad) t.accumulate(a, g.cwiseProduct(t.nodes_[b].value));
            if (t.nodes_[b].needs_grad) t.accumulate(b, g.cwiseProduct(t.nodes_[a].value));
        };
    }
    return out;
}

int Tape::elu(int a) {
    const Mat& x = nodes_[a].value;
    // Vectorized: exp only sees non-positive inputs.
    Mat v = (x.array() > 0.0).select(x.array(), x.array().min(0.0).exp() - 1.0);
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        // elu'(x) = 1 for x > 0 and elu(x) + 1 otherwise; no fresh exp needed.
        nodes_[out].backward = [a, out](Tape& t) {
            const Mat& x = t.nodes_[a].value;
            const Mat& v = t.nodes_[out].value;
            Mat d(x.rows(), x.cols());
            const Eigen::Index n = x.size();
            for (Eigen::Index i = 0; i < n; ++i)
                d.data()[i] = x.data()[i] > 0.0 ? 1.0 : v.data()[i] + 1.0;
            t.accumulate(a, t.nodes_[out].grad.cwiseProduct(d));
        };
    }
    return out;
}

int Tape::elu_prime(int a) {
    const Mat& x = nodes_[a].value;
    Mat v = (x.array() > 0.0).select(Eigen::ArrayXXd::Ones(x.rows(), x.cols()),
                                     x.array().min(0.0).exp());
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        // elu''(x) = 0 for x > 0 and elu'(x) otherwise; reuse the node value.
        nodes_[out].backward = [a, out](Tape& t) {
            const Mat& x = t.nodes_[a].value;
            const Mat& v = t.nodes_[out].value;
            Mat d(x.rows(), x.cols());
            const Eigen::Index n = x.size();
            for (Eigen::Index i = 0; i < n; ++i)
                d.data()[i] = x.data()[i] > 0.0 ? 0.0 : v.data()[i];
            t.accumulate(a, t.nodes_[out].grad.cwiseProduct(d));
        };
    }
    return out;
}

int Tape::min_zero(int a) {
    const Mat& x = nodes_[a].value;
    Mat v = x.cwiseMin(0.0);
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, out](Tape& t) {
            const Mat& x = t.nodes_[a].value;
            const Mat mask = (x.array() < 0.0).cast<double>().matrix();
            t.accumulate(a, t.nodes_[out].grad.cwiseProduct(mask));
        };
    }
    return out;
}

int Tape::square(int a) {
    const Mat& x = nodes_[a].value;
    Mat v = x.cwiseProduct(x);
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, out](Tape& t) {
            t.accumulate(a, 2.0 * t.nodes_[out].grad.cwiseProduct(t.nodes_[a].value));
        };
    }
    return out;
}

int Tape::rowsum(int a) {
    Mat v = nodes_[a].value.rowwise().sum();
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, out](Tape& t) {
            const Mat& g = t.nodes_[out].grad;  // n x 1
            t.accumulate(a, g.replicate(1, t.nodes_[a].value.cols()));
        };
    }
    return out;
}

int Tape::mean_all(int a) {
    const double inv = 1.0 / static_cast<double>(nodes_[a].value.size());
    Mat v(1, 1);
    v(0, 0) = nodes_[a].value.sum() * inv;
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        nodes_[out].backward = [a, out, inv](Tape& t) {
            const double g = t.nodes_[out].grad(0, 0) * inv;
            t.accumulate(a, Mat::Constant(t.nodes_[a].value.rows(), t.nodes_[a].value.cols(), g));
        };
    }
    return out;
}

int Tape::fold_steps(int a, Eigen::VectorXd weights, int groups) {
    // Step-major rows: x[(k*groups) + g].
    const Mat& x = nodes_[a].value;
    const int K = static_cast<int>(weights.size());
    Mat v = Mat::Zero(groups, 1);
    for (int k = 0; k < K; ++k)
        v += weights[k] * x.block(static_cast<Eigen::Index>(k) * groups, 0, groups, 1);
    const bool needs = nodes_[a].needs_grad;
    int out = push(std::move(v), needs, nullptr);
    if (needs) {
        auto w = std::make_shared<Eigen::VectorXd>(std::move(weights));
        nodes_[out].backward = [a, out, w, groups](Tape& t) {
            const Mat& g = t.nodes_[out].grad;
            const int K = static_cast<int>(w->size());
            Mat gx(t.nodes_[a].value.rows(), 1);
            for (int k = 0; k < K; ++k)
                gx.block(static_cast<Eigen::Index>(k) * groups, 0, groups, 1) = (*w)[k] * g;
            t.accumulate(a, gx);
        };
    }
    return out;
}

void Tape::backward(int root) {
    Node& r = nodes_[root];
    r.grad = Mat::Ones(r.value.rows(), r.value.cols());
    for (int id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.backward && n.grad.size() != 0) n.backward(*this);
    }
}

}  // namespace sct::nn
