#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace sct::nn {

using Mat = Eigen::MatrixXd;

/// Reverse-mode autodiff tape over dense matrices. Ops append nodes; backward
/// runs the recorded closures in reverse creation order, so any node may only
/// reference earlier nodes. Gradients accumulate (+=) into `grad`.
class Tape {
public:
    struct Node {
        Mat value;
        Mat grad;
        bool needs_grad = false;
        std::function<void(Tape&)> backward;
    };

    int constant(Mat v);
    int leaf(Mat v);  // trainable parameter

    int matmul(int a, int b);
    int add(int a, int b);
    int sub(int a, int b);
    int add_rowvec(int a, int bias);  // bias: 1 x m broadcast over rows
    int scale(int a, double s);
    int hadamard(int a, int b);
    int elu(int a);
    int elu_prime(int a);  // elementwise elu'(x); differentiable (uses elu'')
    int min_zero(int a);   // min(x, 0)
    int square(int a);
    int rowsum(int a);    // n x m -> n x 1
    int mean_all(int a);  // -> 1 x 1
    /// x: (groups*K) x 1, group-major; out[g] = sum_k weights[k] * x[g*K + k].
    int fold_steps(int a, Eigen::VectorXd weights, int groups);

    void backward(int root);

    const Mat& val(int id) const { return nodes_[id].value; }
    Mat& grad(int id) { return nodes_[id].grad; }
    bool needs_grad(int id) const { return nodes_[id].needs_grad; }
    void accumulate(int id, const Mat& g);
    std::size_t size() const { return nodes_.size(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }

private:
    int push(Mat value, bool needs, std::function<void(Tape&)> bw);
    std::vector<Node> nodes_;
};

}  // namespace sct::nn
