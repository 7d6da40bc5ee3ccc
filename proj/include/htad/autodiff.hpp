#ifndef HTAD_AUTODIFF_HPP
#define HTAD_AUTODIFF_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

namespace htad::ad {

using Matrix = Eigen::MatrixXd;

struct Var {
    int idx = -1;
};

// Minimal reverse-mode tape over dense matrices. Nodes only reference
// earlier nodes, so the reverse pass is a plain backwards sweep.
class Tape {
public:
    Var constant(Matrix value);
    Var param(Matrix value); // participates in gradients

    const Matrix& value(Var v) const { return nodes_[v.idx].value; }
    const Matrix& grad(Var v) const { return nodes_[v.idx].grad; }

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var spmm(const Eigen::SparseMatrix<double>& s, Var a);
    Var relu(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var cwise_mul(Var a, const Matrix& mask);
    Var hconcat(Var a, Var b);
    Var select_rows(Var a, const std::vector<Eigen::Index>& rows);
    Var row_l2_normalize(Var a);
    Var sum(Var a); // 1x1

    // y = gamma .* (x - colmean) / sqrt(colvar + eps) + beta, over rows.
    Var graph_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

    // Row-wise softmax cross entropy summed over rows; probabilities
    // clamped at 1e-12 inside the value computation.
    Var softmax_cross_entropy(Var logits, const Matrix& targets);
    // Sigmoid cross entropy with the complementary (1-Y)log(1-p) term.
    Var sigmoid_cross_entropy(Var logits, const Matrix& targets);

    // Seeds d(root)=1 and accumulates gradients into every param.
    void backward(Var root);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&, const Node&)> backward;
    };

    Var push(Matrix value, std::function<void(Tape&, const Node&)> back = nullptr);
    Matrix& grad_ref(Var v) { return nodes_[v.idx].grad; }

    std::vector<Node> nodes_;
};

} // namespace htad::ad

#endif
