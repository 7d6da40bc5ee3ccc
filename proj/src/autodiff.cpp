#include "htad/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace htad::ad {

Var Tape::push(Matrix value, std::function<void(Tape&, const Node&)> back) {
    Node node;
    node.grad = Matrix::Zero(value.rows(), value.cols());
    node.value = std::move(value);
    node.backward = std::move(back);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }
Var Tape::param(Matrix value) { return push(std::move(value)); }

Var Tape::add(Var a, Var b) {
    return push(value(a) + value(b), [a, b](Tape& t, const Node& self) {
        t.grad_ref(a) += self.grad;
        t.grad_ref(b) += self.grad;
    });
}

Var Tape::sub(Var a, Var b) {
    return push(value(a) - value(b), [a, b](Tape& t, const Node& self) {
        t.grad_ref(a) += self.grad;
        t.grad_ref(b) -= self.grad;
    });
}

Var Tape::scale(Var a, double s) {
    return push(s * value(a), [a, s](Tape& t, const Node& self) {
        t.grad_ref(a) += s * self.grad;
    });
}

Var Tape::matmul(Var a, Var b) {
    return push(value(a) * value(b), [a, b](Tape& t, const Node& self) {
        t.grad_ref(a) += self.grad * t.value(b).transpose();
        t.grad_ref(b) += t.value(a).transpose() * self.grad;
    });
}

Var Tape::transpose(Var a) {
    return push(value(a).transpose(), [a](Tape& t, const Node& self) {
        t.grad_ref(a) += self.grad.transpose();
    });
}

Var Tape::spmm(const Eigen::SparseMatrix<double>& s, Var a) {
    return push(s * value(a), [s, a](Tape& t, const Node& self) {
        t.grad_ref(a) += s.transpose() * self.grad;
    });
}

Var Tape::relu(Var a) {
    return push(value(a).cwiseMax(0.0), [a](Tape& t, const Node& self) {
        t.grad_ref(a).array() +=
            self.grad.array() * (t.value(a).array() > 0.0).cast<double>();
    });
}

Var Tape::exp(Var a) {
    return push(value(a).array().exp().matrix(), [a](Tape& t, const Node& self) {
        t.grad_ref(a).array() += self.grad.array() * self.value.array();
    });
}

Var Tape::log(Var a) {
    return push(value(a).array().log().matrix(), [a](Tape& t, const Node& self) {
        t.grad_ref(a).array() += self.grad.array() / t.value(a).array();
    });
}

Var Tape::cwise_mul(Var a, const Matrix& mask) {
    return push((value(a).array() * mask.array()).matrix(),
                [a, mask](Tape& t, const Node& self) {
                    t.grad_ref(a).array() += self.grad.array() * mask.array();
                });
}

Var Tape::hconcat(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    Matrix out(A.rows(), A.cols() + B.cols());
    out << A, B;
    const Eigen::Index ca = A.cols();
    return push(std::move(out), [a, b, ca](Tape& t, const Node& self) {
        t.grad_ref(a) += self.grad.leftCols(ca);
        t.grad_ref(b) += self.grad.rightCols(self.grad.cols() - ca);
    });
}

Var Tape::select_rows(Var a, const std::vector<Eigen::Index>& rows) {
    const Matrix& A = value(a);
    Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = A.row(rows[i]);
    return push(std::move(out), [a, rows](Tape& t, const Node& self) {
        Matrix& g = t.grad_ref(a);
        for (std::size_t i = 0; i < rows.size(); ++i)
            g.row(rows[i]) += self.grad.row(i);
    });
}

Var Tape::row_l2_normalize(Var a) {
    const Matrix& A = value(a);
    Matrix out(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double norm = A.row(i).norm();
        if (norm == 0.0)
            throw std::domain_error("cannot normalize a zero-norm row");
        out.row(i) = A.row(i) / norm;
    }
    return push(std::move(out), [a](Tape& t, const Node& self) {
        const Matrix& A = t.value(a);
        Matrix& g = t.grad_ref(a);
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double norm = A.row(i).norm();
            const auto y = self.value.row(i);
            const auto dy = self.grad.row(i);
            g.row(i) += (dy - y * y.dot(dy)) / norm;
        }
    });
}

Var Tape::sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    return push(std::move(out), [a](Tape& t, const Node& self) {
        t.grad_ref(a).array() += self.grad(0, 0);
    });
}

Var Tape::graph_norm(Var x, Var gamma, Var beta, double eps) {
    const Matrix& X = value(x);
    const Eigen::Index n = X.rows();
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Matrix centered = X.rowwise() - mean;
    const Eigen::RowVectorXd var =
        centered.array().square().colwise().sum() / static_cast<double>(n);
    const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
    Matrix xhat = centered.array().rowwise() * inv_std.array();
    const Matrix& G = value(gamma); // 1 x d
    const Matrix& B = value(beta);  // 1 x d
    Matrix out = (xhat.array().rowwise() * G.row(0).array()).matrix();
    out.rowwise() += B.row(0);

    Matrix xhat_copy = xhat;
    return push(std::move(out), [x, gamma, beta, xhat_copy, inv_std,
                                 n](Tape& t, const Node& self) {
        const Matrix& dy = self.grad;
        t.grad_ref(beta).row(0) += dy.colwise().sum();
        t.grad_ref(gamma).row(0) +=
            (dy.array() * xhat_copy.array()).colwise().sum().matrix();

        const Matrix dxhat =
            dy.array().rowwise() * t.value(gamma).row(0).array();
        const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
        const Eigen::RowVectorXd sum_dxhat_xhat =
            (dxhat.array() * xhat_copy.array()).colwise().sum();
        const double N = static_cast<double>(n);
        Matrix dx =
            (N * dxhat.array() -
             (Matrix::Ones(n, 1) * sum_dxhat).array() -
             xhat_copy.array() * (Matrix::Ones(n, 1) * sum_dxhat_xhat).array()) /
            N;
        dx = dx.array().rowwise() * inv_std.array();
        t.grad_ref(x) += dx;
    });
}

Var Tape::softmax_cross_entropy(Var logits, const Matrix& targets) {
    const Matrix& L = value(logits);
    Matrix P(L.rows(), L.cols());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const double m = L.row(i).maxCoeff();
        Eigen::RowVectorXd e = (L.row(i).array() - m).exp();
        P.row(i) = e / e.sum();
        for (Eigen::Index j = 0; j < L.cols(); ++j) {
            if (targets(i, j) != 0.0)
                loss -= targets(i, j) * std::log(std::max(P(i, j), 1e-12));
        }
    }
    Matrix out(1, 1);
    out(0, 0) = loss;
    return push(std::move(out), [logits, P, targets](Tape& t, const Node& self) {
        t.grad_ref(logits) += self.grad(0, 0) * (P - targets);
    });
}

Var Tape::sigmoid_cross_entropy(Var logits, const Matrix& targets) {
    const Matrix& L = value(logits);
    Matrix P = (1.0 / (1.0 + (-L.array()).exp())).matrix();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        for (Eigen::Index j = 0; j < L.cols(); ++j) {
            const double p = std::min(std::max(P(i, j), 1e-12), 1.0 - 1e-12);
            loss -= targets(i, j) * std::log(p) +
                    (1.0 - targets(i, j)) * std::log(1.0 - p);
        }
    }
    Matrix out(1, 1);
    out(0, 0) = loss;
    return push(std::move(out), [logits, P, targets](Tape& t, const Node& self) {
        t.grad_ref(logits) += self.grad(0, 0) * (P - targets);
    });
}

void Tape::backward(Var root) {
    if (value(root).size() != 1)
        throw std::invalid_argument("backward expects a scalar root");
    for (Node& n : nodes_) n.grad.setZero();
    nodes_[root.idx].grad(0, 0) = 1.0;
    for (int i = root.idx; i >= 0; --i) {
        const Node& node = nodes_[i];
        if (node.backward) node.backward(*this, node);
    }
}

} // namespace htad::ad
