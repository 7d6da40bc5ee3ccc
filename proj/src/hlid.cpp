#include "htad/hlid.hpp"

#include <cmath>
#include <stdexcept>

namespace htad {

void ImpactConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

int ImpactConfig::effective_max_iter() const {
    if (max_iter > 0) return max_iter;
    if (alpha >= 1.0) return 1;
    const double bound = std::log(tol) / std::log(1.0 - alpha);
    return 10 * static_cast<int>(std::ceil(bound));
}

SparseMatrix normalized_propagation(const WeightedAdjacency& B) {
    const Index n = B.matrix.rows();
    Eigen::VectorXd deg = Eigen::VectorXd::Ones(n); // the +I self-loop
    deg += B.matrix * Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd inv_sqrt = deg.array().rsqrt();

    SparseMatrix Btilde = B.matrix;
    SparseMatrix I(n, n);
    I.setIdentity();
    Btilde += I;

    SparseMatrix P = inv_sqrt.asDiagonal() * Btilde * inv_sqrt.asDiagonal();
    return P;
}

HlidScores hlid_scores(const SparseMatrix& P, const Eigen::VectorXd& J,
                       const ImpactConfig& config) {
    config.validate();
    if (P.rows() != J.size())
        throw std::invalid_argument("label indicator length does not match P");

    const double alpha = config.alpha;
    const Eigen::VectorXd teleport = alpha * J;
    Eigen::VectorXd z = teleport;
    const int max_iter = config.effective_max_iter();

    double residual = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd next = (1.0 - alpha) * (P * z) + teleport;
        residual = (next - z).lpNorm<Eigen::Infinity>();
        z = std::move(next);
        if (residual <= config.tol)
            return HlidScores{std::move(z), it, residual};
    }
    throw SolverError("hlid solver did not converge within " +
                          std::to_string(max_iter) + " iterations (residual " +
                          std::to_string(residual) + ")",
                      residual);
}

Eigen::MatrixXd impact_matrix_dense(const SparseMatrix& P, double alpha) {
    const Index n = P.rows();
    if (n > 500)
        throw std::invalid_argument("dense impact matrix is a test oracle, N <= 500");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1]");
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) -
                              (1.0 - alpha) * Eigen::MatrixXd(P);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
        throw std::runtime_error("impact system unexpectedly singular");
    return alpha * lu.inverse();
}

} // namespace htad
