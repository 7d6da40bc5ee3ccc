#ifndef HTAD_HLID_HPP
#define HTAD_HLID_HPP

#include <Eigen/Dense>

#include "htad/metaweight.hpp"

namespace htad {

struct ImpactConfig {
    double alpha = 0.15; // teleport probability, (0, 1]
    double tol = 1e-10;  // L-inf residual stop threshold
    int max_iter = 0;    // 0 = derive from alpha and tol

    int effective_max_iter() const;
    void validate() const;
};

struct HlidScores {
    Eigen::VectorXd z;
    int iterations_used = 0;
    double final_residual = 0.0;
};

struct SolverError : std::runtime_error {
    double final_residual;
    SolverError(const std::string& msg, double residual)
        : std::runtime_error(msg), final_residual(residual) {}
};

// P = D^{-1/2} (I + B) D^{-1/2} with D the row sums of I + B.
SparseMatrix normalized_propagation(const WeightedAdjacency& B);

// Solves (I - (1-alpha) P) z = alpha J by fixed-point iteration from
// z0 = alpha J; converges since rho((1-alpha)P) < 1 for alpha > 0.
HlidScores hlid_scores(const SparseMatrix& P, const Eigen::VectorXd& J,
                       const ImpactConfig& config);

// Test oracle: Q = alpha (I - (1-alpha) P)^{-1} by dense inversion. N <= 500.
Eigen::MatrixXd impact_matrix_dense(const SparseMatrix& P, double alpha);

} // namespace htad

#endif
