#ifndef HTAD_BIASMETRICS_HPP
#define HTAD_BIASMETRICS_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace htad {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BucketReport {
    int num_buckets = 0;
    std::vector<int> assignment;            // per evaluated node
    std::vector<double> bucket_means;       // filled by bucket_accuracy
    std::vector<std::pair<double, double>> bucket_bounds; // (min, max) projection
    std::vector<int> bucket_sizes;
};

// Spearman rank correlation. Tie-free inputs use the closed form
// 1 - 6*sum(d^2)/(n(n^2-1)); ties fall back to Pearson over average ranks.
double spearman(const Eigen::VectorXd& f_vals, const Eigen::VectorXd& acc_vals);

// Average ranks (1-based); ties receive the mean of their rank range.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& values);

// Sort ascending (ties by index), split into contiguous near-equal groups,
// remainder spread over the lowest bucket ids.
BucketReport bucketize(const Eigen::VectorXd& values, int n_buckets);

std::vector<double> bucket_accuracy(BucketReport& report,
                                    const Eigen::VectorXd& acc);

double total_variance(const Eigen::VectorXd& acc);
double bucket_variance(const BucketReport& report, const Eigen::VectorXd& acc);

struct F1Result {
    double micro = 0.0;
    double macro = 0.0;
};

F1Result f1_scores(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

enum class AccuracyMode { SingleLabel, MultiLabel };

// Single-label: exact-match indicator. Multi-label: per-class mean correctness.
Eigen::VectorXd node_accuracy(const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& truth, AccuracyMode mode);

} // namespace htad

#endif
