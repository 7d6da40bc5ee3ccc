#include "htad/biasmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace htad {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return values[a] < values[b];
    });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

bool has_ties(const Eigen::VectorXd& v) {
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(x.size());
    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double sx = xc.squaredNorm();
    const double sy = yc.squaredNorm();
    if (sx == 0.0 || sy == 0.0)
        throw MetricError("spearman undefined for constant input");
    (void)n;
    return xc.dot(yc) / std::sqrt(sx * sy);
}

} // namespace

double spearman(const Eigen::VectorXd& f_vals, const Eigen::VectorXd& acc_vals) {
    if (f_vals.size() != acc_vals.size())
        throw MetricError("spearman inputs must have equal length");
    const Eigen::Index n = f_vals.size();
    if (n < 2) throw MetricError("spearman requires at least 2 observations");

    const Eigen::VectorXd rf = average_ranks(f_vals);
    const Eigen::VectorXd ra = average_ranks(acc_vals);
    if (has_ties(f_vals) || has_ties(acc_vals)) return pearson(rf, ra);

    const double d2 = (rf - ra).squaredNorm();
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

BucketReport bucketize(const Eigen::VectorXd& values, int n_buckets) {
    const Eigen::Index n = values.size();
    if (n_buckets < 1 || n_buckets > n)
        throw MetricError("bucket count must lie in [1, #nodes]");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return values[a] < values[b];
    });

    BucketReport report;
    report.num_buckets = n_buckets;
    report.assignment.resize(n, 0);
    report.bucket_bounds.resize(n_buckets);
    report.bucket_sizes.resize(n_buckets, 0);

    const Eigen::Index base = n / n_buckets;
    const Eigen::Index remainder = n % n_buckets;
    Eigen::Index pos = 0;
    for (int b = 0; b < n_buckets; ++b) {
        const Eigen::Index size = base + (b < remainder ? 1 : 0);
        double lo = values[order[pos]];
        double hi = values[order[pos + size - 1]];
        for (Eigen::Index k = 0; k < size; ++k)
            report.assignment[order[pos + k]] = b;
        report.bucket_bounds[b] = {lo, hi};
        report.bucket_sizes[b] = static_cast<int>(size);
        pos += size;
    }
    return report;
}

std::vector<double> bucket_accuracy(BucketReport& report,
                                    const Eigen::VectorXd& acc) {
    if (static_cast<Eigen::Index>(report.assignment.size()) != acc.size())
        throw MetricError("accuracy vector does not cover the bucketed nodes");
    std::vector<double> sums(report.num_buckets, 0.0);
    std::vector<Eigen::Index> counts(report.num_buckets, 0);
    for (Eigen::Index i = 0; i < acc.size(); ++i) {
        sums[report.assignment[i]] += acc[i];
        counts[report.assignment[i]] += 1;
    }
    report.bucket_means.resize(report.num_buckets);
    for (int b = 0; b < report.num_buckets; ++b) {
        if (counts[b] == 0)
            throw MetricError("empty bucket"); // unreachable under bucketize
        report.bucket_means[b] = sums[b] / static_cast<double>(counts[b]);
    }
    return report.bucket_means;
}

double total_variance(const Eigen::VectorXd& acc) {
    if (acc.size() == 0) throw MetricError("variance of empty vector");
    const double mean = acc.mean();
    return (acc.array() - mean).square().sum() / static_cast<double>(acc.size());
}

double bucket_variance(const BucketReport& report, const Eigen::VectorXd& acc) {
    BucketReport r = report;
    bucket_accuracy(r, acc);
    const double mean = acc.mean();
    double s = 0.0;
    for (double m : r.bucket_means) s += (m - mean) * (m - mean);
    return s / static_cast<double>(r.num_buckets);
}

F1Result f1_scores(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw MetricError("prediction and truth shapes differ");
    const Eigen::Index C = pred.cols();

    double tp_all = 0.0, fp_all = 0.0, fn_all = 0.0;
    double macro_sum = 0.0;
    for (Eigen::Index c = 0; c < C; ++c) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        for (Eigen::Index i = 0; i < pred.rows(); ++i) {
            const bool p = pred(i, c) != 0.0;
            const bool t = truth(i, c) != 0.0;
            if (p && t) tp += 1.0;
            else if (p && !t) fp += 1.0;
            else if (!p && t) fn += 1.0;
        }
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
        const double denom = 2.0 * tp + fp + fn;
        // class absent from both truth and prediction contributes 0
        macro_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    const double micro_denom = 2.0 * tp_all + fp_all + fn_all;
    return F1Result{micro_denom > 0.0 ? 2.0 * tp_all / micro_denom : 0.0,
                    macro_sum / static_cast<double>(C)};
}

Eigen::VectorXd node_accuracy(const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& truth, AccuracyMode mode) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw MetricError("prediction and truth shapes differ");
    const Eigen::Index n = pred.rows();
    const Eigen::Index C = pred.cols();
    Eigen::VectorXd acc(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double correct = 0.0;
        for (Eigen::Index c = 0; c < C; ++c)
            if ((pred(i, c) != 0.0) == (truth(i, c) != 0.0)) correct += 1.0;
        if (mode == AccuracyMode::SingleLabel)
            acc[i] = correct == static_cast<double>(C) ? 1.0 : 0.0;
        else
            acc[i] = correct / static_cast<double>(C);
    }
    return acc;
}

} // namespace htad
