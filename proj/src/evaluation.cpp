#include "odcsr/evaluation.hpp"
#include "odcsr/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <vector>

namespace odcsr {

std::string_view to_string(Polarity p) {
    return p == Polarity::low_is_outlier ? "low_is_outlier" : "high_is_outlier";
}

Polarity parse_polarity(std::string_view text) {
    if (text == "low_is_outlier") return Polarity::low_is_outlier;
    if (text == "high_is_outlier") return Polarity::high_is_outlier;
    throw ConfigError("unknown polarity: " + std::string(text));
}

namespace {

void check_inputs(const Eigen::VectorXd& scores, const LabelVector& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) {
        throw DimensionError("scores and labels differ in length");
    }
    const auto pos = count_outliers(labels);
    if (pos == 0 || pos == labels.size()) {
        throw MetricError("metric undefined: labels contain a single class");
    }
}

/// Higher value = more outlier-like.
Eigen::VectorXd outlierness(const Eigen::VectorXd& scores, Polarity polarity) {
    return polarity == Polarity::low_is_outlier ? Eigen::VectorXd(-scores) : scores;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double auc(const Eigen::VectorXd& scores, const LabelVector& labels, Polarity polarity) {
    check_inputs(scores, labels);
    const Eigen::VectorXd s = outlierness(scores, polarity);
    const std::size_t n = labels.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s[Index(a)] < s[Index(b)];
    });

    // Sum of midranks of the positive class.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t k = i;
        while (k + 1 < n && s[Index(order[k + 1])] == s[Index(order[i])]) ++k;
        const double midrank = 0.5 * double(i + k) + 1.0;
        for (std::size_t m = i; m <= k; ++m) {
            if (labels[order[m]] == Label::outlier) rank_sum += midrank;
        }
        i = k + 1;
    }
    const double pos = double(count_outliers(labels));
    const double neg = double(n) - pos;
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

EvalReport f1_at_count(const Eigen::VectorXd& scores, const LabelVector& labels,
                       Polarity polarity) {
    EvalReport report;
    report.auc = auc(scores, labels, polarity);

    const Eigen::VectorXd s = outlierness(scores, polarity);
    const std::size_t n = labels.size();
    const std::size_t k = count_outliers(labels);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s[Index(a)] > s[Index(b)];
    });

    std::vector<bool> predicted(n, false);
    for (std::size_t i = 0; i < k; ++i) predicted[order[i]] = true;
    report.threshold_used = scores[Index(order[k - 1])];

    auto& c = report.counts;
    for (std::size_t i = 0; i < n; ++i) {
        const bool actual = labels[i] == Label::outlier;
        if (predicted[i] && actual) ++c.true_positives;
        else if (predicted[i]) ++c.false_positives;
        else if (actual) ++c.false_negatives;
        else ++c.true_negatives;
    }
    const double tp = double(c.true_positives);
    const double pp = tp + double(c.false_positives);
    const double ap = tp + double(c.false_negatives);
    report.precision = pp > 0 ? tp / pp : 0.0;
    report.recall = ap > 0 ? tp / ap : 0.0;
    const double pr = report.precision + report.recall;
    report.f1 = pr > 0 ? 2.0 * report.precision * report.recall / pr : 0.0;
    return report;
}

std::string EvalReport::to_key_value() const {
    std::ostringstream os;
    os << "auc=" << fmt(auc) << '\n'
       << "f1=" << fmt(f1) << '\n'
       << "precision=" << fmt(precision) << '\n'
       << "recall=" << fmt(recall) << '\n'
       << "threshold_used=" << fmt(threshold_used) << '\n'
       << "true_positives=" << counts.true_positives << '\n'
       << "false_positives=" << counts.false_positives << '\n'
       << "false_negatives=" << counts.false_negatives << '\n'
       << "true_negatives=" << counts.true_negatives << '\n';
    return os.str();
}

std::string EvalReport::csv_header() {
    return "auc,f1,precision,recall,threshold_used,tp,fp,fn,tn";
}

std::string EvalReport::to_csv_row() const {
    std::ostringstream os;
    os << fmt(auc) << ',' << fmt(f1) << ',' << fmt(precision) << ',' << fmt(recall) << ','
       << fmt(threshold_used) << ',' << counts.true_positives << ',' << counts.false_positives
       << ',' << counts.false_negatives << ',' << counts.true_negatives;
    return os.str();
}

} // namespace odcsr
