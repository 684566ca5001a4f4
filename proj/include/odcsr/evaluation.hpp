#pragma once

#include "odcsr/data.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace odcsr {

/// Which end of a score scale marks outliers.
enum class Polarity { low_is_outlier, high_is_outlier };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view text);

struct ConfusionCounts {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t true_negatives = 0;
};

struct EvalReport {
    double auc = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    /// Score of the last point predicted as outlier.
    double threshold_used = 0.0;
    ConfusionCounts counts;

    /// "key=value" lines.
    std::string to_key_value() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

/// Mann-Whitney AUC with midranks; outliers are the positive class.
double auc(const Eigen::VectorXd& scores, const LabelVector& labels, Polarity polarity);

/// Predicts exactly as many outliers as the labels contain (ties broken by
/// index order) and reports F1 at that operating point, together with AUC.
EvalReport f1_at_count(const Eigen::VectorXd& scores, const LabelVector& labels,
                       Polarity polarity);

} // namespace odcsr
