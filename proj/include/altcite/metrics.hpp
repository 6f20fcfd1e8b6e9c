#pragma once

#include <string>
#include <vector>

#include "altcite/common.hpp"

namespace altcite {

struct ConfusionMatrix {
    long long tp = 0, fn = 0, fp = 0, tn = 0;
    long long total() const { return tp + fn + fp + tn; }
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) fail(Errc::length_mismatch, "confusion");
    if (y_true.empty()) fail(Errc::empty_data, "confusion of empty vectors");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1)
            (y_pred[i] == 1 ? cm.tp : cm.fn)++;
        else
            (y_pred[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

/// Positive-class metrics. Zero-denominator cases report 0 with the matching
/// undefined flag set instead of NaN.
struct ClassificationReport {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
};

inline ClassificationReport classification_report(const ConfusionMatrix& cm) {
    if (cm.total() == 0) fail(Errc::empty_matrix, "classification_report");
    ClassificationReport r;
    double tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
    double fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
    r.accuracy = (tp + tn) / (tp + fn + fp + tn);
    if (tp + fp == 0) {
        r.precision = 0;
        r.precision_undefined = true;
    } else {
        r.precision = tp / (tp + fp);
    }
    if (tp + fn == 0) {
        r.recall = 0;
        r.recall_undefined = true;
    } else {
        r.recall = tp / (tp + fn);
    }
    if (r.precision + r.recall == 0) {
        r.f1 = 0;
        r.f1_undefined = r.precision_undefined && r.recall_undefined;
    } else {
        r.f1 = 2.0 * (r.precision * r.recall) / (r.precision + r.recall);
    }
    return r;
}

inline ClassificationReport classification_report(const std::vector<int>& y_true,
                                                  const std::vector<int>& y_pred) {
    return classification_report(confusion(y_true, y_pred));
}

struct RegressionReport {
    double mse = 0, mae = 0, r2 = 0;
    bool r2_undefined = false; // constant targets: SStot = 0
};

inline RegressionReport regression_report(const std::vector<double>& y_true,
                                          const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) fail(Errc::length_mismatch, "regression_report");
    if (y_true.size() < 2) fail(Errc::too_few_rows, "regression_report requires n >= 2");
    RegressionReport r;
    double n = static_cast<double>(y_true.size());
    double mean = mean_of(y_true);
    double ss_res = 0, ss_tot = 0, abs_sum = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        double e = y_true[i] - y_pred[i];
        ss_res += e * e;
        abs_sum += std::fabs(e);
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    }
    r.mse = ss_res / n;
    r.mae = abs_sum / n;
    if (ss_tot == 0.0) {
        r.r2 = 0.0;
        r.r2_undefined = true;
    } else {
        r.r2 = 1.0 - ss_res / ss_tot;
    }
    return r;
}

inline std::string classification_csv_row(const std::string& model, const ClassificationReport& r) {
    return model + "," + fmt3(r.accuracy) + "," + fmt3(r.precision) + "," + fmt3(r.recall) + "," +
           fmt3(r.f1);
}

inline std::string regression_csv_row(const std::string& model, const RegressionReport& r) {
    return model + "," + fmt3(r.mse) + "," + fmt3(r.mae) + "," + fmt3(r.r2);
}

} // namespace altcite
