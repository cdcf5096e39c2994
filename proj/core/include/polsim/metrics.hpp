#pragma once

#include <array>
#include <map>
#include <vector>

#include "polsim/abm.hpp"
#include "polsim/tags.hpp"

namespace polsim {

struct ClassificationReport {
    double accuracy = 0;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    double class_index_mae = 0;
};

/// Confusion-matrix-derived macro metrics over `n_classes` classes.
/// Zero-support classes contribute 0 to the macro averages.
ClassificationReport classification_report(const std::vector<int>& predicted,
                                           const std::vector<int>& actual,
                                           int n_classes = kNumTags);

/// 1-D Wasserstein distance (earth mover's distance) between the empirical
/// distributions of two samples. For equal sizes this equals the mean
/// absolute difference of sorted samples; unequal sizes use the CDF-area
/// method.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// Per-minute mean normalized position of in-facility agents of one class.
/// Minutes with no agents inside are absent, not zero.
struct MeanPositionSeries {
    std::map<int, std::pair<double, double>> by_minute; // minute -> (mean x_norm, mean y_norm)
};

MeanPositionSeries mean_position_series(const std::vector<TrajectoryPoint>& points,
                                        UserClass cls);

/// MSE over commonly-defined minutes: x and y errors averaged over time
/// separately, then averaged over the two dimensions. Throws when the series
/// share no minutes.
double mse_series(const MeanPositionSeries& a, const MeanPositionSeries& b);

/// Stay durations (seconds) at work-category destinations (OFFICE, LAB,
/// STORAGE, MAINTENANCE), grouped by user class. ENTRY and END rows are
/// excluded.
std::array<std::vector<double>, kNumUserClasses> work_durations_by_class(
    const std::vector<TransitionRecord>& records);

} // namespace polsim
