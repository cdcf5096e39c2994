#include "polsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "polsim/errors.hpp"

namespace polsim {

ClassificationReport classification_report(const std::vector<int>& predicted,
                                           const std::vector<int>& actual, int n_classes) {
    if (predicted.size() != actual.size())
        throw ValidationError("classification_report: length mismatch");
    if (predicted.empty()) throw ValidationError("classification_report: empty input");

    std::vector<std::vector<long>> cm(static_cast<std::size_t>(n_classes),
                                      std::vector<long>(static_cast<std::size_t>(n_classes), 0));
    long correct = 0;
    double mae = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i], a = actual[i];
        if (p < 0 || p >= n_classes || a < 0 || a >= n_classes)
            throw ValidationError("classification_report: class index out of range");
        cm[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]++;
        if (p == a) ++correct;
        mae += std::fabs(p - a);
    }

    ClassificationReport rep;
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
    rep.class_index_mae = mae / static_cast<double>(predicted.size());

    for (int c = 0; c < n_classes; ++c) {
        long tp = cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        long pred_c = 0, actual_c = 0;
        for (int i = 0; i < n_classes; ++i) {
            pred_c += cm[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            actual_c += cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        }
        const double precision = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
        const double recall = actual_c > 0 ? static_cast<double>(tp) / actual_c : 0.0;
        const double f1 =
            precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        rep.macro_precision += precision;
        rep.macro_recall += recall;
        rep.macro_f1 += f1;
    }
    rep.macro_precision /= n_classes;
    rep.macro_recall /= n_classes;
    rep.macro_f1 /= n_classes;
    return rep;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ValidationError("wasserstein_1d: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    // Integral of |F_a - F_b| over the merged support.
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double dist = 0;
    double prev = std::min(a[0], b[0]);
    while (ia < a.size() || ib < b.size()) {
        double x;
        if (ia < a.size() && (ib >= b.size() || a[ia] <= b[ib]))
            x = a[ia];
        else
            x = b[ib];
        dist += std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) *
                (x - prev);
        prev = x;
        while (ia < a.size() && a[ia] == x) ++ia;
        while (ib < b.size() && b[ib] == x) ++ib;
    }
    return dist;
}

MeanPositionSeries mean_position_series(const std::vector<TrajectoryPoint>& points,
                                        UserClass cls) {
    std::map<int, std::array<double, 3>> acc; // minute -> (sum x, sum y, count)
    for (const TrajectoryPoint& p : points) {
        if (p.user_class != cls) continue;
        auto& a = acc[p.minute];
        a[0] += p.x_norm;
        a[1] += p.y_norm;
        a[2] += 1;
    }
    MeanPositionSeries out;
    for (const auto& [minute, a] : acc)
        out.by_minute[minute] = {a[0] / a[2], a[1] / a[2]};
    return out;
}

double mse_series(const MeanPositionSeries& a, const MeanPositionSeries& b) {
    double sx = 0, sy = 0;
    long n = 0;
    for (const auto& [minute, pa] : a.by_minute) {
        auto it = b.by_minute.find(minute);
        if (it == b.by_minute.end()) continue;
        const double dx = pa.first - it->second.first;
        const double dy = pa.second - it->second.second;
        sx += dx * dx;
        sy += dy * dy;
        ++n;
    }
    if (n == 0) throw ValidationError("mse_series: series share no defined minutes");
    return 0.5 * (sx / n + sy / n);
}

std::array<std::vector<double>, kNumUserClasses> work_durations_by_class(
    const std::vector<TransitionRecord>& records) {
    std::array<std::vector<double>, kNumUserClasses> out;
    for (const TransitionRecord& r : records) {
        if (!is_work_tag(r.dest_tag)) continue;
        out[static_cast<std::size_t>(r.user_class)].push_back(r.stay_seconds);
    }
    return out;
}

} // namespace polsim
