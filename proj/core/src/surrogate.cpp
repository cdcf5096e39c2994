#include "polsim/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "polsim/errors.hpp"

namespace polsim {

NextDestinationModel NextDestinationModel::load(const std::string& path, DecisionMode mode) {
    LoadedModel m = load_model(path);
    if (m.net.head != Head::SoftmaxClassifier)
        throw ValidationError("model file " + path + " has head '" +
                              std::string(to_string(m.net.head)) +
                              "'; expected softmax_classifier");
    return {std::move(m.net), m.scaler, mode};
}

StayDurationModel StayDurationModel::load(const std::string& path, StaySampling scheme) {
    LoadedModel m = load_model(path);
    if (m.net.head != Head::MdnWeibull3)
        throw ValidationError("model file " + path + " has head '" +
                              std::string(to_string(m.net.head)) + "'; expected mdn_weibull3");
    StayDurationModel out;
    out.net = std::move(m.net);
    out.scaler = m.scaler;
    out.scheme = scheme;
    return out;
}

std::array<double, kNumTags> predict_next_probs(const NextDestinationModel& m, Tag source,
                                                UserClass cls, double seconds_since_entry) {
    const FeatureVector f = encode_next_features(source, cls, seconds_since_entry, m.scaler);
    Matrix x(1, kFeatureDim);
    std::copy(f.begin(), f.end(), x.row(0));
    const Matrix out = forward_eval(m.net, x);
    const double* logits = out.row(0);
    double mx = logits[0];
    for (int i = 1; i < kNumTags; ++i) mx = std::max(mx, logits[i]);
    std::array<double, kNumTags> p{};
    double sum = 0;
    for (int i = 0; i < kNumTags; ++i) {
        p[static_cast<std::size_t>(i)] = std::exp(logits[i] - mx);
        sum += p[static_cast<std::size_t>(i)];
    }
    for (double& v : p) v /= sum;
    return p;
}

Tag predict_next(const NextDestinationModel& m, Tag source, UserClass cls,
                 double seconds_since_entry, Rng& rng) {
    const auto p = predict_next_probs(m, source, cls, seconds_since_entry);
    if (m.mode == DecisionMode::Argmax) {
        int best = 0;
        for (int i = 1; i < kNumTags; ++i)
            if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
        return static_cast<Tag>(best);
    }
    const double u = rng.uniform01();
    double acc = 0;
    for (int i = 0; i < kNumTags; ++i) {
        acc += p[static_cast<std::size_t>(i)];
        if (u < acc) return static_cast<Tag>(i);
    }
    return Tag::End;
}

MixtureParams predict_stay_mixture(const StayDurationModel& m, Tag dest, UserClass cls,
                                   double seconds_since_entry) {
    const FeatureVector f = encode_stay_features(dest, cls, seconds_since_entry, m.scaler);
    Matrix x(1, kFeatureDim);
    std::copy(f.begin(), f.end(), x.row(0));
    const Matrix out = forward_eval(m.net, x);
    return mdn_heads(out.row(0));
}

double sample_normalized_stay(const StayDurationModel& m, const MixtureParams& p, Rng& rng) {
    return m.scheme == StaySampling::PaperWeightedSum ? mdn_sample_weighted_sum(p, rng)
                                                      : mdn_sample_component(p, rng);
}

double predict_stay(const StayDurationModel& m, Tag dest, UserClass cls,
                    double seconds_since_entry, Rng& rng) {
    const MixtureParams p = predict_stay_mixture(m, dest, cls, seconds_since_entry);
    const double normalized = sample_normalized_stay(m, p, rng);
    double seconds = m.scaler.denormalize_stay(normalized);
    if (!std::isfinite(seconds)) seconds = m.max_stay_s;
    return std::clamp(seconds, m.min_stay_s, m.max_stay_s);
}

Tag uniform_baseline(Rng& rng) {
    return static_cast<Tag>(rng.uniform_index(kNumTags));
}

double WeibullBaseline::sample(Rng& rng) const {
    return weibull_inverse_cdf(rng.uniform01(), lambda, k);
}

double WeibullBaseline::log_likelihood(const std::vector<double>& samples) const {
    double ll = 0;
    for (double t : samples) ll += weibull_log_pdf(t, lambda, k);
    return ll;
}

WeibullBaseline fit_weibull(const std::vector<double>& samples) {
    if (samples.size() < 10) throw ValidationError("fit_weibull: needs >= 10 samples");
    double t_max = 0;
    double t_min = std::numeric_limits<double>::infinity();
    for (double t : samples) {
        if (!(t > 0)) throw ValidationError("fit_weibull: samples must be > 0");
        t_max = std::max(t_max, t);
        t_min = std::min(t_min, t);
    }
    if (t_min == t_max)
        throw ValidationError("fit_weibull: degenerate input (all samples equal; k diverges)");

    // Work on s_i = t_i / t_max so s^k never overflows; k is scale-invariant
    // and lambda rescales back at the end.
    const std::size_t n = samples.size();
    std::vector<double> log_s(n);
    for (std::size_t i = 0; i < n; ++i) log_s[i] = std::log(samples[i] / t_max);
    double mean_log = 0;
    for (double v : log_s) mean_log += v;
    mean_log /= static_cast<double>(n);

    // g(k) = sum s^k ln s / sum s^k - 1/k - mean_log, strictly increasing.
    auto eval = [&](double k, double* deriv) {
        double a = 0, b = 0, b2 = 0;
        for (double ls : log_s) {
            const double sk = std::exp(k * ls);
            a += sk;
            b += sk * ls;
            b2 += sk * ls * ls;
        }
        if (deriv) *deriv = (b2 * a - b * b) / (a * a) + 1.0 / (k * k);
        return b / a - 1.0 / k - mean_log;
    };

    double lo = 1e-6, hi = 1.0;
    while (eval(hi, nullptr) <= 0) {
        hi *= 2;
        if (hi > 1e6)
            throw ValidationError("fit_weibull: no finite shape solution (near-degenerate data)");
    }

    double k = std::clamp(1.0, lo, hi);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        double deriv = 0;
        const double g = eval(k, &deriv);
        if (g > 0)
            hi = k;
        else
            lo = k;
        double next = k - g / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // bisection fallback
        const double delta = std::fabs(next - k);
        k = next;
        if (delta < 1e-8) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ValidationError("fit_weibull: did not converge in 200 iterations");

    double a = 0;
    for (double ls : log_s) a += std::exp(k * ls);
    const double lambda = t_max * std::pow(a / static_cast<double>(n), 1.0 / k);
    return {lambda, k};
}

} // namespace polsim
