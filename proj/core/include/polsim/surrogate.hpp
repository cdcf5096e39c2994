#pragma once

#include <array>
#include <string>
#include <vector>

#include "polsim/nn.hpp"

namespace polsim {

enum class DecisionMode { Argmax, Sample };
enum class StaySampling { PaperWeightedSum, Component };

/// Next-destination classifier behind its decision rule. ARGMAX (lowest
/// index wins ties) is used for evaluation; SAMPLE draws from the softmax
/// for runtime diversity.
struct NextDestinationModel {
    DenseNet net;
    Scaler scaler;
    DecisionMode mode = DecisionMode::Argmax;

    static NextDestinationModel load(const std::string& path,
                                     DecisionMode mode = DecisionMode::Argmax);
};

std::array<double, kNumTags> predict_next_probs(const NextDestinationModel& m, Tag source,
                                                UserClass cls, double seconds_since_entry);

Tag predict_next(const NextDestinationModel& m, Tag source, UserClass cls,
                 double seconds_since_entry, Rng& rng);

/// Stay-duration mixture model; outputs denormalized seconds clamped to
/// [min_stay_s, max_stay_s].
struct StayDurationModel {
    DenseNet net;
    Scaler scaler;
    StaySampling scheme = StaySampling::PaperWeightedSum;
    double min_stay_s = 60.0;
    double max_stay_s = 86400.0;

    static StayDurationModel load(const std::string& path,
                                  StaySampling scheme = StaySampling::PaperWeightedSum);
};

MixtureParams predict_stay_mixture(const StayDurationModel& m, Tag dest, UserClass cls,
                                   double seconds_since_entry);

double predict_stay(const StayDurationModel& m, Tag dest, UserClass cls,
                    double seconds_since_entry, Rng& rng);

/// Draws a normalized stay per the model's sampling scheme (no clamping).
double sample_normalized_stay(const StayDurationModel& m, const MixtureParams& p, Rng& rng);

/// Uniform draw over the 6 tags.
Tag uniform_baseline(Rng& rng);

/// Single Weibull fitted by maximum likelihood to the training stays.
struct WeibullBaseline {
    double lambda = 1.0;
    double k = 1.0;

    double sample(Rng& rng) const;
    double log_likelihood(const std::vector<double>& samples) const;
};

/// MLE via 1-D Newton iteration (with bisection fallback) on the profile
/// likelihood equation for k; lambda follows in closed form. Requires >= 10
/// strictly positive samples; throws on degenerate input (all samples equal)
/// or non-convergence.
WeibullBaseline fit_weibull(const std::vector<double>& samples);

} // namespace polsim
