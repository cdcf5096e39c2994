#pragma once

#include <array>
#include <string>
#include <vector>

#include "polsim/abm.hpp"
#include "polsim/rng.hpp"
#include "polsim/tags.hpp"

namespace polsim {

/// Model input layout: one-hot tag (6) ++ one-hot user class (4) ++
/// normalized seconds-since-entry (1).
inline constexpr int kFeatureDim = 11;
using FeatureVector = std::array<double, kFeatureDim>;

/// Min-max normalization constants, fitted on the training split only.
/// Stay targets get an epsilon shift to stay strictly positive (Weibull
/// support); the shift is undone on decode.
struct Scaler {
    double time_min = 0;
    double time_max = 0;
    double stay_min = 0;
    double stay_max = 0;
    double epsilon = 1e-4;

    /// Clipped to [0,1].
    double normalize_time(double seconds) const;
    /// (stay - stay_min)/(stay_max - stay_min) + epsilon, floored at epsilon.
    double normalize_stay(double seconds) const;
    double denormalize_stay(double target) const;
};

void save_scaler(const Scaler& s, const std::string& path);
Scaler load_scaler(const std::string& path);

FeatureVector encode_next_features(Tag source, UserClass cls, double seconds_since_entry,
                                   const Scaler& s);
FeatureVector encode_stay_features(Tag dest, UserClass cls, double seconds_since_entry,
                                   const Scaler& s);

struct EncodedNext {
    FeatureVector x;
    int label; // dest tag index
};

struct EncodedStay {
    FeatureVector x;
    double target; // normalized stay, > 0
};

/// Source-tag features; label = destination tag index.
EncodedNext encode_for_next_destination(const TransitionRecord& r, const Scaler& s);

/// Destination-tag features; target = normalized stay. Rejects END rows.
EncodedStay encode_for_stay_duration(const TransitionRecord& r, const Scaler& s);

/// Stratified resampling on dest_tag to target_n rows: target_n/6 per tag
/// (remainder assigned to the largest original tags), without replacement
/// where a tag is large enough, with replacement otherwise; output shuffled.
/// Throws if any tag has zero rows.
std::vector<TransitionRecord> rebalance(const std::vector<TransitionRecord>& records,
                                        int target_n, Rng& rng);

/// Min/max stats over training rows. END rows are excluded from stay stats.
/// Throws on degenerate (constant) fields.
Scaler fit_scaler(const std::vector<TransitionRecord>& train);

struct DatasetSplit {
    std::vector<TransitionRecord> train;
    std::vector<TransitionRecord> validation;
    std::vector<TransitionRecord> test;
};

/// Uniform shuffle then contiguous cut: floor(f_train*N) / floor(f_val*N) /
/// remainder.
DatasetSplit split(std::vector<TransitionRecord> records, std::array<double, 3> fractions,
                   Rng& rng);

/// Pearson correlations among (source tag index, user class index, seconds
/// since entry, dest tag index, stay duration). Constant columns correlate
/// as 0 by convention; the diagonal is 1.
std::array<std::array<double, 5>, 5> correlation_matrix(
    const std::vector<TransitionRecord>& records);

// --- encoded split CSV files (columns documented in the README) ---

void write_dataset_csv(const std::string& path, const std::vector<TransitionRecord>& records,
                       const Scaler& s);

/// Rows for the next-destination classifier: all rows.
std::vector<EncodedNext> read_mlp_rows(const std::string& path);

/// Rows for the stay-duration model: END rows are skipped. A non-END row
/// without a stay target, or an END row with one, is a validation error.
std::vector<EncodedStay> read_mdn_rows(const std::string& path);

/// Normalized stay targets of non-END rows (baseline fitting / evaluation).
std::vector<double> read_stay_targets(const std::string& path);

} // namespace polsim
