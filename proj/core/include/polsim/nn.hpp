#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polsim/dataset.hpp"
#include "polsim/rng.hpp"

namespace polsim {

enum class Activation { Relu, Tanh };
enum class Head { SoftmaxClassifier, MdnWeibull3 };

std::string_view to_string(Activation a);
std::string_view to_string(Head h);

/// Dense row-major matrix; rows are samples.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
};

Matrix make_matrix(const std::vector<FeatureVector>& rows);

struct Layer {
    Matrix w; // out x in
    std::vector<double> b;
};

/// Fully connected network, double precision. Hidden layers use
/// `hidden_activation` followed by inverted dropout (training mode only);
/// the output layer is linear and its meaning is given by `head`.
struct DenseNet {
    std::vector<int> dims;
    Activation hidden_activation = Activation::Relu;
    Head head = Head::SoftmaxClassifier;
    double dropout_p = 0.1;
    std::vector<Layer> layers;

    static DenseNet create(std::vector<int> dims, Activation act, Head head, double dropout_p,
                           Rng& rng);
    /// Paper-shaped MLP classifier: 11-55-110-55-6, ReLU.
    static DenseNet mlp_default(Rng& rng);
    /// Paper-shaped MDN: 11-55-110-55-9, tanh.
    static DenseNet mdn_default(Rng& rng);

    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    std::size_t parameter_count() const;
};

struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;  // per layer pre-activations
    std::vector<Matrix> act;  // per hidden layer post-activation+dropout
    std::vector<Matrix> mask; // per hidden layer dropout mask (empty when p == 0)
    Matrix output;            // raw outputs
};

/// Deterministic; dropout disabled (inverted-dropout convention, so no
/// rescaling is needed here).
Matrix forward_eval(const DenseNet& net, const Matrix& x);

/// Training-mode forward with inverted dropout; caches activations for
/// backward().
ForwardCache forward_train(const DenseNet& net, const Matrix& x, Rng& rng);

/// -log softmax(logits)[label], via log-sum-exp.
double cross_entropy(const double* logits, int n_classes, int label);

struct MixtureParams {
    std::array<double, 3> weights; // softmax of raw[0..2]; sums to 1
    std::array<double, 3> lambda;  // softplus(raw[3..5]) + 1e-3
    std::array<double, 3> k;       // softplus(raw[6..8]) + 1e-3
};

MixtureParams mdn_heads(const double* raw9);

/// -log sum_i w_i f_Weibull(t; lambda_i, k_i), computed in log space.
double mdn_nll(const MixtureParams& p, double t);

double weibull_log_pdf(double t, double lambda, double k);
/// Inverse CDF: lambda * (-ln(1-u))^(1/k).
double weibull_inverse_cdf(double u, double lambda, double k);

/// Draws one sample per component and returns the weight-blended sum
/// sum_i w_i t_i.
double mdn_sample_weighted_sum(const MixtureParams& p, Rng& rng);
double mdn_sample_weighted_sum_from(const MixtureParams& p, const std::array<double, 3>& u);

/// Standard MDN sampling: pick a component by weight, sample it.
double mdn_sample_component(const MixtureParams& p, Rng& rng);

/// Per-head targets; `labels` is read by SoftmaxClassifier, `stays` by
/// MdnWeibull3.
struct Targets {
    std::vector<int> labels;
    std::vector<double> stays;

    static Targets for_labels(std::vector<int> l) { return {std::move(l), {}}; }
    static Targets for_stays(std::vector<double> s) { return {{}, std::move(s)}; }
    std::size_t size(Head h) const {
        return h == Head::SoftmaxClassifier ? labels.size() : stays.size();
    }
};

struct Gradients {
    std::vector<Layer> layers; // same shapes as the net
};

/// Mean batch loss in eval mode.
double batch_loss(const DenseNet& net, const Matrix& x, const Targets& targets);

/// Analytic gradients of the mean batch loss w.r.t. every weight and bias,
/// reusing the dropout masks cached by forward_train. Returns the loss.
double backward(const DenseNet& net, const ForwardCache& cache, const Targets& targets,
                Gradients* grads);

struct TrainConfig {
    int max_epochs = 100;
    int batch_size = 32;
    double learning_rate = 1e-4;
    int patience = 3;
    std::uint64_t seed = 0;

    static TrainConfig mlp_defaults();
    static TrainConfig mdn_defaults();
    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss; // per epoch (1-based epochs)
    std::vector<double> val_loss;
    int best_epoch = 0;
    int stopped_epoch = 0;
};

/// Tracks the early-stopping rule: stop after `patience` consecutive epochs
/// without validation improvement.
struct EarlyStopper {
    int patience = 1;
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int consecutive_bad = 0;

    /// Returns true when training should stop after this epoch.
    bool observe(int epoch, double val_loss) {
        if (val_loss < best) {
            best = val_loss;
            best_epoch = epoch;
            consecutive_bad = 0;
            return false;
        }
        return ++consecutive_bad >= patience;
    }
};

/// Mini-batch Adam (0.9 / 0.999 / 1e-8) with per-epoch shuffling and early
/// stopping; restores the best-epoch weights. Deterministic given the config
/// seed.
TrainHistory train(DenseNet& net, const Matrix& train_x, const Targets& train_y,
                   const Matrix& val_x, const Targets& val_y, const TrainConfig& config);

/// Max relative error between analytic and central-difference gradients over
/// all parameters (or a seeded subset of `max_params` when nonzero). Dropout
/// is disabled. `fault_scale` != 1 corrupts the analytic gradient of the
/// first layer, for mutation testing.
double grad_check(const DenseNet& net, const Matrix& x, const Targets& targets,
                  double eps = 1e-5, std::size_t max_params = 0, std::uint64_t seed = 0,
                  double fault_scale = 1.0);

void save_model(const DenseNet& net, const Scaler& scaler, std::uint64_t train_seed,
                const std::string& path);

struct LoadedModel {
    DenseNet net;
    Scaler scaler;
    std::uint64_t train_seed = 0;
};

LoadedModel load_model(const std::string& path);

void write_history_csv(const std::string& path, const TrainHistory& h);

} // namespace polsim
