#include "polsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "polsim/csv.hpp"
#include "polsim/errors.hpp"

namespace polsim {

using nlohmann::json;

std::string_view to_string(Activation a) {
    return a == Activation::Relu ? "relu" : "tanh";
}

std::string_view to_string(Head h) {
    return h == Head::SoftmaxClassifier ? "softmax_classifier" : "mdn_weibull3";
}

Matrix make_matrix(const std::vector<FeatureVector>& rows) {
    Matrix m(rows.size(), kFeatureDim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    return m;
}

DenseNet DenseNet::create(std::vector<int> dims, Activation act, Head head, double dropout_p,
                          Rng& rng) {
    if (dims.size() < 2) throw ValidationError("network needs at least input and output dims");
    for (int d : dims)
        if (d <= 0) throw ValidationError("network dims must be positive");
    if (dropout_p < 0 || dropout_p >= 1)
        throw ValidationError("dropout_p must be in [0,1)");
    if (head == Head::SoftmaxClassifier && dims.back() != kNumTags)
        throw ValidationError("classifier head requires 6 outputs");
    if (head == Head::MdnWeibull3 && dims.back() != 9)
        throw ValidationError("mdn head requires 9 outputs");

    DenseNet net;
    net.dims = std::move(dims);
    net.hidden_activation = act;
    net.head = head;
    net.dropout_p = dropout_p;
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(net.dims[l]);
        const auto fan_out = static_cast<std::size_t>(net.dims[l + 1]);
        Layer layer;
        layer.w = Matrix(fan_out, fan_in);
        layer.b.assign(fan_out, 0.0);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : layer.w.data) v = rng.uniform(-limit, limit);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

DenseNet DenseNet::mlp_default(Rng& rng) {
    return create({kFeatureDim, 55, 110, 55, kNumTags}, Activation::Relu,
                  Head::SoftmaxClassifier, 0.1, rng);
}

DenseNet DenseNet::mdn_default(Rng& rng) {
    return create({kFeatureDim, 55, 110, 55, 9}, Activation::Tanh, Head::MdnWeibull3, 0.1, rng);
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.w.data.size() + l.b.size();
    return n;
}

namespace {

void affine(const Layer& layer, const Matrix& x, Matrix& out) {
    const std::size_t n = x.rows, in = x.cols, o = layer.b.size();
    out = Matrix(n, o);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x.row(r);
        double* yr = out.row(r);
        for (std::size_t j = 0; j < o; ++j) {
            const double* wj = layer.w.row(j);
            double acc = layer.b[j];
            for (std::size_t i = 0; i < in; ++i) acc += wj[i] * xr[i];
            yr[j] = acc;
        }
    }
}

double activate(Activation a, double z) {
    return a == Activation::Relu ? (z > 0 ? z : 0.0) : std::tanh(z);
}

double activate_grad(Activation a, double z) {
    if (a == Activation::Relu) return z > 0 ? 1.0 : 0.0;
    const double th = std::tanh(z);
    return 1.0 - th * th;
}

double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr double kPositivityFloor = 1e-3;

} // namespace

Matrix forward_eval(const DenseNet& net, const Matrix& x) {
    if (x.cols != static_cast<std::size_t>(net.input_dim()))
        throw ValidationError("forward: input width mismatch");
    Matrix cur = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Matrix z;
        affine(net.layers[l], cur, z);
        if (l + 1 < net.layers.size()) {
            for (double& v : z.data) v = activate(net.hidden_activation, v);
        }
        cur = std::move(z);
    }
    return cur;
}

ForwardCache forward_train(const DenseNet& net, const Matrix& x, Rng& rng) {
    if (x.cols != static_cast<std::size_t>(net.input_dim()))
        throw ValidationError("forward: input width mismatch");
    ForwardCache cache;
    cache.input = x;
    const std::size_t n_hidden = net.layers.size() - 1;
    cache.pre.resize(net.layers.size());
    cache.act.resize(n_hidden);
    cache.mask.resize(n_hidden);

    const Matrix* cur = &cache.input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        affine(net.layers[l], *cur, cache.pre[l]);
        if (l == net.layers.size() - 1) break;
        Matrix h = cache.pre[l];
        for (double& v : h.data) v = activate(net.hidden_activation, v);
        if (net.dropout_p > 0) {
            const double keep = 1.0 - net.dropout_p;
            Matrix m(h.rows, h.cols);
            for (std::size_t i = 0; i < h.data.size(); ++i) {
                const double on = rng.uniform01() < keep ? 1.0 : 0.0;
                m.data[i] = on;
                h.data[i] *= on / keep;
            }
            cache.mask[l] = std::move(m);
        }
        cache.act[l] = std::move(h);
        cur = &cache.act[l];
    }
    cache.output = cache.pre.back();
    return cache;
}

double cross_entropy(const double* logits, int n_classes, int label) {
    if (label < 0 || label >= n_classes) throw ValidationError("cross_entropy: bad label");
    double m = logits[0];
    for (int i = 1; i < n_classes; ++i) m = std::max(m, logits[i]);
    double sum = 0;
    for (int i = 0; i < n_classes; ++i) sum += std::exp(logits[i] - m);
    return m + std::log(sum) - logits[label];
}

MixtureParams mdn_heads(const double* raw9) {
    MixtureParams p{};
    double m = std::max({raw9[0], raw9[1], raw9[2]});
    double sum = 0;
    for (int i = 0; i < 3; ++i) {
        p.weights[static_cast<std::size_t>(i)] = std::exp(raw9[i] - m);
        sum += p.weights[static_cast<std::size_t>(i)];
    }
    for (double& w : p.weights) w /= sum;
    for (int i = 0; i < 3; ++i) {
        p.lambda[static_cast<std::size_t>(i)] = softplus(raw9[3 + i]) + kPositivityFloor;
        p.k[static_cast<std::size_t>(i)] = softplus(raw9[6 + i]) + kPositivityFloor;
    }
    return p;
}

double weibull_log_pdf(double t, double lambda, double k) {
    if (t <= 0) throw ValidationError("weibull pdf: t must be > 0");
    const double log_ratio = std::log(t) - std::log(lambda);
    const double pow_term = std::exp(std::min(700.0, k * log_ratio));
    return std::log(k) - std::log(lambda) + (k - 1.0) * log_ratio - pow_term;
}

double mdn_nll(const MixtureParams& p, double t) {
    if (t <= 0) throw ValidationError("mdn_nll: t must be > 0");
    std::array<double, 3> terms{};
    for (int i = 0; i < 3; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double lw = p.weights[idx] > 0 ? std::log(p.weights[idx]) : -1e300;
        terms[idx] = lw + weibull_log_pdf(t, p.lambda[idx], p.k[idx]);
    }
    const double m = std::max({terms[0], terms[1], terms[2]});
    double sum = 0;
    for (double v : terms) sum += std::exp(v - m);
    return -(m + std::log(sum));
}

double weibull_inverse_cdf(double u, double lambda, double k) {
    u = std::min(u, 1.0 - 1e-16); // keep -ln(1-u) finite
    return lambda * std::pow(-std::log1p(-u), 1.0 / k);
}

double mdn_sample_weighted_sum_from(const MixtureParams& p, const std::array<double, 3>& u) {
    double out = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (p.weights[i] == 0) continue;
        out += p.weights[i] * weibull_inverse_cdf(u[i], p.lambda[i], p.k[i]);
    }
    return out;
}

double mdn_sample_weighted_sum(const MixtureParams& p, Rng& rng) {
    return mdn_sample_weighted_sum_from(p, {rng.uniform01(), rng.uniform01(), rng.uniform01()});
}

double mdn_sample_component(const MixtureParams& p, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0;
    std::size_t pick = 2;
    for (std::size_t i = 0; i < 3; ++i) {
        acc += p.weights[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    return weibull_inverse_cdf(rng.uniform01(), p.lambda[pick], p.k[pick]);
}

namespace {

double head_loss_row(const DenseNet& net, const double* out, const Targets& targets,
                     std::size_t row) {
    if (net.head == Head::SoftmaxClassifier)
        return cross_entropy(out, net.output_dim(), targets.labels[row]);
    return mdn_nll(mdn_heads(out), targets.stays[row]);
}

// delta = d(mean loss)/d(raw outputs), one row per sample.
void head_delta(const DenseNet& net, const Matrix& output, const Targets& targets,
                Matrix& delta) {
    const std::size_t n = output.rows;
    const auto out_dim = static_cast<std::size_t>(net.output_dim());
    delta = Matrix(n, out_dim);
    const double inv_n = 1.0 / static_cast<double>(n);

    if (net.head == Head::SoftmaxClassifier) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* o = output.row(r);
            double* d = delta.row(r);
            double m = o[0];
            for (std::size_t i = 1; i < out_dim; ++i) m = std::max(m, o[i]);
            double sum = 0;
            for (std::size_t i = 0; i < out_dim; ++i) {
                d[i] = std::exp(o[i] - m);
                sum += d[i];
            }
            for (std::size_t i = 0; i < out_dim; ++i) d[i] /= sum;
            d[static_cast<std::size_t>(targets.labels[r])] -= 1.0;
            for (std::size_t i = 0; i < out_dim; ++i) d[i] *= inv_n;
        }
        return;
    }

    for (std::size_t r = 0; r < n; ++r) {
        const double* o = output.row(r);
        double* d = delta.row(r);
        const double t = targets.stays[r];
        const MixtureParams p = mdn_heads(o);

        // posteriors pi_j = w_j f_j / sum_i w_i f_i, in log space
        std::array<double, 3> log_terms{};
        for (std::size_t j = 0; j < 3; ++j) {
            const double lw = p.weights[j] > 0 ? std::log(p.weights[j]) : -1e300;
            log_terms[j] = lw + weibull_log_pdf(t, p.lambda[j], p.k[j]);
        }
        const double m = std::max({log_terms[0], log_terms[1], log_terms[2]});
        double z = 0;
        for (double v : log_terms) z += std::exp(v - m);
        std::array<double, 3> post{};
        for (std::size_t j = 0; j < 3; ++j) post[j] = std::exp(log_terms[j] - m) / z;

        for (std::size_t j = 0; j < 3; ++j) {
            const double log_ratio = std::log(t) - std::log(p.lambda[j]);
            const double pow_term = std::exp(std::min(700.0, p.k[j] * log_ratio));
            // mixture logits
            d[j] = (p.weights[j] - post[j]) * inv_n;
            // scale: dL/dlambda through softplus
            const double dl = -post[j] * (p.k[j] / p.lambda[j]) * (pow_term - 1.0);
            d[3 + j] = dl * sigmoid(o[3 + j]) * inv_n;
            // concentration: dL/dk through softplus
            const double dk = -post[j] * (1.0 / p.k[j] + log_ratio * (1.0 - pow_term));
            d[6 + j] = dk * sigmoid(o[6 + j]) * inv_n;
        }
    }
}

} // namespace

double batch_loss(const DenseNet& net, const Matrix& x, const Targets& targets) {
    if (x.rows != targets.size(net.head)) throw ValidationError("batch_loss: size mismatch");
    if (x.rows == 0) throw ValidationError("batch_loss: empty batch");
    const Matrix out = forward_eval(net, x);
    double loss = 0;
    for (std::size_t r = 0; r < out.rows; ++r) loss += head_loss_row(net, out.row(r), targets, r);
    return loss / static_cast<double>(out.rows);
}

double backward(const DenseNet& net, const ForwardCache& cache, const Targets& targets,
                Gradients* grads) {
    const std::size_t n = cache.output.rows;
    if (n == 0 || n != targets.size(net.head))
        throw ValidationError("backward: batch/target size mismatch");
    if (cache.pre.empty()) throw ValidationError("backward: missing forward cache");

    double loss = 0;
    for (std::size_t r = 0; r < n; ++r)
        loss += head_loss_row(net, cache.output.row(r), targets, r);
    loss /= static_cast<double>(n);

    grads->layers.clear();
    grads->layers.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        grads->layers[l].w = Matrix(net.layers[l].w.rows, net.layers[l].w.cols);
        grads->layers[l].b.assign(net.layers[l].b.size(), 0.0);
    }

    Matrix delta;
    head_delta(net, cache.output, targets, delta);

    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Matrix& input = li == 0 ? cache.input : cache.act[li - 1];
        Layer& g = grads->layers[li];
        const Layer& layer = net.layers[li];
        const std::size_t out_dim = layer.b.size(), in_dim = layer.w.cols;

        for (std::size_t r = 0; r < n; ++r) {
            const double* dr = delta.row(r);
            const double* xr = input.row(r);
            for (std::size_t j = 0; j < out_dim; ++j) {
                const double dj = dr[j];
                if (dj == 0) continue;
                double* gw = g.w.row(j);
                for (std::size_t i = 0; i < in_dim; ++i) gw[i] += dj * xr[i];
                g.b[j] += dj;
            }
        }
        if (li == 0) break;

        // propagate: dX = delta * W, then through dropout and activation
        Matrix dx(n, in_dim);
        for (std::size_t r = 0; r < n; ++r) {
            const double* dr = delta.row(r);
            double* dxr = dx.row(r);
            for (std::size_t j = 0; j < out_dim; ++j) {
                const double dj = dr[j];
                if (dj == 0) continue;
                const double* wj = layer.w.row(j);
                for (std::size_t i = 0; i < in_dim; ++i) dxr[i] += dj * wj[i];
            }
        }
        const Matrix& pre = cache.pre[li - 1];
        const bool has_mask = !cache.mask[li - 1].data.empty();
        const double keep = 1.0 - net.dropout_p;
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            double v = dx.data[i];
            if (has_mask) v *= cache.mask[li - 1].data[i] / keep;
            dx.data[i] = v * activate_grad(net.hidden_activation, pre.data[i]);
        }
        delta = std::move(dx);
    }
    return loss;
}

TrainConfig TrainConfig::mlp_defaults() { return {100, 32, 1e-4, 3, 0}; }
TrainConfig TrainConfig::mdn_defaults() { return {50, 8, 1e-5, 1, 0}; }

void TrainConfig::validate() const {
    if (max_epochs <= 0 || batch_size <= 0 || learning_rate <= 0 || patience <= 0)
        throw ValidationError("train config: all fields must be positive");
}

namespace {

struct AdamState {
    std::vector<Layer> m, v;
    long t = 0;

    explicit AdamState(const DenseNet& net) {
        m.resize(net.layers.size());
        v.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            m[l].w = Matrix(net.layers[l].w.rows, net.layers[l].w.cols);
            m[l].b.assign(net.layers[l].b.size(), 0.0);
            v[l].w = Matrix(net.layers[l].w.rows, net.layers[l].w.cols);
            v[l].b.assign(net.layers[l].b.size(), 0.0);
        }
    }

    void step(DenseNet& net, const Gradients& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            auto update = [&](double& w, double& mm, double& vv, double grad) {
                mm = b1 * mm + (1 - b1) * grad;
                vv = b2 * vv + (1 - b2) * grad * grad;
                w -= lr * (mm / c1) / (std::sqrt(vv / c2) + eps);
            };
            for (std::size_t i = 0; i < net.layers[l].w.data.size(); ++i)
                update(net.layers[l].w.data[i], m[l].w.data[i], v[l].w.data[i],
                       g.layers[l].w.data[i]);
            for (std::size_t i = 0; i < net.layers[l].b.size(); ++i)
                update(net.layers[l].b[i], m[l].b[i], v[l].b[i], g.layers[l].b[i]);
        }
    }
};

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx, std::size_t begin,
                   std::size_t end) {
    Matrix out(end - begin, x.cols);
    for (std::size_t r = begin; r < end; ++r)
        std::copy(x.row(idx[r]), x.row(idx[r]) + x.cols, out.row(r - begin));
    return out;
}

Targets gather_targets(const Targets& y, Head head, const std::vector<std::size_t>& idx,
                       std::size_t begin, std::size_t end) {
    Targets out;
    if (head == Head::SoftmaxClassifier) {
        out.labels.reserve(end - begin);
        for (std::size_t r = begin; r < end; ++r) out.labels.push_back(y.labels[idx[r]]);
    } else {
        out.stays.reserve(end - begin);
        for (std::size_t r = begin; r < end; ++r) out.stays.push_back(y.stays[idx[r]]);
    }
    return out;
}

} // namespace

TrainHistory train(DenseNet& net, const Matrix& train_x, const Targets& train_y,
                   const Matrix& val_x, const Targets& val_y, const TrainConfig& config) {
    config.validate();
    const std::size_t n = train_x.rows;
    if (n == 0 || val_x.rows == 0) throw ValidationError("train: empty dataset");
    if (train_y.size(net.head) != n || val_y.size(net.head) != val_x.rows)
        throw ValidationError("train: target size mismatch");

    Rng rng(config.seed);
    Rng shuffle_rng = rng.substream(1);
    Rng dropout_rng = rng.substream(2);

    AdamState adam(net);
    EarlyStopper stopper{config.patience};
    TrainHistory history;
    std::vector<Layer> best_weights = net.layers;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(idx[i - 1], idx[shuffle_rng.uniform_index(i)]);

        double epoch_loss = 0;
        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(n, begin + static_cast<std::size_t>(config.batch_size));
            const Matrix bx = gather_rows(train_x, idx, begin, end);
            const Targets by = gather_targets(train_y, net.head, idx, begin, end);
            const ForwardCache cache = forward_train(net, bx, dropout_rng);
            Gradients grads;
            const double loss = backward(net, cache, by, &grads);
            epoch_loss += loss * static_cast<double>(end - begin);
            adam.step(net, grads, config.learning_rate);
        }
        history.train_loss.push_back(epoch_loss / static_cast<double>(n));

        const double val = batch_loss(net, val_x, val_y);
        history.val_loss.push_back(val);
        const bool was_best = val < stopper.best;
        const bool stop = stopper.observe(epoch, val);
        if (was_best) best_weights = net.layers;
        history.stopped_epoch = epoch;
        if (stop) break;
    }
    history.best_epoch = stopper.best_epoch;
    net.layers = std::move(best_weights);
    return history;
}

namespace {

std::vector<double*> parameter_pointers(DenseNet& net) {
    std::vector<double*> out;
    out.reserve(net.parameter_count());
    for (Layer& l : net.layers) {
        for (double& v : l.w.data) out.push_back(&v);
        for (double& v : l.b) out.push_back(&v);
    }
    return out;
}

} // namespace

double grad_check(const DenseNet& net, const Matrix& x, const Targets& targets, double eps,
                  std::size_t max_params, std::uint64_t seed, double fault_scale) {
    DenseNet probe = net;
    probe.dropout_p = 0; // deterministic loss surface

    Rng unused(0);
    const ForwardCache cache = forward_train(probe, x, unused);
    Gradients grads;
    backward(probe, cache, targets, &grads);
    if (fault_scale != 1.0)
        for (double& v : grads.layers[0].w.data) v *= fault_scale;

    std::vector<double> flat;
    flat.reserve(probe.parameter_count());
    for (const Layer& l : grads.layers) {
        flat.insert(flat.end(), l.w.data.begin(), l.w.data.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    }

    std::vector<double*> params = parameter_pointers(probe);
    std::vector<std::size_t> chosen;
    if (max_params == 0 || max_params >= params.size()) {
        chosen.resize(params.size());
        std::iota(chosen.begin(), chosen.end(), 0);
    } else {
        // seeded partial Fisher-Yates for a distinct random subset
        std::vector<std::size_t> all(params.size());
        std::iota(all.begin(), all.end(), 0);
        Rng rng(seed);
        for (std::size_t k = 0; k < max_params; ++k) {
            const std::size_t j = k + rng.uniform_index(all.size() - k);
            std::swap(all[k], all[j]);
            chosen.push_back(all[k]);
        }
    }

    double max_rel = 0;
    for (std::size_t pi : chosen) {
        const double saved = *params[pi];
        *params[pi] = saved + eps;
        const double lp = batch_loss(probe, x, targets);
        *params[pi] = saved - eps;
        const double lm = batch_loss(probe, x, targets);
        *params[pi] = saved;
        const double numeric = (lp - lm) / (2 * eps);
        const double analytic = flat[pi];
        const double rel = std::fabs(analytic - numeric) /
                           std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

// --- persistence ---

namespace {

const char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<double>& values) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
    const std::size_t n = values.size() * sizeof(double);
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        unsigned int v = static_cast<unsigned int>(bytes[i]) << 16;
        if (i + 1 < n) v |= static_cast<unsigned int>(bytes[i + 1]) << 8;
        if (i + 2 < n) v |= bytes[i + 2];
        out += kB64Chars[(v >> 18) & 63];
        out += kB64Chars[(v >> 12) & 63];
        out += i + 1 < n ? kB64Chars[(v >> 6) & 63] : '=';
        out += i + 2 < n ? kB64Chars[v & 63] : '=';
    }
    return out;
}

std::vector<double> base64_decode(const std::string& text, std::size_t expected_count) {
    std::array<int, 256> lut;
    lut.fill(-1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Chars[i])] = i;
    std::vector<unsigned char> bytes;
    bytes.reserve(text.size() / 4 * 3);
    unsigned int acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = lut[static_cast<unsigned char>(c)];
        if (v < 0) throw ParseError("model file: invalid base64 payload");
        acc = (acc << 6) | static_cast<unsigned int>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            bytes.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
        }
    }
    if (bytes.size() != expected_count * sizeof(double))
        throw ParseError("model file: weight payload size mismatch");
    std::vector<double> out(expected_count);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

} // namespace

void save_model(const DenseNet& net, const Scaler& scaler, std::uint64_t train_seed,
                const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "dense_net";
    j["head"] = std::string(to_string(net.head));
    j["hidden_activation"] = std::string(to_string(net.hidden_activation));
    j["layer_dims"] = net.dims;
    j["dropout_p"] = net.dropout_p;
    j["train_seed"] = train_seed;
    j["scaler"] = {{"time_min", scaler.time_min}, {"time_max", scaler.time_max},
                   {"stay_min", scaler.stay_min}, {"stay_max", scaler.stay_max},
                   {"epsilon", scaler.epsilon}};
    json layers = json::array();
    for (const Layer& l : net.layers) {
        json jl;
        jl["rows"] = l.w.rows;
        jl["cols"] = l.w.cols;
        jl["weights_b64"] = base64_encode(l.w.data);
        jl["bias_b64"] = base64_encode(l.b);
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (!j.contains("schema_version"))
        throw ParseError("model file: missing schema_version");
    if (j["schema_version"].get<int>() != 1)
        throw ValidationError("model file: unsupported schema_version " +
                              std::to_string(j["schema_version"].get<int>()));

    LoadedModel m;
    const std::string head = j.at("head").get<std::string>();
    if (head == "softmax_classifier")
        m.net.head = Head::SoftmaxClassifier;
    else if (head == "mdn_weibull3")
        m.net.head = Head::MdnWeibull3;
    else
        throw ParseError("model file: unknown head " + head);

    const std::string act = j.at("hidden_activation").get<std::string>();
    if (act == "relu")
        m.net.hidden_activation = Activation::Relu;
    else if (act == "tanh")
        m.net.hidden_activation = Activation::Tanh;
    else
        throw ParseError("model file: unknown activation " + act);

    m.net.dims = j.at("layer_dims").get<std::vector<int>>();
    m.net.dropout_p = j.at("dropout_p").get<double>();
    m.train_seed = j.value("train_seed", 0ULL);

    const json& sc = j.at("scaler");
    m.scaler.time_min = sc.at("time_min").get<double>();
    m.scaler.time_max = sc.at("time_max").get<double>();
    m.scaler.stay_min = sc.at("stay_min").get<double>();
    m.scaler.stay_max = sc.at("stay_max").get<double>();
    m.scaler.epsilon = sc.value("epsilon", 1e-4);

    if (!j.contains("layers") || !j["layers"].is_array() ||
        j["layers"].size() != m.net.dims.size() - 1)
        throw ParseError("model file: layer count mismatch");
    for (std::size_t l = 0; l < j["layers"].size(); ++l) {
        const json& jl = j["layers"][l];
        Layer layer;
        layer.w.rows = jl.at("rows").get<std::size_t>();
        layer.w.cols = jl.at("cols").get<std::size_t>();
        if (layer.w.rows != static_cast<std::size_t>(m.net.dims[l + 1]) ||
            layer.w.cols != static_cast<std::size_t>(m.net.dims[l]))
            throw ParseError("model file: layer shape mismatch");
        layer.w.data = base64_decode(jl.at("weights_b64").get<std::string>(),
                                     layer.w.rows * layer.w.cols);
        layer.b = base64_decode(jl.at("bias_b64").get<std::string>(), layer.w.rows);
        m.net.layers.push_back(std::move(layer));
    }
    for (double v : m.net.layers.front().w.data)
        if (!std::isfinite(v)) throw ValidationError("model file: non-finite weights");
    return m;
}

void write_history_csv(const std::string& path, const TrainHistory& h) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < h.train_loss.size(); ++i)
        out << (i + 1) << ',' << format_double(h.train_loss[i]) << ','
            << format_double(h.val_loss[i]) << '\n';
}

} // namespace polsim
