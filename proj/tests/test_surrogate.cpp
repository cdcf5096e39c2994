#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polsim/metrics.hpp"
#include "polsim/surrogate.hpp"
#include "test_support.hpp"

using namespace polsim;
using namespace polsim::test;

namespace {

Scaler simple_scaler() {
    Scaler s;
    s.time_min = 0;
    s.time_max = 1000;
    s.stay_min = 0;
    s.stay_max = 1000;
    return s;
}

/// Net whose output is a constant bias vector regardless of input.
DenseNet constant_output_net(Head head, const std::vector<double>& bias) {
    Rng rng(1);
    DenseNet net = head == Head::SoftmaxClassifier ? DenseNet::mlp_default(rng)
                                                   : DenseNet::mdn_default(rng);
    for (Layer& l : net.layers) {
        std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    net.layers.back().b = bias;
    return net;
}

} // namespace

TEST_CASE("argmax prediction breaks ties toward the lowest index") {
    NextDestinationModel m{constant_output_net(Head::SoftmaxClassifier, {0, 0, 0, 0, 0, 0}),
                           simple_scaler(), DecisionMode::Argmax};
    Rng rng(2);
    CHECK(predict_next(m, Tag::Entry, UserClass::RadWorker, 100, rng) == Tag::Office);
    // and repeated calls agree
    CHECK(predict_next(m, Tag::Entry, UserClass::RadWorker, 100, rng) == Tag::Office);
}

TEST_CASE("argmax is invariant under constant logit shifts") {
    const std::vector<double> logits = {0.3, -0.2, 1.4, 0.9, -1.0, 0.1};
    std::vector<double> shifted = logits;
    for (double& v : shifted) v += 123.0;
    NextDestinationModel a{constant_output_net(Head::SoftmaxClassifier, logits),
                           simple_scaler(), DecisionMode::Argmax};
    NextDestinationModel b{constant_output_net(Head::SoftmaxClassifier, shifted),
                           simple_scaler(), DecisionMode::Argmax};
    Rng rng(3);
    CHECK(predict_next(a, Tag::Office, UserClass::Investigator, 5, rng) ==
          predict_next(b, Tag::Office, UserClass::Investigator, 5, rng));
    CHECK(predict_next(a, Tag::Office, UserClass::Investigator, 5, rng) == Tag::Storage);
}

TEST_CASE("sampled predictions track the softmax distribution") {
    const std::vector<double> probs = {0.4, 0.3, 0.1, 0.1, 0.05, 0.05};
    std::vector<double> logits;
    for (double p : probs) logits.push_back(std::log(p));
    NextDestinationModel m{constant_output_net(Head::SoftmaxClassifier, logits),
                           simple_scaler(), DecisionMode::Sample};
    Rng rng(4);
    std::array<long, kNumTags> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        counts[static_cast<std::size_t>(
            predict_next(m, Tag::Entry, UserClass::RadWorker, 0, rng))]++;
    for (int t = 0; t < kNumTags; ++t) {
        const double freq = static_cast<double>(counts[static_cast<std::size_t>(t)]) / n;
        CHECK(std::fabs(freq - probs[static_cast<std::size_t>(t)]) < 0.01);
    }
}

TEST_CASE("stay prediction clamps, denormalizes, and rejects END") {
    // lambda tiny -> samples near 0 -> clamped to the 60 s floor
    std::vector<double> bias(9, 0.0);
    bias[3] = bias[4] = bias[5] = -40; // lambda = 1e-3
    bias[6] = bias[7] = bias[8] = 5;   // k ~ 5
    StayDurationModel m{constant_output_net(Head::MdnWeibull3, bias), simple_scaler(),
                        StaySampling::PaperWeightedSum, 60.0, 86400.0};
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double s = predict_stay(m, Tag::Office, UserClass::RadWorker, 100, rng);
        CHECK(s >= 60.0);
        CHECK(std::isfinite(s));
    }
    CHECK_THROWS_AS(predict_stay(m, Tag::End, UserClass::RadWorker, 100, rng),
                    ValidationError);
}

TEST_CASE("stay prediction outputs are finite and bounded for random nets") {
    Rng init(6);
    StayDurationModel m{DenseNet::mdn_default(init), simple_scaler(),
                        StaySampling::PaperWeightedSum, 60.0, 86400.0};
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto tag = static_cast<Tag>(rng.uniform_index(5));
        const auto cls = static_cast<UserClass>(rng.uniform_index(4));
        const double s = predict_stay(m, tag, cls, rng.uniform(0, 2000), rng);
        CHECK(s >= 60.0);
        CHECK(s <= 86400.0);
    }
}

TEST_CASE("uniform baseline draws every tag at 1/6") {
    Rng rng(8);
    std::array<long, kNumTags> counts{};
    const int n = 600000;
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(uniform_baseline(rng))]++;
    for (long c : counts)
        CHECK(std::fabs(static_cast<double>(c) / n - 1.0 / 6) < 0.005);
}

TEST_CASE("uniform baseline class-index MAE on balanced labels lands near 35/18") {
    Rng rng(9);
    double mae = 0;
    const int n = 120000;
    for (int i = 0; i < n; ++i) {
        const int label = i % kNumTags; // balanced
        const int pred = static_cast<int>(uniform_baseline(rng));
        mae += std::fabs(pred - label);
    }
    mae /= n;
    CHECK(mae == doctest::Approx(35.0 / 18.0).epsilon(0.02));
    CHECK(mae >= 1.6);
    CHECK(mae <= 2.1);
}

TEST_CASE("weibull fit") {
    SUBCASE("exponential samples recover k = 1, lambda = 1") {
        Rng rng(10);
        std::vector<double> samples(100000);
        for (double& s : samples) s = -std::log1p(-rng.uniform01());
        const WeibullBaseline wb = fit_weibull(samples);
        CHECK(wb.k == doctest::Approx(1.0).epsilon(0.02));
        CHECK(wb.lambda == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("known-shape samples recover their parameters") {
        Rng rng(11);
        std::vector<double> samples(100000);
        for (double& s : samples) s = weibull_inverse_cdf(rng.uniform01(), 2.5, 3.0);
        const WeibullBaseline wb = fit_weibull(samples);
        CHECK(wb.k == doctest::Approx(3.0).epsilon(0.02));
        CHECK(wb.lambda == doctest::Approx(2.5).epsilon(0.02));
    }
    SUBCASE("identical samples are degenerate") {
        const std::vector<double> same(50, 4.2);
        CHECK_THROWS_WITH_AS(fit_weibull(same), doctest::Contains("degenerate"),
                             ValidationError);
    }
    SUBCASE("non-positive samples are rejected") {
        std::vector<double> bad(20, 1.0);
        bad[7] = 0.0;
        CHECK_THROWS_AS(fit_weibull(bad), ValidationError);
        bad[7] = -2.0;
        CHECK_THROWS_AS(fit_weibull(bad), ValidationError);
        CHECK_THROWS_AS(fit_weibull({1.0, 2.0}), ValidationError); // too few
    }
    SUBCASE("fit maximizes likelihood on a surrounding grid") {
        Rng rng(12);
        std::vector<double> samples(5000);
        for (double& s : samples) s = weibull_inverse_cdf(rng.uniform01(), 1.7, 2.2);
        const WeibullBaseline wb = fit_weibull(samples);
        const double best = wb.log_likelihood(samples);
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) {
                WeibullBaseline probe;
                probe.lambda = wb.lambda * (0.8 + 0.4 * i / 19.0);
                probe.k = wb.k * (0.8 + 0.4 * j / 19.0);
                CHECK(probe.log_likelihood(samples) <= best + 1e-6);
            }
        }
    }
}

TEST_CASE("weighted-sum and component sampling agree when one weight is 1") {
    const MixtureParams p{{1, 0, 0}, {1.3, 9, 9}, {1.8, 9, 9}};
    Rng r1(13), r2(14);
    std::vector<double> a(10000), b(10000);
    for (double& v : a) v = mdn_sample_weighted_sum(p, r1);
    for (double& v : b) v = mdn_sample_component(p, r2);
    CHECK(wasserstein_1d(a, b) < 0.05);
}

TEST_CASE("model loaders enforce the head type") {
    TempDir tmp("surrogate_head");
    Rng rng(15);
    const DenseNet mlp = DenseNet::mlp_default(rng);
    const DenseNet mdn = DenseNet::mdn_default(rng);
    Scaler s = simple_scaler();
    save_model(mlp, s, 0, tmp.file("mlp.json"));
    save_model(mdn, s, 0, tmp.file("mdn.json"));

    CHECK_NOTHROW(NextDestinationModel::load(tmp.file("mlp.json")));
    CHECK_NOTHROW(StayDurationModel::load(tmp.file("mdn.json")));
    CHECK_THROWS_WITH_AS(NextDestinationModel::load(tmp.file("mdn.json")),
                         doctest::Contains("expected softmax_classifier"), ValidationError);
    CHECK_THROWS_WITH_AS(StayDurationModel::load(tmp.file("mlp.json")),
                         doctest::Contains("expected mdn_weibull3"), ValidationError);
    CHECK_THROWS_AS(NextDestinationModel::load(tmp.file("missing.json")), ValidationError);
}
