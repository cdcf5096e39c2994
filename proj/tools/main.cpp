// polsim: agent-simulation -> dataset -> surrogate-training -> NPC-scenario
// pipeline, one subcommand per stage. All randomness flows from explicit
// --seed flags; identical invocations produce byte-identical outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polsim/abm.hpp"
#include "polsim/csv.hpp"
#include "polsim/dataset.hpp"
#include "polsim/errors.hpp"
#include "polsim/metrics.hpp"
#include "polsim/nn.hpp"
#include "polsim/runtime.hpp"
#include "polsim/surrogate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polsim;

namespace {

SimConfig load_config_or_layout(const std::string& config_path, const std::string& layout_path) {
    if (!config_path.empty()) return load_sim_config_file(config_path, layout_path).config;
    if (layout_path.empty())
        throw ValidationError("either --config or --layout is required");
    SimConfig cfg;
    cfg.layout = FacilityLayout::load_file(layout_path);
    cfg.validate();
    return cfg;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory: " + dir);
}

struct GenerateArgs {
    std::string config, layout, out = ".";
    int runs = 1000;
    int traj_runs = 10;
    int workers = 1;
    std::uint64_t seed = 0;
};

void cmd_generate(const GenerateArgs& a) {
    const SimConfig cfg = load_config_or_layout(a.config, a.layout);
    if (a.traj_runs > a.runs)
        throw ValidationError("--traj-runs must not exceed --runs");
    const BatchResult batch = run_batch(cfg, a.runs, a.traj_runs, a.seed, a.workers);
    ensure_dir(a.out);
    write_transitions_csv(a.out + "/transitions.csv", batch.transitions);
    write_trajectories_csv(a.out + "/trajectories.csv", batch.trajectories);
    std::cout << "generate: " << a.runs << " runs, " << batch.transitions.size()
              << " transitions, " << batch.trajectories.size() << " trajectory points -> "
              << a.out << "\n";
}

struct PrepareArgs {
    std::string transitions, out = ".";
    int target_n = 17000;
    double train_frac = 0.70, val_frac = 0.15, test_frac = 0.15;
    std::uint64_t seed = 0;
};

void cmd_prepare(const PrepareArgs& a) {
    const auto records = read_transitions_csv(a.transitions);
    if (records.empty()) throw ValidationError("no transition records in " + a.transitions);

    // warn when any dest tag is too small for its quota (forces replacement)
    std::array<long, kNumTags> counts{};
    for (const auto& r : records) counts[static_cast<std::size_t>(r.dest_tag)]++;
    for (int t = 0; t < kNumTags; ++t) {
        if (counts[static_cast<std::size_t>(t)] > 0 &&
            counts[static_cast<std::size_t>(t)] < a.target_n / kNumTags) {
            std::cerr << "warning: tag " << kTagNames[static_cast<std::size_t>(t)] << " has only "
                      << counts[static_cast<std::size_t>(t)] << " rows for a quota of "
                      << a.target_n / kNumTags << "; sampling with replacement\n";
        }
    }

    Rng rng(a.seed);
    Rng rebalance_rng = rng.substream(1);
    Rng split_rng = rng.substream(2);
    const auto balanced = rebalance(records, a.target_n, rebalance_rng);
    const DatasetSplit parts =
        split(balanced, {a.train_frac, a.val_frac, a.test_frac}, split_rng);
    const Scaler scaler = fit_scaler(parts.train);

    ensure_dir(a.out);
    write_dataset_csv(a.out + "/dataset_train.csv", parts.train, scaler);
    write_dataset_csv(a.out + "/dataset_val.csv", parts.validation, scaler);
    write_dataset_csv(a.out + "/dataset_test.csv", parts.test, scaler);
    save_scaler(scaler, a.out + "/scaler.json");
    std::cout << "prepare: " << parts.train.size() << "/" << parts.validation.size() << "/"
              << parts.test.size() << " rows -> " << a.out << "\n";
}

struct TrainArgs {
    std::string model; // mlp | mdn
    std::string data = ".";
    std::string out = ".";
    int epochs = -1, batch_size = -1, patience = -1;
    double lr = -1;
    std::uint64_t seed = 0;
};

void cmd_train(const TrainArgs& a) {
    const Scaler scaler = load_scaler(a.data + "/scaler.json");
    TrainConfig cfg =
        a.model == "mlp" ? TrainConfig::mlp_defaults() : TrainConfig::mdn_defaults();
    if (a.epochs > 0) cfg.max_epochs = a.epochs;
    if (a.batch_size > 0) cfg.batch_size = a.batch_size;
    if (a.patience > 0) cfg.patience = a.patience;
    if (a.lr > 0) cfg.learning_rate = a.lr;
    cfg.seed = a.seed;

    Rng init_rng = Rng(a.seed).substream(7);
    ensure_dir(a.out);

    if (a.model == "mlp") {
        const auto train_rows = read_mlp_rows(a.data + "/dataset_train.csv");
        const auto val_rows = read_mlp_rows(a.data + "/dataset_val.csv");
        std::vector<FeatureVector> xs;
        std::vector<int> ys;
        for (const auto& r : train_rows) {
            xs.push_back(r.x);
            ys.push_back(r.label);
        }
        Matrix train_x = make_matrix(xs);
        Targets train_y = Targets::for_labels(ys);
        xs.clear();
        ys.clear();
        for (const auto& r : val_rows) {
            xs.push_back(r.x);
            ys.push_back(r.label);
        }
        Matrix val_x = make_matrix(xs);
        Targets val_y = Targets::for_labels(ys);

        DenseNet net = DenseNet::mlp_default(init_rng);
        const TrainHistory hist = train(net, train_x, train_y, val_x, val_y, cfg);
        save_model(net, scaler, a.seed, a.out + "/mlp_model.json");
        write_history_csv(a.out + "/mlp_history.csv", hist);
        std::cout << "train mlp: stopped at epoch " << hist.stopped_epoch << " (best "
                  << hist.best_epoch << ", val loss " << hist.val_loss[hist.best_epoch - 1]
                  << ") -> " << a.out << "/mlp_model.json\n";
    } else if (a.model == "mdn") {
        const auto train_rows = read_mdn_rows(a.data + "/dataset_train.csv");
        const auto val_rows = read_mdn_rows(a.data + "/dataset_val.csv");
        std::vector<FeatureVector> xs;
        std::vector<double> ys;
        for (const auto& r : train_rows) {
            xs.push_back(r.x);
            ys.push_back(r.target);
        }
        Matrix train_x = make_matrix(xs);
        Targets train_y = Targets::for_stays(ys);
        xs.clear();
        ys.clear();
        for (const auto& r : val_rows) {
            xs.push_back(r.x);
            ys.push_back(r.target);
        }
        Matrix val_x = make_matrix(xs);
        Targets val_y = Targets::for_stays(ys);

        DenseNet net = DenseNet::mdn_default(init_rng);
        const TrainHistory hist = train(net, train_x, train_y, val_x, val_y, cfg);
        save_model(net, scaler, a.seed, a.out + "/mdn_model.json");
        write_history_csv(a.out + "/mdn_history.csv", hist);
        std::cout << "train mdn: stopped at epoch " << hist.stopped_epoch << " (best "
                  << hist.best_epoch << ", val loss " << hist.val_loss[hist.best_epoch - 1]
                  << ") -> " << a.out << "/mdn_model.json\n";
    } else {
        throw ValidationError("--model must be mlp or mdn");
    }
}

struct EvaluateArgs {
    std::string mlp, mdn;
    std::string data = ".";
    std::string out = ".";
    std::string mdn_sampling = "paper";
    bool grad_check_flag = false;
    std::uint64_t seed = 0;
};

json report_to_json(const ClassificationReport& r) {
    return json{{"accuracy", r.accuracy},
                {"macro_precision", r.macro_precision},
                {"macro_recall", r.macro_recall},
                {"macro_f1", r.macro_f1},
                {"class_index_mae", r.class_index_mae}};
}

void cmd_evaluate(const EvaluateArgs& a) {
    const StaySampling scheme = a.mdn_sampling == "component" ? StaySampling::Component
                                                              : StaySampling::PaperWeightedSum;
    NextDestinationModel mlp = NextDestinationModel::load(a.mlp, DecisionMode::Argmax);
    StayDurationModel mdn = StayDurationModel::load(a.mdn, scheme);

    const auto test_rows = read_mlp_rows(a.data + "/dataset_test.csv");
    std::vector<FeatureVector> xs;
    std::vector<int> labels;
    for (const auto& r : test_rows) {
        xs.push_back(r.x);
        labels.push_back(r.label);
    }
    const Matrix test_x = make_matrix(xs);
    const Matrix logits = forward_eval(mlp.net, test_x);
    std::vector<int> preds;
    preds.reserve(test_rows.size());
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const double* o = logits.row(r);
        int best = 0;
        for (int i = 1; i < kNumTags; ++i)
            if (o[i] > o[best]) best = i;
        preds.push_back(best);
    }
    const ClassificationReport mlp_report = classification_report(preds, labels);

    Rng rng(a.seed);
    Rng baseline_rng = rng.substream(1);
    std::vector<int> base_preds;
    base_preds.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        base_preds.push_back(static_cast<int>(uniform_baseline(baseline_rng)));
    const ClassificationReport baseline_report = classification_report(base_preds, labels);

    // stay-duration comparison in normalized target space
    const auto mdn_rows = read_mdn_rows(a.data + "/dataset_test.csv");
    std::vector<FeatureVector> sxs;
    std::vector<double> actual;
    for (const auto& r : mdn_rows) {
        sxs.push_back(r.x);
        actual.push_back(r.target);
    }
    const Matrix stay_x = make_matrix(sxs);
    const Matrix raw = forward_eval(mdn.net, stay_x);
    Rng mdn_rng = rng.substream(2);
    std::vector<double> sampled;
    sampled.reserve(actual.size());
    double mdn_nll_sum = 0;
    for (std::size_t r = 0; r < raw.rows; ++r) {
        const MixtureParams p = mdn_heads(raw.row(r));
        sampled.push_back(sample_normalized_stay(mdn, p, mdn_rng));
        mdn_nll_sum += mdn_nll(p, actual[r]);
    }
    const double w_mdn = wasserstein_1d(sampled, actual);

    const auto train_stays = read_stay_targets(a.data + "/dataset_train.csv");
    const WeibullBaseline wb = fit_weibull(train_stays);
    Rng wb_rng = rng.substream(3);
    std::vector<double> wb_samples;
    wb_samples.reserve(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) wb_samples.push_back(wb.sample(wb_rng));
    const double w_base = wasserstein_1d(wb_samples, actual);

    json rep;
    rep["schema_version"] = 1;
    rep["next_destination"] = {{"mlp", report_to_json(mlp_report)},
                               {"uniform_baseline", report_to_json(baseline_report)}};
    rep["stay_duration"] = {{"mdn_wasserstein", w_mdn},
                            {"weibull_baseline_wasserstein", w_base},
                            {"mdn_test_nll", mdn_nll_sum / static_cast<double>(actual.size())},
                            {"weibull_baseline_test_nll",
                             -wb.log_likelihood(actual) / static_cast<double>(actual.size())},
                            {"weibull_lambda", wb.lambda},
                            {"weibull_k", wb.k},
                            {"sampling_scheme",
                             scheme == StaySampling::Component ? "component"
                                                               : "paper_weighted_sum"},
                            {"n_test_rows", actual.size()}};

    if (a.grad_check_flag) {
        const std::size_t probe_n = std::min<std::size_t>(8, test_rows.size());
        std::vector<FeatureVector> pxs(xs.begin(), xs.begin() + static_cast<long>(probe_n));
        std::vector<int> pls(labels.begin(), labels.begin() + static_cast<long>(probe_n));
        const Matrix probe = make_matrix(pxs);
        const double mlp_err = grad_check(mlp.net, probe, Targets::for_labels(pls), 1e-5, 800,
                                          a.seed);
        const std::size_t sn = std::min<std::size_t>(8, mdn_rows.size());
        std::vector<FeatureVector> mxs(sxs.begin(), sxs.begin() + static_cast<long>(sn));
        std::vector<double> mts(actual.begin(), actual.begin() + static_cast<long>(sn));
        const Matrix probe2 = make_matrix(mxs);
        const double mdn_err = grad_check(mdn.net, probe2, Targets::for_stays(mts), 1e-5, 800,
                                          a.seed);
        rep["grad_check"] = {{"mlp_max_rel_error", mlp_err}, {"mdn_max_rel_error", mdn_err}};
        std::cout << "grad check: mlp max rel error " << mlp_err << ", mdn max rel error "
                  << mdn_err << "\n";
    }

    ensure_dir(a.out);
    std::ofstream out(a.out + "/report.json");
    if (!out) throw ValidationError("cannot write report.json");
    out << rep.dump(2) << '\n';
    std::cout << "evaluate: mlp f1 " << mlp_report.macro_f1 << " vs baseline "
              << baseline_report.macro_f1 << "; mdn W " << w_mdn << " vs weibull baseline "
              << w_base << " -> " << a.out << "/report.json\n";
}

struct SimulateArgs {
    std::string config, layout;
    std::string mlp, mdn;
    std::string mode = "normal";
    std::string out = ".";
    double trigger = 780;
    double rationality_min = 0.5;
    double rationality_max = 1.0;
    bool no_break_overlay = false;
    std::uint64_t seed = 0;
};

void cmd_simulate(const SimulateArgs& a) {
    const SimConfig base = load_config_or_layout(a.config, a.layout);
    NextDestinationModel next = NextDestinationModel::load(a.mlp, DecisionMode::Sample);
    StayDurationModel stay = StayDurationModel::load(a.mdn, StaySampling::PaperWeightedSum);

    ScenarioConfig cfg;
    if (a.mode == "normal")
        cfg.mode = ScenarioMode::Normal;
    else if (a.mode == "emergency")
        cfg.mode = ScenarioMode::Emergency;
    else
        throw ValidationError("--mode must be normal or emergency");
    cfg.trigger_minute = a.trigger;
    cfg.break_overlay = !a.no_break_overlay;
    cfg.rationality_min = a.rationality_min;
    cfg.rationality_max = a.rationality_max;

    const ScenarioModels models = make_surrogate_models(next, stay);
    const ScenarioResult result = run_scenario(cfg, base, models, a.seed);
    ensure_dir(a.out);
    write_trajectories_csv(a.out + "/trajectories.csv", result.trajectories);
    write_events_csv(a.out + "/events.csv", result.events);
    std::cout << "simulate " << a.mode << ": " << result.events.size() << " events, "
              << result.trajectories.size() << " trajectory points -> " << a.out << "\n";
}

struct CompareArgs {
    std::string abm_dir;
    std::vector<std::string> scenarios; // name=dir
    std::string out = ".";
};

struct RecoveredBounds {
    bool has_x = false, has_y = false;
    double x_min = 0, x_scale = 0, y_min = 0, y_scale = 0;
};

RecoveredBounds recover_bounds(const std::vector<TrajectoryPoint>& pts) {
    RecoveredBounds b;
    for (std::size_t i = 1; i < pts.size() && (!b.has_x || !b.has_y); ++i) {
        if (!b.has_x && pts[i].x_norm != pts[0].x_norm) {
            b.x_scale = (pts[i].x - pts[0].x) / (pts[i].x_norm - pts[0].x_norm);
            b.x_min = pts[0].x - pts[0].x_norm * b.x_scale;
            b.has_x = true;
        }
        if (!b.has_y && pts[i].y_norm != pts[0].y_norm) {
            b.y_scale = (pts[i].y - pts[0].y) / (pts[i].y_norm - pts[0].y_norm);
            b.y_min = pts[0].y - pts[0].y_norm * b.y_scale;
            b.has_y = true;
        }
    }
    return b;
}

void check_bounds_match(const RecoveredBounds& a, const RecoveredBounds& b,
                        const std::string& name) {
    auto close = [](double u, double v) { return std::fabs(u - v) <= 1e-6 * std::max({1.0, std::fabs(u), std::fabs(v)}); };
    if (a.has_x && b.has_x && (!close(a.x_min, b.x_min) || !close(a.x_scale, b.x_scale)))
        throw ValidationError("normalization bounds mismatch between inputs (x axis): " + name);
    if (a.has_y && b.has_y && (!close(a.y_min, b.y_min) || !close(a.y_scale, b.y_scale)))
        throw ValidationError("normalization bounds mismatch between inputs (y axis): " + name);
}

void cmd_compare(const CompareArgs& a) {
    const auto abm_transitions = read_transitions_csv(a.abm_dir + "/transitions.csv");
    const auto abm_traj = read_trajectories_csv(a.abm_dir + "/trajectories.csv");
    const RecoveredBounds abm_bounds = recover_bounds(abm_traj);
    const auto abm_durations = work_durations_by_class(abm_transitions);

    struct Scenario {
        std::string name;
        std::vector<TrajectoryPoint> traj;
        std::vector<ScenarioEvent> events;
        std::array<std::vector<double>, kNumUserClasses> durations;
    };
    std::vector<Scenario> scenarios;
    for (const std::string& spec : a.scenarios) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--scenario expects name=dir, got: " + spec);
        Scenario s;
        s.name = spec.substr(0, eq);
        const std::string dir = spec.substr(eq + 1);
        s.traj = read_trajectories_csv(dir + "/trajectories.csv");
        s.events = read_events_csv(dir + "/events.csv");
        check_bounds_match(abm_bounds, recover_bounds(s.traj), s.name);
        s.durations = work_durations_from_events(s.events, npc_classes_from_trajectories(s.traj));
        scenarios.push_back(std::move(s));
    }

    ensure_dir(a.out);

    // fig5: work-duration samples, long format
    {
        std::ofstream out(a.out + "/fig5_work_durations.csv");
        out << "series,user_class,duration_s\n";
        for (int c = 0; c < kNumUserClasses; ++c)
            for (double d : abm_durations[static_cast<std::size_t>(c)])
                out << "abm," << to_string(static_cast<UserClass>(c)) << ',' << format_double(d)
                    << '\n';
        for (const Scenario& s : scenarios)
            for (int c = 0; c < kNumUserClasses; ++c)
                for (double d : s.durations[static_cast<std::size_t>(c)])
                    out << s.name << ',' << to_string(static_cast<UserClass>(c)) << ','
                        << format_double(d) << '\n';
    }

    // fig7: mean positions over time
    {
        std::ofstream out(a.out + "/fig7_mean_positions.csv");
        out << "series,user_class,minute,mean_x_norm,mean_y_norm\n";
        auto dump = [&](const std::string& name, const std::vector<TrajectoryPoint>& traj) {
            for (int c = 0; c < kNumUserClasses; ++c) {
                const auto series = mean_position_series(traj, static_cast<UserClass>(c));
                for (const auto& [minute, xy] : series.by_minute)
                    out << name << ',' << to_string(static_cast<UserClass>(c)) << ',' << minute
                        << ',' << format_double(xy.first) << ',' << format_double(xy.second)
                        << '\n';
            }
        };
        dump("abm", abm_traj);
        for (const Scenario& s : scenarios) dump(s.name, s.traj);
    }

    // fig8: per-class mean-position MSE vs the agent simulation
    json summary;
    summary["schema_version"] = 1;
    {
        std::ofstream out(a.out + "/fig8_mse.csv");
        out << "scenario,user_class,mse_vs_abm\n";
        for (const Scenario& s : scenarios) {
            for (int c = 0; c < kNumUserClasses; ++c) {
                const auto abm_series = mean_position_series(abm_traj, static_cast<UserClass>(c));
                const auto sc_series = mean_position_series(s.traj, static_cast<UserClass>(c));
                if (abm_series.by_minute.empty() || sc_series.by_minute.empty()) continue;
                const double mse = mse_series(abm_series, sc_series);
                out << s.name << ',' << to_string(static_cast<UserClass>(c)) << ','
                    << format_double(mse) << '\n';
                summary["fig8_mse"][s.name][std::string(
                    to_string(static_cast<UserClass>(c)))] = mse;
            }
            for (int c = 0; c < kNumUserClasses; ++c) {
                const auto& sd = s.durations[static_cast<std::size_t>(c)];
                const auto& ad = abm_durations[static_cast<std::size_t>(c)];
                if (sd.empty() || ad.empty()) continue;
                summary["fig5_work_duration_wasserstein_s"][s.name][std::string(
                    to_string(static_cast<UserClass>(c)))] = wasserstein_1d(sd, ad);
            }
        }
    }
    std::ofstream sm(a.out + "/summary.json");
    sm << summary.dump(2) << '\n';
    std::cout << "compare: wrote fig5/fig7/fig8 plot data and summary.json -> " << a.out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"patterns-of-life facility simulation and neural surrogate pipeline"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cg = app.add_subcommand("generate", "run the agent simulation batch and log CSVs");
    cg->add_option("--config", gen.config, "simulation config JSON");
    cg->add_option("--layout", gen.layout, "facility layout JSON (overrides config layout)");
    cg->add_option("--runs", gen.runs, "number of simulated workdays")
        ->check(CLI::PositiveNumber);
    cg->add_option("--traj-runs", gen.traj_runs, "runs with 1-minute trajectory logging")
        ->check(CLI::NonNegativeNumber);
    cg->add_option("--workers", gen.workers, "worker threads")->check(CLI::PositiveNumber);
    cg->add_option("--seed", gen.seed, "base seed; run i uses seed+i");
    cg->add_option("--out", gen.out, "output directory");
    cg->callback([&] { cmd_generate(gen); });

    PrepareArgs prep;
    auto* cp = app.add_subcommand("prepare", "rebalance, split, and scale the transition data");
    cp->add_option("--transitions", prep.transitions, "transitions.csv from generate")
        ->required();
    cp->add_option("--target-n", prep.target_n, "rebalanced row count")
        ->check(CLI::PositiveNumber);
    cp->add_option("--train-frac", prep.train_frac, "train fraction");
    cp->add_option("--val-frac", prep.val_frac, "validation fraction");
    cp->add_option("--test-frac", prep.test_frac, "test fraction");
    cp->add_option("--seed", prep.seed, "seed for resampling and splitting");
    cp->add_option("--out", prep.out, "output directory");
    cp->callback([&] { cmd_prepare(prep); });

    TrainArgs tr;
    auto* ct = app.add_subcommand("train", "train a surrogate model on prepared splits");
    ct->add_option("--model", tr.model, "mlp | mdn")->required()
        ->check(CLI::IsMember({"mlp", "mdn"}));
    ct->add_option("--data", tr.data, "directory with dataset_*.csv and scaler.json");
    ct->add_option("--epochs", tr.epochs, "override max epochs");
    ct->add_option("--batch-size", tr.batch_size, "override batch size");
    ct->add_option("--lr", tr.lr, "override learning rate");
    ct->add_option("--patience", tr.patience, "override early-stopping patience");
    ct->add_option("--seed", tr.seed, "training seed");
    ct->add_option("--out", tr.out, "output directory");
    ct->callback([&] { cmd_train(tr); });

    EvaluateArgs ev;
    auto* ce = app.add_subcommand("evaluate", "score models against the baselines");
    ce->add_option("--mlp", ev.mlp, "trained mlp model file")->required();
    ce->add_option("--mdn", ev.mdn, "trained mdn model file")->required();
    ce->add_option("--data", ev.data, "directory with dataset_*.csv and scaler.json");
    ce->add_option("--mdn-sampling", ev.mdn_sampling, "paper | component")
        ->check(CLI::IsMember({"paper", "component"}));
    ce->add_flag("--grad-check", ev.grad_check_flag,
                 "verify analytic gradients against finite differences");
    ce->add_option("--seed", ev.seed, "seed for baseline draws and MDN sampling");
    ce->add_option("--out", ev.out, "output directory");
    ce->callback([&] { cmd_evaluate(ev); });

    SimulateArgs sim;
    auto* cs = app.add_subcommand("simulate", "run a surrogate-driven NPC scenario");
    cs->add_option("--config", sim.config, "simulation config JSON");
    cs->add_option("--layout", sim.layout, "facility layout JSON");
    cs->add_option("--mlp", sim.mlp, "trained mlp model file")->required();
    cs->add_option("--mdn", sim.mdn, "trained mdn model file")->required();
    cs->add_option("--mode", sim.mode, "normal | emergency")
        ->check(CLI::IsMember({"normal", "emergency"}));
    cs->add_option("--trigger", sim.trigger,
                   "emergency trigger, minute of the simulated day (default 780 = 13:00)");
    cs->add_flag("--no-break-overlay", sim.no_break_overlay,
                 "disable the agent-rule break overlay");
    cs->add_option("--rationality-min", sim.rationality_min,
                   "lower bound of the per-NPC rationality draw");
    cs->add_option("--rationality-max", sim.rationality_max,
                   "upper bound of the per-NPC rationality draw");
    cs->add_option("--seed", sim.seed, "scenario seed");
    cs->add_option("--out", sim.out, "output directory");
    cs->callback([&] { cmd_simulate(sim); });

    CompareArgs cmp;
    auto* cc = app.add_subcommand("compare", "compare scenario outputs against the simulation");
    cc->add_option("--abm", cmp.abm_dir, "directory with agent-simulation transitions.csv "
                                         "and trajectories.csv")
        ->required();
    cc->add_option("--scenario", cmp.scenarios, "name=dir with trajectories.csv and events.csv")
        ->required();
    cc->add_option("--out", cmp.out, "output directory");
    cc->callback([&] { cmd_compare(cmp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
