#include "polsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "polsim/csv.hpp"
#include "polsim/errors.hpp"

namespace polsim {

using nlohmann::json;

double Scaler::normalize_time(double seconds) const {
    const double v = (seconds - time_min) / (time_max - time_min);
    return std::clamp(v, 0.0, 1.0);
}

double Scaler::normalize_stay(double seconds) const {
    const double v = (seconds - stay_min) / (stay_max - stay_min) + epsilon;
    return std::max(v, epsilon);
}

double Scaler::denormalize_stay(double target) const {
    return (target - epsilon) * (stay_max - stay_min) + stay_min;
}

void save_scaler(const Scaler& s, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["time_min"] = s.time_min;
    j["time_max"] = s.time_max;
    j["stay_min"] = s.stay_min;
    j["stay_max"] = s.stay_max;
    j["epsilon"] = s.epsilon;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

Scaler load_scaler(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scaler file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scaler file: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("scaler file: unsupported or missing schema_version");
    Scaler s;
    s.time_min = j.at("time_min").get<double>();
    s.time_max = j.at("time_max").get<double>();
    s.stay_min = j.at("stay_min").get<double>();
    s.stay_max = j.at("stay_max").get<double>();
    s.epsilon = j.value("epsilon", 1e-4);
    return s;
}

namespace {

FeatureVector encode(Tag tag, UserClass cls, double seconds, const Scaler& s) {
    FeatureVector x{};
    x[static_cast<std::size_t>(tag)] = 1.0;
    x[static_cast<std::size_t>(kNumTags + static_cast<int>(cls))] = 1.0;
    x[kFeatureDim - 1] = s.normalize_time(seconds);
    return x;
}

} // namespace

FeatureVector encode_next_features(Tag source, UserClass cls, double seconds_since_entry,
                                   const Scaler& s) {
    return encode(source, cls, seconds_since_entry, s);
}

FeatureVector encode_stay_features(Tag dest, UserClass cls, double seconds_since_entry,
                                   const Scaler& s) {
    if (dest == Tag::End) throw ValidationError("END has no stay duration");
    return encode(dest, cls, seconds_since_entry, s);
}

EncodedNext encode_for_next_destination(const TransitionRecord& r, const Scaler& s) {
    return {encode_next_features(r.source_tag, r.user_class, r.seconds_since_entry, s),
            static_cast<int>(r.dest_tag)};
}

EncodedStay encode_for_stay_duration(const TransitionRecord& r, const Scaler& s) {
    if (r.dest_tag == Tag::End) throw ValidationError("END has no stay duration");
    return {encode_stay_features(r.dest_tag, r.user_class, r.seconds_since_entry, s),
            s.normalize_stay(r.stay_seconds)};
}

std::vector<TransitionRecord> rebalance(const std::vector<TransitionRecord>& records,
                                        int target_n, Rng& rng) {
    if (records.empty()) throw ValidationError("rebalance: no records");
    if (target_n <= 0) throw ValidationError("rebalance: target_n must be > 0");

    std::array<std::vector<std::size_t>, kNumTags> by_tag;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_tag[static_cast<std::size_t>(records[i].dest_tag)].push_back(i);
    for (int t = 0; t < kNumTags; ++t)
        if (by_tag[static_cast<std::size_t>(t)].empty())
            throw ValidationError(std::string("rebalance: no rows with dest_tag ") +
                                  std::string(kTagNames[static_cast<std::size_t>(t)]));

    // Quotas: floor(target_n/6) each; remainder goes to the largest original
    // tags (ties by tag index).
    std::array<int, kNumTags> quota{};
    quota.fill(target_n / kNumTags);
    int remainder = target_n - (target_n / kNumTags) * kNumTags;
    std::array<int, kNumTags> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
        return by_tag[static_cast<std::size_t>(l)].size() >
               by_tag[static_cast<std::size_t>(r)].size();
    });
    for (int i = 0; i < remainder; ++i) quota[static_cast<std::size_t>(order[i])]++;

    std::vector<TransitionRecord> out;
    out.reserve(static_cast<std::size_t>(target_n));
    for (int t = 0; t < kNumTags; ++t) {
        const auto& pool = by_tag[static_cast<std::size_t>(t)];
        const int q = quota[static_cast<std::size_t>(t)];
        if (static_cast<int>(pool.size()) >= q) {
            // sample without replacement: partial Fisher-Yates over a copy
            std::vector<std::size_t> idx = pool;
            for (int k = 0; k < q; ++k) {
                const std::size_t j = k + rng.uniform_index(idx.size() - k);
                std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
                out.push_back(records[idx[static_cast<std::size_t>(k)]]);
            }
        } else {
            for (int k = 0; k < q; ++k)
                out.push_back(records[pool[rng.uniform_index(pool.size())]]);
        }
    }
    // shuffle the concatenated strata
    for (std::size_t i = out.size(); i > 1; --i)
        std::swap(out[i - 1], out[rng.uniform_index(i)]);
    return out;
}

Scaler fit_scaler(const std::vector<TransitionRecord>& train) {
    bool any_time = false, any_stay = false;
    Scaler s;
    s.time_min = s.stay_min = 0;
    s.time_max = s.stay_max = 0;
    for (const TransitionRecord& r : train) {
        if (!any_time) {
            s.time_min = s.time_max = r.seconds_since_entry;
            any_time = true;
        } else {
            s.time_min = std::min(s.time_min, r.seconds_since_entry);
            s.time_max = std::max(s.time_max, r.seconds_since_entry);
        }
        if (r.dest_tag == Tag::End) continue;
        if (!any_stay) {
            s.stay_min = s.stay_max = r.stay_seconds;
            any_stay = true;
        } else {
            s.stay_min = std::min(s.stay_min, r.stay_seconds);
            s.stay_max = std::max(s.stay_max, r.stay_seconds);
        }
    }
    if (!any_time || !any_stay) throw ValidationError("fit_scaler: empty training data");
    if (!(s.time_max > s.time_min))
        throw ValidationError("fit_scaler: degenerate seconds_since_entry (constant)");
    if (!(s.stay_max > s.stay_min))
        throw ValidationError("fit_scaler: degenerate stay duration (constant)");
    return s;
}

DatasetSplit split(std::vector<TransitionRecord> records, std::array<double, 3> fractions,
                   Rng& rng) {
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("split: fractions must sum to 1");
    for (double f : fractions)
        if (f < 0) throw ValidationError("split: fractions must be >= 0");

    for (std::size_t i = records.size(); i > 1; --i)
        std::swap(records[i - 1], records[rng.uniform_index(i)]);

    const std::size_t n = records.size();
    const std::size_t n_train = static_cast<std::size_t>(std::floor(fractions[0] * n));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(fractions[1] * n));

    DatasetSplit out;
    out.train.assign(records.begin(), records.begin() + static_cast<long>(n_train));
    out.validation.assign(records.begin() + static_cast<long>(n_train),
                          records.begin() + static_cast<long>(n_train + n_val));
    out.test.assign(records.begin() + static_cast<long>(n_train + n_val), records.end());
    return out;
}

std::array<std::array<double, 5>, 5> correlation_matrix(
    const std::vector<TransitionRecord>& records) {
    if (records.size() < 2) throw ValidationError("correlation_matrix: needs >= 2 rows");
    const std::size_t n = records.size();
    std::array<std::vector<double>, 5> cols;
    for (auto& c : cols) c.reserve(n);
    for (const TransitionRecord& r : records) {
        cols[0].push_back(static_cast<double>(r.source_tag));
        cols[1].push_back(static_cast<double>(r.user_class));
        cols[2].push_back(r.seconds_since_entry);
        cols[3].push_back(static_cast<double>(r.dest_tag));
        cols[4].push_back(r.stay_seconds);
    }
    std::array<double, 5> mean{}, sd{};
    for (int i = 0; i < 5; ++i) {
        double m = 0;
        for (double v : cols[static_cast<std::size_t>(i)]) m += v;
        m /= static_cast<double>(n);
        double var = 0;
        for (double v : cols[static_cast<std::size_t>(i)]) var += (v - m) * (v - m);
        mean[static_cast<std::size_t>(i)] = m;
        sd[static_cast<std::size_t>(i)] = std::sqrt(var / static_cast<double>(n));
    }
    std::array<std::array<double, 5>, 5> corr{};
    for (int i = 0; i < 5; ++i) {
        for (int k = 0; k < 5; ++k) {
            if (i == k) {
                corr[i][k] = 1.0;
                continue;
            }
            if (sd[static_cast<std::size_t>(i)] == 0 || sd[static_cast<std::size_t>(k)] == 0) {
                corr[i][k] = 0.0; // constant column convention
                continue;
            }
            double cov = 0;
            for (std::size_t r = 0; r < n; ++r)
                cov += (cols[static_cast<std::size_t>(i)][r] - mean[static_cast<std::size_t>(i)]) *
                       (cols[static_cast<std::size_t>(k)][r] - mean[static_cast<std::size_t>(k)]);
            cov /= static_cast<double>(n);
            corr[i][k] = cov / (sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(k)]);
        }
    }
    return corr;
}

// --- encoded split CSVs ---

namespace {

const char* kDatasetHeader =
    "src_OFFICE,src_LAB,src_STORAGE,src_MAINTENANCE,src_ENTRY,src_END,"
    "cls_FACILITY_MANAGER,cls_RAD_WORKER,cls_INVESTIGATOR,cls_FACILITY_USER,"
    "time_norm,label,stay_target,user_class,source_tag,dest_tag,"
    "seconds_since_entry,stay_duration_s";

} // namespace

void write_dataset_csv(const std::string& path, const std::vector<TransitionRecord>& records,
                       const Scaler& s) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << kDatasetHeader << '\n';
    for (const TransitionRecord& r : records) {
        const EncodedNext e = encode_for_next_destination(r, s);
        for (int i = 0; i < kFeatureDim - 1; ++i)
            out << format_double(e.x[static_cast<std::size_t>(i)]) << ',';
        out << format_double(e.x[kFeatureDim - 1]) << ',' << e.label << ',';
        if (r.dest_tag != Tag::End)
            out << format_double(s.normalize_stay(r.stay_seconds));
        out << ',' << to_string(r.user_class) << ',' << to_string(r.source_tag) << ','
            << to_string(r.dest_tag) << ',' << format_double(r.seconds_since_entry) << ','
            << format_double(r.stay_seconds) << '\n';
    }
}

namespace {

struct DatasetRow {
    FeatureVector src_features;
    int label;
    bool has_stay_target;
    double stay_target;
    UserClass cls;
    Tag dest;
    double time_norm;
};

void for_each_dataset_row(const std::string& path, const std::function<void(const DatasetRow&)>& fn) {
    std::vector<std::string> header;
    bool layout_checked = false;
    for_each_csv_row(
        path,
        [&](const std::vector<std::string>& row) {
            if (!layout_checked) {
                if (header.size() < 18) throw ParseError("dataset csv: bad header: " + path);
                layout_checked = true;
            }
            if (row.size() < 18) throw ParseError("dataset csv: short row");
            DatasetRow d;
            for (int i = 0; i < kFeatureDim; ++i)
                d.src_features[static_cast<std::size_t>(i)] =
                    parse_double_field(row[static_cast<std::size_t>(i)]);
            d.label = static_cast<int>(parse_int_field(row[11]));
            d.has_stay_target = !row[12].empty();
            d.stay_target = d.has_stay_target ? parse_double_field(row[12]) : 0.0;
            d.cls = parse_user_class(row[13]);
            d.dest = parse_tag(row[15]);
            d.time_norm = d.src_features[kFeatureDim - 1];
            fn(d);
        },
        &header);
}

} // namespace

std::vector<EncodedNext> read_mlp_rows(const std::string& path) {
    std::vector<EncodedNext> out;
    for_each_dataset_row(path, [&](const DatasetRow& d) {
        out.push_back({d.src_features, d.label});
    });
    if (out.empty()) throw ValidationError("dataset csv has no rows: " + path);
    return out;
}

std::vector<EncodedStay> read_mdn_rows(const std::string& path) {
    std::vector<EncodedStay> out;
    for_each_dataset_row(path, [&](const DatasetRow& d) {
        if (d.dest == Tag::End) {
            if (d.has_stay_target)
                throw ValidationError("dataset csv: END row carries a stay target");
            return; // END rows are excluded from stay-duration training
        }
        if (!d.has_stay_target)
            throw ValidationError("dataset csv: non-END row missing stay target");
        FeatureVector x{};
        x[static_cast<std::size_t>(d.dest)] = 1.0;
        x[static_cast<std::size_t>(kNumTags + static_cast<int>(d.cls))] = 1.0;
        x[kFeatureDim - 1] = d.time_norm;
        out.push_back({x, d.stay_target});
    });
    if (out.empty()) throw ValidationError("dataset csv has no usable stay rows: " + path);
    return out;
}

std::vector<double> read_stay_targets(const std::string& path) {
    std::vector<double> out;
    for_each_dataset_row(path, [&](const DatasetRow& d) {
        if (d.dest == Tag::End) return;
        if (!d.has_stay_target)
            throw ValidationError("dataset csv: non-END row missing stay target");
        out.push_back(d.stay_target);
    });
    return out;
}

} // namespace polsim
