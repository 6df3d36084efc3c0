#include "surveylm/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "surveylm/parallel.hpp"
#include "surveylm/rng.hpp"

namespace surveylm {

namespace {

struct Encoder {
    std::vector<std::string> feature_names;
    std::vector<std::map<std::string, int>> feature_of_code;  // per column: code -> feature index

    static Encoder build(const ReferenceTable& a, const ReferenceTable& b) {
        Encoder e;
        e.feature_of_code.resize(a.columns.size());
        for (std::size_t c = 0; c < a.columns.size(); ++c) {
            std::set<std::string> codes;
            for (const auto& row : a.rows) codes.insert(row[c]);
            for (const auto& row : b.rows) codes.insert(row[c]);
            for (const auto& code : codes) {
                e.feature_of_code[c][code] = static_cast<int>(e.feature_names.size());
                e.feature_names.push_back(a.columns[c] + "=" + code);
            }
        }
        return e;
    }

    void encode_row(const std::vector<std::string>& row, BinnedMatrix& x, long out_row) const {
        for (std::size_t c = 0; c < row.size(); ++c) {
            auto it = feature_of_code[c].find(row[c]);
            if (it != feature_of_code[c].end()) x.set(out_row, it->second, 1);
        }
    }
};

}  // namespace

DiscriminatorTask build_task(const ReferenceTable& synthetic, const ReferenceTable& reference,
                             long n, std::uint64_t seed, double test_fraction) {
    if (synthetic.columns != reference.columns) {
        throw Error("discriminator: schema mismatch between the two tables");
    }
    if (synthetic.row_count() < n || reference.row_count() < n) {
        throw Error("discriminator: need " + std::to_string(n) + " rows per side, have " +
                    std::to_string(synthetic.row_count()) + " and " +
                    std::to_string(reference.row_count()));
    }
    if (n < 2) throw Error("discriminator: n must be >= 2");
    if (!(test_fraction > 0 && test_fraction < 1)) {
        throw Error("discriminator: test fraction must be in (0, 1)");
    }

    Encoder encoder = Encoder::build(synthetic, reference);
    const long n_test = std::max<long>(1, std::lround(static_cast<double>(n) * test_fraction));
    const long n_train = n - n_test;

    DiscriminatorTask task;
    task.feature_names = encoder.feature_names;
    task.train_x.resize(2 * n_train, static_cast<int>(encoder.feature_names.size()));
    task.test_x.resize(2 * n_test, static_cast<int>(encoder.feature_names.size()));
    task.train_y.assign(static_cast<std::size_t>(2 * n_train), 0);
    task.test_y.assign(static_cast<std::size_t>(2 * n_test), 0);

    // Stratified: sample n per side without replacement, first n_train of the
    // shuffled sample train, the rest test. Classes stay balanced in both parts.
    struct Side {
        const ReferenceTable* table;
        int label;
        const char* tag;
    };
    long train_at = 0, test_at = 0;
    for (const Side& side : {Side{&synthetic, 1, "synthetic"}, Side{&reference, 0, "reference"}}) {
        rng::Stream stream(rng::derive_seed(seed, side.tag));
        auto picks = stream.sample_indices(side.table->row_count(), n);
        for (long i = 0; i < n; ++i) {
            const auto& row = side.table->rows[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
            if (i < n_train) {
                encoder.encode_row(row, task.train_x, train_at);
                task.train_y[static_cast<std::size_t>(train_at)] = side.label;
                ++train_at;
            } else {
                encoder.encode_row(row, task.test_x, test_at);
                task.test_y[static_cast<std::size_t>(test_at)] = side.label;
                ++test_at;
            }
        }
    }
    return task;
}

namespace {

// Plain logistic regression on the one-hot features; the configuration hook
// for swapping out the boosted trees. The TV lower bound stays valid for any
// classifier.
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0;

    void fit(const BinnedMatrix& x, std::span<const int> y, int epochs = 60, double lr = 0.5) {
        weights.assign(static_cast<std::size_t>(x.n_features), 0.0);
        bias = 0;
        const double n = static_cast<double>(x.n_rows);
        std::vector<double> grad(weights.size());
        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_bias = 0;
            for (long r = 0; r < x.n_rows; ++r) {
                double s = bias;
                for (int f = 0; f < x.n_features; ++f) {
                    if (x.at(r, f)) s += weights[static_cast<std::size_t>(f)];
                }
                double err = 1.0 / (1.0 + std::exp(-s)) - y[static_cast<std::size_t>(r)];
                for (int f = 0; f < x.n_features; ++f) {
                    if (x.at(r, f)) grad[static_cast<std::size_t>(f)] += err;
                }
                grad_bias += err;
            }
            for (std::size_t f = 0; f < weights.size(); ++f) weights[f] -= lr * grad[f] / n;
            bias -= lr * grad_bias / n;
        }
    }

    double score(const BinnedMatrix& x, long row) const {
        double s = bias;
        for (int f = 0; f < x.n_features; ++f) {
            if (x.at(row, f)) s += weights[static_cast<std::size_t>(f)];
        }
        return s;
    }
};

}  // namespace

TrainedDiscriminator train_discriminator(const DiscriminatorTask& task,
                                         const DiscriminatorOptions& options) {
    TrainedDiscriminator result;
    result.classifier = options.classifier;
    std::vector<double> scores(task.test_y.size());
    if (options.classifier == "gbdt") {
        GbdtClassifier model;
        model.fit(task.train_x, task.train_y, options.gbdt);
        scores = model.predict_scores(task.test_x);
    } else if (options.classifier == "logistic") {
        LogisticModel model;
        model.fit(task.train_x, task.train_y);
        for (long r = 0; r < task.test_x.n_rows; ++r) {
            scores[static_cast<std::size_t>(r)] = model.score(task.test_x, r);
        }
    } else {
        throw Error("discriminator: unknown classifier '" + options.classifier + "'");
    }
    result.heldout_accuracy = accuracy(scores, task.test_y);
    return result;
}

DiscriminatorReport discriminator_test(const ReferenceTable& synthetic,
                                       const ReferenceTable& reference, long n, int seeds,
                                       std::uint64_t master_seed,
                                       const DiscriminatorOptions& options) {
    if (seeds < 1) throw Error("discriminator: need at least one seed");
    DiscriminatorReport report;
    report.seed_count = seeds;
    report.n_per_side = n;
    report.synthetic_rows = synthetic.row_count();
    report.reference_rows = reference.row_count();
    report.classifier = options.classifier;
    report.params = options.gbdt;
    report.per_seed_accuracy.resize(static_cast<std::size_t>(seeds));

    parallel_for(static_cast<std::size_t>(seeds), options.workers, [&](std::size_t s) {
        auto task = build_task(synthetic, reference, n,
                               rng::derive_seed(master_seed, "discriminator-seed", s));
        report.per_seed_accuracy[s] = train_discriminator(task, options).heldout_accuracy;
    });

    double sum = 0;
    for (double a : report.per_seed_accuracy) sum += a;
    report.mean_accuracy = sum / seeds;
    double var = 0;
    for (double a : report.per_seed_accuracy) var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    report.stddev_accuracy = seeds > 1 ? std::sqrt(var / (seeds - 1)) : 0.0;
    report.tv_lower_bound = std::max(0.0, 2.0 * report.mean_accuracy - 1.0);
    return report;
}

nlohmann::ordered_json DiscriminatorReport::to_json() const {
    nlohmann::ordered_json j;
    j["mean_accuracy"] = mean_accuracy;
    j["stddev_accuracy"] = stddev_accuracy;
    j["seed_count"] = seed_count;
    j["tv_lower_bound"] = tv_lower_bound;
    j["n_per_side"] = n_per_side;
    j["synthetic_rows"] = synthetic_rows;
    j["reference_rows"] = reference_rows;
    j["classifier"] = classifier;
    j["hyperparameters"] = {{"trees", params.n_trees},
                            {"depth", params.max_depth},
                            {"learning_rate", params.learning_rate},
                            {"lambda_l2", params.lambda_l2},
                            {"min_child_weight", params.min_child_weight}};
    j["encoding"] = encoding;
    // The bound holds for any classifier: best-classifier accuracy lower-bounds
    // nothing, it is the observed accuracy that lower-bounds TV via 2*acc - 1.
    j["note"] = "tv_lower_bound = max(0, 2*mean_accuracy - 1); a lower bound for any classifier";
    j["per_seed_accuracy"] = per_seed_accuracy;
    return j;
}

csv::Table DiscriminatorReport::per_seed_csv() const {
    csv::Table t;
    t.header = {"seed", "heldout_accuracy"};
    for (std::size_t s = 0; s < per_seed_accuracy.size(); ++s) {
        t.rows.push_back({std::to_string(s), csv::format_double(per_seed_accuracy[s])});
    }
    return t;
}

std::vector<SubgroupBaselineRow> subgroup_vs_rest_baseline(const ReferenceTable& reference, long n,
                                                           int seeds, std::uint64_t master_seed,
                                                           const DiscriminatorOptions& options) {
    if (!reference.has_subgroups()) throw Error("baseline: table has no subgroup column");
    auto values = reference.subgroup_values();
    if (values.size() < 2) throw Error("baseline: need >= 2 subgroups");
    std::vector<SubgroupBaselineRow> rows;
    for (const auto& value : values) {
        ReferenceTable in_group = reference.filter_subgroup(value);
        ReferenceTable rest = reference.filter_not_subgroup(value);
        long task_n = n > 0 ? n : std::min(in_group.row_count(), rest.row_count());
        if (in_group.row_count() < task_n) {
            throw Error("baseline: subgroup '" + value + "' too small for n=" + std::to_string(task_n));
        }
        DiscriminatorReport r = discriminator_test(
            in_group, rest, task_n, seeds,
            rng::derive_seed(master_seed, ("baseline-" + value).c_str()), options);
        rows.push_back({value, task_n, r.mean_accuracy, r.stddev_accuracy, seeds, r.tv_lower_bound});
    }
    return rows;
}

}  // namespace surveylm
