#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveylm/csv.hpp"
#include "surveylm/gbdt.hpp"
#include "surveylm/reference.hpp"

namespace surveylm {

/// Labeled train/test split: n rows sampled from each table without
/// replacement, one-hot encoded, label 1 = synthetic side.
struct DiscriminatorTask {
    std::vector<std::string> feature_names;  // "COLUMN=code"
    BinnedMatrix train_x, test_x;
    std::vector<int> train_y, test_y;
};

DiscriminatorTask build_task(const ReferenceTable& synthetic, const ReferenceTable& reference,
                             long n, std::uint64_t seed, double test_fraction = 0.2);

struct DiscriminatorOptions {
    std::string classifier = "gbdt";  // "gbdt" or "logistic"
    GbdtParams gbdt;
    int workers = 1;
};

struct TrainedDiscriminator {
    double heldout_accuracy = 0;
    std::string classifier;
};

TrainedDiscriminator train_discriminator(const DiscriminatorTask& task,
                                         const DiscriminatorOptions& options = {});

struct DiscriminatorReport {
    std::vector<double> per_seed_accuracy;
    double mean_accuracy = 0;
    double stddev_accuracy = 0;
    int seed_count = 0;
    double tv_lower_bound = 0;  // max(0, 2*mean_accuracy - 1); valid for any classifier
    long n_per_side = 0;
    long synthetic_rows = 0;
    long reference_rows = 0;
    std::string classifier = "gbdt";
    GbdtParams params;
    std::string encoding = "one-hot";

    nlohmann::ordered_json to_json() const;
    csv::Table per_seed_csv() const;
};

/// Classifier two-sample test over `seeds` independent resampled splits.
DiscriminatorReport discriminator_test(const ReferenceTable& synthetic,
                                       const ReferenceTable& reference, long n, int seeds,
                                       std::uint64_t master_seed,
                                       const DiscriminatorOptions& options = {});

struct SubgroupBaselineRow {
    std::string subgroup;
    long n = 0;
    double mean_accuracy = 0;
    double stddev_accuracy = 0;
    int seeds = 0;
    double tv_lower_bound = 0;
};

/// For each subgroup value: discriminate the subgroup's rows against an
/// equally-sized sample of the rest of the table. n = 0 sizes each task to
/// min(|subgroup|, |rest|).
std::vector<SubgroupBaselineRow> subgroup_vs_rest_baseline(const ReferenceTable& reference, long n,
                                                           int seeds, std::uint64_t master_seed,
                                                           const DiscriminatorOptions& options = {});

}  // namespace surveylm
