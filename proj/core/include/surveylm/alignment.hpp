#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveylm/csv.hpp"
#include "surveylm/reference.hpp"
#include "surveylm/stats.hpp"

namespace surveylm {

using ResponseMap = std::map<std::string, ResponseDistribution>;  // question id -> distribution

/// KL with the default reference-side smoothing policy: epsilon is applied
/// only when the reference has empty categories, so census zeros cannot
/// produce infinities. Returns the divergence and the epsilon actually used.
std::pair<double, double> kl_vs_reference(const ResponseDistribution& model,
                                          const ResponseDistribution& reference,
                                          double epsilon = 1e-9);

/// Mean over the question ids of `questions` of KL(model_q || reference_q).
/// Errors when either side is missing a question.
double average_kl_alignment(const ResponseMap& model, const ResponseMap& reference,
                            const std::vector<std::string>& questions, double epsilon = 1e-9);

/// Questions where the model is strictly closer to the reference than to the
/// uniform baseline; exact ties count as not closer.
int closer_than_uniform_count(const ResponseMap& model, const ResponseMap& reference,
                              const std::vector<std::string>& questions, double epsilon = 1e-9);

enum class AlignmentMetric { Kl, WassersteinOrdinal };

struct AlignmentRow {
    std::string population;  // "census", subgroup value, or "uniform"
    double mean_divergence = 0;
    std::map<std::string, double> per_question;
    double mean_normalized_entropy = 0;  // of the population's reference distributions
    long rows = 0;                       // reference rows behind this population
};

struct AlignmentReport {
    std::string model;
    std::string metric = "kl";  // divergence units: nats for KL
    double epsilon = 1e-9;
    bool weighted = false;
    std::vector<std::string> questions;
    AlignmentRow census;
    AlignmentRow uniform;
    std::vector<AlignmentRow> subgroups;
    int closer_than_uniform = 0;

    nlohmann::ordered_json to_json() const;
    csv::Table to_csv() const;
};

struct AlignmentOptions {
    bool weighted = false;
    double epsilon = 1e-9;
    AlignmentMetric metric = AlignmentMetric::Kl;
    bool include_subgroups = true;
};

AlignmentReport build_alignment_report(const std::string& model_name, const ResponseMap& model,
                                       const ReferenceTable& table, const Questionnaire& questionnaire,
                                       const AlignmentOptions& options = {});

struct SubgroupPoint {
    std::string subgroup;
    double mean_entropy = 0;
    double mean_divergence = 0;
};

struct CorrelationResult {
    bool defined = false;  // false when entropy is constant across subgroups
    double pearson_r = 0;
    double spearman_rho = 0;
    std::vector<SubgroupPoint> points;
};

/// Correlation between subgroup mean normalized entropy and the model's mean
/// divergence to that subgroup. Requires >= 3 subgroups in the report.
CorrelationResult entropy_alignment_correlation(const AlignmentReport& report);

}  // namespace surveylm
