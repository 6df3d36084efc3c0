#pragma once

#include <span>
#include <string>
#include <vector>

#include "surveylm/error.hpp"
#include "surveylm/questionnaire.hpp"

namespace surveylm {

enum class Provenance { ModelRaw, ModelAdjusted, Reference, Uniform };

std::string provenance_name(Provenance p);

/// Probability vector over a question's answers, indexed by answer (not label).
struct ResponseDistribution {
    std::string question_id;
    std::vector<double> probs;
    Provenance provenance = Provenance::ModelRaw;

    int size() const { return static_cast<int>(probs.size()); }
};

/// Throws unless entries are >= 0 and sum to 1 within tol.
void validate_distribution(std::span<const double> probs, double tol = 1e-9);

ResponseDistribution uniform_distribution(const Question& q);

/// Shannon entropy in nats, with 0*log(0) := 0.
double entropy_nats(std::span<const double> probs);

/// H(p) / log(k): 1 for uniform, 0 for a point mass. Requires k >= 2.
double normalized_entropy(std::span<const double> probs);
double normalized_entropy(const ResponseDistribution& d);

/// KL(p || q) in nats. With epsilon > 0 the reference side is smoothed as
/// q' = (q + eps) / (1 + k*eps). With epsilon = 0 a support violation
/// returns +infinity.
double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon = 0.0);
double kl_divergence(const ResponseDistribution& p, const ResponseDistribution& q, double epsilon = 0.0);

/// 1-D earth-mover distance between ordinal distributions, in answer-rank
/// steps: sum over cut points of |CDF_p - CDF_q|.
double wasserstein_ordinal(std::span<const double> p, std::span<const double> q);

/// Checked variant: the question must be ordinal.
double wasserstein_ordinal(const Question& q, std::span<const double> p, std::span<const double> d);

double pearson_correlation(std::span<const double> x, std::span<const double> y);
double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace surveylm
