#include "surveylm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace surveylm {

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::ModelRaw: return "model-raw";
        case Provenance::ModelAdjusted: return "model-adjusted";
        case Provenance::Reference: return "reference";
        case Provenance::Uniform: return "uniform";
    }
    return "unknown";
}

void validate_distribution(std::span<const double> probs, double tol) {
    double sum = 0;
    for (double p : probs) {
        if (!(p >= 0)) throw Error("distribution: negative or NaN entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw Error("distribution: entries sum to " + std::to_string(sum));
    }
}

ResponseDistribution uniform_distribution(const Question& q) {
    ResponseDistribution d;
    d.question_id = q.id;
    d.probs.assign(q.answers.size(), 1.0 / static_cast<double>(q.answers.size()));
    d.provenance = Provenance::Uniform;
    return d;
}

double entropy_nats(std::span<const double> probs) {
    double h = 0;
    for (double p : probs) {
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

double normalized_entropy(std::span<const double> probs) {
    if (probs.size() < 2) throw Error("normalized_entropy: need k >= 2");
    return entropy_nats(probs) / std::log(static_cast<double>(probs.size()));
}

double normalized_entropy(const ResponseDistribution& d) {
    return normalized_entropy(std::span<const double>(d.probs));
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon) {
    if (p.size() != q.size()) throw Error("kl_divergence: mismatched supports");
    if (epsilon < 0) throw Error("kl_divergence: epsilon must be >= 0");
    const double k = static_cast<double>(q.size());
    double kl = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        double qi = epsilon > 0 ? (q[i] + epsilon) / (1.0 + k * epsilon) : q[i];
        if (qi <= 0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / qi);
    }
    return kl;
}

double kl_divergence(const ResponseDistribution& p, const ResponseDistribution& q, double epsilon) {
    if (!p.question_id.empty() && !q.question_id.empty() && p.question_id != q.question_id) {
        throw Error("kl_divergence: distributions answer different questions ('" + p.question_id +
                    "' vs '" + q.question_id + "')");
    }
    return kl_divergence(std::span<const double>(p.probs), std::span<const double>(q.probs), epsilon);
}

double wasserstein_ordinal(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error("wasserstein_ordinal: mismatched supports");
    double cdf_p = 0, cdf_q = 0, w = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        cdf_p += p[i];
        cdf_q += q[i];
        w += std::abs(cdf_p - cdf_q);
    }
    return w;
}

double wasserstein_ordinal(const Question& q, std::span<const double> p, std::span<const double> d) {
    if (q.kind != QuestionKind::Ordinal) {
        throw Error("wasserstein_ordinal: question '" + q.id + "' is nominal");
    }
    return wasserstein_ordinal(p, d);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("pearson: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> fractional_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
    auto rx = fractional_ranks(x);
    auto ry = fractional_ranks(y);
    return pearson_correlation(rx, ry);
}

}  // namespace surveylm
