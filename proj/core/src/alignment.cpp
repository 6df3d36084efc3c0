#include "surveylm/alignment.hpp"

#include <algorithm>
#include <cmath>

namespace surveylm {

std::pair<double, double> kl_vs_reference(const ResponseDistribution& model,
                                          const ResponseDistribution& reference, double epsilon) {
    bool has_zero = std::any_of(reference.probs.begin(), reference.probs.end(),
                                [](double p) { return p <= 0.0; });
    double eps_used = has_zero ? epsilon : 0.0;
    return {kl_divergence(model, reference, eps_used), eps_used};
}

namespace {

const ResponseDistribution& lookup(const ResponseMap& m, const std::string& qid, const char* side) {
    auto it = m.find(qid);
    if (it == m.end()) {
        throw Error(std::string("alignment: ") + side + " side is missing question '" + qid + "'");
    }
    return it->second;
}

}  // namespace

double average_kl_alignment(const ResponseMap& model, const ResponseMap& reference,
                            const std::vector<std::string>& questions, double epsilon) {
    if (questions.empty()) throw Error("alignment: empty question set");
    double total = 0;
    for (const auto& qid : questions) {
        total += kl_vs_reference(lookup(model, qid, "model"), lookup(reference, qid, "reference"),
                                 epsilon)
                     .first;
    }
    return total / static_cast<double>(questions.size());
}

int closer_than_uniform_count(const ResponseMap& model, const ResponseMap& reference,
                              const std::vector<std::string>& questions, double epsilon) {
    int count = 0;
    for (const auto& qid : questions) {
        const auto& m = lookup(model, qid, "model");
        const auto& ref = lookup(reference, qid, "reference");
        std::vector<double> uniform(m.probs.size(), 1.0 / static_cast<double>(m.probs.size()));
        double to_ref = kl_vs_reference(m, ref, epsilon).first;
        double to_uniform = kl_divergence(std::span<const double>(m.probs), uniform, 0.0);
        if (to_ref < to_uniform) ++count;  // ties count as not closer
    }
    return count;
}

namespace {

double divergence(AlignmentMetric metric, const Question& question, const ResponseDistribution& model,
                  const ResponseDistribution& reference, double epsilon) {
    switch (metric) {
        case AlignmentMetric::Kl:
            return kl_vs_reference(model, reference, epsilon).first;
        case AlignmentMetric::WassersteinOrdinal:
            return wasserstein_ordinal(question, model.probs, reference.probs);
    }
    throw Error("alignment: unknown metric");
}

AlignmentRow make_row(std::string population, const ResponseMap& model,
                      const ResponseMap& reference, const Questionnaire& questionnaire,
                      AlignmentMetric metric, double epsilon, long rows) {
    AlignmentRow row;
    row.population = std::move(population);
    row.rows = rows;
    double div_total = 0, ent_total = 0;
    for (const auto& q : questionnaire.questions) {
        const auto& m = lookup(model, q.id, "model");
        const auto& ref = lookup(reference, q.id, "reference");
        double d = divergence(metric, q, m, ref, epsilon);
        row.per_question[q.id] = d;
        div_total += d;
        ent_total += normalized_entropy(ref);
    }
    const double n = static_cast<double>(questionnaire.questions.size());
    row.mean_divergence = div_total / n;
    row.mean_normalized_entropy = ent_total / n;
    return row;
}

}  // namespace

AlignmentReport build_alignment_report(const std::string& model_name, const ResponseMap& model,
                                       const ReferenceTable& table, const Questionnaire& questionnaire,
                                       const AlignmentOptions& options) {
    if (questionnaire.questions.empty()) throw Error("alignment: empty questionnaire");
    AlignmentReport report;
    report.model = model_name;
    report.metric = options.metric == AlignmentMetric::Kl ? "kl" : "wasserstein";
    report.epsilon = options.epsilon;
    report.weighted = options.weighted;
    for (const auto& q : questionnaire.questions) report.questions.push_back(q.id);

    ResponseMap census, uniform;
    for (const auto& q : questionnaire.questions) {
        census[q.id] = marginal_distribution(table, q, {std::nullopt, options.weighted});
        uniform[q.id] = uniform_distribution(q);
    }
    report.census = make_row("census", model, census, questionnaire, options.metric, options.epsilon,
                             table.row_count());
    report.uniform =
        make_row("uniform", model, uniform, questionnaire, options.metric, options.epsilon, 0);
    report.closer_than_uniform =
        closer_than_uniform_count(model, census, report.questions, options.epsilon);

    if (options.include_subgroups && table.has_subgroups()) {
        for (const auto& value : table.subgroup_values()) {
            ResponseMap subgroup;
            long rows = 0;
            for (const auto& q : questionnaire.questions) {
                subgroup[q.id] = marginal_distribution(table, q, {value, options.weighted});
            }
            for (const auto& s : table.subgroups) {
                if (s == value) ++rows;
            }
            report.subgroups.push_back(make_row(value, model, subgroup, questionnaire, options.metric,
                                                options.epsilon, rows));
        }
    }
    return report;
}

nlohmann::ordered_json AlignmentReport::to_json() const {
    auto row_json = [](const AlignmentRow& row) {
        nlohmann::ordered_json j;
        j["population"] = row.population;
        j["mean_divergence"] = row.mean_divergence;
        j["mean_normalized_entropy"] = row.mean_normalized_entropy;
        j["rows"] = row.rows;
        j["per_question"] = row.per_question;
        return j;
    };
    nlohmann::ordered_json j;
    j["model"] = model;
    j["metric"] = metric;
    j["epsilon"] = epsilon;
    j["weighted"] = weighted;
    j["questions"] = questions;
    j["census"] = row_json(census);
    j["uniform"] = row_json(uniform);
    j["subgroups"] = nlohmann::ordered_json::array();
    for (const auto& row : subgroups) j["subgroups"].push_back(row_json(row));
    j["closer_than_uniform"] = closer_than_uniform;
    return j;
}

csv::Table AlignmentReport::to_csv() const {
    csv::Table t;
    t.header = {"population", "mean_divergence", "mean_normalized_entropy", "rows"};
    for (const auto& q : questions) t.header.push_back("div_" + q);
    auto add_row = [&](const AlignmentRow& row) {
        std::vector<std::string> fields = {row.population, csv::format_double(row.mean_divergence),
                                           csv::format_double(row.mean_normalized_entropy),
                                           std::to_string(row.rows)};
        for (const auto& q : questions) fields.push_back(csv::format_double(row.per_question.at(q)));
        t.rows.push_back(std::move(fields));
    };
    add_row(census);
    add_row(uniform);
    for (const auto& row : subgroups) add_row(row);
    return t;
}

CorrelationResult entropy_alignment_correlation(const AlignmentReport& report) {
    if (report.subgroups.size() < 3) {
        throw Error("entropy_alignment_correlation: need >= 3 subgroups, have " +
                    std::to_string(report.subgroups.size()));
    }
    CorrelationResult result;
    std::vector<double> entropy, div;
    for (const auto& row : report.subgroups) {
        result.points.push_back({row.population, row.mean_normalized_entropy, row.mean_divergence});
        entropy.push_back(row.mean_normalized_entropy);
        div.push_back(row.mean_divergence);
    }
    double r = pearson_correlation(entropy, div);
    if (std::isnan(r)) {
        result.defined = false;  // constant entropy (or divergence) across subgroups
        return result;
    }
    result.defined = true;
    result.pearson_r = r;
    result.spearman_rho = spearman_correlation(entropy, div);
    return result;
}

}  // namespace surveylm
