#include "surveylm/gbdt.hpp"

#include <algorithm>
#include <cmath>

namespace surveylm {

void BinnedMatrix::resize(long rows, int features, int bins) {
    n_rows = rows;
    n_features = features;
    values.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(features), 0);
    bins_per_feature.assign(static_cast<std::size_t>(features), bins);
}

namespace {

struct BinStats {
    double g = 0;
    double h = 0;
};

struct Split {
    int feature = -1;
    std::uint8_t threshold = 0;
    double gain = 0;
    double left_g = 0, left_h = 0, right_g = 0, right_h = 0;
};

double leaf_objective(double g, double h, double lambda) {
    return g * g / (h + lambda);
}

}  // namespace

GbdtClassifier::Tree GbdtClassifier::build_tree(const BinnedMatrix& x,
                                                std::span<const double> gradients,
                                                std::span<const double> hessians,
                                                const GbdtParams& params) const {
    const long n = x.n_rows;
    Tree tree;
    tree.nodes.push_back({});

    std::vector<int> node_of_row(static_cast<std::size_t>(n), 0);
    std::vector<int> active = {0};
    std::vector<double> node_g = {0}, node_h = {0};
    for (long r = 0; r < n; ++r) {
        node_g[0] += gradients[static_cast<std::size_t>(r)];
        node_h[0] += hessians[static_cast<std::size_t>(r)];
    }

    int max_bins = 2;
    for (int b : x.bins_per_feature) max_bins = std::max(max_bins, b);

    for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
        // node-local histogram accumulation over all rows and features
        std::vector<int> node_slot(tree.nodes.size(), -1);
        for (std::size_t i = 0; i < active.size(); ++i) node_slot[static_cast<std::size_t>(active[i])] = static_cast<int>(i);

        std::vector<BinStats> hist(active.size() * static_cast<std::size_t>(x.n_features) *
                                   static_cast<std::size_t>(max_bins));
        for (int f = 0; f < x.n_features; ++f) {
            const std::uint8_t* col = x.values.data() + static_cast<std::size_t>(f) * static_cast<std::size_t>(n);
            for (long r = 0; r < n; ++r) {
                int slot = node_slot[static_cast<std::size_t>(node_of_row[static_cast<std::size_t>(r)])];
                if (slot < 0) continue;
                auto idx = (static_cast<std::size_t>(slot) * static_cast<std::size_t>(x.n_features) +
                            static_cast<std::size_t>(f)) *
                               static_cast<std::size_t>(max_bins) +
                           col[r];
                hist[idx].g += gradients[static_cast<std::size_t>(r)];
                hist[idx].h += hessians[static_cast<std::size_t>(r)];
            }
        }

        std::vector<int> next_active;
        std::vector<double> next_g, next_h;
        for (std::size_t i = 0; i < active.size(); ++i) {
            int node_id = active[i];
            double total_g = node_g[i], total_h = node_h[i];
            double parent_obj = leaf_objective(total_g, total_h, params.lambda_l2);

            Split best;
            for (int f = 0; f < x.n_features; ++f) {
                const int bins = x.bins_per_feature[static_cast<std::size_t>(f)];
                double left_g = 0, left_h = 0;
                for (int b = 0; b + 1 < bins; ++b) {
                    auto idx = (i * static_cast<std::size_t>(x.n_features) + static_cast<std::size_t>(f)) *
                                   static_cast<std::size_t>(max_bins) +
                               static_cast<std::size_t>(b);
                    left_g += hist[idx].g;
                    left_h += hist[idx].h;
                    double right_g = total_g - left_g, right_h = total_h - left_h;
                    if (left_h < params.min_child_weight || right_h < params.min_child_weight) continue;
                    double gain = 0.5 * (leaf_objective(left_g, left_h, params.lambda_l2) +
                                         leaf_objective(right_g, right_h, params.lambda_l2) - parent_obj);
                    if (gain > best.gain) {
                        best = {f, static_cast<std::uint8_t>(b), gain, left_g, left_h, right_g, right_h};
                    }
                }
            }

            if (best.feature < 0 || best.gain <= params.min_gain) {
                tree.nodes[static_cast<std::size_t>(node_id)].value =
                    -params.learning_rate * total_g / (total_h + params.lambda_l2);
                continue;
            }
            int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            int right_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
            node.feature = best.feature;
            node.threshold = best.threshold;
            node.left = left_id;
            node.right = right_id;
            next_active.push_back(left_id);
            next_g.push_back(best.left_g);
            next_h.push_back(best.left_h);
            next_active.push_back(right_id);
            next_g.push_back(best.right_g);
            next_h.push_back(best.right_h);
        }

        if (next_active.empty()) break;
        for (long r = 0; r < n; ++r) {
            auto& node = tree.nodes[static_cast<std::size_t>(node_of_row[static_cast<std::size_t>(r)])];
            if (node.feature < 0) continue;
            node_of_row[static_cast<std::size_t>(r)] =
                x.at(r, node.feature) <= node.threshold ? node.left : node.right;
        }
        active = std::move(next_active);
        node_g = std::move(next_g);
        node_h = std::move(next_h);
    }

    // any still-active nodes at the depth limit become leaves
    for (std::size_t i = 0; i < active.size(); ++i) {
        auto& node = tree.nodes[static_cast<std::size_t>(active[i])];
        if (node.feature < 0 && node.left < 0) {
            node.value = -params.learning_rate * node_g[i] / (node_h[i] + params.lambda_l2);
        }
    }
    return tree;
}

void GbdtClassifier::fit(const BinnedMatrix& x, std::span<const int> y, const GbdtParams& params) {
    const long n = x.n_rows;
    if (static_cast<long>(y.size()) != n) throw Error("gbdt: label count mismatch");
    long positives = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw Error("gbdt: labels must be 0/1");
        positives += label;
    }
    if (positives == 0 || positives == n) throw Error("gbdt: single-class training data");

    trees_.clear();
    double p0 = static_cast<double>(positives) / static_cast<double>(n);
    base_score_ = std::log(p0 / (1.0 - p0));

    std::vector<double> score(static_cast<std::size_t>(n), base_score_);
    std::vector<double> gradients(static_cast<std::size_t>(n));
    std::vector<double> hessians(static_cast<std::size_t>(n));
    for (int t = 0; t < params.n_trees; ++t) {
        for (long r = 0; r < n; ++r) {
            double p = 1.0 / (1.0 + std::exp(-score[static_cast<std::size_t>(r)]));
            gradients[static_cast<std::size_t>(r)] = p - static_cast<double>(y[static_cast<std::size_t>(r)]);
            hessians[static_cast<std::size_t>(r)] = std::max(p * (1.0 - p), 1e-16);
        }
        Tree tree = build_tree(x, gradients, hessians, params);
        for (long r = 0; r < n; ++r) {
            int node = 0;
            while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = x.at(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
            }
            score[static_cast<std::size_t>(r)] += tree.nodes[static_cast<std::size_t>(node)].value;
        }
        trees_.push_back(std::move(tree));
    }
}

double GbdtClassifier::predict_score(const BinnedMatrix& x, long row) const {
    double score = base_score_;
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            node = x.at(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        score += tree.nodes[static_cast<std::size_t>(node)].value;
    }
    return score;
}

std::vector<double> GbdtClassifier::predict_scores(const BinnedMatrix& x) const {
    std::vector<double> scores(static_cast<std::size_t>(x.n_rows));
    for (long r = 0; r < x.n_rows; ++r) scores[static_cast<std::size_t>(r)] = predict_score(x, r);
    return scores;
}

double accuracy(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) throw Error("accuracy: size mismatch");
    long correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        int predicted = scores[i] > 0 ? 1 : 0;
        if (predicted == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace surveylm
