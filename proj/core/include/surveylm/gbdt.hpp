#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "surveylm/error.hpp"

namespace surveylm {

/// Column-major feature matrix with small-integer (binned) values. One-hot
/// encoded categoricals use bins {0, 1}.
struct BinnedMatrix {
    long n_rows = 0;
    int n_features = 0;
    std::vector<std::uint8_t> values;  // column-major: values[f * n_rows + r]
    std::vector<int> bins_per_feature;

    void resize(long rows, int features, int bins = 2);
    std::uint8_t at(long row, int feature) const {
        return values[static_cast<std::size_t>(feature) * static_cast<std::size_t>(n_rows) +
                      static_cast<std::size_t>(row)];
    }
    void set(long row, int feature, std::uint8_t v) {
        values[static_cast<std::size_t>(feature) * static_cast<std::size_t>(n_rows) +
               static_cast<std::size_t>(row)] = v;
    }
};

struct GbdtParams {
    int n_trees = 200;
    int max_depth = 6;
    double learning_rate = 0.1;
    double lambda_l2 = 1.0;
    double min_child_weight = 1.0;
    double min_gain = 1e-12;
};

/// Binary logistic gradient-boosted decision trees over binned features.
/// Level-wise greedy growth with second-order (gradient/hessian) split gain.
class GbdtClassifier {
public:
    void fit(const BinnedMatrix& x, std::span<const int> y, const GbdtParams& params);

    /// Raw additive score (log-odds); decision threshold is 0.
    double predict_score(const BinnedMatrix& x, long row) const;
    std::vector<double> predict_scores(const BinnedMatrix& x) const;

    int tree_count() const { return static_cast<int>(trees_.size()); }
    bool trained() const { return !trees_.empty(); }

private:
    struct Node {
        int feature = -1;          // -1 for leaves
        std::uint8_t threshold = 0;  // go left when value <= threshold
        int left = -1;
        int right = -1;
        double value = 0;  // leaf weight (already scaled by the learning rate)
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    Tree build_tree(const BinnedMatrix& x, std::span<const double> gradients,
                    std::span<const double> hessians, const GbdtParams& params) const;

    std::vector<Tree> trees_;
    double base_score_ = 0;
};

double accuracy(std::span<const double> scores, std::span<const int> labels);

}  // namespace surveylm
