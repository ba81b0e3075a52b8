#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glyphlab/tensor.hpp"

namespace glyphlab {

enum class BaselineKind {
    kLogisticRegression,
    kKnn,
    kGaussianNb,
    kDecisionTree,
    kLinearSvm,
    kMlp,
};

BaselineKind parse_baseline(const std::string& name);
std::string baseline_name(BaselineKind kind);

// Fixed, documented defaults; every model is deterministic under the seed.
struct BaselineOptions {
    int knn_k = 3;            // odd so binary votes cannot tie
    int tree_max_depth = 12;
    int mlp_hidden = 128;
    int logreg_epochs = 200;
    double logreg_lr = 0.1;
    int svm_epochs = 50;
    double svm_lambda = 1e-4;
    double svm_lr = 0.01;
    int mlp_epochs = 200;
    double mlp_lr = 0.1;
    double nb_var_floor = 1e-3;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1, right = -1;
    int label = 0;  // majority label (used at leaves)
};

// One struct covers all six models; only the fields for `kind` are filled.
struct BaselineModel {
    BaselineKind kind = BaselineKind::kKnn;
    std::size_t num_classes = 0;
    std::size_t input_dim = 0;

    Tensor W, b;  // logistic regression / linear SVM (classes x dim, classes)

    Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;  // hidden x dim, hidden, classes x hidden, classes

    Tensor knn_train;  // stored training rows
    std::vector<int> knn_labels;
    int knn_k = 3;

    Tensor nb_mean, nb_var;         // classes x dim
    std::vector<double> nb_log_prior;  // -inf for empty classes

    std::vector<TreeNode> tree;  // node 0 is the root
};

// X rows are flattened images; labels lie in [0, num_classes). logistic
// regression and linear SVM throw std::invalid_argument when the training
// set holds a single distinct class.
BaselineModel train_baseline(BaselineKind kind, const Tensor& X, const std::vector<int>& labels,
                             std::size_t num_classes, const BaselineOptions& opts = {});

// Deterministic labels; every argmax and the knn vote break ties toward the
// lowest class index; knn distances are Euclidean on the flattened pixels.
// Throws std::invalid_argument on an input-width mismatch.
std::vector<int> predict_baseline(const BaselineModel& model, const Tensor& X);

}  // namespace glyphlab
