#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmpm/miner.hpp"
#include "mmpm/visual.hpp"

namespace mmpm {

// The visual sides of mined patterns, deduplicated, first appearance first.
struct PatternBank {
    std::vector<std::vector<int>> patterns;  // sorted filter ids

    static PatternBank from_patterns(const std::vector<Pattern>& mined);
    std::size_t size() const { return patterns.size(); }
};

struct ActivationVector {
    std::string doc_id;
    Eigen::VectorXd bits;  // length = bank size, values in {0,1}
};

// bit j = 1 iff some patch itemset contains bank pattern j.
ActivationVector activations(const std::string& doc_id, const std::vector<VisualItemset>& patches,
                             const PatternBank& bank);

struct TrainOptions {
    double lr = 0.5;
    double l2 = 1e-3;
    int epochs = 500;
    std::uint64_t seed = 1;  // recorded for provenance; training is zero-init deterministic
};

struct SoftmaxModel {
    Eigen::MatrixXd weights;       // E x M
    Eigen::VectorXd bias;          // E
    std::vector<double> train_log;  // loss per epoch, plus the final loss
};

// Mean cross-entropy plus (l2/2)·‖W‖²; the bias is unregularized.
double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2);

void softmax_gradients(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                       const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2,
                       Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b);

// Full-batch gradient descent from zero initialization. labels[i] pairs
// with data[i]; classes fixes the output dimension.
SoftmaxModel train_softmax(const std::vector<ActivationVector>& data,
                           const std::vector<int>& labels, int classes,
                           const TrainOptions& opts = {});

struct Prediction {
    int event = 0;
    Eigen::VectorXd probs;  // sums to 1
};

Prediction predict(const SoftmaxModel& model, const ActivationVector& av);

struct ClassifierFile {
    SoftmaxModel model;
    PatternBank bank;
    TrainOptions options;
};

void save_classifier(const std::filesystem::path& path, const ClassifierFile& file);
ClassifierFile load_classifier(const std::filesystem::path& path);

}  // namespace mmpm
