#include "mmpm/midlevel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "mmpm/errors.hpp"

namespace mmpm {

using nlohmann::json;

PatternBank PatternBank::from_patterns(const std::vector<Pattern>& mined) {
    if (mined.empty()) throw DataError("no patterns to build a detection bank from");
    PatternBank bank;
    std::set<std::vector<int>> seen;
    for (const Pattern& p : mined) {
        if (p.visual_items.empty())
            throw DataError("pattern without visual items cannot join the detection bank");
        if (seen.insert(p.visual_items).second) bank.patterns.push_back(p.visual_items);
    }
    return bank;
}

ActivationVector activations(const std::string& doc_id, const std::vector<VisualItemset>& patches,
                             const PatternBank& bank) {
    if (bank.patterns.empty()) throw DataError("pattern bank is empty");
    ActivationVector av;
    av.doc_id = doc_id;
    av.bits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bank.size()));
    for (std::size_t j = 0; j < bank.size(); ++j) {
        const std::vector<int>& wanted = bank.patterns[j];
        for (const VisualItemset& patch : patches) {
            if (std::includes(patch.items.begin(), patch.items.end(), wanted.begin(),
                              wanted.end())) {
                av.bits(static_cast<Eigen::Index>(j)) = 1.0;
                break;
            }
        }
    }
    return av;
}

namespace {

// Row-stable softmax probabilities for X·Wᵀ + b.
Eigen::MatrixXd class_probs(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                            const Eigen::MatrixXd& x) {
    Eigen::MatrixXd logits = x * weights.transpose();
    logits.rowwise() += bias.transpose();
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - m).exp();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

void check_problem(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                   const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    if (weights.cols() != x.cols() || weights.rows() != bias.size())
        throw DataError("classifier parameter shapes do not match the activations");
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw DataError("one label per activation vector required");
    for (int y : labels)
        if (y < 0 || y >= weights.rows())
            throw DataError("label " + std::to_string(y) + " outside [0," +
                            std::to_string(weights.rows()) + ")");
}

}  // namespace

double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2) {
    check_problem(weights, bias, x, labels);
    Eigen::MatrixXd logits = x * weights.transpose();
    logits.rowwise() += bias.transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(x.rows()) + 0.5 * l2 * weights.squaredNorm();
}

void softmax_gradients(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                       const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2,
                       Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b) {
    check_problem(weights, bias, x, labels);
    Eigen::MatrixXd delta = class_probs(weights, bias, x);  // N x E
    for (Eigen::Index i = 0; i < delta.rows(); ++i)
        delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    const double n = static_cast<double>(x.rows());
    grad_w = delta.transpose() * x / n + l2 * weights;
    grad_b = delta.colwise().sum().transpose() / n;
}

SoftmaxModel train_softmax(const std::vector<ActivationVector>& data,
                           const std::vector<int>& labels, int classes,
                           const TrainOptions& opts) {
    if (opts.lr <= 0.0) throw ConfigError("train_lr must be positive");
    if (opts.l2 < 0.0) throw ConfigError("train_l2 must be non-negative");
    if (opts.epochs < 1) throw ConfigError("train_epochs must be >= 1");
    if (classes < 2) throw ConfigError("classifier needs at least 2 classes");
    if (data.empty()) throw DataError("no activation vectors to train on");
    if (data.size() != labels.size())
        throw DataError("one label per activation vector required");

    std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2)
        throw DataError("training data covers " + std::to_string(present.size()) +
                        " event class(es); at least 2 are required");

    const Eigen::Index m = data.front().bits.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].bits.size() != m)
            throw DataError("activation vector for '" + data[i].doc_id +
                            "' has mismatched length");
        x.row(static_cast<Eigen::Index>(i)) = data[i].bits.transpose();
    }

    SoftmaxModel model;
    model.weights = Eigen::MatrixXd::Zero(classes, m);
    model.bias = Eigen::VectorXd::Zero(classes);
    Eigen::MatrixXd grad_w;
    Eigen::VectorXd grad_b;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        model.train_log.push_back(softmax_loss(model.weights, model.bias, x, labels, opts.l2));
        softmax_gradients(model.weights, model.bias, x, labels, opts.l2, grad_w, grad_b);
        model.weights -= opts.lr * grad_w;
        model.bias -= opts.lr * grad_b;
    }
    model.train_log.push_back(softmax_loss(model.weights, model.bias, x, labels, opts.l2));
    return model;
}

Prediction predict(const SoftmaxModel& model, const ActivationVector& av) {
    if (av.bits.size() != model.weights.cols())
        throw DataError("activation vector for '" + av.doc_id + "' has length " +
                        std::to_string(av.bits.size()) + ", classifier expects " +
                        std::to_string(model.weights.cols()));
    Eigen::VectorXd z = model.weights * av.bits + model.bias;
    const double m = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - m).exp();
    Prediction pred;
    pred.probs = e / e.sum();
    pred.event = 0;
    for (Eigen::Index i = 1; i < pred.probs.size(); ++i)
        if (pred.probs(i) > pred.probs(pred.event)) pred.event = static_cast<int>(i);
    return pred;
}

void save_classifier(const std::filesystem::path& path, const ClassifierFile& file) {
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(file.model.weights.size()));
    for (Eigen::Index r = 0; r < file.model.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < file.model.weights.cols(); ++c)
            weights.push_back(file.model.weights(r, c));
    std::vector<double> bias(file.model.bias.data(),
                             file.model.bias.data() + file.model.bias.size());

    json j{{"classes", file.model.weights.rows()},
           {"bank", file.bank.patterns},
           {"weights", weights},
           {"bias", bias},
           {"train_log", file.model.train_log},
           {"options",
            {{"lr", file.options.lr},
             {"l2", file.options.l2},
             {"epochs", file.options.epochs},
             {"seed", file.options.seed}}}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write classifier '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing classifier '" + path.string() + "'");
}

ClassifierFile load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open classifier '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("classifier '" + path.string() + "': " + e.what());
    }

    ClassifierFile file;
    try {
        const Eigen::Index classes = j.at("classes").get<Eigen::Index>();
        file.bank.patterns = j.at("bank").get<std::vector<std::vector<int>>>();
        const auto weights = j.at("weights").get<std::vector<double>>();
        const auto bias = j.at("bias").get<std::vector<double>>();
        const Eigen::Index m = static_cast<Eigen::Index>(file.bank.patterns.size());
        if (classes < 2 || static_cast<Eigen::Index>(weights.size()) != classes * m ||
            static_cast<Eigen::Index>(bias.size()) != classes)
            throw DataError("classifier '" + path.string() + "': inconsistent shapes");
        file.model.weights.resize(classes, m);
        for (Eigen::Index r = 0; r < classes; ++r)
            for (Eigen::Index c = 0; c < m; ++c)
                file.model.weights(r, c) = weights[static_cast<std::size_t>(r * m + c)];
        file.model.bias =
            Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
        file.model.train_log = j.at("train_log").get<std::vector<double>>();
        const json& opts = j.at("options");
        file.options.lr = opts.at("lr").get<double>();
        file.options.l2 = opts.at("l2").get<double>();
        file.options.epochs = opts.at("epochs").get<int>();
        file.options.seed = opts.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DataError("classifier '" + path.string() + "': " + e.what());
    }
    if (!file.model.weights.allFinite() || !file.model.bias.allFinite())
        throw DataError("classifier '" + path.string() + "': non-finite parameters");
    return file;
}

}  // namespace mmpm
