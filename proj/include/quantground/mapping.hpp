#pragma once

// Cross-modal mapping: per-expression functions from a concept's word
// vector to the composed scene vector. Three variants share one model
// shape (affine map plus activation):
//   lin     identity activation, zero bias, closed-form least squares
//   nn-cos  ReLU layer trained to maximize cosine with the target scene
//   nn-dot  ReLU layer trained to drive the raw dot product to 1
// The nn variants train by full-batch gradient descent.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/io.hpp"
#include "quantground/rng.hpp"
#include "quantground/scenario.hpp"
#include "quantground/vec.hpp"

namespace qg {

enum class Variant { lin, nn_cos, nn_dot };
enum class Activation { identity, relu };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::lin: return "lin";
        case Variant::nn_cos: return "nn-cos";
        default: return "nn-dot";
    }
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "lin") return Variant::lin;
    if (s == "nn-cos") return Variant::nn_cos;
    if (s == "nn-dot") return Variant::nn_dot;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

inline const char* to_string(Activation a) { return a == Activation::identity ? "identity" : "relu"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 500;
    std::uint64_t seed = 0;
    double init_scale = 0.1;
    Activation nn_activation = Activation::relu;  // ablation switch, nn variants only

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (!(init_scale >= 0.0)) throw std::invalid_argument("TrainConfig: init_scale must be >= 0");
    }
};

struct TrainingMeta {
    std::size_t epochs_run = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
};

struct TrainingPair {
    Vec word;
    Vec scene;
    std::string concept_name;
    Combination combo;
};

struct MappingModel {
    Variant variant = Variant::lin;
    Expression expression = Expression::no;
    Activation activation = Activation::identity;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // row-major, out_dim x in_dim
    Vec bias;                     // out_dim
    TrainingMeta meta;

    double weight(std::size_t row, std::size_t col) const { return weights[row * in_dim + col]; }
};

/// All (word, scene) pairs of one expression in one split, dataset order.
inline std::vector<TrainingPair> collect_pairs(const Dataset& ds, const ConceptInventory& inv,
                                               Expression expression, Split split) {
    if (kind_of(expression) != ds.kind)
        throw std::invalid_argument(std::string("collect_pairs: expression '") + to_string(expression) +
                                    "' does not belong to this dataset kind");
    std::vector<TrainingPair> pairs;
    for (const Scenario& sc : ds.scenarios) {
        if (sc.expression != expression || sc.split != split) continue;
        const auto idx = inv.index_of(sc.target);
        if (!idx) throw std::invalid_argument("collect_pairs: unknown target '" + sc.target + "'");
        pairs.push_back(TrainingPair{inv.at(*idx).word, sc.vector, sc.target, sc.combo});
    }
    if (pairs.empty())
        throw std::invalid_argument(std::string("collect_pairs: no scenarios for '") +
                                    to_string(expression) + "'");
    return pairs;
}

inline Vec predict(const MappingModel& model, const Vec& word) {
    if (word.size() != model.in_dim)
        throw std::invalid_argument("predict: word vector has " + std::to_string(word.size()) +
                                    " values, model expects " + std::to_string(model.in_dim));
    Vec out(model.out_dim, 0.0);
    for (std::size_t r = 0; r < model.out_dim; ++r) {
        double s = model.bias[r];
        const double* wrow = model.weights.data() + r * model.in_dim;
        for (std::size_t c = 0; c < model.in_dim; ++c) s += wrow[c] * word[c];
        out[r] = model.activation == Activation::relu ? std::max(0.0, s) : s;
    }
    return out;
}

struct LossGrad {
    double loss = 0.0;
    std::vector<double> weight_grad;  // row-major, out_dim x in_dim
    Vec bias_grad;
};

namespace detail {

struct EpochResult {
    double loss = 0.0;
    Eigen::MatrixXd weight_grad;
    Eigen::VectorXd bias_grad;
};

/// One full-batch forward/backward pass. X is n x in, Y is n x out, W is
/// out x in. Loss and gradients are means over the batch. A zero-norm
/// prediction under the cosine loss contributes loss 1 with zero
/// gradient, so such rows cannot produce NaNs.
inline EpochResult forward_backward(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                                    Activation act, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& y, Variant variant) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd z = x * w.transpose();
    z.rowwise() += b.transpose();
    Eigen::MatrixXd a = act == Activation::relu ? z.cwiseMax(0.0).eval() : z;

    double loss = 0.0;
    Eigen::MatrixXd g(n, y.cols());  // dLoss_i / dPrediction_i per row
    if (variant == Variant::lin) {
        g = a - y;
        loss = 0.5 * g.squaredNorm();
    } else if (variant == Variant::nn_dot) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double s = a.row(r).dot(y.row(r));
            loss += (s - 1.0) * (s - 1.0);
            g.row(r) = 2.0 * (s - 1.0) * y.row(r);
        }
    } else {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double na = a.row(r).norm();
            const double ny = y.row(r).norm();
            if (na == 0.0 || ny == 0.0) {
                loss += 1.0;
                g.row(r).setZero();
                continue;
            }
            const double cos = a.row(r).dot(y.row(r)) / (na * ny);
            loss += 1.0 - cos;
            g.row(r) = (cos / (na * na)) * a.row(r) - y.row(r) / (na * ny);
        }
    }
    loss /= static_cast<double>(n);

    if (act == Activation::relu) g.array() *= (z.array() > 0.0).cast<double>();
    EpochResult res;
    res.loss = loss;
    res.weight_grad = g.transpose() * x / static_cast<double>(n);
    res.bias_grad = (g.colwise().sum() / static_cast<double>(n)).transpose();
    return res;
}

inline void pack_pairs(const std::vector<TrainingPair>& pairs, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    if (pairs.empty()) throw std::invalid_argument("train: empty batch");
    const std::size_t in = pairs[0].word.size();
    const std::size_t out = pairs[0].scene.size();
    x.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(in));
    y.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(out));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].word.size() != in || pairs[i].scene.size() != out)
            throw std::invalid_argument("train: inconsistent pair dimensions at index " +
                                        std::to_string(i));
        if (!all_finite(pairs[i].word) || !all_finite(pairs[i].scene))
            throw std::invalid_argument("train: non-finite values at index " + std::to_string(i));
        for (std::size_t c = 0; c < in; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = pairs[i].word[c];
        for (std::size_t c = 0; c < out; ++c) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = pairs[i].scene[c];
    }
}

inline Eigen::MatrixXd to_eigen_weights(const MappingModel& m) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(m.out_dim), static_cast<Eigen::Index>(m.in_dim));
    for (std::size_t r = 0; r < m.out_dim; ++r)
        for (std::size_t c = 0; c < m.in_dim; ++c)
            w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m.weight(r, c);
    return w;
}

} // namespace detail

/// Mean loss of a model on a batch under one variant's objective, with
/// gradients for the weights and bias. The nn variants train on exactly
/// these gradients.
inline LossGrad loss_and_grad(const MappingModel& model, const std::vector<TrainingPair>& pairs,
                              Variant variant) {
    Eigen::MatrixXd x, y;
    detail::pack_pairs(pairs, x, y);
    if (static_cast<std::size_t>(x.cols()) != model.in_dim ||
        static_cast<std::size_t>(y.cols()) != model.out_dim)
        throw std::invalid_argument("loss_and_grad: batch dimensions do not match the model");
    Eigen::VectorXd b(static_cast<Eigen::Index>(model.out_dim));
    for (std::size_t r = 0; r < model.out_dim; ++r) b(static_cast<Eigen::Index>(r)) = model.bias[r];
    const detail::EpochResult res =
        detail::forward_backward(detail::to_eigen_weights(model), b, model.activation, x, y, variant);

    LossGrad lg;
    lg.loss = res.loss;
    lg.weight_grad.resize(model.out_dim * model.in_dim);
    for (std::size_t r = 0; r < model.out_dim; ++r)
        for (std::size_t c = 0; c < model.in_dim; ++c)
            lg.weight_grad[r * model.in_dim + c] =
                res.weight_grad(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    lg.bias_grad.resize(model.out_dim);
    for (std::size_t r = 0; r < model.out_dim; ++r) lg.bias_grad[r] = res.bias_grad(static_cast<Eigen::Index>(r));
    return lg;
}

/// Fits one mapping model. lin solves the least-squares problem in closed
/// form (minimum-norm solution, zero bias, no activation); the nn
/// variants run full-batch gradient descent from a small Gaussian
/// initialization drawn from config.seed.
inline MappingModel train(Variant variant, Expression expression,
                          const std::vector<TrainingPair>& pairs, const TrainConfig& config = {}) {
    config.validate();
    Eigen::MatrixXd x, y;
    detail::pack_pairs(pairs, x, y);

    MappingModel model;
    model.variant = variant;
    model.expression = expression;
    model.in_dim = static_cast<std::size_t>(x.cols());
    model.out_dim = static_cast<std::size_t>(y.cols());
    model.meta.seed = config.seed;

    if (variant == Variant::lin) {
        model.activation = Activation::identity;
        const Eigen::MatrixXd wt =
            x.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);  // in x out
        model.weights.resize(model.out_dim * model.in_dim);
        for (std::size_t r = 0; r < model.out_dim; ++r)
            for (std::size_t c = 0; c < model.in_dim; ++c)
                model.weights[r * model.in_dim + c] =
                    wt(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
        model.bias.assign(model.out_dim, 0.0);
        model.meta.epochs_run = 0;
        model.meta.final_loss =
            0.5 * (x * wt - y).squaredNorm() / static_cast<double>(x.rows());
        return model;
    }

    model.activation = config.nn_activation;
    Rng rng(config.seed);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(model.out_dim), static_cast<Eigen::Index>(model.in_dim));
    Eigen::VectorXd b(static_cast<Eigen::Index>(model.out_dim));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = config.init_scale * rng.gaussian();
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = config.init_scale * rng.gaussian();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const detail::EpochResult res =
            detail::forward_backward(w, b, model.activation, x, y, variant);
        if (!std::isfinite(res.loss))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                     "; reduce learning_rate");
        w -= config.learning_rate * res.weight_grad;
        b -= config.learning_rate * res.bias_grad;
    }

    const detail::EpochResult last = detail::forward_backward(w, b, model.activation, x, y, variant);
    if (!std::isfinite(last.loss))
        throw std::runtime_error("train: loss diverged after the final epoch; reduce learning_rate");
    model.weights.resize(model.out_dim * model.in_dim);
    for (std::size_t r = 0; r < model.out_dim; ++r)
        for (std::size_t c = 0; c < model.in_dim; ++c)
            model.weights[r * model.in_dim + c] =
                w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    model.bias.resize(model.out_dim);
    for (std::size_t r = 0; r < model.out_dim; ++r) model.bias[r] = b(static_cast<Eigen::Index>(r));
    model.meta.epochs_run = config.epochs;
    model.meta.final_loss = last.loss;
    return model;
}

/// Model file: '#mapping-model' marker, optional '#' comment lines, then
/// 'key value' metadata lines, one 'row <i> <values>' line per weight row
/// and finally 'bias <values>'. Values round-trip bit-exactly.
inline void save_model(const MappingModel& model, const std::filesystem::path& path,
                       const std::vector<std::string>& meta = {}) {
    std::string out;
    out += "#mapping-model\n";
    for (const std::string& m : meta) out += "#" + m + "\n";
    out += std::string("variant ") + to_string(model.variant) + "\n";
    out += std::string("expression ") + to_string(model.expression) + "\n";
    out += std::string("activation ") + to_string(model.activation) + "\n";
    out += "in_dim " + std::to_string(model.in_dim) + "\n";
    out += "out_dim " + std::to_string(model.out_dim) + "\n";
    out += "epochs_run " + std::to_string(model.meta.epochs_run) + "\n";
    out += "final_loss " + io::fmt_double(model.meta.final_loss) + "\n";
    out += "seed " + std::to_string(model.meta.seed) + "\n";
    for (std::size_t r = 0; r < model.out_dim; ++r) {
        out += "row " + std::to_string(r) + " ";
        for (std::size_t c = 0; c < model.in_dim; ++c) {
            if (c > 0) out += ' ';
            out += io::fmt_double(model.weight(r, c));
        }
        out += '\n';
    }
    out += "bias " + io::join_vector(model.bias) + "\n";
    io::write_file(path, out);
}

inline MappingModel load_model(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    const std::vector<std::string> lines = io::to_lines(text);
    const std::string fname = path.filename().string();
    if (lines.empty() || lines[0] != "#mapping-model")
        throw std::runtime_error(fname + ":1: missing #mapping-model marker");

    MappingModel model;
    bool saw_dims = false;
    std::size_t rows_seen = 0;
    bool saw_bias = false;

    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        const std::string where = fname + ":" + std::to_string(ln + 1);
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        try {
            if (key == "variant") model.variant = variant_from_string(rest);
            else if (key == "expression") model.expression = expression_from_string(rest);
            else if (key == "activation") model.activation = activation_from_string(rest);
            else if (key == "in_dim") model.in_dim = io::parse_u64(rest, "in_dim");
            else if (key == "out_dim") model.out_dim = io::parse_u64(rest, "out_dim");
            else if (key == "epochs_run") model.meta.epochs_run = io::parse_u64(rest, "epochs_run");
            else if (key == "final_loss") model.meta.final_loss = io::parse_double(rest, "final_loss");
            else if (key == "seed") model.meta.seed = io::parse_u64(rest, "seed");
            else if (key == "row") {
                if (!saw_dims) {
                    if (model.in_dim == 0 || model.out_dim == 0)
                        throw std::runtime_error("weight row before in_dim/out_dim");
                    model.weights.assign(model.out_dim * model.in_dim, 0.0);
                    saw_dims = true;
                }
                const auto sp2 = rest.find(' ');
                if (sp2 == std::string::npos) throw std::runtime_error("malformed weight row");
                const std::size_t r = io::parse_u64(rest.substr(0, sp2), "row index");
                if (r != rows_seen) throw std::runtime_error("weight rows out of order");
                if (r >= model.out_dim) throw std::runtime_error("row index out of range");
                const Vec row = io::parse_vector(rest.substr(sp2 + 1), "weights");
                if (row.size() != model.in_dim)
                    throw std::runtime_error("weight row has " + std::to_string(row.size()) +
                                             " values, expected " + std::to_string(model.in_dim));
                std::copy(row.begin(), row.end(), model.weights.begin() + static_cast<std::ptrdiff_t>(r * model.in_dim));
                ++rows_seen;
            } else if (key == "bias") {
                model.bias = io::parse_vector(rest, "bias");
                if (model.bias.size() != model.out_dim)
                    throw std::runtime_error("bias has " + std::to_string(model.bias.size()) +
                                             " values, expected " + std::to_string(model.out_dim));
                saw_bias = true;
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
    if (!saw_dims || rows_seen != model.out_dim)
        throw std::runtime_error(fname + ": expected " + std::to_string(model.out_dim) +
                                 " weight rows, found " + std::to_string(rows_seen));
    if (!saw_bias) throw std::runtime_error(fname + ": missing bias line");
    return model;
}

} // namespace qg
