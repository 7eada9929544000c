#pragma once

// Support vector machine over scalar features with an RBF kernel,
// k(x, y) = exp(-gamma (x - y)^2). Multi-class handling is one-vs-rest;
// each binary problem is solved exactly by sequential minimal
// optimization with maximal-violating-pair working-set selection, which
// is deterministic: ties always resolve to the smallest index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qg {

struct SvmConfig {
    double gamma = 0.0;  // <= 0 selects 1 / Var(features)
    double c = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 1000000;
};

namespace detail {

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimizes 1/2 a'Qa - e'a subject to 0 <= a_i <= C and y'a = 0, where
/// Q_ij = y_i y_j K_ij. Stops once the maximal KKT violation m - M drops
/// to tol. The gradient array makes every iteration O(n).
inline SmoResult smo_solve(const std::vector<double>& kernel, const std::vector<int>& y, double c,
                           double tol, std::size_t max_iterations) {
    const std::size_t n = y.size();
    const double inf = std::numeric_limits<double>::infinity();
    SmoResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);

    auto in_up = [&](std::size_t i) {
        return (y[i] > 0 && res.alpha[i] < c) || (y[i] < 0 && res.alpha[i] > 0.0);
    };
    auto in_low = [&](std::size_t i) {
        return (y[i] < 0 && res.alpha[i] < c) || (y[i] > 0 && res.alpha[i] > 0.0);
    };

    double m = 0.0, mm = 0.0;
    std::size_t iter = 0;
    for (;; ++iter) {
        m = -inf;
        mm = inf;
        std::size_t i = n, j = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = -y[k] * grad[k];
            if (in_up(k) && v > m) { m = v; i = k; }
            if (in_low(k) && v < mm) { mm = v; j = k; }
        }
        if (i == n || j == n || m - mm <= tol) {
            res.converged = true;
            break;
        }
        if (iter >= max_iterations) break;

        // Step length along the feasible pair direction, capped by the box.
        double quad = kernel[i * n + i] + kernel[j * n + j] - 2.0 * kernel[i * n + j];
        if (quad <= 0.0) quad = 1e-12;
        double t = (m - mm) / quad;
        t = std::min(t, y[i] > 0 ? c - res.alpha[i] : res.alpha[i]);
        t = std::min(t, y[j] > 0 ? res.alpha[j] : c - res.alpha[j]);

        // delta_alpha_i = y_i t, delta_alpha_j = -y_j t; with Q_kl = y_k y_l K_kl
        // the label factors on i and j cancel against the deltas.
        res.alpha[i] += y[i] * t;
        res.alpha[j] -= y[j] * t;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += y[k] * t * (kernel[k * n + i] - kernel[k * n + j]);
    }

    res.iterations = iter;
    res.kkt_residual = std::max(0.0, m - mm);
    if (m == -inf || mm == inf) res.kkt_residual = 0.0;
    res.bias = (m == -inf || mm == inf) ? 0.0 : (m + mm) / 2.0;
    return res;
}

} // namespace detail

class RbfSvm {
  public:
    /// Trains one binary machine per distinct label on a shared kernel
    /// matrix. Requires at least two classes and finite features.
    static RbfSvm train(const std::vector<double>& features, const std::vector<int>& labels,
                        const SvmConfig& config = {}) {
        if (features.size() != labels.size())
            throw std::invalid_argument("RbfSvm: features and labels differ in length");
        if (features.size() < 2) throw std::invalid_argument("RbfSvm: need at least 2 samples");
        if (!(config.c > 0.0)) throw std::invalid_argument("RbfSvm: c must be positive");
        if (!(config.tolerance > 0.0)) throw std::invalid_argument("RbfSvm: tolerance must be positive");
        for (double x : features)
            if (!std::isfinite(x)) throw std::invalid_argument("RbfSvm: non-finite feature value");

        RbfSvm model;
        model.features_ = features;
        for (int l : labels)
            if (std::find(model.classes_.begin(), model.classes_.end(), l) == model.classes_.end())
                model.classes_.push_back(l);
        std::sort(model.classes_.begin(), model.classes_.end());
        if (model.classes_.size() < 2)
            throw std::invalid_argument("RbfSvm: need at least 2 distinct classes");

        if (config.gamma > 0.0) {
            model.gamma_ = config.gamma;
        } else {
            double mean = 0.0;
            for (double x : features) mean += x;
            mean /= static_cast<double>(features.size());
            double var = 0.0;
            for (double x : features) var += (x - mean) * (x - mean);
            var /= static_cast<double>(features.size());
            if (var <= 0.0)
                throw std::invalid_argument("RbfSvm: features have zero variance, cannot pick gamma");
            model.gamma_ = 1.0 / var;
        }

        const std::size_t n = features.size();
        std::vector<double> kernel(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            kernel[i * n + i] = 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = features[i] - features[j];
                const double k = std::exp(-model.gamma_ * d * d);
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }

        std::vector<int> y(n);
        for (int cls : model.classes_) {
            for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == cls ? 1 : -1;
            const detail::SmoResult r =
                detail::smo_solve(kernel, y, config.c, config.tolerance, config.max_iterations);
            if (!r.converged)
                throw std::runtime_error("RbfSvm: optimizer for class " + std::to_string(cls) +
                                         " did not converge within " +
                                         std::to_string(config.max_iterations) + " iterations");
            Machine mach;
            mach.alpha_y.resize(n);
            for (std::size_t i = 0; i < n; ++i) mach.alpha_y[i] = r.alpha[i] * y[i];
            mach.bias = r.bias;
            mach.kkt_residual = r.kkt_residual;
            mach.iterations = r.iterations;
            model.machines_.push_back(std::move(mach));
        }
        return model;
    }

    /// Decision value of every one-vs-rest machine, aligned with classes().
    std::vector<double> decision_values(double x) const {
        if (!std::isfinite(x)) throw std::invalid_argument("RbfSvm: non-finite feature value");
        std::vector<double> out;
        out.reserve(machines_.size());
        for (const Machine& m : machines_) {
            double s = m.bias;
            for (std::size_t i = 0; i < features_.size(); ++i) {
                if (m.alpha_y[i] == 0.0) continue;
                const double d = features_[i] - x;
                s += m.alpha_y[i] * std::exp(-gamma_ * d * d);
            }
            out.push_back(s);
        }
        return out;
    }

    /// Class with the largest decision value; exact ties go to the
    /// earliest class in sorted label order.
    int predict(double x) const {
        const std::vector<double> dv = decision_values(x);
        std::size_t best = 0;
        for (std::size_t i = 1; i < dv.size(); ++i)
            if (dv[i] > dv[best]) best = i;
        return classes_[best];
    }

    struct Machine {
        std::vector<double> alpha_y;  // alpha_i * y_i, in [-c, c]
        double bias = 0.0;
        double kkt_residual = 0.0;
        std::size_t iterations = 0;
    };

    const std::vector<int>& classes() const { return classes_; }
    const std::vector<Machine>& machines() const { return machines_; }
    double gamma() const { return gamma_; }

    /// Largest remaining KKT violation across the binary machines.
    double kkt_residual() const {
        double r = 0.0;
        for (const Machine& m : machines_) r = std::max(r, m.kkt_residual);
        return r;
    }

  private:
    RbfSvm() = default;

    std::vector<double> features_;
    std::vector<int> classes_;
    std::vector<Machine> machines_;
    double gamma_ = 1.0;
};

inline double svm_accuracy(const RbfSvm& model, const std::vector<double>& features,
                           const std::vector<int>& labels) {
    if (features.size() != labels.size() || features.empty())
        throw std::invalid_argument("svm_accuracy: bad evaluation set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (model.predict(features[i]) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(features.size());
}

} // namespace qg
