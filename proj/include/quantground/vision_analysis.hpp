#pragma once

// Only-vision analysis: how well a scalar similarity between the target
// concept vector and the composed scene vector separates the expression
// classes. Two measures are profiled and then compared head to head with
// cross-validated SVMs on identical fold partitions.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/rng.hpp"
#include "quantground/scenario.hpp"
#include "quantground/svm.hpp"
#include "quantground/vec.hpp"

namespace qg {

enum class Measure { cosine_distance, dot };

inline const char* to_string(Measure m) {
    return m == Measure::cosine_distance ? "cosine_distance" : "dot";
}

inline Measure measure_from_string(const std::string& s) {
    if (s == "cosine_distance") return Measure::cosine_distance;
    if (s == "dot") return Measure::dot;
    throw std::invalid_argument("unknown measure '" + s + "'");
}

inline std::size_t measure_index(Measure m) { return m == Measure::cosine_distance ? 0 : 1; }
inline std::size_t kind_index(Kind k) { return k == Kind::quantifier ? 0 : 1; }

/// Similarity between a scene and its target under one measure.
inline double scalar_feature(Measure m, const Vec& target_visual, const Vec& scene) {
    return m == Measure::cosine_distance ? cosine_distance(target_visual, scene)
                                         : dot(target_visual, scene);
}

/// Five-number summary plus mean of one class's feature values.
/// Quartiles interpolate linearly between order statistics.
struct ClassStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
    std::vector<double> values;  // sorted
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile_sorted: q outside [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline ClassStats class_stats(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("class_stats: empty sample");
    std::sort(values.begin(), values.end());
    ClassStats s;
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.values = std::move(values);
    return s;
}

struct SimilarityProfile {
    Kind kind = Kind::quantifier;
    Measure measure = Measure::cosine_distance;
    Split split = Split::train;
    std::vector<std::pair<Expression, ClassStats>> per_class;  // canonical expression order

    const ClassStats& stats(Expression e) const {
        for (const auto& [expr, st] : per_class)
            if (expr == e) return st;
        throw std::invalid_argument(std::string("SimilarityProfile: no class '") + to_string(e) + "'");
    }
};

/// Feature distribution of every expression class over one dataset split.
inline SimilarityProfile similarity_profile(const Dataset& ds, const ConceptInventory& inv,
                                            Measure measure, Split split) {
    SimilarityProfile prof;
    prof.kind = ds.kind;
    prof.measure = measure;
    prof.split = split;

    std::array<std::vector<double>, 4> buckets;
    for (const Scenario& sc : ds.scenarios) {
        if (sc.split != split) continue;
        const auto idx = inv.index_of(sc.target);
        if (!idx) throw std::invalid_argument("similarity_profile: unknown target '" + sc.target + "'");
        buckets[expr_slot(sc.expression)].push_back(
            scalar_feature(measure, inv.at(*idx).visual, sc.vector));
    }
    for (const Expression e : expressions_of(ds.kind)) {
        if (buckets[expr_slot(e)].empty())
            throw std::invalid_argument(std::string("similarity_profile: no scenarios for '") +
                                        to_string(e) + "'");
        prof.per_class.emplace_back(e, class_stats(std::move(buckets[expr_slot(e)])));
    }
    return prof;
}

/// Paired SVM comparison. Indices are [kind][measure] with kinds ordered
/// quantifier, cardinal and measures ordered cosine_distance, dot.
struct SvmComparison {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::array<std::array<std::vector<double>, 2>, 2> fold_accuracies;
    std::array<std::array<double, 2>, 2> cv_accuracy{};
    std::array<std::array<double, 2>, 2> test_accuracy{};
};

namespace detail {

/// Stratified fold labels for the training rows, seeded. Each class is
/// shuffled independently and dealt round-robin, so fold sizes per class
/// differ by at most one.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds,
                                                 std::uint64_t seed) {
    std::vector<std::size_t> fold_of(labels.size(), 0);
    std::vector<int> classes;
    for (int l : labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());
    Rng rng(seed);
    for (int cls : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < folds)
            throw std::invalid_argument("stratified_folds: class " + std::to_string(cls) + " has " +
                                        std::to_string(members.size()) + " members, fewer than " +
                                        std::to_string(folds) + " folds");
        const std::vector<std::size_t> order = rng.sample_indices(members.size(), members.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            fold_of[members[order[pos]]] = pos % folds;
    }
    return fold_of;
}

} // namespace detail

/// Cross-validated and held-out accuracy of RBF SVMs on each scalar
/// measure, for both dataset kinds. The fold partition is drawn once per
// kind and reused for both measures, making the comparison paired.
inline SvmComparison svm_compare(const Dataset& quantifier_ds, const Dataset& cardinal_ds,
                                 const ConceptInventory& inv, std::size_t folds, std::uint64_t seed,
                                 const SvmConfig& config = {}) {
    if (quantifier_ds.kind != Kind::quantifier || cardinal_ds.kind != Kind::cardinal)
        throw std::invalid_argument("svm_compare: datasets must be (quantifier, cardinal)");
    if (folds < 2) throw std::invalid_argument("svm_compare: need at least 2 folds");

    SvmComparison cmp;
    cmp.folds = folds;
    cmp.seed = seed;

    const Dataset* sets[2] = {&quantifier_ds, &cardinal_ds};
    for (std::size_t ki = 0; ki < 2; ++ki) {
        const Dataset& ds = *sets[ki];

        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < ds.scenarios.size(); ++i)
            (ds.scenarios[i].split == Split::train ? train_rows : test_rows).push_back(i);

        auto label_of = [&](std::size_t row) {
            return static_cast<int>(expr_slot(ds.scenarios[row].expression));
        };
        auto feature_of = [&](Measure m, std::size_t row) {
            const Scenario& sc = ds.scenarios[row];
            const auto idx = inv.index_of(sc.target);
            if (!idx) throw std::invalid_argument("svm_compare: unknown target '" + sc.target + "'");
            return scalar_feature(m, inv.at(*idx).visual, sc.vector);
        };

        std::vector<int> train_labels;
        for (std::size_t row : train_rows) train_labels.push_back(label_of(row));
        const std::vector<std::size_t> fold_of =
            detail::stratified_folds(train_labels, folds, derive_seed(seed, ki + 1));

        for (const Measure m : {Measure::cosine_distance, Measure::dot}) {
            const std::size_t mi = measure_index(m);
            std::vector<double> train_x;
            for (std::size_t row : train_rows) train_x.push_back(feature_of(m, row));

            double cv_sum = 0.0;
            for (std::size_t f = 0; f < folds; ++f) {
                std::vector<double> fit_x, val_x;
                std::vector<int> fit_y, val_y;
                for (std::size_t p = 0; p < train_rows.size(); ++p) {
                    if (fold_of[p] == f) {
                        val_x.push_back(train_x[p]);
                        val_y.push_back(train_labels[p]);
                    } else {
                        fit_x.push_back(train_x[p]);
                        fit_y.push_back(train_labels[p]);
                    }
                }
                const RbfSvm model = RbfSvm::train(fit_x, fit_y, config);
                const double acc = svm_accuracy(model, val_x, val_y);
                cmp.fold_accuracies[ki][mi].push_back(acc);
                cv_sum += acc;
            }
            cmp.cv_accuracy[ki][mi] = cv_sum / static_cast<double>(folds);

            std::vector<double> test_x;
            std::vector<int> test_y;
            for (std::size_t row : test_rows) {
                test_x.push_back(feature_of(m, row));
                test_y.push_back(label_of(row));
            }
            const RbfSvm full = RbfSvm::train(train_x, train_labels, config);
            cmp.test_accuracy[ki][mi] = svm_accuracy(full, test_x, test_y);
        }
    }
    return cmp;
}

} // namespace qg
