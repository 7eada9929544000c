#include <gtest/gtest.h>

#include <array>
#include <map>
#include <vector>

#include "quantground/vision_analysis.hpp"

using namespace qg;

namespace {

ConceptInventory synthesized(std::uint64_t seed, std::size_t count = 48, std::size_t dim = 32) {
    SynthesisConfig cfg;
    cfg.concept_count = count;
    cfg.dim = dim;
    cfg.word_noise = 0.1;
    cfg.seed = seed;
    return synthesize_inventory(cfg);
}

} // namespace

TEST(ScalarFeature, MatchesVectorPrimitives) {
    const Vec t = {1.0, 0.0};
    const Vec s = {3.0, 4.0};
    EXPECT_DOUBLE_EQ(scalar_feature(Measure::dot, t, s), 3.0);
    EXPECT_DOUBLE_EQ(scalar_feature(Measure::cosine_distance, t, s), 1.0 - 3.0 / 5.0);
    EXPECT_EQ(measure_from_string("dot"), Measure::dot);
    EXPECT_EQ(measure_from_string("cosine_distance"), Measure::cosine_distance);
    EXPECT_THROW(measure_from_string("euclidean"), std::invalid_argument);
}

TEST(ClassStats, QuartilesInterpolateLinearly) {
    const ClassStats s = class_stats({4.0, 1.0, 3.0, 2.0});
    EXPECT_DOUBLE_EQ(s.min, 1.0);
    EXPECT_DOUBLE_EQ(s.q1, 1.75);
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.q3, 3.25);
    EXPECT_DOUBLE_EQ(s.max, 4.0);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_EQ(s.count, 4u);
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
}

TEST(ClassStats, SingleValueCollapses) {
    const ClassStats s = class_stats({5.0});
    EXPECT_DOUBLE_EQ(s.min, 5.0);
    EXPECT_DOUBLE_EQ(s.q1, 5.0);
    EXPECT_DOUBLE_EQ(s.median, 5.0);
    EXPECT_DOUBLE_EQ(s.q3, 5.0);
    EXPECT_DOUBLE_EQ(s.max, 5.0);
}

TEST(ClassStats, RejectsEmpty) {
    EXPECT_THROW(class_stats({}), std::invalid_argument);
    EXPECT_THROW(quantile_sorted({}, 0.5), std::invalid_argument);
    EXPECT_THROW(quantile_sorted({1.0}, 1.5), std::invalid_argument);
}

TEST(Profile, MedianChainsAcrossSeeds) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ConceptInventory inv = synthesized(seed);
        const Dataset q = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                        default_combo_table(), seed);
        const Dataset c = build_dataset(inv, Kind::cardinal, CompositionMode::summed,
                                        default_combo_table(), seed);
        for (const Split split : {Split::train, Split::test}) {
            const SimilarityProfile pq =
                similarity_profile(q, inv, Measure::cosine_distance, split);
            EXPECT_GT(pq.stats(Expression::no).median, pq.stats(Expression::few).median);
            EXPECT_GT(pq.stats(Expression::few).median, pq.stats(Expression::most).median);
            EXPECT_GT(pq.stats(Expression::most).median, pq.stats(Expression::all).median);
            EXPECT_NEAR(pq.stats(Expression::all).median, 0.0, 1e-9);

            const SimilarityProfile pc = similarity_profile(c, inv, Measure::dot, split);
            EXPECT_LT(pc.stats(Expression::one).median, pc.stats(Expression::two).median);
            EXPECT_LT(pc.stats(Expression::two).median, pc.stats(Expression::three).median);
            EXPECT_LT(pc.stats(Expression::three).median, pc.stats(Expression::four).median);
        }
    }
}

TEST(Profile, CountsMatchSplitSizes) {
    const ConceptInventory inv = synthesized(6);
    const Dataset q = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 6);
    const SimilarityProfile train = similarity_profile(q, inv, Measure::dot, Split::train);
    const SimilarityProfile test = similarity_profile(q, inv, Measure::dot, Split::test);
    for (const Expression e : expressions_of(Kind::quantifier)) {
        EXPECT_EQ(train.stats(e).count, inv.size() * 4);
        EXPECT_EQ(test.stats(e).count, inv.size() * 2);
        EXPECT_EQ(train.stats(e).values.size(), train.stats(e).count);
        EXPECT_LE(train.stats(e).q1, train.stats(e).median);
        EXPECT_LE(train.stats(e).median, train.stats(e).q3);
    }
    EXPECT_THROW(train.stats(Expression::one), std::invalid_argument);
}

TEST(Profile, SingleScenarioSplitCollapses) {
    const ConceptInventory inv = synthesized(7, 16, 8);
    Dataset ds;
    ds.kind = Kind::quantifier;
    ds.mode = CompositionMode::summed;
    ds.dim = inv.dim();
    ds.combos = default_combo_table();
    const Combination combos[4] = {{0, 5}, {1, 7}, {4, 6}, {5, 5}};
    const Expression exprs[4] = {Expression::no, Expression::few, Expression::most,
                                 Expression::all};
    for (int i = 0; i < 4; ++i)
        ds.scenarios.push_back(build_scenario(inv, 0, exprs[i], Split::test, combos[i],
                                              CompositionMode::summed, 50 + i));
    const SimilarityProfile p = similarity_profile(ds, inv, Measure::cosine_distance, Split::test);
    for (const Expression e : exprs) {
        const ClassStats& s = p.stats(e);
        EXPECT_EQ(s.count, 1u);
        EXPECT_DOUBLE_EQ(s.min, s.median);
        EXPECT_DOUBLE_EQ(s.q1, s.median);
        EXPECT_DOUBLE_EQ(s.q3, s.median);
        EXPECT_DOUBLE_EQ(s.max, s.median);
    }
    EXPECT_THROW(similarity_profile(ds, inv, Measure::dot, Split::train), std::invalid_argument);
}

TEST(StratifiedFolds, BalancedDeterministicSeeded) {
    std::vector<int> labels;
    for (int cls = 0; cls < 4; ++cls)
        for (int i = 0; i < 11; ++i) labels.push_back(cls);
    const auto a = detail::stratified_folds(labels, 5, 3);
    const auto b = detail::stratified_folds(labels, 5, 3);
    EXPECT_EQ(a, b);
    const auto c = detail::stratified_folds(labels, 5, 4);
    EXPECT_NE(a, c);

    std::map<std::pair<int, std::size_t>, std::size_t> per_class_fold;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ASSERT_LT(a[i], 5u);
        per_class_fold[{labels[i], a[i]}] += 1;
    }
    for (int cls = 0; cls < 4; ++cls) {
        std::size_t lo = labels.size(), hi = 0;
        for (std::size_t f = 0; f < 5; ++f) {
            const std::size_t n = per_class_fold[{cls, f}];
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        EXPECT_LE(hi - lo, 1u) << "class " << cls;
    }
}

TEST(StratifiedFolds, RejectsSparseClass) {
    const std::vector<int> labels = {0, 0, 0, 1};
    EXPECT_THROW(detail::stratified_folds(labels, 3, 1), std::invalid_argument);
}

TEST(SvmCompare, DirectionAndDeterminism) {
    const ConceptInventory inv = synthesized(8, 32, 24);
    const Dataset q = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 8);
    const Dataset c = build_dataset(inv, Kind::cardinal, CompositionMode::summed,
                                    default_combo_table(), 8);
    const SvmComparison a = svm_compare(q, c, inv, 3, 17);
    const SvmComparison b = svm_compare(q, c, inv, 3, 17);

    const std::size_t Q = kind_index(Kind::quantifier), C = kind_index(Kind::cardinal);
    const std::size_t COS = measure_index(Measure::cosine_distance),
                      DOT = measure_index(Measure::dot);
    EXPECT_GT(a.cv_accuracy[Q][COS], a.cv_accuracy[Q][DOT]);
    EXPECT_GT(a.cv_accuracy[C][DOT], a.cv_accuracy[C][COS]);

    for (std::size_t ki = 0; ki < 2; ++ki)
        for (std::size_t mi = 0; mi < 2; ++mi) {
            EXPECT_EQ(a.fold_accuracies[ki][mi], b.fold_accuracies[ki][mi]);
            EXPECT_EQ(a.cv_accuracy[ki][mi], b.cv_accuracy[ki][mi]);
            EXPECT_EQ(a.test_accuracy[ki][mi], b.test_accuracy[ki][mi]);
            ASSERT_EQ(a.fold_accuracies[ki][mi].size(), 3u);
            double mean = 0.0;
            for (double f : a.fold_accuracies[ki][mi]) {
                EXPECT_GE(f, 0.0);
                EXPECT_LE(f, 1.0);
                mean += f;
            }
            EXPECT_NEAR(a.cv_accuracy[ki][mi], mean / 3.0, 1e-12);
        }
}

TEST(SvmCompare, RejectsBadArguments) {
    const ConceptInventory inv = synthesized(9, 32, 24);
    const Dataset q = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 9);
    const Dataset c = build_dataset(inv, Kind::cardinal, CompositionMode::summed,
                                    default_combo_table(), 9);
    EXPECT_THROW(svm_compare(c, q, inv, 5, 1), std::invalid_argument);
    EXPECT_THROW(svm_compare(q, c, inv, 1, 1), std::invalid_argument);
}
