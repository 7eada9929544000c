#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>
#include <unistd.h>

#include "quantground/scenario.hpp"

namespace fs = std::filesystem;
using namespace qg;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path p = fs::temp_directory_path() /
                 ("qg_sc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(p);
    return p;
}

// Ten concepts where every target keeps at least 8 distractor candidates:
// two nearly parallel vectors plus eight mutually orthogonal ones push the
// mean pairwise cosine just above zero, so every zero-cosine pair is
// strictly below it.
ConceptInventory crafted_ten() {
    const std::size_t d = 10;
    std::vector<Concept> cs;
    auto basis = [&](std::size_t i) {
        Vec v(d, 0.0);
        v[i] = 1.0;
        return v;
    };
    Vec c1 = basis(0);
    c1[1] = 0.1;
    c1 = normalize(c1);
    cs.push_back({"concept_000", basis(0), basis(0)});
    cs.push_back({"concept_001", c1, c1});
    for (std::size_t i = 2; i < 10; ++i)
        cs.push_back({"concept_" + std::string(i < 10 ? "00" : "0") + std::to_string(i), basis(i),
                      basis(i)});
    return ConceptInventory::from_concepts(std::move(cs));
}

ConceptInventory synthesized(std::uint64_t seed, std::size_t count = 48, std::size_t dim = 32) {
    SynthesisConfig cfg;
    cfg.concept_count = count;
    cfg.dim = dim;
    cfg.word_noise = 0.1;
    cfg.seed = seed;
    return synthesize_inventory(cfg);
}

} // namespace

TEST(ClassifyRatio, BandExamples) {
    EXPECT_EQ(classify_ratio(0, 1), Expression::no);
    EXPECT_EQ(classify_ratio(0, 4), Expression::no);
    EXPECT_EQ(classify_ratio(1, 6), Expression::few);
    EXPECT_EQ(classify_ratio(2, 5), Expression::few);
    EXPECT_EQ(classify_ratio(4, 9), Expression::few);
    EXPECT_EQ(classify_ratio(3, 5), Expression::most);
    EXPECT_EQ(classify_ratio(6, 8), Expression::most);
    EXPECT_EQ(classify_ratio(4, 4), Expression::all);
    EXPECT_EQ(classify_ratio(9, 9), Expression::all);
}

TEST(ClassifyRatio, ExactHalfRejected) {
    EXPECT_THROW(classify_ratio(1, 2), std::domain_error);
    EXPECT_THROW(classify_ratio(3, 6), std::domain_error);
    EXPECT_THROW(classify_ratio(4, 8), std::domain_error);
}

TEST(ClassifyRatio, InvalidCombinationsRejected) {
    EXPECT_THROW(classify_ratio(5, 4), std::invalid_argument);
    EXPECT_THROW(classify_ratio(0, 0), std::invalid_argument);
    EXPECT_THROW(classify_ratio(1, 10), std::invalid_argument);
}

// Enumerate every legal combination and derive the class from the ratio
// independently of the band shortcuts in the implementation.
TEST(ClassifyRatio, AgreesWithRatioArithmetic) {
    for (std::size_t den = 1; den <= 9; ++den) {
        for (std::size_t num = 0; num <= den; ++num) {
            const double r = static_cast<double>(num) / static_cast<double>(den);
            if (num * 2 == den) {
                EXPECT_THROW(classify_ratio(num, den), std::domain_error);
                continue;
            }
            Expression want;
            if (r == 0.0) want = Expression::no;
            else if (r == 1.0) want = Expression::all;
            else if (r < 0.5) want = Expression::few;
            else want = Expression::most;
            EXPECT_EQ(classify_ratio(num, den), want) << num << "/" << den;
        }
    }
}

TEST(ClassifyRatio, MonotoneInNumerator) {
    for (std::size_t den = 1; den <= 9; ++den) {
        int prev = -1;
        for (std::size_t num = 0; num <= den; ++num) {
            if (num * 2 == den) continue;
            const int cls = static_cast<int>(classify_ratio(num, den));
            EXPECT_GE(cls, prev) << num << "/" << den;
            prev = cls;
        }
    }
}

TEST(Expressions, KindAndSlotHelpers) {
    EXPECT_EQ(kind_of(Expression::few), Kind::quantifier);
    EXPECT_EQ(kind_of(Expression::three), Kind::cardinal);
    EXPECT_EQ(expr_slot(Expression::no), 0u);
    EXPECT_EQ(expr_slot(Expression::all), 3u);
    EXPECT_EQ(expr_slot(Expression::one), 0u);
    EXPECT_EQ(cardinal_value(Expression::four), 4u);
    EXPECT_THROW(cardinal_value(Expression::most), std::invalid_argument);
    const auto q = expressions_of(Kind::quantifier);
    EXPECT_EQ(q[0], Expression::no);
    EXPECT_EQ(q[3], Expression::all);
    const auto c = expressions_of(Kind::cardinal);
    EXPECT_EQ(c[0], Expression::one);
    EXPECT_EQ(c[3], Expression::four);
    EXPECT_EQ(expression_from_string("most"), Expression::most);
    EXPECT_THROW(expression_from_string("several"), std::invalid_argument);
}

TEST(ComboTable, DefaultMatchesSceneGrammar) {
    const ComboTable t = default_combo_table();
    using CL = std::vector<Combination>;
    EXPECT_EQ(t.at(Expression::no).train, (CL{{0, 1}, {0, 2}, {0, 3}, {0, 4}}));
    EXPECT_EQ(t.at(Expression::no).test, (CL{{0, 5}, {0, 8}}));
    EXPECT_EQ(t.at(Expression::few).train, (CL{{1, 6}, {2, 5}, {2, 7}, {3, 8}}));
    EXPECT_EQ(t.at(Expression::few).test, (CL{{1, 7}, {4, 9}}));
    EXPECT_EQ(t.at(Expression::most).train, (CL{{2, 3}, {3, 4}, {3, 5}, {4, 5}}));
    EXPECT_EQ(t.at(Expression::most).test, (CL{{4, 6}, {6, 8}}));
    EXPECT_EQ(t.at(Expression::all).train, (CL{{1, 1}, {2, 2}, {3, 3}, {4, 4}}));
    EXPECT_EQ(t.at(Expression::all).test, (CL{{5, 5}, {9, 9}}));
    EXPECT_EQ(t.at(Expression::one).train, (CL{{1, 1}, {1, 3}, {1, 4}, {1, 6}}));
    EXPECT_EQ(t.at(Expression::one).test, (CL{{1, 2}, {1, 7}}));
    EXPECT_EQ(t.at(Expression::two).train, (CL{{2, 2}, {2, 3}, {2, 5}, {2, 7}}));
    EXPECT_EQ(t.at(Expression::two).test, (CL{{2, 4}, {2, 9}}));
    EXPECT_EQ(t.at(Expression::three).train, (CL{{3, 3}, {3, 4}, {3, 5}, {3, 8}}));
    EXPECT_EQ(t.at(Expression::three).test, (CL{{3, 7}, {3, 9}}));
    EXPECT_EQ(t.at(Expression::four).train, (CL{{4, 4}, {4, 5}, {4, 6}, {4, 7}}));
    EXPECT_EQ(t.at(Expression::four).test, (CL{{4, 8}, {4, 9}}));
    for (int i = 0; i < 8; ++i) {
        const Expression e = static_cast<Expression>(i);
        EXPECT_EQ(t.at(e).train.size(), 4u);
        EXPECT_EQ(t.at(e).test.size(), 2u);
    }
}

TEST(ComboTable, ValidationCatchesBadTables) {
    ComboTable t = default_combo_table();
    t.at(Expression::few).train.push_back({1, 6}); // duplicate across slots
    EXPECT_THROW(t.validate(), std::invalid_argument);

    t = default_combo_table();
    t.at(Expression::most).test[0] = {1, 6}; // classifies as few
    EXPECT_THROW(t.validate(), std::invalid_argument);

    t = default_combo_table();
    t.at(Expression::two).train[0] = {3, 5}; // wrong target count
    EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(BuildScenario, PureSceneIdentities) {
    const ConceptInventory inv = synthesized(1);
    for (std::size_t n = 1; n <= 4; ++n) {
        const Scenario sc = build_scenario(inv, 3, Expression::all, Split::train,
                                           {n, n}, CompositionMode::summed, 17);
        EXPECT_TRUE(sc.distractors.empty());
        EXPECT_NEAR(dot(inv.at(3).visual, sc.vector), static_cast<double>(n), 1e-12);
        EXPECT_NEAR(cosine_distance(inv.at(3).visual, sc.vector), 0.0, 1e-12);
    }
}

TEST(BuildScenario, DistractorsRespectThreshold) {
    const ConceptInventory inv = synthesized(2);
    const double threshold = inv.mean_pairwise_cosine();
    const Scenario sc = build_scenario(inv, 0, Expression::no, Split::train, {0, 4},
                                       CompositionMode::summed, 5);
    ASSERT_EQ(sc.distractors.size(), 4u);
    const std::set<std::string> uniq(sc.distractors.begin(), sc.distractors.end());
    EXPECT_EQ(uniq.size(), 4u);
    for (const std::string& name : sc.distractors) {
        EXPECT_NE(name, inv.at(0).name);
        EXPECT_LT(cosine(inv.by_name(name).visual, inv.at(0).visual), threshold);
    }
    // a no-scene is a pure distractor sum, so its dot with the target is
    // bounded by the eligibility threshold
    EXPECT_LT(dot(inv.at(0).visual, sc.vector), 4.0 * threshold + 1e-9);
}

TEST(BuildScenario, DeterministicPerSeed) {
    const ConceptInventory inv = synthesized(3);
    const Scenario a = build_scenario(inv, 5, Expression::few, Split::test, {4, 9},
                                      CompositionMode::summed, 123);
    const Scenario b = build_scenario(inv, 5, Expression::few, Split::test, {4, 9},
                                      CompositionMode::summed, 123);
    EXPECT_EQ(a.distractors, b.distractors);
    EXPECT_EQ(a.vector, b.vector);
    const Scenario c = build_scenario(inv, 5, Expression::few, Split::test, {4, 9},
                                      CompositionMode::summed, 124);
    EXPECT_NE(a.distractors, c.distractors);
}

TEST(BuildScenario, RejectsInconsistentExpressionCombo) {
    const ConceptInventory inv = synthesized(4);
    EXPECT_THROW(build_scenario(inv, 0, Expression::few, Split::train, {2, 3},
                                CompositionMode::summed, 1),
                 std::invalid_argument);
    EXPECT_THROW(build_scenario(inv, 0, Expression::two, Split::train, {3, 5},
                                CompositionMode::summed, 1),
                 std::invalid_argument);
    EXPECT_THROW(build_scenario(inv, inv.size(), Expression::no, Split::train, {0, 1},
                                CompositionMode::summed, 1),
                 std::invalid_argument);
}

TEST(BuildScenario, ReportsDistractorShortage) {
    // two antipodal concepts: mean cosine is -1/3, nothing lies below it
    Vec a = {1.0, 0.0};
    Vec b = {-1.0, 0.0};
    Vec c = {0.0, 1.0};
    const ConceptInventory inv =
        ConceptInventory::from_concepts({{"a", a, a}, {"b", b, b}, {"c", c, c}});
    try {
        build_scenario(inv, 2, Expression::no, Split::train, {0, 4}, CompositionMode::summed, 1);
        FAIL() << "expected throw";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("eligible distractors"), std::string::npos);
    }
}

TEST(BuildScenario, ConcatLayoutTargetsFirst) {
    const ConceptInventory inv = crafted_ten();
    const std::size_t d = inv.dim();
    const Scenario sc = build_scenario(inv, 0, Expression::two, Split::train, {2, 5},
                                       CompositionMode::concat, 9);
    ASSERT_EQ(sc.vector.size(), 9 * d);
    ASSERT_EQ(sc.distractors.size(), 3u);
    auto cell = [&](std::size_t i) {
        return Vec(sc.vector.begin() + static_cast<std::ptrdiff_t>(i * d),
                   sc.vector.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    };
    EXPECT_EQ(cell(0), inv.at(0).visual);
    EXPECT_EQ(cell(1), inv.at(0).visual);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(cell(2 + k), inv.by_name(sc.distractors[k]).visual);
    for (std::size_t i = 5; i < 9; ++i) EXPECT_EQ(cell(i), Vec(d, 0.0));
}

TEST(BuildDataset, TenConceptCounts) {
    const ConceptInventory inv = crafted_ten();
    for (const Kind kind : {Kind::quantifier, Kind::cardinal}) {
        const Dataset ds = build_dataset(inv, kind, CompositionMode::summed,
                                         default_combo_table(), 7);
        EXPECT_EQ(ds.scenarios.size(), 240u);
        std::size_t train = 0, test = 0;
        for (const Scenario& sc : ds.scenarios) (sc.split == Split::train ? train : test) += 1;
        EXPECT_EQ(train, 160u);
        EXPECT_EQ(test, 80u);
        const ValidationReport rep = validate_dataset(ds, inv);
        EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations.front());
    }
}

TEST(BuildDataset, DeterministicAndSeedSensitive) {
    const ConceptInventory inv = crafted_ten();
    const Dataset a = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 7);
    const Dataset b = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 7);
    ASSERT_EQ(a.scenarios.size(), b.scenarios.size());
    for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
        EXPECT_EQ(a.scenarios[i].vector, b.scenarios[i].vector);
        EXPECT_EQ(a.scenarios[i].distractors, b.scenarios[i].distractors);
    }
    const Dataset c = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.scenarios.size() && !any_diff; ++i)
        any_diff = a.scenarios[i].distractors != c.scenarios[i].distractors;
    EXPECT_TRUE(any_diff);
}

TEST(BuildDataset, KindsUseDistinctStreams) {
    const ConceptInventory inv = crafted_ten();
    const Dataset q = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                    default_combo_table(), 7);
    const Dataset c = build_dataset(inv, Kind::cardinal, CompositionMode::summed,
                                    default_combo_table(), 7);
    // 'all' 1/1..4/4 and 'one'..'four' pure scenes coincide in combos, but
    // distractor-bearing scenes must draw from different streams
    bool any_diff = false;
    for (std::size_t i = 0; i < q.scenarios.size() && !any_diff; ++i) {
        const Scenario& sq = q.scenarios[i];
        if (sq.distractors.empty()) continue;
        for (const Scenario& sc : c.scenarios)
            if (sc.target == sq.target && sc.combo == sq.combo && !sc.distractors.empty()) {
                any_diff = sc.distractors != sq.distractors;
                if (any_diff) break;
            }
    }
    EXPECT_TRUE(any_diff);
}

TEST(BuildDataset, ConcatModeReducesWithTrainOnlyPca) {
    const ConceptInventory inv = crafted_ten();
    const Dataset ds = build_dataset(inv, Kind::cardinal, CompositionMode::concat,
                                     default_combo_table(), 11);
    ASSERT_TRUE(ds.concat_pca.has_value());
    EXPECT_EQ(ds.concat_pca->mean.size(), 9 * inv.dim());
    EXPECT_EQ(ds.concat_pca->basis.size(), inv.dim());
    for (const Scenario& sc : ds.scenarios) EXPECT_EQ(sc.vector.size(), inv.dim());
    const ValidationReport rep = validate_dataset(ds, inv);
    EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations.front());

    // rebuild raw train scenes independently and refit: must agree, which
    // pins the PCA to the train split alone
    std::vector<Vec> train_raw;
    for (const Scenario& sc : ds.scenarios) {
        if (sc.split != Split::train) continue;
        Vec raw(9 * inv.dim(), 0.0);
        const Vec& t = inv.by_name(sc.target).visual;
        for (std::size_t cell = 0; cell < sc.combo.numerator; ++cell)
            std::copy(t.begin(), t.end(),
                      raw.begin() + static_cast<std::ptrdiff_t>(cell * inv.dim()));
        for (std::size_t k = 0; k < sc.distractors.size(); ++k) {
            const Vec& v = inv.by_name(sc.distractors[k]).visual;
            std::copy(v.begin(), v.end(),
                      raw.begin() +
                          static_cast<std::ptrdiff_t>((sc.combo.numerator + k) * inv.dim()));
        }
        train_raw.push_back(std::move(raw));
    }
    const PcaModel refit = pca_fit(train_raw, inv.dim());
    ASSERT_EQ(refit.mean.size(), ds.concat_pca->mean.size());
    for (std::size_t i = 0; i < refit.mean.size(); ++i)
        EXPECT_NEAR(refit.mean[i], ds.concat_pca->mean[i], 1e-12);
}

TEST(ValidateDataset, FlagsCorruption) {
    const ConceptInventory inv = crafted_ten();
    const Dataset clean = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                        default_combo_table(), 7);

    Dataset bad = clean;
    bad.scenarios[10].vector[0] += 1e-6;
    EXPECT_FALSE(validate_dataset(bad, inv).ok);

    bad = clean;
    for (Scenario& sc : bad.scenarios)
        if (sc.distractors.size() >= 2) {
            sc.distractors[1] = sc.distractors[0];
            break;
        }
    EXPECT_FALSE(validate_dataset(bad, inv).ok);

    bad = clean;
    bad.scenarios[0].target = "concept_999";
    EXPECT_FALSE(validate_dataset(bad, inv).ok);

    bad = clean;
    bad.scenarios.pop_back();
    EXPECT_FALSE(validate_dataset(bad, inv).ok);

    bad = clean;
    bad.scenarios[0].split = Split::test;
    EXPECT_FALSE(validate_dataset(bad, inv).ok);
}

TEST(Manifest, RoundTripsExactly) {
    const fs::path dir = temp_dir();
    const ConceptInventory inv = crafted_ten();
    const Dataset ds = build_dataset(inv, Kind::quantifier, CompositionMode::summed,
                                     default_combo_table(), 7);
    save_manifest(ds, dir / "q.tsv", {"note roundtrip"});
    const Dataset back = load_manifest(dir / "q.tsv");
    EXPECT_EQ(back.kind, ds.kind);
    EXPECT_EQ(back.mode, ds.mode);
    EXPECT_EQ(back.dim, ds.dim);
    ASSERT_EQ(back.scenarios.size(), ds.scenarios.size());
    for (std::size_t i = 0; i < ds.scenarios.size(); ++i) {
        EXPECT_EQ(back.scenarios[i].split, ds.scenarios[i].split);
        EXPECT_EQ(back.scenarios[i].expression, ds.scenarios[i].expression);
        EXPECT_EQ(back.scenarios[i].target, ds.scenarios[i].target);
        EXPECT_TRUE(back.scenarios[i].combo == ds.scenarios[i].combo);
        EXPECT_EQ(back.scenarios[i].distractors, ds.scenarios[i].distractors);
        EXPECT_EQ(back.scenarios[i].vector, ds.scenarios[i].vector); // bit-exact
    }
    const ValidationReport rep = validate_dataset(back, inv);
    EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations.front());
    fs::remove_all(dir);
}

TEST(Manifest, LoadReportsBadRows) {
    const fs::path dir = temp_dir();
    io::write_file(dir / "a.tsv", "#kind quantifier\n#mode summed\n#dim 2\ntrain\tquantifier\tno\n");
    try {
        load_manifest(dir / "a.tsv");
        FAIL() << "expected throw";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("a.tsv:4"), std::string::npos);
    }

    io::write_file(dir / "b.tsv", "train\tquantifier\tno\tc\t0\t1\t-\t1 0\n");
    EXPECT_THROW(load_manifest(dir / "b.tsv"), std::runtime_error);

    // cardinal expression under a quantifier header
    io::write_file(dir / "c.tsv",
                   "#kind quantifier\n#mode summed\n#dim 2\ntest\tquantifier\ttwo\tc\t2\t4\tx,y\t1 0\n");
    EXPECT_THROW(load_manifest(dir / "c.tsv"), std::runtime_error);

    // distractor list inconsistent with the combination
    io::write_file(dir / "d.tsv",
                   "#kind quantifier\n#mode summed\n#dim 2\ntest\tquantifier\tno\tc\t0\t2\tx\t1 0\n");
    EXPECT_THROW(load_manifest(dir / "d.tsv"), std::runtime_error);
    fs::remove_all(dir);
}
