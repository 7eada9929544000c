#pragma once

// Scenario generation. A scenario pairs an expression (quantifier or
// cardinal) with a composed vector built from one target concept and a
// set of distractor concepts. Distractors are sampled among concepts
// whose visual cosine to the target lies strictly below the inventory
// mean, so target and context stay visually unrelated.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/io.hpp"
#include "quantground/pca.hpp"
#include "quantground/rng.hpp"
#include "quantground/vec.hpp"

namespace qg {

enum class Kind { quantifier, cardinal };
enum class Split { train, test };
enum class CompositionMode { summed, concat };

enum class Expression { no = 0, few, most, all, one, two, three, four };

inline const char* to_string(Kind k) { return k == Kind::quantifier ? "quantifier" : "cardinal"; }
inline const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }
inline const char* to_string(CompositionMode m) { return m == CompositionMode::summed ? "summed" : "concat"; }

inline Kind kind_from_string(const std::string& s) {
    if (s == "quantifier") return Kind::quantifier;
    if (s == "cardinal") return Kind::cardinal;
    throw std::invalid_argument("unknown kind '" + s + "'");
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + s + "'");
}

inline CompositionMode mode_from_string(const std::string& s) {
    if (s == "summed") return CompositionMode::summed;
    if (s == "concat") return CompositionMode::concat;
    throw std::invalid_argument("unknown composition mode '" + s + "'");
}

inline const char* to_string(Expression e) {
    static constexpr const char* names[] = {"no", "few", "most", "all", "one", "two", "three", "four"};
    return names[static_cast<int>(e)];
}

inline Expression expression_from_string(const std::string& s) {
    for (int i = 0; i < 8; ++i)
        if (s == to_string(static_cast<Expression>(i))) return static_cast<Expression>(i);
    throw std::invalid_argument("unknown expression '" + s + "'");
}

inline Kind kind_of(Expression e) {
    return static_cast<int>(e) < 4 ? Kind::quantifier : Kind::cardinal;
}

/// The four expressions of a kind, in canonical order.
inline std::array<Expression, 4> expressions_of(Kind k) {
    if (k == Kind::quantifier)
        return {Expression::no, Expression::few, Expression::most, Expression::all};
    return {Expression::one, Expression::two, Expression::three, Expression::four};
}

/// Position of an expression within its kind, 0..3.
inline std::size_t expr_slot(Expression e) { return static_cast<std::size_t>(e) % 4; }

/// Object count named by a cardinal expression.
inline std::size_t cardinal_value(Expression e) {
    if (kind_of(e) != Kind::cardinal)
        throw std::invalid_argument(std::string("cardinal_value: '") + to_string(e) + "' is not a cardinal");
    return expr_slot(e) + 1;
}

/// Target/total counts of a scene. At most 9 objects fit a scene grid.
struct Combination {
    std::size_t numerator = 0;
    std::size_t denominator = 1;

    void validate() const {
        if (denominator < 1 || denominator > 9)
            throw std::invalid_argument("Combination: denominator must be in 1..9");
        if (numerator > denominator)
            throw std::invalid_argument("Combination: numerator exceeds denominator");
    }

    std::string label() const { return std::to_string(numerator) + "/" + std::to_string(denominator); }

    friend bool operator==(const Combination& a, const Combination& b) {
        return a.numerator == b.numerator && a.denominator == b.denominator;
    }
    friend bool operator<(const Combination& a, const Combination& b) {
        return a.numerator != b.numerator ? a.numerator < b.numerator : a.denominator < b.denominator;
    }
};

/// Quantifier for a target/total ratio. The exact half is deliberately
/// outside every class and rejected.
inline Expression classify_ratio(std::size_t numerator, std::size_t denominator) {
    Combination{numerator, denominator}.validate();
    if (numerator * 2 == denominator)
        throw std::domain_error("classify_ratio: " + Combination{numerator, denominator}.label() +
                                " is exactly one half, which no class covers");
    if (numerator == 0) return Expression::no;
    if (numerator == denominator) return Expression::all;
    return numerator * 2 < denominator ? Expression::few : Expression::most;
}

struct ExprCombos {
    std::vector<Combination> train;
    std::vector<Combination> test;
};

struct ComboTable {
    std::array<ExprCombos, 8> by_expr;

    const ExprCombos& at(Expression e) const { return by_expr[static_cast<std::size_t>(e)]; }
    ExprCombos& at(Expression e) { return by_expr[static_cast<std::size_t>(e)]; }

    /// Checks every combination is valid, consistent with its expression,
    /// and that train and test combinations never overlap.
    void validate() const {
        for (int i = 0; i < 8; ++i) {
            const Expression e = static_cast<Expression>(i);
            const ExprCombos& ec = by_expr[i];
            std::set<std::pair<std::size_t, std::size_t>> seen;
            auto check = [&](const Combination& c, const char* split) {
                c.validate();
                if (!seen.insert({c.numerator, c.denominator}).second)
                    throw std::invalid_argument(std::string("ComboTable: duplicate combination ") +
                                                c.label() + " under '" + to_string(e) + "'");
                if (kind_of(e) == Kind::quantifier) {
                    if (classify_ratio(c.numerator, c.denominator) != e)
                        throw std::invalid_argument(std::string("ComboTable: ") + c.label() +
                                                    " does not classify as '" + to_string(e) + "'");
                } else if (c.numerator != cardinal_value(e)) {
                    throw std::invalid_argument(std::string("ComboTable: ") + c.label() +
                                                " has the wrong target count for '" + to_string(e) + "'");
                }
                (void)split;
            };
            for (const Combination& c : ec.train) check(c, "train");
            for (const Combination& c : ec.test) check(c, "test");
        }
    }
};

/// Fixed scene grammar: four training and two test target/total settings
/// per expression, disjoint across splits.
inline ComboTable default_combo_table() {
    ComboTable t;
    auto set = [&](Expression e, std::initializer_list<Combination> train,
                   std::initializer_list<Combination> test) {
        t.at(e).train = train;
        t.at(e).test = test;
    };
    set(Expression::no, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {{0, 5}, {0, 8}});
    set(Expression::few, {{1, 6}, {2, 5}, {2, 7}, {3, 8}}, {{1, 7}, {4, 9}});
    set(Expression::most, {{2, 3}, {3, 4}, {3, 5}, {4, 5}}, {{4, 6}, {6, 8}});
    set(Expression::all, {{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {{5, 5}, {9, 9}});
    set(Expression::one, {{1, 1}, {1, 3}, {1, 4}, {1, 6}}, {{1, 2}, {1, 7}});
    set(Expression::two, {{2, 2}, {2, 3}, {2, 5}, {2, 7}}, {{2, 4}, {2, 9}});
    set(Expression::three, {{3, 3}, {3, 4}, {3, 5}, {3, 8}}, {{3, 7}, {3, 9}});
    set(Expression::four, {{4, 4}, {4, 5}, {4, 6}, {4, 7}}, {{4, 8}, {4, 9}});
    t.validate();
    return t;
}

struct Scenario {
    Split split = Split::train;
    Expression expression = Expression::no;
    std::string target;
    Combination combo;
    std::vector<std::string> distractors;  // sampled order, drives concat cells
    Vec vector;
};

struct Dataset {
    Kind kind = Kind::quantifier;
    CompositionMode mode = CompositionMode::summed;
    std::size_t dim = 0;
    ComboTable combos;
    std::vector<Scenario> scenarios;
    std::optional<PcaModel> concat_pca;  // absent for summed mode and loaded datasets
};

namespace detail {

inline std::vector<std::size_t> eligible_distractors(const ConceptInventory& inv,
                                                     std::size_t target_index) {
    const double threshold = inv.mean_pairwise_cosine();
    const Vec& t = inv.at(target_index).visual;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < inv.size(); ++j) {
        if (j == target_index) continue;
        if (cosine(inv.at(j).visual, t) < threshold) out.push_back(j);
    }
    return out;
}

} // namespace detail

/// Builds one scenario. In concat mode the returned vector is the raw
/// 9-cell concatenation (9 * dim values, target cells first, unused cells
/// zero); build_dataset reduces it with a PCA fitted on training scenes.
inline Scenario build_scenario(const ConceptInventory& inv, std::size_t target_index,
                               Expression expression, Split split, const Combination& combo,
                               CompositionMode mode, std::uint64_t seed) {
    combo.validate();
    if (target_index >= inv.size())
        throw std::invalid_argument("build_scenario: target index out of range");
    if (kind_of(expression) == Kind::quantifier) {
        if (classify_ratio(combo.numerator, combo.denominator) != expression)
            throw std::invalid_argument(std::string("build_scenario: ") + combo.label() +
                                        " does not classify as '" + to_string(expression) + "'");
    } else if (combo.numerator != cardinal_value(expression)) {
        throw std::invalid_argument(std::string("build_scenario: ") + combo.label() +
                                    " has the wrong target count for '" + to_string(expression) + "'");
    }

    const std::size_t needed = combo.denominator - combo.numerator;
    const std::vector<std::size_t> eligible = detail::eligible_distractors(inv, target_index);
    if (eligible.size() < needed)
        throw std::runtime_error("build_scenario: target '" + inv.at(target_index).name + "' has " +
                                 std::to_string(eligible.size()) + " eligible distractors, needs " +
                                 std::to_string(needed));

    Scenario sc;
    sc.split = split;
    sc.expression = expression;
    sc.target = inv.at(target_index).name;
    sc.combo = combo;

    Rng rng(seed);
    if (needed > 0) {
        for (std::size_t pick : rng.sample_indices(eligible.size(), needed))
            sc.distractors.push_back(inv.at(eligible[pick]).name);
    }

    const std::size_t d = inv.dim();
    if (mode == CompositionMode::summed) {
        sc.vector.assign(d, 0.0);
        axpy(sc.vector, static_cast<double>(combo.numerator), inv.at(target_index).visual);
        for (const std::string& name : sc.distractors) add_in_place(sc.vector, inv.by_name(name).visual);
    } else {
        sc.vector.assign(9 * d, 0.0);
        for (std::size_t cell = 0; cell < combo.numerator; ++cell)
            std::copy(inv.at(target_index).visual.begin(), inv.at(target_index).visual.end(),
                      sc.vector.begin() + static_cast<std::ptrdiff_t>(cell * d));
        for (std::size_t k = 0; k < sc.distractors.size(); ++k) {
            const Vec& v = inv.by_name(sc.distractors[k]).visual;
            std::copy(v.begin(), v.end(),
                      sc.vector.begin() + static_cast<std::ptrdiff_t>((combo.numerator + k) * d));
        }
    }
    return sc;
}

/// Builds the complete dataset for one kind: every concept crossed with
/// every expression and every combination of the table. Scenario RNG
/// streams derive from (seed, kind, concept, expression, combination slot),
/// so each scene is reproducible in isolation.
inline Dataset build_dataset(const ConceptInventory& inv, Kind kind, CompositionMode mode,
                             const ComboTable& table, std::uint64_t seed) {
    table.validate();
    Dataset ds;
    ds.kind = kind;
    ds.mode = mode;
    ds.dim = inv.dim();
    ds.combos = table;

    const std::uint64_t kind_salt = (kind == Kind::quantifier ? 1u : 2u) << 20;
    for (std::size_t ci = 0; ci < inv.size(); ++ci) {
        for (const Expression expr : expressions_of(kind)) {
            const ExprCombos& ec = table.at(expr);
            for (std::size_t s = 0; s < ec.train.size() + ec.test.size(); ++s) {
                const bool is_train = s < ec.train.size();
                const Combination& combo = is_train ? ec.train[s] : ec.test[s - ec.train.size()];
                const std::uint64_t sseed = derive_seed(seed, kind_salt + ci, expr_slot(expr) * 6 + s);
                ds.scenarios.push_back(build_scenario(inv, ci, expr,
                                                      is_train ? Split::train : Split::test, combo,
                                                      mode, sseed));
            }
        }
    }

    if (mode == CompositionMode::concat) {
        std::vector<Vec> train_raw;
        for (const Scenario& sc : ds.scenarios)
            if (sc.split == Split::train) train_raw.push_back(sc.vector);
        ds.concat_pca = pca_fit(train_raw, ds.dim);
        for (Scenario& sc : ds.scenarios) sc.vector = pca_transform(*ds.concat_pca, sc.vector);
    }
    return ds;
}

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;

    void flag(std::string msg) {
        ok = false;
        violations.push_back(std::move(msg));
    }
};

/// Structural integrity check of a dataset against its inventory: counts,
/// combination bookkeeping, distractor rules and (summed mode) exact
/// recomposition of every scene vector.
inline ValidationReport validate_dataset(const Dataset& ds, const ConceptInventory& inv) {
    ValidationReport rep;
    const double threshold = inv.mean_pairwise_cosine();

    std::size_t per_concept = 0;
    for (const Expression e : expressions_of(ds.kind))
        per_concept += ds.combos.at(e).train.size() + ds.combos.at(e).test.size();
    if (ds.scenarios.size() != per_concept * inv.size())
        rep.flag("scenario count " + std::to_string(ds.scenarios.size()) + ", expected " +
                 std::to_string(per_concept * inv.size()));

    std::set<std::tuple<std::string, Expression, std::size_t, std::size_t>> triples;
    std::map<std::pair<Expression, Split>, std::size_t> split_counts;

    for (std::size_t i = 0; i < ds.scenarios.size(); ++i) {
        const Scenario& sc = ds.scenarios[i];
        const std::string where = "scenario " + std::to_string(i) + " (" + sc.target + ", " +
                                  std::string(to_string(sc.expression)) + " " + sc.combo.label() + ")";

        if (kind_of(sc.expression) != ds.kind) {
            rep.flag(where + ": expression kind mismatch");
            continue;
        }
        const auto tidx = inv.index_of(sc.target);
        if (!tidx) {
            rep.flag(where + ": unknown target");
            continue;
        }

        if (!triples.insert({sc.target, sc.expression, sc.combo.numerator, sc.combo.denominator}).second)
            rep.flag(where + ": duplicate (target, expression, combination) triple");
        split_counts[{sc.expression, sc.split}] += 1;

        const auto& pool = sc.split == Split::train ? ds.combos.at(sc.expression).train
                                                    : ds.combos.at(sc.expression).test;
        if (std::find(pool.begin(), pool.end(), sc.combo) == pool.end())
            rep.flag(where + ": combination not listed for this expression and split");

        if (kind_of(sc.expression) == Kind::quantifier) {
            if (classify_ratio(sc.combo.numerator, sc.combo.denominator) != sc.expression)
                rep.flag(where + ": ratio does not classify as the labeled quantifier");
        } else if (sc.combo.numerator != cardinal_value(sc.expression)) {
            rep.flag(where + ": target count does not match the labeled cardinal");
        }

        if (sc.distractors.size() != sc.combo.denominator - sc.combo.numerator)
            rep.flag(where + ": wrong distractor count");
        std::set<std::string> uniq(sc.distractors.begin(), sc.distractors.end());
        if (uniq.size() != sc.distractors.size()) rep.flag(where + ": repeated distractor");
        for (const std::string& name : sc.distractors) {
            const auto didx = inv.index_of(name);
            if (!didx) {
                rep.flag(where + ": unknown distractor '" + name + "'");
                continue;
            }
            if (name == sc.target) rep.flag(where + ": target used as distractor");
            else if (!(cosine(inv.at(*didx).visual, inv.at(*tidx).visual) < threshold))
                rep.flag(where + ": distractor '" + name + "' not below the mean-cosine threshold");
        }

        if (ds.mode == CompositionMode::summed) {
            Vec expect(inv.dim(), 0.0);
            axpy(expect, static_cast<double>(sc.combo.numerator), inv.at(*tidx).visual);
            for (const std::string& name : sc.distractors) add_in_place(expect, inv.by_name(name).visual);
            if (sc.vector.size() != expect.size()) {
                rep.flag(where + ": wrong vector dimension");
            } else {
                double max_err = 0.0;
                for (std::size_t k = 0; k < expect.size(); ++k)
                    max_err = std::max(max_err, std::abs(expect[k] - sc.vector[k]));
                if (max_err > 1e-9) rep.flag(where + ": summed vector does not recompose");
            }
        } else if (sc.vector.size() != ds.dim) {
            rep.flag(where + ": wrong vector dimension");
        }
    }

    for (const Expression e : expressions_of(ds.kind)) {
        const std::size_t want_train = ds.combos.at(e).train.size() * inv.size();
        const std::size_t want_test = ds.combos.at(e).test.size() * inv.size();
        if (split_counts[{e, Split::train}] != want_train)
            rep.flag(std::string("expression '") + to_string(e) + "': train count " +
                     std::to_string(split_counts[{e, Split::train}]) + ", expected " +
                     std::to_string(want_train));
        if (split_counts[{e, Split::test}] != want_test)
            rep.flag(std::string("expression '") + to_string(e) + "': test count " +
                     std::to_string(split_counts[{e, Split::test}]) + ", expected " +
                     std::to_string(want_test));
    }
    return rep;
}

/// Manifest: '#key value' headers followed by one tab-separated line per
/// scenario (split, kind, expression, target, numerator, denominator,
/// comma-joined distractors or '-', space-joined vector).
inline void save_manifest(const Dataset& ds, const std::filesystem::path& path,
                          const std::vector<std::string>& meta = {}) {
    std::string out;
    out += std::string("#kind ") + to_string(ds.kind) + "\n";
    out += std::string("#mode ") + to_string(ds.mode) + "\n";
    out += "#dim " + std::to_string(ds.dim) + "\n";
    for (const std::string& m : meta) out += "#" + m + "\n";
    for (const Scenario& sc : ds.scenarios) {
        out += to_string(sc.split);
        out += '\t';
        out += to_string(ds.kind);
        out += '\t';
        out += to_string(sc.expression);
        out += '\t';
        out += sc.target;
        out += '\t';
        out += std::to_string(sc.combo.numerator);
        out += '\t';
        out += std::to_string(sc.combo.denominator);
        out += '\t';
        if (sc.distractors.empty()) {
            out += '-';
        } else {
            for (std::size_t i = 0; i < sc.distractors.size(); ++i) {
                if (i > 0) out += ',';
                out += sc.distractors[i];
            }
        }
        out += '\t';
        out += io::join_vector(sc.vector);
        out += '\n';
    }
    io::write_file(path, out);
}

inline Dataset load_manifest(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    const std::vector<std::string> lines = io::to_lines(text);
    const std::string fname = path.filename().string();

    Dataset ds;
    ds.combos = default_combo_table();
    bool saw_kind = false, saw_mode = false, saw_dim = false;

    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        const std::string where = fname + ":" + std::to_string(ln + 1);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto sp = line.find(' ');
            const std::string key = line.substr(1, sp == std::string::npos ? std::string::npos : sp - 1);
            const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
            try {
                if (key == "kind") { ds.kind = kind_from_string(value); saw_kind = true; }
                else if (key == "mode") { ds.mode = mode_from_string(value); saw_mode = true; }
                else if (key == "dim") { ds.dim = io::parse_u64(value, "dim"); saw_dim = true; }
            } catch (const std::exception& e) {
                throw std::runtime_error(where + ": " + e.what());
            }
            continue;
        }
        if (!saw_kind || !saw_mode || !saw_dim)
            throw std::runtime_error(where + ": scenario row before #kind/#mode/#dim headers");

        const std::vector<std::string_view> cols = io::split(line, '\t');
        if (cols.size() != 8)
            throw std::runtime_error(where + ": expected 8 tab-separated columns, got " +
                                     std::to_string(cols.size()));
        try {
            Scenario sc;
            sc.split = split_from_string(std::string(cols[0]));
            if (kind_from_string(std::string(cols[1])) != ds.kind)
                throw std::runtime_error("row kind disagrees with #kind header");
            sc.expression = expression_from_string(std::string(cols[2]));
            if (kind_of(sc.expression) != ds.kind)
                throw std::runtime_error(std::string("expression '") + to_string(sc.expression) +
                                         "' does not belong to this kind");
            sc.target = std::string(cols[3]);
            if (sc.target.empty()) throw std::runtime_error("empty target name");
            sc.combo.numerator = io::parse_u64(std::string(cols[4]), "numerator");
            sc.combo.denominator = io::parse_u64(std::string(cols[5]), "denominator");
            sc.combo.validate();
            if (cols[6] != "-")
                for (const std::string_view part : io::split(cols[6], ','))
                    sc.distractors.emplace_back(part);
            if (sc.distractors.size() != sc.combo.denominator - sc.combo.numerator)
                throw std::runtime_error("distractor count does not match the combination");
            sc.vector = io::parse_vector(std::string(cols[7]), "vector");
            if (sc.vector.size() != ds.dim)
                throw std::runtime_error("vector has " + std::to_string(sc.vector.size()) +
                                         " values, expected " + std::to_string(ds.dim));
            ds.scenarios.push_back(std::move(sc));
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
    if (!saw_kind || !saw_mode || !saw_dim)
        throw std::runtime_error(fname + ": missing #kind/#mode/#dim headers");
    return ds;
}

} // namespace qg
