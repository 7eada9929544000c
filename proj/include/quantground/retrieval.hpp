#pragma once

// Retrieval evaluation. Each (expression, concept) query predicts a scene
// vector from the concept's word vector and ranks that concept's held-out
// test scenarios against it. The two scenarios actually labeled with the
// query expression are the relevant set; average precision, precision at
// 2 and a top-2 confusion matrix summarize the ranking quality.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/mapping.hpp"
#include "quantground/scenario.hpp"
#include "quantground/vec.hpp"

namespace qg {

/// How a variant orders candidates. The dot-trained variant is scored by
/// how close the raw dot product lands to its training target of 1;
/// everything else is scored by plain cosine.
enum class RankRule { cosine_desc, dot_one };

inline RankRule rank_rule_of(Variant v) {
    return v == Variant::nn_dot ? RankRule::dot_one : RankRule::cosine_desc;
}

inline std::size_t variant_index(Variant v) {
    switch (v) {
        case Variant::lin: return 0;
        case Variant::nn_cos: return 1;
        default: return 2;
    }
}

struct RankedEntry {
    std::size_t scenario_index = 0;
    double score = 0.0;
    bool relevant = false;
};

struct RankedList {
    Expression query = Expression::no;
    std::string concept_name;
    RankRule rule = RankRule::cosine_desc;
    bool degenerate = false;  // zero-norm prediction under the cosine rule
    std::vector<RankedEntry> entries;
};

/// Ranks candidate scenarios for one query. Ties (and every entry of a
/// degenerate query) keep ascending dataset order, so rankings are
/// deterministic.
inline RankedList rank_scenarios(const MappingModel& model, const Vec& word, const Dataset& ds,
                                 const std::vector<std::size_t>& candidates,
                                 const std::string& concept_name = "") {
    if (candidates.empty()) throw std::invalid_argument("rank_scenarios: no candidates");
    const Vec prediction = predict(model, word);
    const RankRule rule = rank_rule_of(model.variant);

    RankedList list;
    list.query = model.expression;
    list.concept_name = concept_name;
    list.rule = rule;

    const double pnorm = norm(prediction);
    if (rule == RankRule::cosine_desc && pnorm == 0.0) list.degenerate = true;

    for (const std::size_t idx : candidates) {
        if (idx >= ds.scenarios.size())
            throw std::invalid_argument("rank_scenarios: candidate index out of range");
        const Scenario& sc = ds.scenarios[idx];
        RankedEntry e;
        e.scenario_index = idx;
        e.relevant = sc.expression == model.expression;
        if (rule == RankRule::cosine_desc) {
            e.score = (list.degenerate || norm(sc.vector) == 0.0) ? -1.0
                                                                  : cosine(prediction, sc.vector);
        } else {
            e.score = std::abs(dot(prediction, sc.vector) - 1.0);
        }
        list.entries.push_back(e);
    }

    std::sort(list.entries.begin(), list.entries.end(), [&](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return rule == RankRule::cosine_desc ? a.score > b.score : a.score < b.score;
        return a.scenario_index < b.scenario_index;
    });
    return list;
}

/// Mean of precision-at-k over the ranks k holding a relevant entry.
inline double average_precision(const std::vector<RankedEntry>& ranked) {
    std::size_t relevant_total = 0;
    for (const RankedEntry& e : ranked) relevant_total += e.relevant ? 1 : 0;
    if (relevant_total == 0)
        throw std::invalid_argument("average_precision: no relevant entries");
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (!ranked[k].relevant) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    return sum / static_cast<double>(relevant_total);
}

inline double precision_at_2(const std::vector<RankedEntry>& ranked) {
    if (ranked.size() < 2)
        throw std::invalid_argument("precision_at_2: need at least 2 ranked entries");
    const double hits = (ranked[0].relevant ? 1.0 : 0.0) + (ranked[1].relevant ? 1.0 : 0.0);
    return hits / 2.0;
}

/// Macro-averaged retrieval quality. Indices are [variant][expression
/// slot] with variants ordered lin, nn-cos, nn-dot. confusion[v][q][r]
/// counts how often a top-2 scenario of query expression q carried
/// expression r; each row sums to twice the concept count.
struct RetrievalReport {
    Kind kind = Kind::quantifier;
    std::size_t concepts = 0;
    std::array<std::array<double, 4>, 3> map{};
    std::array<std::array<double, 4>, 3> p_at_2{};
    std::array<std::array<std::array<std::size_t, 4>, 4>, 3> confusion{};
    std::array<std::size_t, 3> degenerate_queries{};

    double mean_map(Variant v) const {
        const auto& row = map[variant_index(v)];
        return (row[0] + row[1] + row[2] + row[3]) / 4.0;
    }
};

/// Runs every query of one dataset kind: all three variants, all four
/// expressions, every concept. Requires one model per (variant,
/// expression) and exactly two test scenarios per expression per concept.
inline RetrievalReport evaluate(const std::vector<MappingModel>& models, const Dataset& ds,
                                const ConceptInventory& inv) {
    const std::array<Expression, 4> exprs = expressions_of(ds.kind);
    std::array<std::array<const MappingModel*, 4>, 3> lookup{};
    for (const MappingModel& m : models) {
        if (kind_of(m.expression) != ds.kind) continue;
        const MappingModel*& slot = lookup[variant_index(m.variant)][expr_slot(m.expression)];
        if (slot != nullptr)
            throw std::invalid_argument(std::string("evaluate: duplicate model for ") +
                                        to_string(m.variant) + "/" + to_string(m.expression));
        slot = &m;
    }
    for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot})
        for (const Expression e : exprs)
            if (lookup[variant_index(v)][expr_slot(e)] == nullptr)
                throw std::invalid_argument(std::string("evaluate: missing model for ") +
                                            to_string(v) + "/" + to_string(e));

    // Candidate pools: the test scenarios of each concept, dataset order.
    std::vector<std::vector<std::size_t>> pools(inv.size());
    for (std::size_t i = 0; i < ds.scenarios.size(); ++i) {
        const Scenario& sc = ds.scenarios[i];
        if (sc.split != Split::test) continue;
        const auto idx = inv.index_of(sc.target);
        if (!idx) throw std::invalid_argument("evaluate: unknown target '" + sc.target + "'");
        pools[*idx].push_back(i);
    }
    for (std::size_t ci = 0; ci < inv.size(); ++ci) {
        std::array<std::size_t, 4> per_expr{};
        for (const std::size_t i : pools[ci]) per_expr[expr_slot(ds.scenarios[i].expression)] += 1;
        for (const Expression e : exprs)
            if (per_expr[expr_slot(e)] != 2)
                throw std::invalid_argument("evaluate: concept '" + inv.at(ci).name + "' has " +
                                            std::to_string(per_expr[expr_slot(e)]) +
                                            " test scenarios for '" + to_string(e) +
                                            "', expected 2");
    }

    RetrievalReport rep;
    rep.kind = ds.kind;
    rep.concepts = inv.size();

    for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot}) {
        const std::size_t vi = variant_index(v);
        for (const Expression e : exprs) {
            const std::size_t slot = expr_slot(e);
            const MappingModel& model = *lookup[vi][slot];
            double ap_sum = 0.0, p2_sum = 0.0;
            for (std::size_t ci = 0; ci < inv.size(); ++ci) {
                const RankedList list =
                    rank_scenarios(model, inv.at(ci).word, ds, pools[ci], inv.at(ci).name);
                if (list.degenerate) rep.degenerate_queries[vi] += 1;
                ap_sum += average_precision(list.entries);
                p2_sum += precision_at_2(list.entries);
                for (std::size_t k = 0; k < 2; ++k) {
                    const Expression got = ds.scenarios[list.entries[k].scenario_index].expression;
                    rep.confusion[vi][slot][expr_slot(got)] += 1;
                }
            }
            rep.map[vi][slot] = ap_sum / static_cast<double>(inv.size());
            rep.p_at_2[vi][slot] = p2_sum / static_cast<double>(inv.size());
        }
    }
    return rep;
}

} // namespace qg
