#pragma once

// Report rendering. Every artifact comes in two flavors where useful:
// an exact CSV (values formatted for lossless round-trip) and a padded
// human table with rounded figures. Callers pass meta lines (config
// digest, seed) that are emitted as leading '#' comments.

#include <cstdio>
#include <string>
#include <vector>

#include "quantground/retrieval.hpp"
#include "quantground/vision_analysis.hpp"

namespace qg {

namespace detail {

inline std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width) {
    while (s.size() < width) s.push_back(' ');
    return s;
}

inline std::string meta_block(const std::vector<std::string>& meta) {
    std::string out;
    for (const std::string& m : meta) out += "#" + m + "\n";
    return out;
}

} // namespace detail

inline std::string render_profiles_csv(const std::vector<SimilarityProfile>& profiles,
                                       const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += "kind,measure,split,class,count,min,q1,median,q3,max,mean\n";
    for (const SimilarityProfile& p : profiles) {
        for (const auto& [expr, st] : p.per_class) {
            out += std::string(to_string(p.kind)) + "," + to_string(p.measure) + "," +
                   to_string(p.split) + "," + to_string(expr) + "," + std::to_string(st.count) +
                   "," + io::fmt_double(st.min) + "," + io::fmt_double(st.q1) + "," +
                   io::fmt_double(st.median) + "," + io::fmt_double(st.q3) + "," +
                   io::fmt_double(st.max) + "," + io::fmt_double(st.mean) + "\n";
        }
    }
    return out;
}

inline std::string render_svm_csv(const SvmComparison& cmp, const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += "kind,measure,metric,value\n";
    const Kind kinds[2] = {Kind::quantifier, Kind::cardinal};
    const Measure measures[2] = {Measure::cosine_distance, Measure::dot};
    for (std::size_t ki = 0; ki < 2; ++ki) {
        for (std::size_t mi = 0; mi < 2; ++mi) {
            const std::string head =
                std::string(to_string(kinds[ki])) + "," + to_string(measures[mi]) + ",";
            out += head + "cv_mean," + io::fmt_double(cmp.cv_accuracy[ki][mi]) + "\n";
            for (std::size_t f = 0; f < cmp.fold_accuracies[ki][mi].size(); ++f)
                out += head + "fold_" + std::to_string(f) + "," +
                       io::fmt_double(cmp.fold_accuracies[ki][mi][f]) + "\n";
            out += head + "test," + io::fmt_double(cmp.test_accuracy[ki][mi]) + "\n";
        }
    }
    return out;
}

inline std::string render_svm_text(const SvmComparison& cmp, const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += "SVM accuracy on scalar similarity features (RBF kernel, one-vs-rest)\n";
    out += "folds: " + std::to_string(cmp.folds) + "\n\n";
    out += detail::pad("kind", 12) + detail::pad("measure", 18) + detail::pad("cv mean", 10) +
           "test\n";
    const Kind kinds[2] = {Kind::quantifier, Kind::cardinal};
    const Measure measures[2] = {Measure::cosine_distance, Measure::dot};
    for (std::size_t ki = 0; ki < 2; ++ki)
        for (std::size_t mi = 0; mi < 2; ++mi)
            out += detail::pad(to_string(kinds[ki]), 12) + detail::pad(to_string(measures[mi]), 18) +
                   detail::pad(detail::fmt_fixed(cmp.cv_accuracy[ki][mi], 3), 10) +
                   detail::fmt_fixed(cmp.test_accuracy[ki][mi], 3) + "\n";
    return out;
}

inline std::string render_retrieval_csv(const std::vector<RetrievalReport>& reports,
                                        const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += "kind,expression,variant,map,p_at_2\n";
    for (const RetrievalReport& rep : reports) {
        for (const Expression e : expressions_of(rep.kind)) {
            for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot}) {
                const std::size_t vi = variant_index(v);
                const std::size_t slot = expr_slot(e);
                out += std::string(to_string(rep.kind)) + "," + to_string(e) + "," + to_string(v) +
                       "," + io::fmt_double(rep.map[vi][slot]) + "," +
                       io::fmt_double(rep.p_at_2[vi][slot]) + "\n";
            }
        }
    }
    return out;
}

inline std::string render_retrieval_text(const std::vector<RetrievalReport>& reports,
                                         const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += "Retrieval quality, macro-averaged over concepts (mAP / P@2)\n";
    for (const RetrievalReport& rep : reports) {
        out += "\n" + std::string(to_string(rep.kind)) + " (" + std::to_string(rep.concepts) +
               " concepts)\n";
        out += detail::pad("", 10);
        for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot})
            out += detail::pad(to_string(v), 16);
        out += "\n";
        for (const Expression e : expressions_of(rep.kind)) {
            out += detail::pad(to_string(e), 10);
            for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot}) {
                const std::size_t vi = variant_index(v);
                out += detail::pad(detail::fmt_fixed(rep.map[vi][expr_slot(e)], 3) + " / " +
                                       detail::fmt_fixed(rep.p_at_2[vi][expr_slot(e)], 3),
                                   16);
            }
            out += "\n";
        }
        out += detail::pad("mean", 10);
        for (const Variant v : {Variant::lin, Variant::nn_cos, Variant::nn_dot}) {
            double p2 = 0.0;
            for (std::size_t s = 0; s < 4; ++s) p2 += rep.p_at_2[variant_index(v)][s];
            out += detail::pad(detail::fmt_fixed(rep.mean_map(v), 3) + " / " +
                                   detail::fmt_fixed(p2 / 4.0, 3),
                               16);
        }
        out += "\n";
    }
    return out;
}

/// Variant with the highest mean mAP; earlier variant order wins ties.
inline Variant best_variant_by_map(const RetrievalReport& rep) {
    Variant best = Variant::lin;
    for (const Variant v : {Variant::nn_cos, Variant::nn_dot})
        if (rep.mean_map(v) > rep.mean_map(best)) best = v;
    return best;
}

/// Top-2 confusion of one variant as CSV; rows are query expressions,
/// columns retrieved expressions, each row summing to twice the concept
/// count.
inline std::string render_confusion_csv(const RetrievalReport& rep, Variant v,
                                        const std::vector<std::string>& meta = {}) {
    std::string out = detail::meta_block(meta);
    out += std::string("#kind ") + to_string(rep.kind) + "\n";
    out += std::string("#variant ") + to_string(v) + "\n";
    const std::array<Expression, 4> exprs = expressions_of(rep.kind);
    out += "query";
    for (const Expression e : exprs) out += std::string(",") + to_string(e);
    out += "\n";
    for (const Expression q : exprs) {
        out += to_string(q);
        for (const Expression r : exprs)
            out += "," + std::to_string(rep.confusion[variant_index(v)][expr_slot(q)][expr_slot(r)]);
        out += "\n";
    }
    return out;
}

} // namespace qg
