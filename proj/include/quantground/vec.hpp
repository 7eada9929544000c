#pragma once

// Dense double-precision vectors and the similarity measures used across
// the library: dot product, cosine, cosine distance, normalization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qg {

using Vec = std::vector<double>;

inline void check_same_dim(const Vec& u, const Vec& v, const char* where) {
    if (u.size() != v.size())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()) + ")");
}

inline double dot(const Vec& u, const Vec& v) {
    check_same_dim(u, v, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

/// Cosine similarity, clamped to [-1, 1] so downstream 1 - cosine stays in [0, 2].
inline double cosine(const Vec& u, const Vec& v) {
    check_same_dim(u, v, "cosine");
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw std::domain_error("cosine: zero-norm input");
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

inline double cosine_distance(const Vec& u, const Vec& v) { return 1.0 - cosine(u, v); }

inline Vec normalize(const Vec& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::domain_error("normalize: zero-norm input");
    Vec out(v);
    for (double& x : out) x /= n;
    return out;
}

inline void add_in_place(Vec& acc, const Vec& v) {
    check_same_dim(acc, v, "add_in_place");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

/// acc += a * v
inline void axpy(Vec& acc, double a, const Vec& v) {
    check_same_dim(acc, v, "axpy");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * v[i];
}

inline Vec scaled(const Vec& v, double a) {
    Vec out(v);
    for (double& x : out) x *= a;
    return out;
}

inline bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace qg
