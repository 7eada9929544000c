#pragma once

// Principal component analysis over row-sample data, computed from the SVD
// of the mean-centered data matrix. Basis rows follow a fixed sign
// convention (largest-magnitude component positive) so that fitted models
// are reproducible across runs.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "quantground/vec.hpp"

namespace qg {

struct PcaModel {
    Vec mean;                                // input-dim column mean
    std::vector<Vec> basis;                  // k orthonormal rows, each input-dim
    std::vector<double> explained_variance;  // non-increasing, one per component

    std::size_t input_dim() const { return mean.size(); }
    std::size_t components() const { return basis.size(); }
};

inline PcaModel pca_fit(const std::vector<Vec>& rows, std::size_t k) {
    const std::size_t n = rows.size();
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
    const std::size_t d = rows[0].size();
    for (const Vec& r : rows)
        if (r.size() != d) throw std::invalid_argument("pca_fit: rows have mixed dimensions");
    if (k == 0 || k > std::min(n, d))
        throw std::invalid_argument("pca_fit: k=" + std::to_string(k) +
                                    " out of range, max is " +
                                    std::to_string(std::min(n, d)));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    // numerical rank of the centered data
    const double tol = static_cast<double>(std::max(n, d)) *
                       std::numeric_limits<double>::epsilon() * sv(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    if (rank < k)
        throw std::invalid_argument("pca_fit: centered data has rank " + std::to_string(rank) +
                                    ", cannot extract " + std::to_string(k) + " components");

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.basis.resize(k, Vec(d));
    model.explained_variance.resize(k);
    const Eigen::MatrixXd& v = svd.matrixV();  // d x k', columns are directions
    for (std::size_t c = 0; c < k; ++c) {
        Vec& row = model.basis[c];
        for (std::size_t j = 0; j < d; ++j) row[j] = v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
        // sign convention: component with the largest magnitude is positive;
        // first index wins ties
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(row[j]) > std::abs(row[arg])) arg = j;
        if (row[arg] < 0.0)
            for (double& x_j : row) x_j = -x_j;
        model.explained_variance[c] = sv(static_cast<Eigen::Index>(c)) * sv(static_cast<Eigen::Index>(c)) /
                                      static_cast<double>(n - 1);
    }
    return model;
}

/// Project v onto the model: basis * (v - mean). Output has `components()` entries.
inline Vec pca_transform(const PcaModel& model, const Vec& v) {
    if (v.size() != model.input_dim())
        throw std::invalid_argument("pca_transform: input dimension " + std::to_string(v.size()) +
                                    " does not match model dimension " +
                                    std::to_string(model.input_dim()));
    Vec centered(v);
    for (std::size_t j = 0; j < centered.size(); ++j) centered[j] -= model.mean[j];
    Vec out(model.components());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = dot(model.basis[c], centered);
    return out;
}

} // namespace qg
