#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "causalite/matrix.hpp"

namespace causalite {

/// Plane (p, q) rotation by theta embedded in an n x n identity.
inline DoubleMatrix givens(std::size_t n, std::size_t p, std::size_t q, double theta) {
    if (p >= q || q >= n) throw std::invalid_argument("bad rotation plane");
    DoubleMatrix g = DoubleMatrix::identity(n);
    double c = std::cos(theta), s = std::sin(theta);
    g.at(p, p) = c;
    g.at(p, q) = -s;
    g.at(q, p) = s;
    g.at(q, q) = c;
    return g;
}

/// The rotation planes in the canonical order (0,1),(0,2),...,(n-2,n-1).
inline std::vector<std::pair<std::size_t, std::size_t>> rotation_planes(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> planes;
    for (std::size_t p = 0; p + 1 < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) planes.emplace_back(p, q);
    return planes;
}

/// n(n-1)/2 plane-rotation angles assembling (left-to-right product, planes
/// in canonical order) into a special orthogonal matrix.
struct RotationParam {
    std::size_t dimension = 0;
    std::vector<double> angles;

    RotationParam() = default;
    explicit RotationParam(std::size_t n)
        : dimension(n), angles(n * (n - 1) / 2, 0.0) {}
    RotationParam(std::size_t n, std::vector<double> a) : dimension(n), angles(std::move(a)) {
        if (angles.size() != n * (n - 1) / 2)
            throw std::invalid_argument("angle count must be n(n-1)/2");
    }

    DoubleMatrix assemble() const {
        DoubleMatrix m = DoubleMatrix::identity(dimension);
        auto planes = rotation_planes(dimension);
        for (std::size_t k = 0; k < planes.size(); ++k)
            m = m * givens(dimension, planes[k].first, planes[k].second, angles[k]);
        return m;
    }
};

/// max |(R^T R - I)_{ij}|
inline double orthogonality_error(const DoubleMatrix& r) {
    DoubleMatrix gram = r.transposed() * r;
    double err = 0.0;
    for (std::size_t i = 0; i < gram.rows; ++i)
        for (std::size_t j = 0; j < gram.cols; ++j) {
            double want = i == j ? 1.0 : 0.0;
            err = std::max(err, std::abs(gram.at(i, j) - want));
        }
    return err;
}

/// Determinant via LU with partial pivoting; for the +1 orientation check.
inline double determinant(DoubleMatrix m) {
    if (m.rows != m.cols) throw std::invalid_argument("determinant of non-square matrix");
    double det = 1.0;
    for (std::size_t k = 0; k < m.rows; ++k) {
        std::size_t pivot = k;
        for (std::size_t r = k + 1; r < m.rows; ++r)
            if (std::abs(m.at(r, k)) > std::abs(m.at(pivot, k))) pivot = r;
        if (m.at(pivot, k) == 0.0) return 0.0;
        if (pivot != k) {
            for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(k, c), m.at(pivot, c));
            det = -det;
        }
        det *= m.at(k, k);
        for (std::size_t r = k + 1; r < m.rows; ++r) {
            double f = m.at(r, k) / m.at(k, k);
            for (std::size_t c = k; c < m.cols; ++c) m.at(r, c) -= f * m.at(k, c);
        }
    }
    return det;
}

/// Factor a special orthogonal matrix into canonical-order plane-rotation
/// angles: choose the (0,*) angles so their product matches the first
/// column (generalized spherical coordinates), peel it off, recurse on the
/// trailing block. assemble() of the result reproduces the input to float
/// precision.
inline RotationParam factor_rotation(const DoubleMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("factor_rotation needs a square matrix");
    std::size_t n = m.rows;
    if (orthogonality_error(m) > 1e-6)
        throw std::invalid_argument("factor_rotation needs an orthogonal matrix");
    if (determinant(m) < 0)
        throw std::invalid_argument("factor_rotation needs determinant +1");

    RotationParam out(n);
    DoubleMatrix rest = m;
    std::size_t angle_base = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        // Angles for planes (p, p+1), ..., (p, n-1): generalized spherical
        // coordinates of column p below row p. The product
        // G(p,p+1,t1)...G(p,n-1,tk) maps e_p to
        //   (cos t1 ... cos tk, sin t1 cos t2 ... cos tk, ..., sin tk)
        // in coordinates p..n-1; solve from the bottom with atan2. The
        // innermost angle sees the signed leading component, the rest see
        // nonnegative partial norms.
        std::size_t k = n - 1 - p;
        std::vector<double> col(n - p);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = rest.at(p + i, p);
        std::vector<double> partial(col.size(), 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < col.size(); ++i) {
            acc += col[i] * col[i];
            partial[i] = std::sqrt(acc);
        }
        std::vector<double> theta(k, 0.0);
        for (std::size_t j = k; j >= 1; --j)
            theta[j - 1] = std::atan2(col[j], j == 1 ? col[0] : partial[j - 1]);
        for (std::size_t j = 0; j < k; ++j) out.angles[angle_base + j] = theta[j];

        DoubleMatrix peel = DoubleMatrix::identity(n);
        for (std::size_t j = 0; j < k; ++j)
            peel = peel * givens(n, p, p + 1 + j, theta[j]);
        rest = peel.transposed() * rest;
        angle_base += k;
    }
    return out;
}

}  // namespace causalite
