#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "causalite/rational.hpp"

namespace causalite {

/// Dense rational matrix, row-major. Small fixed networks only.
struct RatMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rat> data;

    RatMatrix() = default;
    RatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Rat(0)) {}

    Rat& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Rat& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static RatMatrix from_rows(const std::vector<std::vector<long>>& rows_in) {
        RatMatrix m(rows_in.size(), rows_in.empty() ? 0 : rows_in.front().size());
        for (std::size_t r = 0; r < m.rows; ++r) {
            if (rows_in[r].size() != m.cols) throw std::invalid_argument("ragged matrix");
            for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = Rat(rows_in[r][c]);
        }
        return m;
    }

    RatMatrix transposed() const {
        RatMatrix t(cols, rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
        return t;
    }

    friend bool operator==(const RatMatrix& a, const RatMatrix& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
    }
};

/// Dense double matrix for the search objective.
struct DoubleMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DoubleMatrix() = default;
    DoubleMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static DoubleMatrix identity(std::size_t n) {
        DoubleMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    DoubleMatrix transposed() const {
        DoubleMatrix t(cols, rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
        return t;
    }

    friend DoubleMatrix operator*(const DoubleMatrix& a, const DoubleMatrix& b) {
        if (a.cols != b.rows) throw std::invalid_argument("matrix shape mismatch");
        DoubleMatrix m(a.rows, b.cols);
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t k = 0; k < a.cols; ++k) {
                double v = a.at(r, k);
                if (v == 0.0) continue;
                for (std::size_t c = 0; c < b.cols; ++c) m.at(r, c) += v * b.at(k, c);
            }
        return m;
    }

    RatMatrix to_exact() const {
        RatMatrix m(rows, cols);
        for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = rat_from_double(data[i]);
        return m;
    }
};

/// row vector · matrix
inline std::vector<double> row_times(const std::vector<double>& v, const DoubleMatrix& m) {
    if (v.size() != m.rows) throw std::invalid_argument("shape mismatch");
    std::vector<double> out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double x = v[r];
        if (x == 0.0) continue;
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += x * m.at(r, c);
    }
    return out;
}

}  // namespace causalite
