#ifndef MOTIL_MATRIX_HPP
#define MOTIL_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace motil {

// Dense row-major matrix of doubles; rows are feature vectors.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c),
          data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& operator()(int r, int c) {
        return data[static_cast<std::size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    std::span<const double> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * cols,
                static_cast<std::size_t>(cols)};
    }
    std::span<double> row(int r) {
        return {data.data() + static_cast<std::size_t>(r) * cols,
                static_cast<std::size_t>(cols)};
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows_in) {
        Matrix m(static_cast<int>(rows_in.size()),
                 rows_in.empty() ? 0 : static_cast<int>(rows_in.front().size()));
        for (int r = 0; r < m.rows; ++r) {
            for (int c = 0; c < m.cols; ++c)
                m(r, c) = rows_in[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
        return m;
    }
};

} // namespace motil

#endif
