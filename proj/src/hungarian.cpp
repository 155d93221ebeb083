#include "mndt/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mndt {

Assignment hungarian(std::span<const double> weights, std::size_t rows, std::size_t cols, bool maximize) {
    if (weights.size() != rows * cols) throw std::invalid_argument("weight matrix size mismatch");
    for (double w : weights)
        if (!std::isfinite(w)) throw std::invalid_argument("weights must be finite");

    Assignment out;
    out.row_to_col.assign(rows, -1);
    out.col_to_row.assign(cols, -1);
    if (rows == 0 || cols == 0) return out;

    // work on an n x m cost matrix with n <= m
    const bool transposed = rows > cols;
    const std::size_t n = transposed ? cols : rows;
    const std::size_t m = transposed ? rows : cols;
    const double sign = maximize ? -1.0 : 1.0;
    std::vector<double> a(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) a[i * m + j] = sign * (transposed ? weights[j * cols + i] : weights[i * cols + j]);

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            const double* row = a.data() + (i0 - 1) * m;
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        const std::size_t i = p[j] - 1, c = j - 1;
        const std::size_t r = transposed ? c : i;
        const std::size_t k = transposed ? i : c;
        out.row_to_col[r] = int(k);
        out.col_to_row[k] = int(r);
        out.weight += weights[r * cols + k];
    }
    return out;
}

} // namespace mndt
