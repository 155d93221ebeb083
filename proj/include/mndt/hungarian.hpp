#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mndt {

struct Assignment {
    std::vector<int> row_to_col; ///< -1 when the row is unmatched
    std::vector<int> col_to_row; ///< -1 when the column is unmatched
    double weight = 0.0;         ///< sum of the matched entries
};

/// Optimal assignment on a rows x cols row-major matrix of finite weights.
/// Every row is matched when rows <= cols, every column otherwise; the
/// leftover side is what a square padding with sentinel entries would absorb.
/// Runs in O(n^2 m) with n = min(rows, cols).
Assignment hungarian(std::span<const double> weights, std::size_t rows, std::size_t cols, bool maximize);

} // namespace mndt
