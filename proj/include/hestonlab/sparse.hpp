#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hestonlab {

/// Compressed sparse row matrix. Column indices are sorted within a row
/// and the diagonal is always stored.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;

    std::size_t nnz() const { return vals.size(); }
    double diagonal(std::size_t row) const;
    double at(std::size_t row, std::size_t col) const;
    /// Dense row-major copy; intended for small oracle checks.
    std::vector<double> dense() const;
};

/// Row-by-row builder; entries in a row may repeat and arrive unsorted.
class CsrBuilder {
public:
    explicit CsrBuilder(std::size_t rows);
    void add(std::size_t col, double value);
    /// Closes the current row and starts the next one.
    void finish_row(std::size_t row);
    CsrMatrix build();

private:
    CsrMatrix m_;
    std::vector<std::pair<std::size_t, double>> pending_;
};

/// Greedy colouring of the (symmetrised) sparsity graph restricted to
/// `rows`; rows of one colour never reference each other, so a projected
/// SOR sweep may update them concurrently. Deterministic in row order.
std::vector<std::vector<std::size_t>> colour_rows(const CsrMatrix& m, std::span<const std::size_t> rows);

}  // namespace hestonlab
