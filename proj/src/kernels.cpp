#include "hestonlab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "hestonlab/norms.hpp"

namespace hestonlab {

double CsrMatrix::diagonal(std::size_t row) const { return at(row, row); }

double CsrMatrix::at(std::size_t row, std::size_t col) const {
    const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
    const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
    auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return 0.0;
    return vals[static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> CsrMatrix::dense() const {
    std::vector<double> d(rows * rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d[i * rows + cols[k]] = vals[k];
    return d;
}

CsrBuilder::CsrBuilder(std::size_t rows) {
    m_.rows = rows;
    m_.row_ptr.reserve(rows + 1);
}

void CsrBuilder::add(std::size_t col, double value) { pending_.emplace_back(col, value); }

void CsrBuilder::finish_row(std::size_t row) {
    pending_.emplace_back(row, 0.0);
    std::sort(pending_.begin(), pending_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t k = 0;
    while (k < pending_.size()) {
        const std::size_t col = pending_[k].first;
        double sum = 0.0;
        for (; k < pending_.size() && pending_[k].first == col; ++k) sum += pending_[k].second;
        if (sum != 0.0 || col == row) {
            m_.cols.push_back(col);
            m_.vals.push_back(sum);
        }
    }
    m_.row_ptr.push_back(m_.cols.size());
    pending_.clear();
}

CsrMatrix CsrBuilder::build() { return std::move(m_); }

std::vector<std::vector<std::size_t>> colour_rows(const CsrMatrix& m, std::span<const std::size_t> rows) {
    // Symmetrised adjacency so that a row is never updated concurrently with
    // a row it reads or that reads it.
    std::vector<std::vector<std::size_t>> adj(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const std::size_t j = m.cols[k];
            if (j == i) continue;
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> colour(m.rows, kNone);
    std::vector<std::vector<std::size_t>> classes;
    std::vector<char> used;
    for (std::size_t i : rows) {
        used.assign(classes.size() + 1, 0);
        for (std::size_t j : adj[i])
            if (colour[j] != kNone) used[colour[j]] = 1;
        std::size_t c = 0;
        while (used[c]) ++c;
        colour[i] = c;
        if (c == classes.size()) classes.emplace_back();
        classes[c].push_back(i);
    }
    return classes;
}

namespace kernels {

namespace {

inline double row_dot(const CsrMatrix& m, std::size_t i, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) s += m.vals[k] * x[m.cols[k]];
    return s;
}

inline double psor_update(const CsrMatrix& m, std::size_t i, std::span<const double> f,
                          std::span<const double> lower, double omega, std::span<double> u) {
    double diag = 0.0;
    double s = 0.0;
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
        s += m.vals[k] * u[m.cols[k]];
        if (m.cols[k] == i) diag = m.vals[k];
    }
    const double next = std::max(lower[i], u[i] + omega * (f[i] - s) / diag);
    const double change = std::abs(next - u[i]);
    u[i] = next;
    return change;
}

inline double quotient(const PointSamples& s, std::size_t a, std::size_t b, double alpha) {
    const double d = cycloidal_distance({s.x[a], s.y[a]}, {s.x[b], s.y[b]});
    if (d <= 0.0) return 0.0;
    return std::abs(s.v[a] - s.v[b]) / std::pow(d, alpha);
}

}  // namespace

void matvec(const CsrMatrix& m, std::span<const double> x, std::span<double> y, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(m.rows);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = row_dot(m, static_cast<std::size_t>(i), x);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = row_dot(m, static_cast<std::size_t>(i), x);
}

double psor_sweep(const CsrMatrix& m, std::span<const double> f, std::span<const double> lower,
                  const std::vector<std::vector<std::size_t>>& colours, double omega,
                  std::span<double> u, Exec exec) {
    double change = 0.0;
    for (const auto& cls : colours) {
        const auto n = static_cast<std::ptrdiff_t>(cls.size());
        if (exec == Exec::serial) {
            for (std::ptrdiff_t k = 0; k < n; ++k)
                change = std::max(change, psor_update(m, cls[static_cast<std::size_t>(k)], f, lower, omega, u));
        } else {
#pragma omp parallel for schedule(static) reduction(max : change)
            for (std::ptrdiff_t k = 0; k < n; ++k)
                change = std::max(change, psor_update(m, cls[static_cast<std::size_t>(k)], f, lower, omega, u));
        }
    }
    return change;
}

double holder_all_pairs(const PointSamples& s, double alpha, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(s.size());
    double best = 0.0;
    if (exec == Exec::serial) {
        for (std::ptrdiff_t a = 0; a < n; ++a)
            for (std::ptrdiff_t b = a + 1; b < n; ++b)
                best = std::max(best, quotient(s, static_cast<std::size_t>(a), static_cast<std::size_t>(b), alpha));
        return best;
    }
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
    for (std::ptrdiff_t a = 0; a < n; ++a)
        for (std::ptrdiff_t b = a + 1; b < n; ++b)
            best = std::max(best, quotient(s, static_cast<std::size_t>(a), static_cast<std::size_t>(b), alpha));
    return best;
}

double holder_pair_list(const PointSamples& s, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                        double alpha, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
    double best = 0.0;
    if (exec == Exec::serial) {
        for (std::ptrdiff_t k = 0; k < n; ++k)
            best = std::max(best, quotient(s, pairs[k].first, pairs[k].second, alpha));
        return best;
    }
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        best = std::max(best, quotient(s, pairs[k].first, pairs[k].second, alpha));
    return best;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec) {
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t k = 0; k < count; ++k) body(static_cast<std::size_t>(k));
        return;
    }
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < count; ++k) body(static_cast<std::size_t>(k));
}

int set_threads(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
    return omp_get_max_threads();
}

}  // namespace kernels

}  // namespace hestonlab
