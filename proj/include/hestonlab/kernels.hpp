#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hestonlab/sparse.hpp"

/// Hot loops with a serial reference and an OpenMP variant. Both variants
/// perform identical floating-point operations in identical order per
/// output entry, so their results agree bit for bit.
namespace hestonlab::kernels {

enum class Exec { serial, parallel };

/// y = M x
void matvec(const CsrMatrix& m, std::span<const double> x, std::span<double> y, Exec exec);

/// One projected SOR sweep over the colour classes in order:
///   u_i <- max(lower_i, u_i + omega (f_i - (M u)_i) / M_ii).
/// Rows not listed in any class are left untouched. Returns the largest
/// absolute change.
double psor_sweep(const CsrMatrix& m, std::span<const double> f, std::span<const double> lower,
                  const std::vector<std::vector<std::size_t>>& colours, double omega,
                  std::span<double> u, Exec exec);

/// Scattered samples for difference-quotient scans.
struct PointSamples {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> v;
    std::size_t size() const { return v.size(); }
};

/// max |v_a - v_b| / s(a, b)^alpha over all pairs a < b.
double holder_all_pairs(const PointSamples& s, double alpha, Exec exec);

/// Same quotient over the listed index pairs.
double holder_pair_list(const PointSamples& s, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                        double alpha, Exec exec);

/// Calls body(k) for k in [0, n); iterations must be independent.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec);

/// Sets the OpenMP thread count when positive; returns the active maximum.
int set_threads(int threads);

}  // namespace hestonlab::kernels
