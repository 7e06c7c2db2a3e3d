#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ncdecay {

/// Square tridiagonal matrix stored by diagonals; row i holds
/// lower[i] (column i-1), diag[i], upper[i] (column i+1). lower[0] and
/// upper[n-1] are unused and kept at zero.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    std::size_t size() const { return diag.size(); }

    /// y = A x.
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;

    /// Thomas algorithm. Throws NumericalFailure (with the smallest pivot
    /// relative to the largest diagonal magnitude) on breakdown.
    std::vector<double> solve(std::span<const double> rhs) const;
};

}  // namespace ncdecay
