#include "ncdecay/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ncdecay/error.hpp"

namespace ncdecay {

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
}

std::vector<double> Tridiagonal::apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
}

std::vector<double> Tridiagonal::solve(std::span<const double> rhs) const {
    const std::size_t n = size();
    if (rhs.size() != n) throw InvalidArgument("solver", "right-hand side size mismatch");
    std::vector<double> c(n), d(n);
    double max_diag = 0.0;
    for (double v : diag) max_diag = std::max(max_diag, std::abs(v));
    double min_pivot = std::numeric_limits<double>::infinity();
    double pivot = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) pivot = diag[i] - lower[i] * c[i - 1];
        min_pivot = std::min(min_pivot, std::abs(pivot));
        if (!(std::abs(pivot) > 0.0) || !std::isfinite(pivot)) {
            std::ostringstream os;
            os << "tridiagonal solve broke down at row " << i << " (min |pivot| / max |diag| = "
               << min_pivot / max_diag << ")";
            throw NumericalFailure("solver", os.str());
        }
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - (i > 0 ? lower[i] * d[i - 1] : 0.0)) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace ncdecay
