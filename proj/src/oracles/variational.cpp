#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ncdecay/oracles.hpp"

namespace ncdecay::oracle {

// With s = x^{1-alpha}: u_j = sin(j pi s), so
//   ∫P u_j' u_k' dx = (1-alpha) ∫_0^1 (P(x)/x^alpha) j k pi^2 cos cos ds,
//   ∫K u_j u_k dx   = 1/(1-alpha) ∫_0^1 K(x) x^alpha sin sin ds,
// both with smooth integrands in s.
VariationalResult variational_minimum(const SturmLiouville& p, int modes, int max_sweeps) {
    if (modes < 1) throw std::invalid_argument("need at least one mode");
    const double e = 1.0 - p.alpha;
    const std::size_t m = static_cast<std::size_t>(modes);
    std::vector<double> A(m * m, 0.0), B(m * m, 0.0);

    // Composite Gauss-Legendre in s, 64 panels x 20 points.
    constexpr int panels = 64;
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& abscissa = GL::abscissa();
    const auto& weights = GL::weights();
    std::vector<double> cs(m), sn(m);
    for (int panel = 0; panel < panels; ++panel) {
        const double a = static_cast<double>(panel) / panels, b = static_cast<double>(panel + 1) / panels;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < abscissa.size(); ++q) {
            for (int sgn : {-1, 1}) {
                if (abscissa[q] == 0.0 && sgn == 1) continue;
                const double s = mid + sgn * half * abscissa[q];
                const double w = half * weights[q];
                const double x = std::pow(s, 1.0 / e);
                const double xa = p.alpha == 0.0 ? 1.0 : std::pow(x, p.alpha);
                const double stiff = e * p.P(x) / xa;
                const double mass = p.K(x) * xa / e;
                for (std::size_t j = 0; j < m; ++j) {
                    const double f = (j + 1) * std::numbers::pi;
                    cs[j] = f * std::cos(f * s);
                    sn[j] = std::sin(f * s);
                }
                for (std::size_t j = 0; j < m; ++j)
                    for (std::size_t k = 0; k < m; ++k) {
                        A[j * m + k] += w * stiff * cs[j] * cs[k];
                        B[j * m + k] += w * mass * sn[j] * sn[k];
                    }
            }
        }
    }

    std::vector<double> c(m, 0.0);
    c[0] = 1.0;
    auto J = [&](const std::vector<double>& v) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                num += v[j] * A[j * m + k] * v[k];
                den += v[j] * B[j * m + k] * v[k];
            }
        return num / den;
    };

    VariationalResult r;
    double current = J(c);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double before = current;
        for (std::size_t j = 1; j < m; ++j) {
            // c_0 stays 1 (J is scale invariant), search c_j on a bracket
            // scaled by the current magnitude.
            const double width = std::max(1e-3, 4.0 * std::abs(c[j]) + 1e-2 / (j + 1.0));
            auto line = [&](double v) {
                std::vector<double> trial = c;
                trial[j] = v;
                return J(trial);
            };
            const auto best = boost::math::tools::brent_find_minima(line, c[j] - width,
                                                                    c[j] + width, 52);
            if (best.second < current) {
                c[j] = best.first;
                current = best.second;
            }
        }
        r.sweeps = sweep + 1;
        if (before - current <= 1e-15 * current) break;
    }
    r.value = current;
    r.coefficients = c;
    return r;
}

}  // namespace ncdecay::oracle
