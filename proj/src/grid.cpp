#include "ncdecay/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ncdecay/error.hpp"

namespace ncdecay {

Grid::Grid(std::vector<double> nodes, double grading)
    : nodes_(std::move(nodes)), grading_(grading) {}

Grid Grid::uniform(std::size_t cells) { return graded(cells, 1.0); }

Grid Grid::graded(std::size_t cells, double grading) {
    if (cells < 2) throw InvalidArgument("solver", "grid needs at least two cells");
    if (!(grading >= 1.0)) throw InvalidArgument("solver", "grading parameter must be >= 1");
    std::vector<double> x(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(cells);
        x[i] = grading == 1.0 ? s : std::pow(s, grading);
    }
    x.front() = 0.0;
    x.back() = 1.0;
    for (std::size_t i = 1; i <= cells; ++i)
        if (!(x[i] > x[i - 1]))
            throw InvalidArgument("solver", "grading too strong: nodes are not strictly increasing");
    return Grid(std::move(x), grading);
}

Grid Grid::for_alpha(std::size_t cells, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw InvalidArgument("solver", "degeneracy exponent alpha must lie in [0, 1)");
    return alpha == 0.0 ? uniform(cells) : graded(cells, 1.0 / (1.0 - alpha));
}

double Grid::control_width(std::size_t i) const {
    if (i == 0) return 0.5 * edge(0);
    if (i == cells()) return 0.5 * edge(cells() - 1);
    return 0.5 * (nodes_[i + 1] - nodes_[i - 1]);
}

double Grid::interpolate(std::span<const double> values, double x) const {
    if (values.size() != nodes_.size())
        throw InvalidArgument("solver", "value count does not match the grid");
    if (x <= 0.0) return values.front();
    if (x >= 1.0) return values.back();
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double w = (x - nodes_[j]) / (nodes_[j + 1] - nodes_[j]);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

}  // namespace ncdecay
