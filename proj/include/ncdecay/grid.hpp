#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ncdecay {

/// Nodes x_i = (i/N)^g on the reference interval [0, 1], g >= 1.
///
/// Unknowns live on the nodes; the control volume of interior node i is
/// [face(i-1), face(i)] where face(i) is the midpoint of edge [x_i, x_{i+1}].
class Grid {
public:
    static Grid uniform(std::size_t cells);
    static Grid graded(std::size_t cells, double grading);
    /// Uniform for alpha = 0, grading 1/(1 - alpha) otherwise.
    static Grid for_alpha(std::size_t cells, double alpha);

    std::size_t cells() const { return nodes_.size() - 1; }
    std::size_t size() const { return nodes_.size(); }
    double grading() const { return grading_; }

    std::span<const double> nodes() const { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    /// Length of edge [x_i, x_{i+1}].
    double edge(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    /// Midpoint of edge [x_i, x_{i+1}].
    double face(std::size_t i) const { return 0.5 * (nodes_[i] + nodes_[i + 1]); }
    /// Control-volume width; half an edge at the two boundary nodes.
    double control_width(std::size_t i) const;

    /// Piecewise-linear interpolation of nodal values at x in [0, 1].
    double interpolate(std::span<const double> values, double x) const;

private:
    Grid(std::vector<double> nodes, double grading);

    std::vector<double> nodes_;
    double grading_ = 1.0;
};

}  // namespace ncdecay
