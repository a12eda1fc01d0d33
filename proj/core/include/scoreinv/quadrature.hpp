#pragma once

#include <functional>
#include <span>
#include <vector>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

using VectorField = std::function<Tensor(const Tensor&)>;

/// Default node count for line integrals: 4 Simpson intervals.
inline constexpr int kDefaultSimpsonNodes = 5;

/// Quadrature weights on [0, 1] for `n_points` equally spaced nodes.
///
/// Odd counts use composite Simpson 1/3. Four nodes use Simpson's 3/8 rule.
/// Larger even counts use composite 1/3 followed by one 3/8 panel. Throws
/// ParameterError for n_points < 3.
std::vector<double> simpson_weights(int n_points);

/// Weighted sum of integrand values at the equally spaced nodes of [0, 1].
/// Symmetric rules add node pairs (k, n-1-k) first, so reversing the
/// integration direction flips the sign of the result exactly.
double simpson_sum(std::span<const double> values);

/// Integrates g(t) over [0, 1].
double simpson_integrate(const std::function<double(double)>& g, int n_points);

/// Integral of f(a + t(b - a)) . (b - a) for t in [0, 1].
double simpson_line_integral(const VectorField& f, const Tensor& a, const Tensor& b,
                             int n_points = kDefaultSimpsonNodes);

/// Node k of n on the segment [a, b], computed as s*a + t*b so that the node
/// set of [b, a] is the reversed node set of [a, b] bit for bit.
Tensor segment_node(const Tensor& a, const Tensor& b, int k, int n_points);

}  // namespace scoreinv
