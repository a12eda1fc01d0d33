#include "scoreinv/quadrature.hpp"

#include "scoreinv/error.hpp"

namespace scoreinv {

namespace {
void require_nodes(int n_points) {
  if (n_points < 3) {
    throw ParameterError("Simpson quadrature needs at least 3 nodes, got " + std::to_string(n_points));
  }
}
}  // namespace

std::vector<double> simpson_weights(int n_points) {
  require_nodes(n_points);
  const int intervals = n_points - 1;
  const double h = 1.0 / intervals;
  std::vector<double> w(static_cast<std::size_t>(n_points), 0.0);

  auto add_third_rule = [&](int first, int panels) {
    for (int p = 0; p < panels; ++p) {
      const int i = first + 2 * p;
      w[i] += h / 3.0;
      w[i + 1] += 4.0 * h / 3.0;
      w[i + 2] += h / 3.0;
    }
  };
  auto add_three_eighths = [&](int first) {
    w[first] += 3.0 * h / 8.0;
    w[first + 1] += 9.0 * h / 8.0;
    w[first + 2] += 9.0 * h / 8.0;
    w[first + 3] += 3.0 * h / 8.0;
  };

  if (intervals % 2 == 0) {
    add_third_rule(0, intervals / 2);
  } else {
    add_third_rule(0, (intervals - 3) / 2);
    add_three_eighths(intervals - 3);
  }
  return w;
}

double simpson_sum(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  const auto w = simpson_weights(n);

  bool symmetric = true;
  for (int k = 0; k < n / 2; ++k) symmetric = symmetric && w[k] == w[n - 1 - k];

  double total = 0.0;
  if (symmetric) {
    for (int k = 0; k < n / 2; ++k) total += w[k] * (values[k] + values[n - 1 - k]);
    if (n % 2 == 1) total += w[n / 2] * values[n / 2];
  } else {
    for (int k = 0; k < n; ++k) total += w[k] * values[k];
  }
  return total;
}

double simpson_integrate(const std::function<double(double)>& g, int n_points) {
  require_nodes(n_points);
  std::vector<double> values(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) values[k] = g(static_cast<double>(k) / (n_points - 1));
  return simpson_sum(values);
}

Tensor segment_node(const Tensor& a, const Tensor& b, int k, int n_points) {
  const double denom = n_points - 1;
  const double t = k / denom;
  const double s = (n_points - 1 - k) / denom;
  Tensor p = a * s;
  p.axpy(t, b);
  return p;
}

double simpson_line_integral(const VectorField& f, const Tensor& a, const Tensor& b, int n_points) {
  require_same_shape(a, b, "simpson_line_integral");
  require_nodes(n_points);
  const Tensor delta = b - a;
  std::vector<double> values(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) values[k] = dot(f(segment_node(a, b, k, n_points)), delta);
  return simpson_sum(values);
}

}  // namespace scoreinv
