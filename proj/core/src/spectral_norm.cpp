#include <cmath>

#include "scoreinv/dsm.hpp"
#include "scoreinv/error.hpp"

namespace scoreinv {

double spectral_normalize(Eigen::MatrixXd& weight, double target, int iters, Eigen::VectorXd& u) {
  if (iters < 1) throw ParameterError("spectral_normalize needs iters >= 1");
  if (!(target > 0.0)) throw ParameterError("spectral target must be positive");
  if (u.size() != weight.rows() || u.norm() == 0.0) {
    // Deterministic, generic starting direction.
    RngStream rng(0x5EC7, static_cast<std::uint64_t>(weight.rows()));
    u.resize(weight.rows());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.gaussian();
    u.normalize();
  }
  Eigen::VectorXd v;
  for (int it = 0; it < iters; ++it) {
    v = weight.transpose() * u;
    const double vn = v.norm();
    if (vn == 0.0) return 0.0;
    v /= vn;
    u = weight * v;
    const double un = u.norm();
    if (un == 0.0) return 0.0;
    u /= un;
  }
  const double sigma = u.dot(weight * v);
  if (sigma > target) weight *= target / sigma;
  return sigma;
}

Eigen::MatrixXd spectral_normalize(const Eigen::MatrixXd& weight, double target, int iters) {
  Eigen::MatrixXd w = weight;
  Eigen::VectorXd u;
  spectral_normalize(w, target, iters, u);
  return w;
}

void spectral_normalize_network(ScoreNetwork& net, double target, int iters) {
  for (auto& layer : net.layers()) spectral_normalize(layer.weight, target, iters, layer.power_u);
}

}  // namespace scoreinv
