#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/kernel.hpp"
#include "sbpg/scalar_root.hpp"

namespace sbpg {

// sign(0) = 0 convention: |p| == tau maps to exactly 0.
inline double soft_threshold(double p, double tau) {
  const double m = std::fabs(p) - tau;
  if (m <= 0.0) return 0.0;
  return p > 0.0 ? m : -m;
}

inline std::vector<double> soft_threshold(std::span<const double> p, double tau) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = soft_threshold(p[i], tau);
  return out;
}

// Closed-form minimizer of
//   phi(W) + <p, W> + alpha*lambda1*||W||_1
// for the polynomial kernel: W = -t* . soft_threshold(p, alpha*lambda1),
// where t* in (0, 1] solves delta*||p+||^(r-2) * t^(r-1) + t - 1 = 0.
// The scale never exceeds 1, so ||W|| <= ||p+|| (the pull-back property).
inline std::vector<double> bregman_prox_l1(std::span<const double> p, double alpha,
                                           double lambda1, const KernelSpec& k) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("bregman_prox_l1: alpha must be positive");
  }
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw std::invalid_argument("bregman_prox_l1: lambda1 must be >= 0");
  }
  detail::require_finite(p, "bregman_prox_l1");

  std::vector<double> w = soft_threshold(p, alpha * lambda1);
  double t = 1.0;
  if (!k.euclidean()) {
    const double nrm = block_norm(w);
    const double c = k.delta * std::pow(nrm, k.degree - 2.0);
    t = solve_scale({.c = c, .rminus1 = k.degree - 1.0}).t;
  }
  for (double& v : w) v *= -t;
  return w;
}

// Kernel lookup for blockwise operations: either one shared spec or one per
// block.
inline const KernelSpec& kernel_for(std::span<const KernelSpec> kernels,
                                    std::size_t block, std::size_t block_count) {
  if (kernels.size() != 1 && kernels.size() != block_count) {
    throw std::invalid_argument("kernels: need 1 shared spec or one per block");
  }
  return kernels.size() == 1 ? kernels[0] : kernels[block];
}

// One mirror-prox step applied blockwise:
//   p_i   = alpha * v_i - grad phi_i(x_i)
//   out_i = argmin phi_i(W) + <p_i, W> + alpha*lambda1*||W||_1.
// v is the gradient estimate driving the step.
inline BlockVector bregman_prox_step(const BlockVector& x, const BlockVector& v,
                                     double alpha, double lambda1,
                                     std::span<const KernelSpec> kernels) {
  x.require_same_structure(v);
  BlockVector out;
  out.blocks.reserve(x.blocks.size());
  for (std::size_t i = 0; i < x.blocks.size(); ++i) {
    const KernelSpec& k = kernel_for(kernels, i, x.blocks.size());
    const auto& xb = x.blocks[i].values;
    const auto& vb = v.blocks[i].values;
    std::vector<double> p = phi_gradient(k, xb);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = alpha * vb[j] - p[j];
    out.blocks.push_back({x.blocks[i].name, bregman_prox_l1(p, alpha, lambda1, k)});
  }
  return out;
}

}  // namespace sbpg
