#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/problem.hpp"
#include "sbpg/rng.hpp"

namespace sbpg {

// Quadratic inverse problem
//   F(x)   = 1/(4n) * sum_i (<a_i, x>^2 - b_i)^2
//   Phi(x) = F(x) + lambda1 * ||x||_1
// with b_i = <a_i, x_true>^2, so x_true is a global minimizer of F. F is the
// mean over samples, so per-sample gradient scale does not grow with n and a
// single-sample estimator is exactly one incremental gradient.
struct QipInstance {
  long d = 0;
  long n = 0;
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  std::vector<double> a;       // n x d, row-major
  std::vector<double> b;       // n
  std::vector<double> x_true;  // d

  std::span<const double> row(long i) const { return {a.data() + i * d, static_cast<std::size_t>(d)}; }
};

// Draw order (fixed so instances are reproducible): the full a matrix
// row-major, then the support of x_true by partial Fisher-Yates, then the
// nonzero values. ceil(density*d) entries of x_true are nonzero.
inline QipInstance qip_generate(long d, long n, double density, double lambda1,
                                std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("qip_generate: need d >= 1, n >= 1");
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("qip_generate: density must be in (0, 1]");
  }
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw std::invalid_argument("qip_generate: lambda1 must be >= 0");
  }

  QipInstance inst;
  inst.d = d;
  inst.n = n;
  inst.seed = seed;
  inst.lambda1 = lambda1;

  Rng rng = Rng::derive(seed, kStreamInstance);
  inst.a.resize(static_cast<std::size_t>(n) * d);
  rng.fill_normal(inst.a);

  inst.x_true.assign(d, 0.0);
  const long nnz = static_cast<long>(std::ceil(density * static_cast<double>(d)));
  std::vector<long> idx(d);
  for (long i = 0; i < d; ++i) idx[i] = i;
  for (long i = 0; i < nnz; ++i) {
    const long j = i + static_cast<long>(rng.index(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[i], idx[j]);
  }
  for (long i = 0; i < nnz; ++i) inst.x_true[idx[i]] = rng.normal();

  inst.b.resize(n);
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    const auto r = inst.row(i);
    for (long j = 0; j < d; ++j) s += r[j] * inst.x_true[j];
    inst.b[i] = s * s;
  }
  return inst;
}

inline double qip_smooth_objective(const QipInstance& inst, std::span<const double> x) {
  double f = 0.0;
  for (long i = 0; i < inst.n; ++i) {
    const auto r = inst.row(i);
    double s = 0.0;
    for (long j = 0; j < inst.d; ++j) s += r[j] * x[j];
    const double e = s * s - inst.b[i];
    f += 0.25 * e * e;
  }
  return f / static_cast<double>(inst.n);
}

inline double qip_objective(const QipInstance& inst, std::span<const double> x) {
  double l1 = 0.0;
  for (double v : x) l1 += std::fabs(v);
  return qip_smooth_objective(inst, x) + inst.lambda1 * l1;
}

namespace detail {
// out += coef * (<a_i,x>^2 - b_i) * <a_i,x> * a_i
inline void qip_accumulate_sample(const QipInstance& inst, std::span<const double> x,
                                  long i, double coef, std::span<double> out) {
  const auto r = inst.row(i);
  double s = 0.0;
  for (long j = 0; j < inst.d; ++j) s += r[j] * x[j];
  const double w = coef * (s * s - inst.b[i]) * s;
  for (long j = 0; j < inst.d; ++j) out[j] += w * r[j];
}
}  // namespace detail

inline std::vector<double> qip_full_gradient(const QipInstance& inst,
                                             std::span<const double> x) {
  std::vector<double> g(inst.d, 0.0);
  for (long i = 0; i < inst.n; ++i) detail::qip_accumulate_sample(inst, x, i, 1.0, g);
  const double scale = 1.0 / static_cast<double>(inst.n);
  if (scale != 1.0) {
    for (double& v : g) v *= scale;
  }
  return g;
}

// Mean over the batch of per-sample gradients; expectation over uniform index
// draws is the full gradient of the mean F. The full batch 0..n-1 reproduces
// qip_full_gradient exactly (same accumulation order and final scale).
inline std::vector<double> qip_minibatch_gradient(const QipInstance& inst,
                                                  std::span<const double> x,
                                                  std::span<const long> indices) {
  if (indices.empty()) throw std::invalid_argument("qip_minibatch_gradient: empty batch");
  std::vector<double> g(inst.d, 0.0);
  for (long i : indices) {
    if (i < 0 || i >= inst.n) throw std::invalid_argument("qip_minibatch_gradient: index out of range");
    detail::qip_accumulate_sample(inst, x, i, 1.0, g);
  }
  const double scale = 1.0 / static_cast<double>(indices.size());
  if (scale != 1.0) {
    for (double& v : g) v *= scale;
  }
  return g;
}

// Smooth-adaptivity constant of F relative to the unit quartic kernel
// phi = 0.5||x||^2 + 0.25||x||^4:
//   L_F = (1/n) * sum_i (3*||A_i||^2 + ||A_i||*|b_i|),  A_i = a_i a_i^T,
// with ||A_i|| = ||a_i||^2; the mean matches the scale of the mean objective.
inline double qip_smooth_constant(const QipInstance& inst) {
  double L = 0.0;
  for (long i = 0; i < inst.n; ++i) {
    const auto r = inst.row(i);
    double sq = 0.0;
    for (long j = 0; j < inst.d; ++j) sq += r[j] * r[j];
    L += 3.0 * sq * sq + sq * std::fabs(inst.b[i]);
  }
  return L / static_cast<double>(inst.n);
}

// Binary instance file: magic "SBPGQIP1", then u64 d, n, seed, f64 lambda1,
// then a, b, x_true as raw little-endian doubles. Round-trips bit-exactly on
// the little-endian platforms this project targets.
inline void qip_save(const QipInstance& inst, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("qip_save: cannot open " + path);
  const char magic[8] = {'S', 'B', 'P', 'G', 'Q', 'I', 'P', '1'};
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(inst.d),
                                 static_cast<std::uint64_t>(inst.n), inst.seed};
  bool ok = std::fwrite(magic, 1, 8, f) == 8 && std::fwrite(dims, 8, 3, f) == 3 &&
            std::fwrite(&inst.lambda1, 8, 1, f) == 1 &&
            std::fwrite(inst.a.data(), 8, inst.a.size(), f) == inst.a.size() &&
            std::fwrite(inst.b.data(), 8, inst.b.size(), f) == inst.b.size() &&
            std::fwrite(inst.x_true.data(), 8, inst.x_true.size(), f) == inst.x_true.size();
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw std::runtime_error("qip_save: write failed for " + path);
}

inline QipInstance qip_load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("qip_load: cannot open " + path);
  char magic[8];
  std::uint64_t dims[3];
  QipInstance inst;
  bool ok = std::fread(magic, 1, 8, f) == 8 && std::memcmp(magic, "SBPGQIP1", 8) == 0 &&
            std::fread(dims, 8, 3, f) == 3 && std::fread(&inst.lambda1, 8, 1, f) == 1;
  if (ok) {
    inst.d = static_cast<long>(dims[0]);
    inst.n = static_cast<long>(dims[1]);
    inst.seed = dims[2];
    ok = inst.d >= 1 && inst.n >= 1;
  }
  if (ok) {
    inst.a.resize(static_cast<std::size_t>(inst.n) * inst.d);
    inst.b.resize(inst.n);
    inst.x_true.resize(inst.d);
    ok = std::fread(inst.a.data(), 8, inst.a.size(), f) == inst.a.size() &&
         std::fread(inst.b.data(), 8, inst.b.size(), f) == inst.b.size() &&
         std::fread(inst.x_true.data(), 8, inst.x_true.size(), f) == inst.x_true.size();
  }
  std::fclose(f);
  if (!ok) throw std::runtime_error("qip_load: malformed instance file " + path);
  return inst;
}

class QipProblem : public Problem {
 public:
  explicit QipProblem(QipInstance inst) : inst_(std::move(inst)) {}

  const QipInstance& instance() const { return inst_; }

  double objective(const BlockVector& x) const override {
    return qip_objective(inst_, values(x));
  }

  BlockVector full_gradient(const BlockVector& x) const override {
    return BlockVector::single("x", qip_full_gradient(inst_, values(x)));
  }

  BlockVector minibatch_gradient(const BlockVector& x, long m, Rng& rng) const override {
    if (m < 1) throw std::invalid_argument("minibatch_gradient: m must be >= 1");
    std::vector<long> idx(m);
    for (long j = 0; j < m; ++j) {
      idx[j] = static_cast<long>(rng.index(static_cast<std::uint64_t>(inst_.n)));
    }
    return BlockVector::single("x", qip_minibatch_gradient(inst_, values(x), idx));
  }

  long sample_count() const override { return inst_.n; }

  BlockVector zero_point() const override {
    return BlockVector::single("x", std::vector<double>(inst_.d, 0.0));
  }

  // Phi at the planted signal; the relative-gap reference of the epsilon_k
  // criterion (F(x_true) = 0 by construction).
  double reference_objective() const {
    double l1 = 0.0;
    for (double v : inst_.x_true) l1 += std::fabs(v);
    return inst_.lambda1 * l1;
  }

 private:
  static std::span<const double> values(const BlockVector& x) {
    if (x.blocks.size() != 1) throw std::invalid_argument("QipProblem: expected one block");
    return x.blocks[0].values;
  }

  QipInstance inst_;
};

}  // namespace sbpg
