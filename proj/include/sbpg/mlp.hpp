#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/problem.hpp"
#include "sbpg/rng.hpp"

namespace sbpg {

// Twice continuously differentiable ReLU surrogate:
//   0                          x <= 0
//   x^3 (1/e^2 - x/(2 e^3))    0 < x <= e
//   x - e/2                    x > e
// sup |relu - sigma_e| = e/2, attained at x = e.
inline double smoothed_relu(double x, double eps) {
  if (x <= 0.0) return 0.0;
  if (x <= eps) return x * x * x * (1.0 / (eps * eps) - x / (2.0 * eps * eps * eps));
  return x - 0.5 * eps;
}

inline double smoothed_relu_grad(double x, double eps) {
  if (x <= 0.0) return 0.0;
  if (x <= eps) return x * x * (3.0 / (eps * eps) - 2.0 * x / (eps * eps * eps));
  return 1.0;
}

inline double smoothed_relu_second(double x, double eps) {
  if (x <= 0.0 || x > eps) return 0.0;
  return 6.0 * x / (eps * eps) - 6.0 * x * x / (eps * eps * eps);
}

// Fully connected net with smoothed-ReLU hidden layers and a linear output,
// no biases. Weights live in one block per layer ("layer0", ...), each block
// the dims[l+1] x dims[l] matrix flattened row-major. lambda2 is decoupled
// weight decay: it never enters the loss or its gradient.
struct MlpModel {
  std::vector<long> dims;
  double eps = 0.1;
  double lambda2 = 0.0;

  void validate() const {
    if (dims.size() < 2) throw std::invalid_argument("MlpModel: need at least two dims");
    for (long v : dims) {
      if (v < 1) throw std::invalid_argument("MlpModel: dims must be >= 1");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw std::invalid_argument("MlpModel: eps must be positive");
    }
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
      throw std::invalid_argument("MlpModel: lambda2 must be >= 0");
    }
  }

  std::size_t layer_count() const { return dims.size() - 1; }

  BlockVector zero_weights() const {
    BlockVector w;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      w.blocks.push_back({"layer" + std::to_string(l),
                          std::vector<double>(static_cast<std::size_t>(dims[l + 1]) * dims[l], 0.0)});
    }
    return w;
  }
};

// W ~ scale * N(0, 1/fan_in), drawn layer by layer, row-major.
inline BlockVector mlp_init(const MlpModel& model, double scale, Rng& rng) {
  model.validate();
  BlockVector w = model.zero_weights();
  for (std::size_t l = 0; l < w.blocks.size(); ++l) {
    const double s = scale / std::sqrt(static_cast<double>(model.dims[l]));
    for (double& v : w.blocks[l].values) v = s * rng.normal();
  }
  return w;
}

// Forward pass; returns the output layer activations.
inline std::vector<double> mlp_forward(const MlpModel& model, const BlockVector& w,
                                       std::span<const double> x) {
  const std::size_t L = model.layer_count();
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t l = 0; l < L; ++l) {
    const long rows = model.dims[l + 1];
    const long cols = model.dims[l];
    const auto& W = w.blocks[l].values;
    std::vector<double> z(rows, 0.0);
    for (long r = 0; r < rows; ++r) {
      double s = 0.0;
      for (long c = 0; c < cols; ++c) s += W[r * cols + c] * h[c];
      z[r] = s;
    }
    if (l + 1 < L) {
      for (double& v : z) v = smoothed_relu(v, model.eps);
    }
    h = std::move(z);
  }
  return h;
}

struct MlpDataset {
  long count = 0;
  long din = 0;
  long dout = 0;
  std::vector<double> x;  // count x din, row-major
  std::vector<double> y;  // count x dout, row-major

  std::span<const double> input(long i) const { return {x.data() + i * din, static_cast<std::size_t>(din)}; }
  std::span<const double> target(long i) const { return {y.data() + i * dout, static_cast<std::size_t>(dout)}; }
};

// Synthetic regression data: inputs standard normal, targets from a teacher
// net with the same architecture plus optional Gaussian noise. Per sample the
// draw order is inputs first, then (if noise > 0) the target noise.
inline std::pair<MlpDataset, BlockVector> mlp_teacher_data(const MlpModel& model, long count,
                                                           double noise, std::uint64_t seed) {
  model.validate();
  if (count < 1) throw std::invalid_argument("mlp_teacher_data: count must be >= 1");
  Rng teacher_rng = Rng::derive(seed, kStreamInstance);
  BlockVector teacher = mlp_init(model, 1.0, teacher_rng);

  MlpDataset data;
  data.count = count;
  data.din = model.dims.front();
  data.dout = model.dims.back();
  data.x.resize(static_cast<std::size_t>(count) * data.din);
  data.y.resize(static_cast<std::size_t>(count) * data.dout);

  Rng rng = Rng::derive(seed, kStreamData);
  for (long i = 0; i < count; ++i) {
    std::span<double> xi{data.x.data() + i * data.din, static_cast<std::size_t>(data.din)};
    rng.fill_normal(xi);
    std::vector<double> out = mlp_forward(model, teacher, xi);
    for (long j = 0; j < data.dout; ++j) {
      data.y[i * data.dout + j] = out[j] + (noise > 0.0 ? noise * rng.normal() : 0.0);
    }
  }
  return {std::move(data), std::move(teacher)};
}

struct MlpEval {
  double loss = 0.0;
  BlockVector gradient;
};

// Mean over the batch of 0.5*||f(x) - y||^2 and its analytic gradient.
// Weight decay is excluded here by design (it is applied decoupled).
inline MlpEval mlp_loss_and_gradient(const MlpModel& model, const BlockVector& w,
                                     const MlpDataset& data, std::span<const long> indices) {
  if (indices.empty()) throw std::invalid_argument("mlp_loss_and_gradient: empty batch");
  const std::size_t L = model.layer_count();

  MlpEval out;
  out.gradient = model.zero_weights();

  std::vector<std::vector<double>> acts(L + 1);  // acts[0] = input, acts[l+1] = layer l output
  std::vector<std::vector<double>> zs(L);        // pre-activations
  for (long idx : indices) {
    if (idx < 0 || idx >= data.count) {
      throw std::invalid_argument("mlp_loss_and_gradient: index out of range");
    }
    const auto xi = data.input(idx);
    acts[0].assign(xi.begin(), xi.end());
    for (std::size_t l = 0; l < L; ++l) {
      const long rows = model.dims[l + 1];
      const long cols = model.dims[l];
      const auto& W = w.blocks[l].values;
      zs[l].assign(rows, 0.0);
      for (long r = 0; r < rows; ++r) {
        double s = 0.0;
        for (long c = 0; c < cols; ++c) s += W[r * cols + c] * acts[l][c];
        zs[l][r] = s;
      }
      if (l + 1 < L) {
        acts[l + 1].resize(rows);
        for (long r = 0; r < rows; ++r) acts[l + 1][r] = smoothed_relu(zs[l][r], model.eps);
      } else {
        acts[l + 1] = zs[l];
      }
    }

    const auto yi = data.target(idx);
    std::vector<double> delta(data.dout);
    for (long j = 0; j < data.dout; ++j) {
      const double e = acts[L][j] - yi[j];
      out.loss += 0.5 * e * e;
      delta[j] = e;
    }
    for (std::size_t l = L; l-- > 0;) {
      const long rows = model.dims[l + 1];
      const long cols = model.dims[l];
      auto& G = out.gradient.blocks[l].values;
      for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) G[r * cols + c] += delta[r] * acts[l][c];
      }
      if (l > 0) {
        const auto& W = w.blocks[l].values;
        std::vector<double> prev(cols, 0.0);
        for (long c = 0; c < cols; ++c) {
          double s = 0.0;
          for (long r = 0; r < rows; ++r) s += W[r * cols + c] * delta[r];
          prev[c] = s * smoothed_relu_grad(zs[l - 1][c], model.eps);
        }
        delta = std::move(prev);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(indices.size());
  out.loss *= inv;
  out.gradient.scale(inv);
  return out;
}

class MlpProblem : public Problem {
 public:
  MlpProblem(MlpModel model, MlpDataset data)
      : model_(std::move(model)), data_(std::move(data)) {
    model_.validate();
  }

  const MlpModel& model() const { return model_; }

  double objective(const BlockVector& w) const override {
    return mlp_loss_and_gradient(model_, w, data_, all_indices()).loss;
  }

  BlockVector full_gradient(const BlockVector& w) const override {
    return mlp_loss_and_gradient(model_, w, data_, all_indices()).gradient;
  }

  BlockVector minibatch_gradient(const BlockVector& w, long m, Rng& rng) const override {
    if (m < 1) throw std::invalid_argument("minibatch_gradient: m must be >= 1");
    std::vector<long> idx(m);
    for (long j = 0; j < m; ++j) {
      idx[j] = static_cast<long>(rng.index(static_cast<std::uint64_t>(data_.count)));
    }
    return mlp_loss_and_gradient(model_, w, data_, idx).gradient;
  }

  long sample_count() const override { return data_.count; }

  BlockVector zero_point() const override { return model_.zero_weights(); }

 private:
  std::vector<long> all_indices() const {
    std::vector<long> idx(data_.count);
    for (long i = 0; i < data_.count; ++i) idx[i] = i;
    return idx;
  }

  MlpModel model_;
  MlpDataset data_;
};

}  // namespace sbpg
