#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbpg {

// Ordered list of named dense blocks. Optimizers treat each block as one
// variable group with its own kernel; norms and dot products are computed
// with naive left-to-right summation so results are reproducible.
struct BlockVector {
  struct Block {
    std::string name;
    std::vector<double> values;
  };

  std::vector<Block> blocks;

  BlockVector() = default;

  static BlockVector single(std::string name, std::vector<double> values) {
    BlockVector out;
    out.blocks.push_back({std::move(name), std::move(values)});
    return out;
  }

  static BlockVector zeros_like(const BlockVector& other) {
    BlockVector out;
    out.blocks.reserve(other.blocks.size());
    for (const auto& b : other.blocks) {
      out.blocks.push_back({b.name, std::vector<double>(b.values.size(), 0.0)});
    }
    return out;
  }

  std::size_t block_count() const { return blocks.size(); }

  std::size_t total_dim() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.values.size();
    return n;
  }

  bool same_structure(const BlockVector& other) const {
    if (blocks.size() != other.blocks.size()) return false;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].name != other.blocks[i].name) return false;
      if (blocks[i].values.size() != other.blocks[i].values.size()) return false;
    }
    return true;
  }

  void require_same_structure(const BlockVector& other) const {
    if (!same_structure(other)) {
      throw std::invalid_argument("BlockVector: mismatched block structure");
    }
  }

  // this += a * y
  void axpy(double a, const BlockVector& y) {
    require_same_structure(y);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& dst = blocks[i].values;
      const auto& src = y.blocks[i].values;
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += a * src[j];
    }
  }

  void scale(double a) {
    for (auto& b : blocks) {
      for (double& v : b.values) v *= a;
    }
  }

  double dot(const BlockVector& y) const {
    require_same_structure(y);
    double s = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& a = blocks[i].values;
      const auto& b = y.blocks[i].values;
      for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    }
    return s;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& b : blocks) {
      for (double v : b.values) s += v * v;
    }
    return s;
  }

  double norm() const { return std::sqrt(squared_norm()); }

  double norm1() const {
    double s = 0.0;
    for (const auto& b : blocks) {
      for (double v : b.values) s += std::fabs(v);
    }
    return s;
  }

  std::vector<double> block_norms() const {
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
      double s = 0.0;
      for (double v : b.values) s += v * v;
      out.push_back(std::sqrt(s));
    }
    return out;
  }

  bool is_finite() const {
    for (const auto& b : blocks) {
      for (double v : b.values) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }
};

inline double block_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace sbpg
