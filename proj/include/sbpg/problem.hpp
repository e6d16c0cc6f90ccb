#pragma once

#include "sbpg/block_vector.hpp"
#include "sbpg/rng.hpp"

namespace sbpg {

// Minimal surface the optimizer loop needs from a training problem.
// objective() is the full composite objective (smooth part plus any L1
// term); gradients are of the smooth part only.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual double objective(const BlockVector& x) const = 0;
  virtual BlockVector full_gradient(const BlockVector& x) const = 0;

  // Unbiased estimate of full_gradient built from m uniform sample draws
  // taken from rng (m calls to rng.index, in order).
  virtual BlockVector minibatch_gradient(const BlockVector& x, long m, Rng& rng) const = 0;

  virtual long sample_count() const = 0;
  virtual BlockVector zero_point() const = 0;
};

}  // namespace sbpg
