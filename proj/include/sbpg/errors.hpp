#pragma once

#include <stdexcept>
#include <string>

namespace sbpg {

// Thrown when an iterative numeric routine fails to meet its tolerance.
// Carries the best iterate seen and its residual so callers can diagnose.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double best, double residual)
      : std::runtime_error(what), best_(best), residual_(residual) {}

  double best() const { return best_; }
  double residual() const { return residual_; }

 private:
  double best_;
  double residual_;
};

}  // namespace sbpg
