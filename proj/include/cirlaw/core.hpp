#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cirlaw {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Raised when an operation is called outside its domain (parity, ranges, sizes).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a dense factorization fails to converge.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The single generator used throughout. Per-trial streams come from derive_stream.
using Rng = std::mt19937_64;

/// Independent stream for (master seed, trial index). Same pair, same stream.
inline Rng derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// A length-n vector of +-1 entries with its entry sum cached.
class SignVector {
 public:
  SignVector() = default;

  explicit SignVector(Eigen::VectorXi entries) : entries_(std::move(entries)) {
    if (entries_.size() == 0) throw InvalidInput("SignVector: empty vector");
    sum_ = 0;
    for (Eigen::Index i = 0; i < entries_.size(); ++i) {
      const int e = entries_(i);
      if (e != 1 && e != -1) throw InvalidInput("SignVector: entries must be +1 or -1");
      sum_ += e;
    }
  }

  int size() const { return static_cast<int>(entries_.size()); }
  int sum() const { return sum_; }
  int operator()(int i) const { return entries_(i); }
  const Eigen::VectorXi& entries() const { return entries_; }

  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> as() const {
    return entries_.cast<Scalar>();
  }

 private:
  Eigen::VectorXi entries_;
  int sum_ = 0;
};

}  // namespace cirlaw
