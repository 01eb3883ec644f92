#ifndef LRSENS_ESTIMATORS_HPP
#define LRSENS_ESTIMATORS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "lrsens/ssa.hpp"

namespace lrsens {

enum class EstimatorKind { LR, CLR, IntLR, IntCLR };

constexpr std::array<EstimatorKind, 4> kAllEstimators = {
    EstimatorKind::LR, EstimatorKind::CLR, EstimatorKind::IntLR,
    EstimatorKind::IntCLR};

inline const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::LR: return "LR";
    case EstimatorKind::CLR: return "CLR";
    case EstimatorKind::IntLR: return "intLR";
    case EstimatorKind::IntCLR: return "intCLR";
  }
  return "?";
}

/// S_LR(t) = (1/t) int_0^t f ds * Z(t)
inline double lr_estimate(const SensitivityAccumulators& acc, double t,
                          std::size_t k = 0, std::size_t o = 0) {
  return acc.int_f[o].value() / t * acc.z[k];
}

/// S_CLR(t) = (1/t) int_0^t (f - pi_f) ds * Z(t)
inline double clr_estimate(const SensitivityAccumulators& acc, double t,
                           double pi_f, std::size_t k = 0, std::size_t o = 0) {
  return (acc.int_f[o].value() - pi_f * t) / t * acc.z[k];
}

/// int-LR: (1/t) int_0^t f(X(s)) Z(s) ds
inline double int_lr_estimate(const SensitivityAccumulators& acc, double t,
                              std::size_t k = 0, std::size_t o = 0) {
  return acc.int_fz[acc.pair_index(o, k)].value() / t;
}

/// int-CLR: (1/t) int_0^t (f(X(s)) - pi_f) Z(s) ds, accumulated online
/// (centered during simulation) to avoid cancellation at large t.
inline double int_clr_estimate(const SensitivityAccumulators& acc, double t,
                               std::size_t k = 0, std::size_t o = 0) {
  return acc.int_fcz[acc.pair_index(o, k)].value() / t;
}

/// Reconstruction from the uncentered integrals; cross-check only.
inline double int_clr_reconstructed(const SensitivityAccumulators& acc,
                                    double t, double pi_f, std::size_t k = 0,
                                    std::size_t o = 0) {
  return (acc.int_fz[acc.pair_index(o, k)].value() -
          pi_f * acc.int_z[k].value()) /
         t;
}

/// Streaming (count, mean, M2) moments; merge is associative and performed
/// in fixed trajectory-index order for bit reproducibility.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const Moments& b) {
    if (b.count == 0) return;
    if (count == 0) { *this = b; return; }
    const double d = b.mean - mean;
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(b.count);
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += b.m2 + d * d * n1 * n2 / n;
    count += b.count;
  }

  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
  double std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count))
                     : 0.0;
  }
};

}  // namespace lrsens

#endif  // LRSENS_ESTIMATORS_HPP
