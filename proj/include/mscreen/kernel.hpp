#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "mscreen/types.hpp"

namespace mscreen {

enum class KernelFamily {
  NegExp,     // f(x) = -exp(-x / scale)
  SqrtShift,  // f(x) = sqrt(x + epsilon)
};

enum class DeltaOrder : int { L1 = 1, L2 = 2 };

/// The pair (f, q) defining the objective. f must be strictly increasing with
/// a strictly completely monotone derivative; both families below qualify
/// (SqrtShift needs epsilon > 0 to keep f' finite at tied pairs).
template <typename Scalar>
struct KernelSpecT {
  KernelFamily family = KernelFamily::NegExp;
  Scalar scale = Scalar(1);        // NegExp bandwidth, > 0
  Scalar epsilon = Scalar(1e-8);   // SqrtShift shift, >= 0
  DeltaOrder q = DeltaOrder::L1;

  static KernelSpecT neg_exp(Scalar scale = Scalar(1),
                             DeltaOrder q = DeltaOrder::L1) {
    return {KernelFamily::NegExp, scale, Scalar(0), q};
  }
  static KernelSpecT sqrt_shift(Scalar epsilon = Scalar(1e-8),
                                DeltaOrder q = DeltaOrder::L1) {
    return {KernelFamily::SqrtShift, Scalar(1), epsilon, q};
  }

  void validate() const {
    if (!(scale > Scalar(0))) throw std::invalid_argument("kernel scale must be > 0");
    if (!(epsilon >= Scalar(0))) throw std::invalid_argument("kernel epsilon must be >= 0");
    if (family == KernelFamily::SqrtShift && !(epsilon > Scalar(0)))
      throw std::invalid_argument("SqrtShift requires epsilon > 0");
  }
};

using KernelSpec = KernelSpecT<double>;

template <typename Scalar>
inline Scalar f_eval(const KernelSpecT<Scalar>& spec, Scalar x) {
  if (!(x >= Scalar(0))) throw std::domain_error("f_eval: x must be >= 0");
  switch (spec.family) {
    case KernelFamily::NegExp:
      return -std::exp(-x / spec.scale);
    case KernelFamily::SqrtShift:
    default:
      return std::sqrt(x + spec.epsilon);
  }
}

template <typename Scalar>
inline Scalar f_prime(const KernelSpecT<Scalar>& spec, Scalar x) {
  if (!(x >= Scalar(0))) throw std::domain_error("f_prime: x must be >= 0");
  switch (spec.family) {
    case KernelFamily::NegExp:
      return std::exp(-x / spec.scale) / spec.scale;
    case KernelFamily::SqrtShift:
    default:
      return Scalar(0.5) / std::sqrt(x + spec.epsilon);
  }
}

/// Coordinate-wise pair differences delta_j = |x_j - x'_j|^q.
template <typename DerivedA, typename DerivedB>
Vector pair_delta(const Eigen::MatrixBase<DerivedA>& x,
                  const Eigen::MatrixBase<DerivedB>& x_prime,
                  DeltaOrder q) {
  if (x.size() != x_prime.size())
    throw std::invalid_argument("pair_delta: length mismatch");
  Vector d = (x.derived().template cast<double>() -
              x_prime.derived().template cast<double>())
                 .cwiseAbs();
  if (q == DeltaOrder::L2) d = d.cwiseProduct(d);
  return d;
}

}  // namespace mscreen
