#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace remirl {

/// log(sum(exp(x))) with max-subtraction; -inf for an empty or all -inf input.
template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0) return -std::numeric_limits<Scalar>::infinity();
    const Scalar peak = x.maxCoeff();
    if (!std::isfinite(peak)) return peak;
    return peak + std::log((x.derived().array() - peak).exp().sum());
}

/// Normalized exponentials of a score vector, computed in the log domain.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
softmax(const Eigen::MatrixBase<Derived>& scores) {
    const auto lse = log_sum_exp(scores);
    return (scores.array() - lse).exp().matrix();
}

/// Largest absolute coefficient; zero for an empty vector.
template <class Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return x.size() == 0 ? Scalar(0) : x.cwiseAbs().maxCoeff();
}

} // namespace remirl
