#pragma once

#include <lrtc/errors.hpp>
#include <lrtc/tensor.hpp>

#include <Eigen/SVD>

namespace lrtc {

/// Singular value thresholding: U diag(max(s - tau, 0)) V^T over the thin
/// SVD of `m`. This is the proximal map of tau * ||.||_*.
[[nodiscard]] inline Matrix svt(const Matrix &m, double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw UsageError("svt: threshold must be finite and nonnegative");
    if (!m.allFinite())
        throw NumericalError("svt: non-finite input matrix");
    if (tau == 0.0)
        return m;
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalError("svt: SVD did not converge");
    const Eigen::VectorXd shrunk =
        (svd.singularValues().array() - tau).max(0.0).matrix();
    Eigen::Index kept = 0;
    while (kept < shrunk.size() && shrunk(kept) > 0.0)
        ++kept;
    if (kept == 0)
        return Matrix::Zero(m.rows(), m.cols());
    return svd.matrixU().leftCols(kept) * shrunk.head(kept).asDiagonal() *
           svd.matrixV().leftCols(kept).transpose();
}

} // namespace lrtc
