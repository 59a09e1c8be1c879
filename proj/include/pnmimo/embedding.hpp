#pragma once

#include "types.hpp"

namespace pnmimo {

// Real stacking of complex quantities: vectors become [Re; Im], matrices
// become [[Re, -Im], [Im, Re]], so that to_real(H*x) == real_channel(H)*to_real(x).

inline RVec to_real(const CVec& v) {
    const Eigen::Index n = v.size();
    RVec out(2 * n);
    out.head(n) = v.real();
    out.tail(n) = v.imag();
    return out;
}

/// Inverse of to_real: upper half is the real part, lower half the imaginary part.
inline CVec to_complex(const RVec& v) {
    const Eigen::Index n = v.size() / 2;
    CVec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = cplx(v[i], v[n + i]);
    return out;
}

inline RMat real_channel(const CMat& h) {
    const Eigen::Index r = h.rows();
    const Eigen::Index c = h.cols();
    RMat out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = h.real();
    out.topRightCorner(r, c) = -h.imag();
    out.bottomLeftCorner(r, c) = h.imag();
    out.bottomRightCorner(r, c) = h.real();
    return out;
}

} // namespace pnmimo
