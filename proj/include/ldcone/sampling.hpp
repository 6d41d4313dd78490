#pragma once

#include <cmath>

#include "ldcone/cone.hpp"
#include "ldcone/linalg.hpp"
#include "ldcone/rng.hpp"

namespace ldcone {

inline SymMat random_sym(Rng& rng, int d, double scale = 1.0) {
    SymMat m(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) m.set(i, j, scale * rng.normal());
    return m;
}

inline Mat random_orthogonal(Rng& rng, int d) {
    for (;;) {
        Mat g(d, d);
        for (auto& v : g.a) v = rng.normal();
        Mat q = gram_schmidt(g, 1e-6);
        if (q.cols == d) return q;
    }
}

inline SymMat random_spd(Rng& rng, int d, double lmin, double lmax) {
    Mat q = random_orthogonal(rng, d);
    SymMat m(d);
    for (int k = 0; k < d; ++k) {
        const double e = rng.loguniform(lmin, lmax);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) m.add(i, j, e * q(i, k) * q(j, k));
    }
    return m;
}

inline SymMat random_psd_rank(Rng& rng, int d, int rank, double lmin = 0.3, double lmax = 3.0) {
    Mat q = random_orthogonal(rng, d);
    SymMat m(d);
    for (int k = 0; k < rank; ++k) {
        const double e = rng.loguniform(lmin, lmax);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) m.add(i, j, e * q(i, k) * q(j, k));
    }
    return m;
}

/// Boundary sampler covering both pieces: graph points (x = perspective) and
/// the y = 0 face, mixed 50/50, rescaled into the eta-ball. Scaling keeps a
/// point on the boundary because the set is a cone.
inline ConePoint sample_boundary(Rng& rng, int d, double eta) {
    ConePoint v = ConePoint::zero(d);
    if (rng.uniform() < 0.5) {
        const double y = rng.loguniform(1e-4, 1.0);
        SymMat z = random_spd(rng, d, 0.05, 3.0);
        v = ConePoint(perspective_logdet(y, z), y, z);
    } else {
        SymMat z = psd_project(random_sym(rng, d, 1.0));
        v = ConePoint(-std::abs(rng.normal()), 0.0, z);
    }
    const double n = norm(v);
    if (n > 0.0) v *= eta * rng.uniform(0.05, 1.0) / n;
    return v;
}

} // namespace ldcone
