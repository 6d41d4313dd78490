#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "ldcone/linalg.hpp"

namespace ldcone {

/// Point of R x R x S^d. The cone modules require d >= 2; a 1-dimensional
/// matrix block would collapse the cone to the exponential cone, which this
/// library does not model.
struct ConePoint {
    double x = 0.0;
    double y = 0.0;
    SymMat Z;

    ConePoint() = default;
    ConePoint(double x_, double y_, SymMat z_) : x(x_), y(y_), Z(std::move(z_)) {}

    static ConePoint zero(int d) { return ConePoint(0.0, 0.0, SymMat(d)); }

    int dim() const { return Z.dim(); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && Z.finite(); }

    ConePoint& operator+=(const ConePoint& o) {
        x += o.x;
        y += o.y;
        Z += o.Z;
        return *this;
    }
    ConePoint& operator-=(const ConePoint& o) {
        x -= o.x;
        y -= o.y;
        Z -= o.Z;
        return *this;
    }
    ConePoint& operator*=(double t) {
        x *= t;
        y *= t;
        Z *= t;
        return *this;
    }
    friend ConePoint operator+(ConePoint a, const ConePoint& b) { return a += b; }
    friend ConePoint operator-(ConePoint a, const ConePoint& b) { return a -= b; }
    friend ConePoint operator*(ConePoint a, double t) { return a *= t; }
    friend ConePoint operator*(double t, ConePoint a) { return a *= t; }
};

inline double inner(const ConePoint& a, const ConePoint& b) {
    return a.x * b.x + a.y * b.y + SymMat::inner(a.Z, b.Z);
}

inline double norm(const ConePoint& a) { return std::sqrt(inner(a, a)); }

inline double distance(const ConePoint& a, const ConePoint& b) { return norm(a - b); }

inline void require_cone_dim(const ConePoint& p) {
    if (p.dim() < 2) throw std::invalid_argument("cone point must have matrix dim >= 2");
    if (!p.finite()) throw std::invalid_argument("cone point has non-finite entries");
}

enum class BoundaryTag {
    Interior,
    K1e,
    K2,
    Dual_Interior,
    Dual_K1e,
    Dual_K2,
    Outside,
};

inline const char* to_string(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::Interior: return "Interior";
        case BoundaryTag::K1e: return "K1e";
        case BoundaryTag::K2: return "K2";
        case BoundaryTag::Dual_Interior: return "Dual_Interior";
        case BoundaryTag::Dual_K1e: return "Dual_K1e";
        case BoundaryTag::Dual_K2: return "Dual_K2";
        case BoundaryTag::Outside: return "Outside";
    }
    return "?";
}

/// Sum of log eigenvalues; -inf when any eigenvalue is <= 0.
inline double logdet_or_neg_inf(const SymMat& z) {
    EigenDecomposition e = eigen_sym(z);
    double s = 0.0;
    for (double v : e.values) {
        if (v <= 0.0) return -std::numeric_limits<double>::infinity();
        s += std::log(v);
    }
    return s;
}

/// y * log det(Z / y) evaluated as y * (sum_i log lambda_i(Z) - d log y).
inline double perspective_logdet(double y, const SymMat& z) {
    if (!(y > 0.0)) throw std::domain_error("perspective_logdet: y must be > 0");
    const double ld = logdet_or_neg_inf(z);
    if (!std::isfinite(ld)) throw std::domain_error("perspective_logdet: Z must be positive definite");
    return y * (ld - z.dim() * std::log(y));
}

// Relative tolerances: scalar slacks scale with max(1, ||p||), the PSD
// eigenvalue floor with max(1, lambda_max).
inline bool psd_within(const SymMat& z, double tol) {
    EigenDecomposition e = eigen_sym(z);
    return e.values.front() >= -tol * std::max(1.0, e.values.back());
}

/// Membership in the log-determinant cone, exponential form evaluated in the
/// log domain so tiny y cannot overflow. The graph branch is evaluated for
/// every y > 0, not only y > tol: the log-domain form is stable down to the
/// underflow limit, and closure membership near the y = 0 seam needs it.
inline bool member_primal(const ConePoint& p, double tol = 1e-9) {
    require_cone_dim(p);
    const double s = tol * std::max(1.0, norm(p));
    if (p.y > 0.0) {
        const double ld = logdet_or_neg_inf(p.Z);
        if (std::isfinite(ld) && p.x / p.y + p.dim() * std::log(p.y) <= ld + s) return true;
    }
    if (std::abs(p.y) <= s) return p.x <= s && psd_within(p.Z, tol);
    return false;
}

/// Membership in the dual cone.
inline bool member_dual(const ConePoint& p, double tol = 1e-9) {
    require_cone_dim(p);
    const double s = tol * std::max(1.0, norm(p));
    if (p.x < 0.0) {
        const double ld = logdet_or_neg_inf(p.Z);
        if (std::isfinite(ld) && p.dim() * std::log(-p.x) + p.y / p.x <= p.dim() + ld + s) return true;
    }
    if (std::abs(p.x) <= s) return p.y >= -s && psd_within(p.Z, tol);
    return false;
}

/// Boundary-part classification. Primal tags take priority over dual tags so
/// the assignment is unique under the fixed tolerance.
inline BoundaryTag classify_boundary(const ConePoint& p, double tol = 1e-9) {
    require_cone_dim(p);
    const double s = tol * std::max(1.0, norm(p));
    const int d = p.dim();

    EigenDecomposition ez = eigen_sym(p.Z);
    const double lmin = ez.values.front();
    const double lmax = ez.values.back();
    const bool z_pd = lmin > tol * std::max(1.0, lmax);
    const bool z_psd = lmin >= -tol * std::max(1.0, lmax);

    double ld = 0.0;
    if (z_pd)
        for (double v : ez.values) ld += std::log(v);

    if (p.y > s && z_pd) {
        const double gap = p.x - p.y * (ld - d * std::log(p.y));
        if (std::abs(gap) <= s) return BoundaryTag::K1e;
        if (gap < -s) return BoundaryTag::Interior;
    }
    if (std::abs(p.y) <= s && p.x <= s && z_psd) return BoundaryTag::K2;

    if (p.x < -s && z_pd) {
        const double gap = p.y - p.x * (ld - d * std::log(-p.x) + d);
        if (std::abs(gap) <= s) return BoundaryTag::Dual_K1e;
        if (gap > s) return BoundaryTag::Dual_Interior;
    }
    if (std::abs(p.x) <= s && p.y >= -s && z_psd) return BoundaryTag::Dual_K2;

    return BoundaryTag::Outside;
}

/// Projection of v onto the hyperplane {n}^perp: w = v - (<n,v>/||n||^2) n.
inline ConePoint project_hyperplane(const ConePoint& v, const ConePoint& n) {
    const double nn = inner(n, n);
    if (nn <= 0.0) throw std::domain_error("project_hyperplane: n must be nonzero");
    return v - (inner(n, v) / nn) * n;
}

namespace detail {

// Reduced smooth-branch KKT system for the projection onto the cone. After
// diagonalizing p.Z the projection shares eigenvectors with p.Z, so the
// matrix block reduces to its eigenvalues lam_i. For multiplier th > 0 and
// y > 0 the stationary eigenvalues are m_i = (lam_i + sqrt(lam_i^2+4 th y))/2
// and y solves  y - py + th*(d - s(y,th)) = 0 with s = sum_i log(m_i/y).
struct SmoothKkt {
    const std::vector<double>& lam;
    double px, py;
    int d;

    // conjugate form for lam_i < 0 avoids cancellation when th*y is tiny
    double m_of(double lam_i, double th, double y) const {
        const double root = std::sqrt(lam_i * lam_i + 4.0 * th * y);
        if (lam_i >= 0.0) return 0.5 * (lam_i + root);
        return 2.0 * th * y / (root - lam_i);
    }

    double s_of(double th, double y) const {
        double s = 0.0;
        for (double l : lam) {
            const double m = m_of(l, th, y);
            if (m <= 0.0) return -std::numeric_limits<double>::infinity();
            s += std::log(m / y);
        }
        return s;
    }

    double h_of(double th, double y) const { return y - py + th * (d - s_of(th, y)); }

    // dh/dy = 1 + th * sum_i m_i / (y * (2 m_i - lam_i)) >= 1
    double dh_dy(double th, double y) const {
        double acc = 0.0;
        for (double l : lam) {
            const double m = m_of(l, th, y);
            acc += m / (y * (2.0 * m - l));
        }
        return 1.0 + th * acc;
    }

    // Solve h(th, y) = 0 for y > 0; h is strictly increasing in y.
    std::optional<double> solve_y(double th) const {
        double lo = 1e-300, hi = std::max({1.0, py, 1e3 * th});
        // grow hi until h > 0
        for (int i = 0; i < 2000 && h_of(th, hi) <= 0.0; ++i) hi *= 4.0;
        if (h_of(th, hi) <= 0.0) return std::nullopt;
        // shrink lo until h < 0 (h(0+) may be +inf when all lam < 0)
        if (h_of(th, lo) >= 0.0) {
            bool found = false;
            double probe = std::min(hi, 1.0);
            for (int i = 0; i < 400; ++i) {
                if (h_of(th, probe) < 0.0) { lo = probe; found = true; break; }
                probe *= 0.25;
                if (probe < 1e-300) break;
            }
            if (!found) return std::nullopt;
        }
        // bisection in log-space, then Newton polish
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(lo * hi);
            (h_of(th, mid) < 0.0 ? lo : hi) = mid;
            if (hi / lo < 1.0 + 1e-14) break;
        }
        double y = 0.5 * (lo + hi);
        for (int i = 0; i < 50; ++i) {
            const double h = h_of(th, y);
            const double dh = dh_dy(th, y);
            const double step = h / dh;
            double yn = y - step;
            if (yn <= 0.0) yn = 0.5 * y;
            y = yn;
            if (std::abs(step) <= 1e-16 * std::max(1.0, y)) break;
        }
        return y;
    }

    // Residual of the boundary equation x = y * s at x = px - th.
    std::optional<double> residual(double th) const {
        auto y = solve_y(th);
        if (!y) return std::nullopt;
        return px - th - *y * s_of(th, *y);
    }
};

} // namespace detail

struct ProjectionResult {
    ConePoint point;
    double residual = 0.0;  // final KKT residual of the smooth solve, 0 for the face branch
    bool smooth_branch = false;
};

/// Nearest point of the log-determinant cone. Spectral reduction on the
/// matrix block, safeguarded root-finding over the boundary multiplier, and
/// an explicit fallback to the y = 0 face; returns the better candidate.
inline ProjectionResult project_cone_full(const ConePoint& p, double tol = 1e-9, int max_iter = 200) {
    require_cone_dim(p);
    if (member_primal(p, std::min(tol, 1e-12))) return {p, 0.0, false};

    const EigenDecomposition ez = eigen_sym(p.Z);

    // Candidate A: y = 0 face (x <= 0, Z PSD), closed form.
    std::vector<double> clipped(ez.values.size());
    for (std::size_t i = 0; i < clipped.size(); ++i) clipped[i] = std::max(ez.values[i], 0.0);
    ConePoint face_cand(std::min(p.x, 0.0), 0.0, assemble_from_eigen(ez, clipped));
    double best = distance(face_cand, p);
    ProjectionResult result{face_cand, 0.0, false};

    // Candidate B: smooth boundary branch. The stationarity system may have
    // no y > 0 solution on sub-ranges of the multiplier; there the residual
    // is extended by its y -> 0 limit, px - th, which keeps it continuous so
    // plain sign bracketing works. Every sign change yields a candidate.
    detail::SmoothKkt kkt{ez.values, p.x, p.y, p.dim()};
    auto residual_ext = [&](double th) {
        auto r = kkt.residual(th);
        return r ? *r : (p.x - th);
    };

    std::vector<std::pair<double, double>> brackets;
    {
        double prev_th = 0.0, prev_r = 0.0;
        bool have_prev = false;
        for (double th = 1e-300; th < 1e40 && brackets.size() < 4; th *= 10.0) {
            const double r = residual_ext(th);
            if (have_prev && ((prev_r > 0.0) != (r > 0.0))) brackets.emplace_back(prev_th, th);
            prev_th = th;
            prev_r = r;
            have_prev = true;
        }
    }

    for (auto [lo, hi] : brackets) {
        const bool lo_pos = residual_ext(lo) > 0.0;
        for (int it = 0; it < max_iter + 400; ++it) {
            const double mid = std::sqrt(lo * hi);
            ((residual_ext(mid) > 0.0) == lo_pos ? lo : hi) = mid;
            if (hi / lo < 1.0 + 1e-15) break;
        }
        const double th = std::sqrt(lo * hi);
        auto y = kkt.solve_y(th);
        if (!y || !(*y > 0.0)) continue;
        std::vector<double> m(ez.values.size());
        bool m_ok = true;
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = kkt.m_of(ez.values[i], th, *y);
            if (!(m[i] > 0.0)) m_ok = false;
        }
        // feasibility is checked in the reduced coordinates: the dense
        // reconstruction can lose an eigenvalue of order 1e-20 to rounding
        const double res = std::abs((p.x - th) - *y * kkt.s_of(th, *y));
        if (m_ok && res <= 1e-8 * std::max(1.0, std::abs(p.x))) {
            ConePoint smooth(p.x - th, *y, assemble_from_eigen(ez, m));
            const double dist = distance(smooth, p);
            if (dist < best) {
                best = dist;
                result = {smooth, res, true};
            }
        }
    }

    // The face candidate always exists, so lack of a smooth bracket is not an
    // error; it means the projection sits on the y = 0 face.
    const double scale = std::max(1.0, norm(p));
    if (result.smooth_branch && result.residual > 1e-6 * scale)
        throw std::runtime_error("project_cone: smooth branch did not converge, residual " +
                                 std::to_string(result.residual));
    return result;
}

inline ConePoint project_cone(const ConePoint& p, double tol = 1e-9, int max_iter = 200) {
    return project_cone_full(p, tol, max_iter).point;
}

inline double dist_cone(const ConePoint& p, double tol = 1e-9) {
    return distance(project_cone(p, tol), p);
}

} // namespace ldcone
