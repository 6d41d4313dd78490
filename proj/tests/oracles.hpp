// Test-only oracles. Everything here is deliberately independent of the
// library's computational paths: eigenvalues come from characteristic
// polynomials, PSD projections from repeated clipping with nullspace
// eigenvectors, and the cone projection from a descent method on the
// boundary graph in the full matrix space (no spectral reduction, no
// multiplier solve).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ldcone/cone.hpp"
#include "ldcone/linalg.hpp"
#include "ldcone/rng.hpp"

namespace oracles {

using ldcone::ConePoint;
using ldcone::Mat;
using ldcone::SymMat;

// ---------------------------------------------------------------------------
// characteristic polynomial eigenvalues, d <= 4

inline double horner(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (double ci : c) v = v * x + ci;
    return v;
}

inline std::vector<double> derivative(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = c[i] * (n - i);
    return d;
}

// all-real-roots solve by recursive critical-point isolation + bisection
inline std::vector<double> real_roots(const std::vector<double>& c, double lo, double hi) {
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg <= 0) return {};
    if (deg == 1) return {-c[1] / c[0]};

    std::vector<double> crit = real_roots(derivative(c), lo, hi);
    std::sort(crit.begin(), crit.end());
    std::vector<double> pts{lo};
    for (double t : crit)
        if (t > lo && t < hi) pts.push_back(t);
    pts.push_back(hi);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1];
        double fa = horner(c, a), fb = horner(c, b);
        if (fa == 0.0) { roots.push_back(a); continue; }
        if (fa * fb > 0.0) {
            // no sign change: accept a near-zero critical value as a multiple root
            if (i + 1 < pts.size() - 1 && std::abs(fb) < 1e-9 * (1.0 + std::abs(fa)))
                roots.push_back(b);
            continue;
        }
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = horner(c, m);
            if (fm == 0.0) { a = b = m; break; }
            if (fa * fm < 0.0) { b = m; fb = fm; }
            else { a = m; fa = fm; }
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

inline std::vector<double> charpoly_eigenvalues(const SymMat& m) {
    const int d = m.dim();
    if (d > 4) throw std::invalid_argument("charpoly oracle: d <= 4 only");

    // power sums t_k = tr(A^k)
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = m(i, j);
    std::vector<double> t(d + 1, 0.0);
    Mat pw = Mat::identity(d);
    for (int k = 1; k <= d; ++k) {
        pw = pw * a;
        double tr = 0.0;
        for (int i = 0; i < d; ++i) tr += pw(i, i);
        t[k] = tr;
    }
    // Newton identities: k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} t_i
    std::vector<double> e(d + 1, 0.0);
    e[0] = 1.0;
    for (int k = 1; k <= d; ++k) {
        double s = 0.0, sign = 1.0;
        for (int i = 1; i <= k; ++i) {
            s += sign * e[k - i] * t[i];
            sign = -sign;
        }
        e[k] = s / k;
    }
    // p(x) = sum_k (-1)^k e_k x^{d-k}
    std::vector<double> coeff(d + 1);
    double sign = 1.0;
    for (int k = 0; k <= d; ++k) {
        coeff[k] = sign * e[k];
        sign = -sign;
    }
    const double bound = m.frob_norm() + 1.0;
    std::vector<double> roots = real_roots(coeff, -bound, bound);
    std::sort(roots.begin(), roots.end());
    if (static_cast<int>(roots.size()) != d)
        throw std::runtime_error("charpoly oracle: failed to isolate all roots");
    return roots;
}

// ---------------------------------------------------------------------------
// independent eigenvectors (nullspace of A - lambda I) and PSD clipping

inline std::vector<double> nullspace_vector(const SymMat& m, double lambda) {
    const int d = m.dim();
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = m(i, j) - (i == j ? lambda : 0.0);

    // row-reduce with partial pivoting, keeping track of pivot columns
    std::vector<int> pivot_col(d, -1);
    int row = 0;
    for (int col = 0; col < d && row < d; ++col) {
        int best = row;
        for (int r = row + 1; r < d; ++r)
            if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
        if (std::abs(a(best, col)) < 1e-8) continue;
        for (int j = 0; j < d; ++j) std::swap(a(row, j), a(best, j));
        for (int r = 0; r < d; ++r) {
            if (r == row) continue;
            const double f = a(r, col) / a(row, col);
            for (int j = 0; j < d; ++j) a(r, j) -= f * a(row, j);
        }
        pivot_col[row] = col;
        ++row;
    }
    // pick a free column and back-substitute
    std::vector<bool> is_pivot(d, false);
    for (int r = 0; r < row; ++r) is_pivot[pivot_col[r]] = true;
    int free_col = -1;
    for (int c = 0; c < d; ++c)
        if (!is_pivot[c]) { free_col = c; break; }
    if (free_col < 0) throw std::runtime_error("nullspace oracle: matrix is nonsingular");

    std::vector<double> v(d, 0.0);
    v[free_col] = 1.0;
    for (int r = 0; r < row; ++r) v[pivot_col[r]] = -a(r, free_col) / a(r, pivot_col[r]);
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
    return v;
}

inline SymMat gauss_inverse(const SymMat& s);

// clip negative eigenvalues via (A + |A|)/2 with |A| = sqrt(A^2 + delta^2 I)
// from the Denman-Beavers square-root iteration; no eigendecomposition
inline SymMat clip_psd_independent(const SymMat& m) {
    const int d = m.dim();
    const double scale = std::max(1.0, m.frob_norm());
    const double delta = 1e-12 * scale;

    SymMat a2(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += m(i, k) * m(k, j);
            a2.set(i, j, s + (i == j ? delta * delta : 0.0));
        }

    SymMat y = a2;
    SymMat z = SymMat::identity(d);
    for (int it = 0; it < 100; ++it) {
        SymMat yn = (y + gauss_inverse(z)) * 0.5;
        SymMat zn = (z + gauss_inverse(y)) * 0.5;
        const double change = (yn - y).frob_norm();
        y = yn;
        z = zn;
        if (change <= 1e-15 * scale) break;
    }
    return (m + y) * 0.5;
}

/// Projected gradient descent on ||X - A||_F^2 over the PSD cone via repeated
/// clipping, run to 1e-10 change. Fixed point is the metric projection.
inline SymMat psd_project_oracle(const SymMat& a) {
    SymMat x(a.dim());
    const double alpha = 0.45;
    for (int it = 0; it < 400; ++it) {
        SymMat step = x - (x - a) * (2.0 * alpha);
        SymMat next = clip_psd_independent(step);
        const double change = (next - x).frob_norm();
        x = next;
        if (change <= 1e-12 * std::max(1.0, a.frob_norm())) break;
    }
    return x;
}

// ---------------------------------------------------------------------------
// cone projection oracle: descent over the boundary graph in full space

inline std::optional<double> cholesky_logdet(const SymMat& s) {
    const int d = s.dim();
    Mat l(d, d);
    double ld = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = s(i, j);
            for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0) return std::nullopt;
                l(i, i) = std::sqrt(sum);
                ld += 2.0 * std::log(l(i, i));
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return ld;
}

inline SymMat gauss_inverse(const SymMat& s) {
    const int d = s.dim();
    Mat a(d, 2 * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a(i, j) = s(i, j);
        a(i, d + i) = 1.0;
    }
    for (int col = 0; col < d; ++col) {
        int best = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
        if (std::abs(a(best, col)) < 1e-300) throw std::runtime_error("gauss_inverse: singular");
        for (int j = 0; j < 2 * d; ++j) std::swap(a(col, j), a(best, j));
        const double piv = a(col, col);
        for (int j = 0; j < 2 * d; ++j) a(col, j) /= piv;
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < 2 * d; ++j) a(r, j) -= f * a(col, j);
        }
    }
    SymMat inv(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) inv.set(i, j, 0.5 * (a(i, d + j) + a(j, d + i)));
    return inv;
}

// matrix exponential of a general square matrix by scaling-and-squaring
inline Mat expm_general(const Mat& a) {
    const int n = a.rows;
    double nrm = 0.0;
    for (double v : a.a) nrm += v * v;
    nrm = std::sqrt(nrm);
    int k = 0;
    while (nrm > 0.5 && k < 80) {
        nrm *= 0.5;
        ++k;
    }
    const double scale = std::ldexp(1.0, -k);
    Mat as(n, n);
    for (int i = 0; i < n * n; ++i) as.a[i] = a.a[i] * scale;
    Mat term = Mat::identity(n);
    Mat sum = term;
    for (int i = 1; i <= 24; ++i) {
        term = term * as;
        for (auto& v : term.a) v /= i;
        for (int j = 0; j < n * n; ++j) sum.a[j] += term.a[j];
    }
    for (int i = 0; i < k; ++i) sum = sum * sum;
    return sum;
}

inline SymMat expm(const SymMat& w) {
    const int d = w.dim();
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = w(i, j);
    Mat e = expm_general(a);
    SymMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out.set(i, j, 0.5 * (e(i, j) + e(j, i)));
    return out;
}

// derivative of the matrix exponential applied to a direction M, via the
// block identity expm([[W, M], [0, W]]) = [[e^W, Dexp_W[M]], [0, e^W]];
// the operator is self-adjoint in the Frobenius metric for symmetric W
inline SymMat dexp(const SymMat& w, const SymMat& m) {
    const int d = w.dim();
    Mat block(2 * d, 2 * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            block(i, j) = w(i, j);
            block(d + i, d + j) = w(i, j);
            block(i, d + j) = m(i, j);
        }
    Mat e = expm_general(block);
    SymMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out.set(i, j, 0.5 * (e(i, d + j) + e(j, d + i)));
    return out;
}

// Squared distance from p to the boundary-graph point parametrized by
// (u, W) -> (e^u (tr W - d u), e^u, exp(W)). The log parametrization keeps
// the whole search space feasible (no domain safeguarding needed) and
// logdet exp(W) = tr W holds exactly. svec packing with sqrt(2) off-diagonal
// weights makes the packed Euclidean metric equal the Frobenius one.
struct BoundaryObjective {
    const ConePoint& p;

    void unpack(const std::vector<double>& v, double& u, SymMat& w) const {
        const int d = p.dim();
        const double rt2 = std::sqrt(2.0);
        u = v[0];
        int k = 1;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                w.set(i, j, (i == j) ? v[k] : v[k] / rt2);
                ++k;
            }
    }

    double value(const std::vector<double>& v) const {
        const int d = p.dim();
        double u;
        SymMat w(d);
        unpack(v, u, w);
        const double y = std::exp(u);
        const double persp = y * (w.trace() - d * u);
        const double e = persp - p.x;
        SymMat s = expm(w);
        return e * e + (y - p.y) * (y - p.y) + SymMat::inner(s - p.Z, s - p.Z);
    }

    std::vector<double> gradient(const std::vector<double>& v) const {
        const int d = p.dim();
        double u;
        SymMat w(d);
        unpack(v, u, w);
        const double y = std::exp(u);
        const double persp = y * (w.trace() - d * u);
        const double e = persp - p.x;
        SymMat s = expm(w);
        const double gu = 2.0 * e * y * (w.trace() - d * u - d) + 2.0 * (y - p.y) * y;
        SymMat gw = SymMat::identity(d) * (2.0 * e * y) + dexp(w, s - p.Z) * 2.0;
        std::vector<double> g(v.size());
        const double rt2 = std::sqrt(2.0);
        g[0] = gu;
        int k = 1;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) g[static_cast<std::size_t>(k++)] = (i == j) ? gw(i, j) : rt2 * gw(i, j);
        return g;
    }

    ConePoint point_at(const std::vector<double>& v) const {
        const int d = p.dim();
        double u;
        SymMat w(d);
        unpack(v, u, w);
        const double y = std::exp(u);
        return ConePoint(y * (w.trace() - d * u), y, expm(w));
    }
};

// unconstrained minimization: Armijo gradient descent into the basin, then
// Newton with a finite-difference Hessian of the analytic gradient, ridge
// fallback, and a gradient probe when a Newton step is rejected
inline double minimize_boundary_graph(const BoundaryObjective& obj, std::vector<double> v,
                                      std::vector<double>& v_out) {
    const int n = static_cast<int>(v.size());
    double fval = obj.value(v);
    double step = 0.5;
    for (int it = 0; it < 600; ++it) {
        std::vector<double> g = obj.gradient(v);
        double gn = 0.0;
        for (double gi : g) gn += gi * gi;
        gn = std::sqrt(gn);
        if (gn <= 1e-13 * std::max(1.0, fval)) break;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> vt(n);
            for (int i = 0; i < n; ++i) vt[i] = v[i] - step * g[i];
            const double ft = obj.value(vt);
            if (ft < fval - 1e-4 * step * gn * gn) {
                v = vt;
                fval = ft;
                accepted = true;
                step *= 1.8;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    const double h = 1e-6;
    for (int it = 0; it < 120; ++it) {
        std::vector<double> g = obj.gradient(v);
        double gn = 0.0;
        for (double gi : g) gn += gi * gi;
        gn = std::sqrt(gn);
        if (gn <= 1e-14) break;

        Mat hess(n, n);
        for (int j = 0; j < n; ++j) {
            std::vector<double> vp = v, vm = v;
            vp[j] += h;
            vm[j] -= h;
            std::vector<double> gp = obj.gradient(vp), gm = obj.gradient(vm);
            for (int i = 0; i < n; ++i) hess(i, j) = (gp[i] - gm[i]) / (2.0 * h);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double sym = 0.5 * (hess(i, j) + hess(j, i));
                hess(i, j) = sym;
                hess(j, i) = sym;
            }

        bool moved = false;
        for (double ridge = 0.0; ridge < 1e10 && !moved; ridge = (ridge == 0.0 ? 1e-12 : ridge * 100.0)) {
            Mat a(n, n + 1);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) a(i, j) = hess(i, j) + (i == j ? ridge : 0.0);
                a(i, n) = g[i];
            }
            bool ok = true;
            for (int col = 0; col < n; ++col) {
                int best = col;
                for (int r = col + 1; r < n; ++r)
                    if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
                if (std::abs(a(best, col)) < 1e-14) { ok = false; break; }
                for (int j = 0; j <= n; ++j) std::swap(a(col, j), a(best, j));
                for (int r = 0; r < n; ++r) {
                    if (r == col) continue;
                    const double f = a(r, col) / a(col, col);
                    for (int j = 0; j <= n; ++j) a(r, j) -= f * a(col, j);
                }
            }
            if (!ok) continue;
            std::vector<double> dv(n);
            for (int i = 0; i < n; ++i) dv[i] = a(i, n) / a(i, i);
            double t = 1.0;
            for (int bt = 0; bt < 50; ++bt) {
                std::vector<double> vt(n);
                for (int i = 0; i < n; ++i) vt[i] = v[i] - t * dv[i];
                const double ft = obj.value(vt);
                if (ft < fval) {
                    v = vt;
                    fval = ft;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if (!moved) {
            double t = 0.25;
            for (int bt = 0; bt < 40 && !moved; ++bt) {
                std::vector<double> vt(n);
                for (int i = 0; i < n; ++i) vt[i] = v[i] - t * g[i];
                const double ft = obj.value(vt);
                if (ft < fval - 1e-16) {
                    v = vt;
                    fval = ft;
                    moved = true;
                }
                t *= 0.5;
            }
        }
        if (!moved) break;
    }

    v_out = std::move(v);
    return fval;
}

/// Independent nearest-point oracle for the log-determinant cone: best of
/// the closed-form y = 0 face candidate and multi-start unconstrained
/// minimization over the log-parametrized boundary graph.
inline ConePoint project_cone_oracle(const ConePoint& p) {
    const int d = p.dim();

    // independent membership check
    auto inside = [&](const ConePoint& q) {
        const double s = 1e-12 * std::max(1.0, ldcone::norm(q));
        if (q.y > 0.0) {
            auto ld = cholesky_logdet(q.Z);
            if (ld && q.x <= q.y * (*ld - d * std::log(q.y)) + s) return true;
        }
        if (std::abs(q.y) > s || q.x > s) return false;
        SymMat clipped = clip_psd_independent(q.Z);
        return (clipped - q.Z).frob_norm() <= s;
    };
    if (inside(p)) return p;

    // y = 0 face candidate (closed form)
    ConePoint best(std::min(p.x, 0.0), 0.0, psd_project_oracle(p.Z));
    double best_d = ldcone::distance(best, p);

    BoundaryObjective obj{p};
    const int n = 1 + d * (d + 1) / 2;
    const double rt2 = std::sqrt(2.0);
    auto pack_w = [&](double u, const SymMat& w) {
        std::vector<double> v(n, 0.0);
        v[0] = u;
        int k = 1;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                v[k++] = (i == j) ? w(i, j) : rt2 * w(i, j);
            }
        return v;
    };

    // Moreau optimality certificate: q is the projection iff p - q lies in
    // the polar cone and is orthogonal to q; the polar has an explicit form,
    // checked here with the oracle-local routines
    auto certifies = [&](const ConePoint& q) {
        const ConePoint r = p - q;
        const double scale = std::max(1.0, ldcone::norm(p));
        if (std::abs(ldcone::inner(r, q)) > 1e-7 * scale * std::max(1.0, ldcone::norm(q))) return false;
        const ConePoint m = ConePoint(0.0, 0.0, SymMat(d)) - r;  // -r must be in the dual cone
        const double s = 1e-7 * scale;
        if (m.x < -s) {
            auto ld = cholesky_logdet(m.Z);
            return ld && d * std::log(-m.x) + m.y / m.x <= d + *ld + s;
        }
        if (std::abs(m.x) > s || m.y < -s) return false;
        // shifted Cholesky as the PSD test: robust for degenerate spectra
        const double bump = 1e-7 * std::max(1.0, m.Z.frob_norm());
        return cholesky_logdet(m.Z + SymMat::identity(d) * bump).has_value();
    };

    std::vector<std::vector<double>> starts;
    starts.push_back(pack_w(0.0, SymMat(d)));
    starts.push_back(pack_w(std::log(std::max(p.y, 0.05)), SymMat(d)));
    starts.push_back(pack_w(std::log(0.05), SymMat::identity(d) * -2.0));
    starts.push_back(pack_w(-16.0, SymMat(d)));
    {
        SymMat seed = p.Z * (1.0 / std::max(1.0, p.Z.frob_norm()));
        starts.push_back(pack_w(std::log(std::max(p.y, 0.3)), seed));
        starts.push_back(pack_w(-8.0, seed));
    }

    auto scan = [&](const std::vector<std::vector<double>>& vs) {
        for (const auto& v0 : vs) {
            std::vector<double> v;
            minimize_boundary_graph(obj, v0, v);
            ConePoint q = obj.point_at(v);
            const double dist = ldcone::distance(q, p);
            if (dist < best_d) {
                best_d = dist;
                best = q;
            }
        }
    };
    scan(starts);
    if (certifies(best)) return best;

    // wider randomized sweep only when the certificate is inconclusive
    std::vector<std::vector<double>> extra;
    ldcone::Rng rng(0x9E1u ^ static_cast<std::uint64_t>(1000.0 * (std::abs(p.x) + std::abs(p.y))));
    for (int i = 0; i < 10; ++i) {
        SymMat w0(d);
        for (int r = 0; r < d; ++r)
            for (int c = r; c < d; ++c) w0.set(r, c, 1.2 * rng.normal());
        extra.push_back(pack_w(rng.uniform(-16.0, 1.5), w0));
    }
    scan(extra);
    return best;
}

// ---------------------------------------------------------------------------
// affine projection by least squares (normal equations)

inline ConePoint project_affine_oracle(const ConePoint& p, const std::vector<ConePoint>& basis,
                                       const ConePoint& offset) {
    const int n = static_cast<int>(basis.size());
    if (n == 0) return offset;
    Mat a(n, n + 1);
    ConePoint rhs = p - offset;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = ldcone::inner(basis[i], basis[j]);
        a(i, n) = ldcone::inner(basis[i], rhs);
    }
    for (int col = 0; col < n; ++col) {
        int bestr = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(bestr, col))) bestr = r;
        for (int j = 0; j <= n; ++j) std::swap(a(col, j), a(bestr, j));
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col) / a(col, col);
            for (int j = 0; j <= n; ++j) a(r, j) -= f * a(col, j);
        }
    }
    ConePoint out = offset;
    for (int i = 0; i < n; ++i) out += basis[i] * (a(i, n) / a(i, i));
    return out;
}

} // namespace oracles
