#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldcone {

/// Dense rectangular matrix, row-major. Used for eigenvector blocks and
/// kernel bases; symmetric data lives in SymMat.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat transposed() const {
        Mat t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

inline Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("Mat multiply: shape mismatch");
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
        }
    return z;
}

/// Symmetric d x d matrix stored dense full-square; entries are kept exactly
/// symmetric (set() writes both triangles).
class SymMat {
public:
    SymMat() = default;

    explicit SymMat(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, 0.0) {
        if (d < 1) throw std::invalid_argument("SymMat: dim must be >= 1");
    }

    static SymMat identity(int d) {
        SymMat m(d);
        for (int i = 0; i < d; ++i) m.set(i, i, 1.0);
        return m;
    }

    static SymMat diag(const std::vector<double>& v) {
        SymMat m(static_cast<int>(v.size()));
        for (int i = 0; i < m.dim(); ++i) m.set(i, i, v[i]);
        return m;
    }

    /// Build from a full square array; validates symmetry to tol_sym then
    /// symmetrizes exactly by averaging.
    static SymMat from_full(int d, const std::vector<double>& full, double tol_sym = 1e-12) {
        if (static_cast<int>(full.size()) != d * d)
            throw std::invalid_argument("SymMat::from_full: size mismatch");
        double scale = 1.0;
        for (double v : full) {
            if (!std::isfinite(v)) throw std::invalid_argument("SymMat::from_full: non-finite entry");
            scale = std::max(scale, std::abs(v));
        }
        SymMat m(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                double x = full[static_cast<std::size_t>(i) * d + j];
                double y = full[static_cast<std::size_t>(j) * d + i];
                if (std::abs(x - y) > tol_sym * scale)
                    throw std::invalid_argument("SymMat::from_full: asymmetry beyond tolerance");
                m.set(i, j, 0.5 * (x + y));
            }
        return m;
    }

    int dim() const { return d_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * d_ + j] = v;
        a_[static_cast<std::size_t>(j) * d_ + i] = v;
    }

    void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < d_; ++i) t += (*this)(i, i);
        return t;
    }

    double frob_norm() const { return std::sqrt(inner(*this, *this)); }

    bool finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Frobenius inner product; equals tr(AB) for symmetric A, B.
    static double inner(const SymMat& x, const SymMat& y) {
        if (x.d_ != y.d_) throw std::invalid_argument("SymMat::inner: dim mismatch");
        double s = 0.0;
        for (std::size_t k = 0; k < x.a_.size(); ++k) s += x.a_[k] * y.a_[k];
        return s;
    }

    SymMat& operator+=(const SymMat& o) {
        if (d_ != o.d_) throw std::invalid_argument("SymMat: dim mismatch");
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    SymMat& operator-=(const SymMat& o) {
        if (d_ != o.d_) throw std::invalid_argument("SymMat: dim mismatch");
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    SymMat& operator*=(double t) {
        for (auto& v : a_) v *= t;
        return *this;
    }

    friend SymMat operator+(SymMat x, const SymMat& y) { return x += y; }
    friend SymMat operator-(SymMat x, const SymMat& y) { return x -= y; }
    friend SymMat operator*(SymMat x, double t) { return x *= t; }
    friend SymMat operator*(double t, SymMat x) { return x *= t; }

private:
    int d_ = 0;
    std::vector<double> a_;
};

/// Congruence B^T A B for rectangular B (d x m); result is m x m symmetric.
inline SymMat congruence(const Mat& b, const SymMat& z) {
    if (b.rows != z.dim()) throw std::invalid_argument("congruence: shape mismatch");
    const int d = b.rows, m = b.cols;
    Mat zb(d, m);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            double v = z(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < m; ++j) zb(i, j) += v * b(k, j);
        }
    SymMat out(m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += b(k, i) * zb(k, j);
            out.set(i, j, s);
        }
    return out;
}

/// B S B^T for rectangular B (d x m) and symmetric S (m x m).
inline SymMat sandwich(const Mat& b, const SymMat& s) {
    if (b.cols != s.dim()) throw std::invalid_argument("sandwich: shape mismatch");
    const int d = b.rows, m = b.cols;
    Mat bs(d, m);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            for (int l = 0; l < m; ++l) acc += b(i, l) * s(l, k);
            bs(i, k) = acc;
        }
    SymMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < m; ++k) acc += bs(i, k) * b(j, k);
            out.set(i, j, acc);
        }
    return out;
}

struct EigenDecomposition {
    Mat vectors;                 // columns are eigenvectors, same order as values
    std::vector<double> values;  // ascending; ties keep original diagonal order
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Deterministic sweep order; runs until the off-diagonal norm hits machine
/// precision relative to the input scale.
inline EigenDecomposition eigen_sym(const SymMat& a) {
    if (!a.finite()) throw std::invalid_argument("eigen_sym: non-finite entries");
    const int d = a.dim();
    SymMat w = a;
    Mat v = Mat::identity(d);

    const double scale = std::max(1.0, a.frob_norm());
    const double stop = 1e-15 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += w(p, q) * w(p, q);
        if (std::sqrt(2.0 * off) <= stop) break;

        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = w(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = w(p, p), aqq = w(q, q);
                w.set(p, q, 0.0);
                w.set(p, p, app - t * apq);
                w.set(q, q, aqq + t * apq);
                for (int r = 0; r < d; ++r) {
                    if (r != p && r != q) {
                        const double arp = w(r, p), arq = w(r, q);
                        w.set(r, p, arp - s * (arq + tau * arp));
                        w.set(r, q, arq + s * (arp - tau * arq));
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return w(i, i) < w(j, j); });

    EigenDecomposition e;
    e.values.resize(d);
    e.vectors = Mat(d, d);
    for (int j = 0; j < d; ++j) {
        e.values[j] = w(order[j], order[j]);
        for (int i = 0; i < d; ++i) e.vectors(i, j) = v(i, order[j]);
    }
    return e;
}

/// Q diag(f(values)) Q^T reassembly.
inline SymMat assemble_from_eigen(const EigenDecomposition& e, const std::vector<double>& vals) {
    const int d = static_cast<int>(e.values.size());
    SymMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += e.vectors(i, k) * vals[k] * e.vectors(j, k);
            out.set(i, j, s);
        }
    return out;
}

/// Frobenius-nearest positive semidefinite matrix (eigenvalue clipping).
inline SymMat psd_project(const SymMat& a) {
    EigenDecomposition e = eigen_sym(a);
    bool already = true;
    for (double v : e.values)
        if (v < 0.0) { already = false; break; }
    if (already) return a;
    std::vector<double> clipped(e.values.size());
    for (std::size_t i = 0; i < e.values.size(); ++i) clipped[i] = std::max(e.values[i], 0.0);
    return assemble_from_eigen(e, clipped);
}

inline double lambda_min(const SymMat& a) { return eigen_sym(a).values.front(); }
inline double lambda_max(const SymMat& a) { return eigen_sym(a).values.back(); }

/// Count of eigenvalues above tol_rel * max(1, lambda_max). The input must be
/// PSD within the same relative tolerance.
inline int numerical_rank(const SymMat& a, double tol_rel = 1e-10) {
    if (tol_rel <= 0.0) throw std::invalid_argument("numerical_rank: tol_rel must be > 0");
    EigenDecomposition e = eigen_sym(a);
    const double lmax = e.values.back();
    const double thresh = tol_rel * std::max(1.0, lmax);
    if (e.values.front() < -thresh)
        throw std::domain_error("numerical_rank: matrix is not PSD within tolerance");
    int r = 0;
    for (double v : e.values)
        if (v > thresh) ++r;
    return r;
}

/// Constant C = eta^(1 - r/d) * (r * sigma_r)^(-r/d) with r = rank(Z) and
/// sigma_r the smallest positive eigenvalue of Z, valid in
/// det(R)^(1/d) <= C * tr(RZ)^(r/d) for every PSD R with ||R||_F <= eta.
inline double det_trace_bound_constant(const SymMat& z, double eta, double rank_tol = 1e-10) {
    if (eta <= 0.0) throw std::invalid_argument("det_trace_bound_constant: eta must be > 0");
    const int d = z.dim();
    const int r = numerical_rank(z, rank_tol);
    if (r == 0) throw std::domain_error("det_trace_bound_constant: Z must be nonzero");
    EigenDecomposition e = eigen_sym(z);
    const double sigma_r = e.values[static_cast<std::size_t>(d - r)];
    const double rd = static_cast<double>(r) / d;
    return std::pow(eta, 1.0 - rd) * std::pow(r * sigma_r, -rd);
}

/// Matrix text fixture format: first line d, then d rows of d decimals.
inline SymMat load_symmat(std::istream& in) {
    int d = 0;
    if (!(in >> d) || d < 1) throw std::invalid_argument("load_symmat: bad dimension line");
    std::vector<double> full(static_cast<std::size_t>(d) * d);
    for (auto& v : full)
        if (!(in >> v)) throw std::invalid_argument("load_symmat: truncated matrix data");
    // validated at 1e-12 then symmetrized exactly by averaging
    return SymMat::from_full(d, full, 1e-12);
}

inline void save_symmat(std::ostream& out, const SymMat& m) {
    out << m.dim() << "\n";
    char buf[64];
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
}

/// Orthonormalize the columns of m in place (modified Gram-Schmidt); returns
/// the retained rank. Columns below drop_tol * scale are dropped.
inline Mat gram_schmidt(const Mat& m, double drop_tol = 1e-12) {
    const int rows = m.rows;
    std::vector<std::vector<double>> kept;
    double scale = 0.0;
    for (double v : m.a) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);
    for (int j = 0; j < m.cols; ++j) {
        std::vector<double> col(rows);
        for (int i = 0; i < rows; ++i) col[i] = m(i, j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& k : kept) {
                double dp = 0.0;
                for (int i = 0; i < rows; ++i) dp += col[i] * k[i];
                for (int i = 0; i < rows; ++i) col[i] -= dp * k[i];
            }
        double nrm = 0.0;
        for (double v : col) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm > drop_tol * scale) {
            for (auto& v : col) v /= nrm;
            kept.push_back(std::move(col));
        }
    }
    Mat out(rows, static_cast<int>(kept.size()));
    for (int j = 0; j < out.cols; ++j)
        for (int i = 0; i < rows; ++i) out(i, j) = kept[j][i];
    return out;
}

} // namespace ldcone
