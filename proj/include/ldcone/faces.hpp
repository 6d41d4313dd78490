#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldcone/cone.hpp"
#include "ldcone/linalg.hpp"
#include "ldcone/sampling.hpp"

namespace ldcone {

inline int sd(int d) { return d * (d + 1) / 2; }

enum class FaceKind {
    Ray_Fr,            // 1-dimensional ray through f_r, exposed by n_x < 0
    Big_Fd,            // the y = 0 face R_- x {0} x PSD
    Mid_Fs,            // R_- x {0} x (PSD cap kernel of n_Z)
    Exceptional_Finf,  // R_- x {0} x {0}
    NonExposed_Fne,    // {0} x {0} x (PSD cap kernel of n_Z)
    Trivial_Zero,
    Whole_Cone,
};

inline const char* to_string(FaceKind k) {
    switch (k) {
        case FaceKind::Ray_Fr: return "Ray_Fr";
        case FaceKind::Big_Fd: return "Big_Fd";
        case FaceKind::Mid_Fs: return "Mid_Fs";
        case FaceKind::Exceptional_Finf: return "Exceptional_Finf";
        case FaceKind::NonExposed_Fne: return "NonExposed_Fne";
        case FaceKind::Trivial_Zero: return "Trivial_Zero";
        case FaceKind::Whole_Cone: return "Whole_Cone";
    }
    return "?";
}

struct FaceDescriptor {
    FaceKind kind = FaceKind::Whole_Cone;
    int d = 0;  // ambient matrix dimension
    std::optional<ConePoint> n;
    std::optional<ConePoint> ray_generator;  // Ray_Fr only
    std::optional<Mat> kernel_basis;         // Mid_Fs and NonExposed_Fne
    int dim = 0;
};

inline FaceDescriptor face_whole_cone(int d) {
    return {FaceKind::Whole_Cone, d, std::nullopt, std::nullopt, std::nullopt, sd(d) + 2};
}

inline FaceDescriptor face_zero(int d) {
    return {FaceKind::Trivial_Zero, d, std::nullopt, std::nullopt, std::nullopt, 0};
}

inline FaceDescriptor face_fd(int d, std::optional<ConePoint> n = std::nullopt) {
    return {FaceKind::Big_Fd, d, std::move(n), std::nullopt, std::nullopt, sd(d) + 1};
}

inline FaceDescriptor face_finf(int d, std::optional<ConePoint> n = std::nullopt) {
    return {FaceKind::Exceptional_Finf, d, std::move(n), std::nullopt, std::nullopt, 1};
}

inline FaceDescriptor face_fs(int d, Mat kernel_basis, std::optional<ConePoint> n = std::nullopt) {
    const int m = kernel_basis.cols;
    return {FaceKind::Mid_Fs, d, std::move(n), std::nullopt, std::move(kernel_basis), sd(m) + 1};
}

/// Non-exposed faces {0} x {0} x (PSD cap ker basis); constructible and
/// projectable, but never returned by classify_face.
inline FaceDescriptor face_fne(int d, Mat kernel_basis) {
    const int m = kernel_basis.cols;
    return {FaceKind::NonExposed_Fne, d, std::nullopt, std::nullopt, std::move(kernel_basis), sd(m)};
}

namespace detail {

inline bool dual_strict_interior(const ConePoint& n, double tol) {
    const double s = tol * std::max(1.0, norm(n));
    if (!(n.x < -s)) return false;
    const double ld = logdet_or_neg_inf(n.Z);
    if (!std::isfinite(ld)) return false;
    return n.y - n.x * (ld - n.dim() * std::log(-n.x) + n.dim()) > s;
}

inline Mat kernel_basis_of(const SymMat& z, double tol_rel) {
    EigenDecomposition e = eigen_sym(z);
    const double thresh = tol_rel * std::max(1.0, e.values.back());
    int m = 0;
    while (m < z.dim() && e.values[m] <= thresh) ++m;
    Mat b(z.dim(), m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < z.dim(); ++i) b(i, j) = e.vectors(i, j);
    return b;
}

} // namespace detail

/// Face taxonomy of an exposing vector n on the dual boundary:
///   n_x < 0                    -> ray through f_r
///   n_x = 0, rank(n_Z) = 0     -> the whole y = 0 face (needs n_y > 0)
///   n_x = 0, 0 < rank < d      -> kernel-restricted face
///   n_x = 0, rank = d          -> the exceptional ray R_- x {0} x {0}
inline FaceDescriptor classify_face(const ConePoint& n, double tol = 1e-9) {
    require_cone_dim(n);
    const int d = n.dim();
    const double s = tol * std::max(1.0, norm(n));
    if (norm(n) <= tol) throw std::domain_error("classify_face: n must be nonzero");
    if (!member_dual(n, tol)) throw std::domain_error("classify_face: n is not in the dual cone");
    if (detail::dual_strict_interior(n, tol))
        throw std::domain_error("classify_face: n lies in the dual interior, not its boundary");

    if (n.x < -s) {
        EigenDecomposition e = eigen_sym(n.Z);
        std::vector<double> inv(e.values.size());
        double mu = 0.0;
        for (std::size_t i = 0; i < inv.size(); ++i) {
            inv[i] = -n.x / e.values[i];
            mu += std::log(inv[i]);
        }
        FaceDescriptor f{FaceKind::Ray_Fr, d, n, std::nullopt, std::nullopt, 1};
        f.ray_generator = ConePoint(mu, 1.0, assemble_from_eigen(e, inv));
        return f;
    }

    const int r = numerical_rank(n.Z, std::max(tol, 1e-12));
    if (r == 0) {
        if (!(n.y > s)) throw std::domain_error("classify_face: n is numerically zero");
        return face_fd(d, n);
    }
    if (r == d) return face_finf(d, n);
    return face_fs(d, detail::kernel_basis_of(n.Z, std::max(tol, 1e-12)), n);
}

/// Exact Euclidean projection onto the face.
inline ConePoint project_face(const FaceDescriptor& f, const ConePoint& p) {
    if (p.dim() != f.d) throw std::invalid_argument("project_face: dimension mismatch");
    switch (f.kind) {
        case FaceKind::Ray_Fr: {
            if (!f.ray_generator) throw std::logic_error("project_face: ray face lacks generator");
            const ConePoint& fr = *f.ray_generator;
            const double t = std::max(inner(p, fr) / inner(fr, fr), 0.0);
            return t * fr;
        }
        case FaceKind::Big_Fd:
            return ConePoint(std::min(p.x, 0.0), 0.0, psd_project(p.Z));
        case FaceKind::Mid_Fs: {
            if (!f.kernel_basis) throw std::logic_error("project_face: kernel basis missing");
            const Mat& b = *f.kernel_basis;
            return ConePoint(std::min(p.x, 0.0), 0.0, sandwich(b, psd_project(congruence(b, p.Z))));
        }
        case FaceKind::Exceptional_Finf:
            return ConePoint(std::min(p.x, 0.0), 0.0, SymMat(f.d));
        case FaceKind::NonExposed_Fne: {
            if (!f.kernel_basis) throw std::logic_error("project_face: kernel basis missing");
            const Mat& b = *f.kernel_basis;
            return ConePoint(0.0, 0.0, sandwich(b, psd_project(congruence(b, p.Z))));
        }
        case FaceKind::Trivial_Zero:
            return ConePoint::zero(f.d);
        case FaceKind::Whole_Cone:
            throw std::domain_error("project_face: descriptor must name a proper face");
    }
    throw std::logic_error("project_face: unreachable");
}

inline double dist_face(const FaceDescriptor& f, const ConePoint& p) {
    return distance(project_face(f, p), p);
}

/// Random point of the face via its parameterization.
inline ConePoint sample_face(const FaceDescriptor& f, Rng& rng, double scale = 1.0) {
    switch (f.kind) {
        case FaceKind::Ray_Fr:
            return rng.loguniform(1e-3, 3.0) * scale * (*f.ray_generator);
        case FaceKind::Big_Fd:
            return ConePoint(-std::abs(rng.normal()) * scale, 0.0,
                             psd_project(random_sym(rng, f.d, scale)));
        case FaceKind::Mid_Fs: {
            const Mat& b = *f.kernel_basis;
            SymMat s = psd_project(random_sym(rng, b.cols, scale));
            return ConePoint(-std::abs(rng.normal()) * scale, 0.0, sandwich(b, s));
        }
        case FaceKind::Exceptional_Finf:
            return ConePoint(-std::abs(rng.normal()) * scale, 0.0, SymMat(f.d));
        case FaceKind::NonExposed_Fne: {
            const Mat& b = *f.kernel_basis;
            SymMat s = psd_project(random_sym(rng, b.cols, scale));
            return ConePoint(0.0, 0.0, sandwich(b, s));
        }
        case FaceKind::Trivial_Zero:
            return ConePoint::zero(f.d);
        case FaceKind::Whole_Cone:
            return sample_boundary(rng, f.d, scale);
    }
    throw std::logic_error("sample_face: unreachable");
}

struct ExposureReport {
    bool pass = true;
    int face_samples = 0;
    int boundary_samples = 0;
    int violations = 0;
    std::string first_violation;
};

/// Samples the face parameterization and checks membership, orthogonality to
/// the exposing vector, and strict positivity of <n, q> off the face.
inline ExposureReport verify_face_exposure(const FaceDescriptor& f, int samples, std::uint64_t seed) {
    if (!f.n) throw std::domain_error("verify_face_exposure: face carries no exposing vector");
    if (f.kind == FaceKind::NonExposed_Fne)
        throw std::domain_error("verify_face_exposure: face is not exposed");
    const ConePoint& n = *f.n;
    ExposureReport rep;
    auto fail = [&](const std::string& msg) {
        rep.pass = false;
        ++rep.violations;
        if (rep.first_violation.empty()) rep.first_violation = msg;
    };

    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        ConePoint q = sample_face(f, rng);
        ++rep.face_samples;
        if (!member_primal(q, 1e-9)) fail("face sample escapes the cone at index " + std::to_string(i));
        if (std::abs(inner(n, q)) > 1e-9 * std::max(1.0, norm(n) * norm(q)))
            fail("face sample not orthogonal to n at index " + std::to_string(i));
    }
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed ^ 0x5bf03635u, static_cast<std::uint64_t>(i)));
        ConePoint q = sample_boundary(rng, f.d, 2.0);
        if (dist_face(f, q) <= 1e-8 * std::max(1.0, norm(q))) continue;  // landed on the face
        ++rep.boundary_samples;
        if (!(inner(n, q) > 0.0))
            fail("<n, q> not positive off the face at index " + std::to_string(i));
    }
    return rep;
}

struct GammaReport {
    double gamma = std::numeric_limits<double>::infinity();
    int valid_samples = 0;
    int skipped = 0;
    // histogram of log10(ratio) in unit bins [-12, 12)
    std::vector<int> histogram = std::vector<int>(24, 0);

    void record(double ratio) {
        gamma = std::min(gamma, ratio);
        ++valid_samples;
        int bin = static_cast<int>(std::floor(std::log10(std::max(ratio, 1e-12)))) + 12;
        if (bin < 0) bin = 0;
        if (bin > 23) bin = 23;
        ++histogram[static_cast<std::size_t>(bin)];
    }
};

/// Empirical upper bound for the face-residual ratio
///   gamma = inf  g(||v - w||) / ||u - w||
/// over boundary points v in the eta-ball off the face, with
/// w the hyperplane projection of v and u the face projection of w.
/// A sampled infimum only ever over-estimates the true one.
inline GammaReport estimate_gamma_report(const FaceDescriptor& f,
                                         const std::function<double(double)>& g, double eta,
                                         int samples, std::uint64_t seed,
                                         const std::vector<ConePoint>& extra = {}) {
    if (!f.n) throw std::domain_error("estimate_gamma: face carries no exposing vector");
    if (!(eta > 0.0)) throw std::domain_error("estimate_gamma: eta must be > 0");
    const ConePoint& n = *f.n;
    GammaReport rep;

    auto consider = [&](const ConePoint& v) {
        const ConePoint w = project_hyperplane(v, n);
        const ConePoint u = project_face(f, w);
        const double du = distance(u, w);
        if (du <= 1e-12) {
            ++rep.skipped;
            return;
        }
        rep.record(g(distance(v, w)) / du);
    };

    for (const ConePoint& v : extra) consider(v);
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        consider(sample_boundary(rng, f.d, eta));
    }
    if (rep.valid_samples == 0) throw std::domain_error("estimate_gamma: no valid samples");
    return rep;
}

inline double estimate_gamma(const FaceDescriptor& f, const std::function<double(double)>& g,
                             double eta, int samples, std::uint64_t seed,
                             const std::vector<ConePoint>& extra = {}) {
    return estimate_gamma_report(f, g, eta, samples, seed, extra).gamma;
}

} // namespace ldcone
