#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldcone/cone.hpp"
#include "ldcone/faces.hpp"
#include "ldcone/frf.hpp"
#include "ldcone/sampling.hpp"

namespace ldcone {

/// svec flattening; off-diagonals carry sqrt(2) so Euclidean and point inner
/// products agree.
inline std::vector<double> flatten_point(const ConePoint& p) {
    const int d = p.dim();
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(sd(d)) + 2);
    v.push_back(p.x);
    v.push_back(p.y);
    const double rt2 = std::sqrt(2.0);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) v.push_back(i == j ? p.Z(i, j) : rt2 * p.Z(i, j));
    return v;
}

/// Affine feasibility data: the subspace span(basis) + offset. The basis must
/// be orthonormal; orthonormalize_points() prepares raw spanning sets.
struct FeasProblem {
    int d = 0;
    std::vector<ConePoint> basis;
    ConePoint offset;

    FeasProblem(int d_, std::vector<ConePoint> basis_, ConePoint offset_)
        : d(d_), basis(std::move(basis_)), offset(std::move(offset_)) {
        if (d < 2) throw std::invalid_argument("FeasProblem: d must be >= 2");
        if (offset.dim() != d) throw std::invalid_argument("FeasProblem: offset dimension mismatch");
        if (!offset.finite()) throw std::invalid_argument("FeasProblem: offset must be finite");
        for (const auto& b : basis) {
            if (b.dim() != d) throw std::invalid_argument("FeasProblem: basis dimension mismatch");
            if (!b.finite()) throw std::invalid_argument("FeasProblem: basis must be finite");
        }
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = i; j < basis.size(); ++j) {
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(inner(basis[i], basis[j]) - want) > 1e-10)
                    throw std::invalid_argument("FeasProblem: basis is not orthonormal");
            }
    }
};

inline std::vector<ConePoint> orthonormalize_points(const std::vector<ConePoint>& raw) {
    if (raw.empty()) return {};
    const int d = raw.front().dim();
    Mat m(static_cast<int>(flatten_point(raw.front()).size()), static_cast<int>(raw.size()));
    for (int j = 0; j < m.cols; ++j) {
        auto v = flatten_point(raw[static_cast<std::size_t>(j)]);
        for (int i = 0; i < m.rows; ++i) m(i, j) = v[static_cast<std::size_t>(i)];
    }
    Mat q = gram_schmidt(m, 1e-10);
    std::vector<ConePoint> out;
    const double rt2 = std::sqrt(2.0);
    for (int j = 0; j < q.cols; ++j) {
        ConePoint p = ConePoint::zero(d);
        p.x = q(0, j);
        p.y = q(1, j);
        int k = 2;
        for (int i = 0; i < d; ++i)
            for (int l = i; l < d; ++l) {
                p.Z.set(i, l, i == l ? q(k, j) : q(k, j) / rt2);
                ++k;
            }
        out.push_back(std::move(p));
    }
    return out;
}

/// Orthogonal projection onto span(basis) + offset.
inline ConePoint project_affine(const ConePoint& p, const FeasProblem& prob) {
    ConePoint out = prob.offset;
    ConePoint r = p - prob.offset;
    for (const auto& b : prob.basis) out += inner(r, b) * b;
    return out;
}

inline double dist_affine(const ConePoint& p, const FeasProblem& prob) {
    return distance(project_affine(p, prob), p);
}

struct ChainStep {
    ConePoint n;
    FaceDescriptor face_before;
    FaceDescriptor face_after;
};

enum class ChainCondition {
    ok,
    structure,         // chain shape: empty face data, wrong start, step after the zero face
    orth_subspace,     // n_i not orthogonal to the subspace
    orth_offset,       // n_i not orthogonal to the offset
    dual_membership,   // n_i outside the dual of the current face
    strict_inclusion,  // the step does not strictly shrink the face
    face_mismatch,     // stored face disagrees with the recomputed one
};

inline const char* to_string(ChainCondition c) {
    switch (c) {
        case ChainCondition::ok: return "ok";
        case ChainCondition::structure: return "structure";
        case ChainCondition::orth_subspace: return "orth_subspace";
        case ChainCondition::orth_offset: return "orth_offset";
        case ChainCondition::dual_membership: return "dual_membership";
        case ChainCondition::strict_inclusion: return "strict_inclusion";
        case ChainCondition::face_mismatch: return "face_mismatch";
    }
    return "?";
}

struct ChainReport {
    bool pass = true;
    int failing_step = 0;  // 1-based
    ChainCondition condition = ChainCondition::ok;
    std::string message;
};

namespace detail {

// span(B1) == span(B2) for orthonormal column blocks, via projector difference
inline bool same_column_span(const Mat& b1, const Mat& b2, double tol) {
    if (b1.cols != b2.cols) return false;
    if (b1.rows != b2.rows) return false;
    double diff = 0.0;
    for (int i = 0; i < b1.rows; ++i)
        for (int j = 0; j < b1.rows; ++j) {
            double p1 = 0.0, p2 = 0.0;
            for (int k = 0; k < b1.cols; ++k) p1 += b1(i, k) * b1(j, k);
            for (int k = 0; k < b2.cols; ++k) p2 += b2(i, k) * b2(j, k);
            diff += (p1 - p2) * (p1 - p2);
        }
    return std::sqrt(diff) <= tol;
}

inline bool faces_equal(const FaceDescriptor& a, const FaceDescriptor& b, double tol) {
    if (a.kind != b.kind || a.d != b.d) return false;
    switch (a.kind) {
        case FaceKind::Ray_Fr: {
            if (!a.ray_generator || !b.ray_generator) return false;
            ConePoint ga = *a.ray_generator * (1.0 / norm(*a.ray_generator));
            ConePoint gb = *b.ray_generator * (1.0 / norm(*b.ray_generator));
            return distance(ga, gb) <= tol;
        }
        case FaceKind::Mid_Fs:
        case FaceKind::NonExposed_Fne:
            if (!a.kernel_basis || !b.kernel_basis) return false;
            return same_column_span(*a.kernel_basis, *b.kernel_basis, tol);
        default:
            return true;
    }
}

// product-form faces (x-interval) x {0} x (B S B^T): everything after the
// first reduction step is of this shape, the 1-dimensional faces aside
struct ProductFace {
    bool x_free = true;  // x ranges over R_-, else pinned to 0
    Mat basis;           // d x m orthonormal kernel basis

    static std::optional<ProductFace> of(const FaceDescriptor& f) {
        switch (f.kind) {
            case FaceKind::Big_Fd: return ProductFace{true, Mat::identity(f.d)};
            case FaceKind::Mid_Fs: return ProductFace{true, *f.kernel_basis};
            case FaceKind::Exceptional_Finf: return ProductFace{true, Mat(f.d, 0)};
            case FaceKind::NonExposed_Fne: return ProductFace{false, *f.kernel_basis};
            default: return std::nullopt;
        }
    }

    FaceDescriptor to_descriptor(int d) const {
        if (x_free) {
            if (basis.cols == d) return face_fd(d);
            if (basis.cols == 0) return face_finf(d);
            return face_fs(d, basis);
        }
        if (basis.cols == 0) return face_zero(d);
        return face_fne(d, basis);
    }
};

} // namespace detail

/// Face exposed by n as seen from the whole cone, including the trivial face
/// for dual-interior vectors.
inline FaceDescriptor face_from_exposing(const ConePoint& n, double tol = 1e-9) {
    if (!member_dual(n, tol)) throw std::domain_error("face_from_exposing: n is not in the dual cone");
    if (detail::dual_strict_interior(n, tol)) return face_zero(n.dim());
    return classify_face(n, tol);
}

namespace detail {

struct TransitionResult {
    std::optional<FaceDescriptor> next;
    ChainCondition condition = ChainCondition::ok;
    std::string message;
};

// one facial-reduction step: the face of `current` exposed by n
inline TransitionResult chain_transition(int d, const FaceDescriptor& current, const ConePoint& n,
                                         double tol) {
    const double nn = norm(n);
    const double s = tol * std::max(1.0, nn);
    TransitionResult out;

    if (current.kind == FaceKind::Whole_Cone) {
        if (!member_dual(n, tol)) {
            out.condition = ChainCondition::dual_membership;
            out.message = "exposing vector is not in the dual cone";
            return out;
        }
        try {
            out.next = face_from_exposing(n, tol);
        } catch (const std::domain_error& e) {
            out.condition = ChainCondition::dual_membership;
            out.message = e.what();
        }
        return out;
    }
    if (current.kind == FaceKind::Trivial_Zero) {
        out.condition = ChainCondition::structure;
        out.message = "cannot reduce past the zero face";
        return out;
    }
    if (current.kind == FaceKind::Ray_Fr) {
        const ConePoint& fr = *current.ray_generator;
        const double ip = inner(n, fr);
        if (ip < -tol * nn * std::max(1.0, norm(fr))) {
            out.condition = ChainCondition::dual_membership;
            out.message = "exposing vector is not in the dual of the ray";
            return out;
        }
        if (ip <= tol * nn * std::max(1.0, norm(fr))) {
            out.condition = ChainCondition::strict_inclusion;
            out.message = "step keeps the ray unchanged";
            return out;
        }
        out.next = face_zero(d);
        return out;
    }

    auto pf = ProductFace::of(current);
    if (!pf) {
        out.condition = ChainCondition::structure;
        out.message = "unsupported face in chain";
        return out;
    }
    // dual of (x-part) x {0} x (B S B^T): x-free faces need n_x <= 0; the
    // matrix block needs B^T n_Z B PSD; n_y is unconstrained
    if (pf->x_free && n.x > s) {
        out.condition = ChainCondition::dual_membership;
        out.message = "positive x-component violates the face dual";
        return out;
    }
    Mat new_basis(d, 0);
    if (pf->basis.cols > 0) {
        SymMat m = congruence(pf->basis, n.Z);
        EigenDecomposition em = eigen_sym(m);
        if (em.values.front() < -tol * std::max(1.0, em.values.back())) {
            out.condition = ChainCondition::dual_membership;
            out.message = "matrix block violates the face dual";
            return out;
        }
        Mat reduced = kernel_basis_of(m, std::max(tol, 1e-12));
        new_basis = pf->basis * reduced;
    }
    const bool pins_x = pf->x_free && n.x < -s;
    const bool shrinks = new_basis.cols < pf->basis.cols;
    if (!pins_x && !shrinks) {
        out.condition = ChainCondition::strict_inclusion;
        out.message = "step does not strictly shrink the face";
        return out;
    }
    out.next = ProductFace{pf->x_free && !pins_x, new_basis}.to_descriptor(d);
    return out;
}

} // namespace detail

/// Checks a facial-reduction chain against the problem data step by step:
/// orthogonality to the subspace and offset, membership in the dual of the
/// current face, and strict face decrease; recomputed faces must match the
/// stored ones. An empty chain passes vacuously.
inline ChainReport verify_chain(const FeasProblem& prob, const std::vector<ChainStep>& steps,
                                double tol = 1e-9) {
    ChainReport rep;
    auto fail = [&](int step, ChainCondition c, const std::string& msg) {
        rep.pass = false;
        rep.failing_step = step;
        rep.condition = c;
        rep.message = msg;
        return rep;
    };

    FaceDescriptor current = face_whole_cone(prob.d);
    for (std::size_t idx = 0; idx < steps.size(); ++idx) {
        const int stepno = static_cast<int>(idx) + 1;
        const ChainStep& st = steps[idx];
        const ConePoint& n = st.n;
        const double nn = norm(n);
        if (!(nn > 0.0) || !n.finite())
            return fail(stepno, ChainCondition::structure, "exposing vector is zero or non-finite");
        if (!detail::faces_equal(st.face_before, current, 1e-7))
            return fail(stepno, ChainCondition::face_mismatch,
                        std::string("face_before does not match the running face (expected ") +
                            to_string(current.kind) + ")");

        for (const auto& b : prob.basis)
            if (std::abs(inner(n, b)) > tol * nn * std::max(1.0, norm(b)))
                return fail(stepno, ChainCondition::orth_subspace,
                            "exposing vector is not orthogonal to the subspace");
        if (std::abs(inner(n, prob.offset)) > tol * nn * std::max(1.0, norm(prob.offset)))
            return fail(stepno, ChainCondition::orth_offset,
                        "exposing vector is not orthogonal to the offset");

        detail::TransitionResult tr = detail::chain_transition(prob.d, current, n, tol);
        if (!tr.next) return fail(stepno, tr.condition, tr.message);
        if (!detail::faces_equal(st.face_after, *tr.next, 1e-7))
            return fail(stepno, ChainCondition::face_mismatch,
                        std::string("face_after does not match the computed face (expected ") +
                            to_string(tr.next->kind) + ")");
        current = *tr.next;
    }
    return rep;
}

/// Builds chain steps from bare exposing vectors, verifying as it goes.
inline std::pair<std::vector<ChainStep>, ChainReport> build_chain(const FeasProblem& prob,
                                                                  const std::vector<ConePoint>& ns,
                                                                  double tol = 1e-9) {
    std::vector<ChainStep> steps;
    FaceDescriptor current = face_whole_cone(prob.d);
    for (std::size_t idx = 0; idx < ns.size(); ++idx) {
        const ConePoint& n = ns[idx];
        const int stepno = static_cast<int>(idx) + 1;
        ChainReport rep;
        const double nn = norm(n);
        auto fail = [&](ChainCondition c, const std::string& msg) {
            rep.pass = false;
            rep.failing_step = stepno;
            rep.condition = c;
            rep.message = msg;
            return std::make_pair(steps, rep);
        };
        if (!(nn > 0.0) || !n.finite())
            return fail(ChainCondition::structure, "exposing vector is zero or non-finite");
        for (const auto& b : prob.basis)
            if (std::abs(inner(n, b)) > tol * nn * std::max(1.0, norm(b)))
                return fail(ChainCondition::orth_subspace,
                            "exposing vector is not orthogonal to the subspace");
        if (std::abs(inner(n, prob.offset)) > tol * nn * std::max(1.0, norm(prob.offset)))
            return fail(ChainCondition::orth_offset,
                        "exposing vector is not orthogonal to the offset");
        detail::TransitionResult tr = detail::chain_transition(prob.d, current, n, tol);
        if (!tr.next) return fail(tr.condition, tr.message);
        steps.push_back(ChainStep{n, current, *tr.next});
        current = *tr.next;
    }
    return {steps, ChainReport{}};
}

/// min(d - 1, dim(L-perp cap offset-perp)) + 1; the codimension term is the
/// ambient dimension minus rank of span(basis and offset).
inline int dpps_upper_bound(const FeasProblem& prob) {
    const int ambient = sd(prob.d) + 2;
    std::vector<ConePoint> all = prob.basis;
    if (norm(prob.offset) > 0.0) all.push_back(prob.offset);
    int rank = 0;
    if (!all.empty()) rank = static_cast<int>(orthonormalize_points(all).size());
    const int codim = ambient - rank;
    return std::min(prob.d - 1, codim) + 1;
}

struct ErrorBoundCertificate {
    std::vector<ChainStep> chain;
    int d_pps = 0;  // length of the supplied chain; no minimality claim
    int d_pps_bound = 0;
    ResidualFn residual = ResidualFn::identity();
    std::string case_tag;
    std::vector<double> gammas;
};

/// Assembles the error-bound certificate for a verified chain. The residual
/// follows the case split on the chain length and the second face.
inline ErrorBoundCertificate build_certificate(const FeasProblem& prob,
                                               const std::vector<ChainStep>& steps,
                                               std::vector<double> gammas = {},
                                               double tol = 1e-9) {
    ChainReport rep = verify_chain(prob, steps, tol);
    if (!rep.pass)
        throw std::domain_error("build_certificate: chain failed verification at step " +
                                std::to_string(rep.failing_step) + " (" + to_string(rep.condition) +
                                ": " + rep.message + ")");
    if (!gammas.empty() && gammas.size() != steps.size())
        throw std::invalid_argument("build_certificate: need one gamma per chain step");
    if (gammas.empty()) gammas.assign(steps.size(), 1.0);

    ErrorBoundCertificate cert;
    cert.chain = steps;
    cert.d_pps = static_cast<int>(steps.size());
    cert.d_pps_bound = dpps_upper_bound(prob);
    cert.gammas = std::move(gammas);

    if (steps.empty()) {
        cert.residual = ResidualFn::identity();
        cert.case_tag = "(i) lipschitz";
        return cert;
    }
    const FaceDescriptor& f2 = steps.front().face_after;
    const ConePoint& n1 = steps.front().n;
    const double s = tol * std::max(1.0, norm(n1));

    if (steps.size() == 1) {
        switch (f2.kind) {
            case FaceKind::Trivial_Zero:
                cert.residual = ResidualFn::identity();
                cert.case_tag = "(ii)(a) lipschitz";
                break;
            case FaceKind::Big_Fd:
                cert.residual = ResidualFn::gd();
                cert.case_tag = "(ii)(b) entropic";
                break;
            case FaceKind::Mid_Fs:
                if (n1.y > s) {
                    cert.residual = ResidualFn::power(0.5);
                    cert.case_tag = "(ii)(c) holder-1/2";
                } else {
                    cert.residual = ResidualFn::glog();
                    cert.case_tag = "(ii)(c) log-type";
                }
                break;
            case FaceKind::Ray_Fr:
                cert.residual = ResidualFn::power(0.5);
                cert.case_tag = "(ii)(d) holder-1/2";
                break;
            case FaceKind::Exceptional_Finf:
                if (n1.y > s) {
                    cert.residual = ResidualFn::identity();
                    cert.case_tag = "(ii)(e) lipschitz";
                } else {
                    cert.residual = ResidualFn::glog();
                    cert.case_tag = "(ii)(e) log-type";
                }
                break;
            default:
                throw std::domain_error("build_certificate: unsupported second face");
        }
        return cert;
    }

    if (f2.kind != FaceKind::Big_Fd && f2.kind != FaceKind::Mid_Fs)
        throw std::domain_error(
            "build_certificate: chains of length >= 2 require the second face to be "
            "the y = 0 face or a kernel-restricted face");
    std::vector<ResidualFn> fns(steps.size() - 1, ResidualFn::power(0.5));
    fns.push_back(select_gbar(f2.kind, n1, tol));
    cert.residual = compose_chain(std::move(fns));
    cert.case_tag = "(iii) composed";
    return cert;
}

/// Projection onto the intersection of two convex sets by Dykstra iteration.
inline ConePoint dykstra_project(const ConePoint& x,
                                 const std::function<ConePoint(const ConePoint&)>& proj_a,
                                 const std::function<ConePoint(const ConePoint&)>& proj_b,
                                 double tol = 1e-10, int max_iter = 20000) {
    ConePoint a = x;
    ConePoint p = ConePoint::zero(x.dim());
    ConePoint q = ConePoint::zero(x.dim());
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        ConePoint b = proj_b(a + p);
        p = a + p - b;
        ConePoint next = proj_a(b + q);
        q = b + q - next;
        const double gap = distance(next, b);
        const double change = distance(next, a);
        a = next;
        if (gap <= tol && change <= tol) return a;
        prev_gap = gap;
    }
    throw std::runtime_error("dykstra_project: no convergence, gap " + std::to_string(prev_gap));
}

/// Alternating-projection feasibility probe; returns a near-feasible point or
/// nullopt when the gap fails to close (a hint that the problem data may be
/// infeasible, which the reduction machinery otherwise assumes away).
inline std::optional<ConePoint> feasibility_probe(const FeasProblem& prob, double tol = 1e-8,
                                                  int max_iter = 5000) {
    ConePoint x = prob.offset;
    for (int it = 0; it < max_iter; ++it) {
        ConePoint y = project_cone(x, 1e-10);
        ConePoint z = project_affine(y, prob);
        if (distance(y, z) <= tol * std::max(1.0, norm(y))) return z;
        x = z;
    }
    return std::nullopt;
}

struct CertCheckRow {
    double arg = 0.0;    // max(dist to cone, dist to affine)
    double lhs = 0.0;    // dist to the feasible set
    double rhs = 0.0;    // residual evaluated at arg
    double ratio = 0.0;  // lhs / rhs
};

struct CertCheckReport {
    double c_fit = 0.0;
    int samples = 0;
    double slope_emp = 0.0;
    double slope_cert = 0.0;
    bool diverged = false;
    std::vector<CertCheckRow> rows;
};

/// Samples points around the feasible region and fits the error-bound
/// constant; flags divergence when the empirical log-log slope of the
/// distance falls more than 5% short of the certified rate.
inline CertCheckReport check_certificate_empirically(const FeasProblem& prob,
                                                     const ErrorBoundCertificate& cert, int samples,
                                                     double eta, std::uint64_t seed) {
    const int d = prob.d;
    auto proj_face_fn = [&](const ConePoint& p) {
        if (cert.chain.empty()) return project_cone(p, 1e-11);
        return project_face(cert.chain.back().face_after, p);
    };
    auto proj_aff_fn = [&](const ConePoint& p) { return project_affine(p, prob); };
    auto project_feasible = [&](const ConePoint& p) {
        return dykstra_project(p, proj_face_fn, proj_aff_fn, 1e-10);
    };

    CertCheckReport rep;
    rep.slope_cert = (std::log(cert.residual.eval(1e-4)) - std::log(cert.residual.eval(1e-7))) /
                     (std::log(1e-4) - std::log(1e-7));

    ConePoint anchor = project_feasible(ConePoint::zero(d));
    std::vector<std::pair<double, double>> logpts;

    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        ConePoint x = ConePoint::zero(d);
        if (i % 2 == 0) {
            ConePoint g(rng.normal(), rng.normal(), random_sym(rng, d, 1.0));
            x = anchor + g * (eta * rng.uniform(0.02, 1.0) / std::max(norm(g), 1e-12));
        } else {
            // shrinking perturbations probe the small-argument regime
            const double t = rng.loguniform(1e-6, 0.3 * eta);
            ConePoint g(rng.normal(), rng.normal(), random_sym(rng, d, 1.0));
            x = anchor + g * (t / std::max(norm(g), 1e-12));
        }

        CertCheckRow row;
        row.arg = std::max(dist_cone(x, 1e-11), dist_affine(x, prob));
        row.lhs = distance(x, project_feasible(x));
        row.rhs = cert.residual.eval(row.arg);
        if (row.rhs <= 1e-13) {
            if (row.lhs > 1e-8 * std::max(1.0, norm(x)))
                throw std::runtime_error("certificate check: zero residual with nonzero distance");
            continue;
        }
        row.ratio = row.lhs / row.rhs;
        rep.c_fit = std::max(rep.c_fit, row.ratio);
        ++rep.samples;
        rep.rows.push_back(row);
        if (row.arg > 0.0 && row.arg < 1e-2 && row.lhs > 0.0)
            logpts.emplace_back(std::log(row.arg), std::log(row.lhs));
    }

    if (logpts.size() >= 8) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [lx, ly] : logpts) {
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = static_cast<double>(logpts.size());
        rep.slope_emp = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-12);
        rep.diverged = rep.slope_emp < rep.slope_cert - 0.05 * std::max(1.0, rep.slope_cert);
    }
    return rep;
}

} // namespace ldcone
