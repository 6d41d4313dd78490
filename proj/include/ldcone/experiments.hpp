#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldcone/cone.hpp"
#include "ldcone/faces.hpp"
#include "ldcone/frf.hpp"
#include "ldcone/reduction.hpp"
#include "ldcone/sampling.hpp"

namespace ldcone {

struct ExperimentSpec {
    std::string name;
    int d = 3;
    double k_min = 10.0;
    double k_max = 1e6;
    int points = 40;
    std::uint64_t seed = 1;
    std::string out;

    // experiment-specific knobs, settable from config files
    int r = 1;                  // rank parameter for the kernel-face runs
    double eta = 1.0;           // ball radius for gamma scans
    int samples = 100000;       // sample budget for gamma scans
    std::string g_name = "gd";  // residual for gamma scans: gd | glog | sqrt | abs
    bool random_n = false;      // draw the exposing vector from the seed
    bool adversarial = false;   // inject the worst-case boundary sequence

    void validate() const {
        if (d < 2) throw std::invalid_argument("experiment: d must be >= 2");
        if (k_min < 2.0) throw std::invalid_argument("experiment: k_min must be >= 2");
        if (k_max < k_min) throw std::invalid_argument("experiment: k_max must be >= k_min");
        if (points < 1) throw std::invalid_argument("experiment: points must be >= 1");
    }
};

struct Table {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> notes;  // extra comment lines below the schema line
};

/// RFC-4180 style output with a leading schema comment line; numbers carry 17
/// significant digits and CRLF row endings.
inline void write_csv(const Table& t, std::ostream& os) {
    os << "# schema: " << t.schema << "\r\n";
    for (const auto& note : t.notes) os << "# " << note << "\r\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\r\n";
    char buf[64];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\r\n";
    }
}

inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out;
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * i / (n - 1)));
    return out;
}

inline std::function<double(double)> residual_by_name(const std::string& name) {
    if (name == "gd") return [](double t) { return eval_gd(t); };
    if (name == "glog") return [](double t) { return eval_glog(t); };
    if (name == "sqrt") return [](double t) { return std::sqrt(t); };
    if (name == "abs") return [](double t) { return t; };
    throw std::invalid_argument("unknown residual name: " + name);
}

/// Ratio of face distance to the entropic residual of the cone distance
/// along w^k = (d log k / k, 0, I).
inline Table run_tight_fd(const ExperimentSpec& spec) {
    spec.validate();
    const int d = spec.d;
    FaceDescriptor fd = classify_face(ConePoint(0.0, 1.0, SymMat(d)));

    Table t;
    t.schema = "tight_fd.v1";
    t.columns = {"k", "dist_face", "dist_face_closed", "dist_cone", "dist_cone_ub",
                 "gd_dist_cone", "ratio", "v_in_cone", "converged"};
    for (double k : log_spaced(spec.k_min, spec.k_max, spec.points)) {
        const ConePoint w(d * std::log(k) / k, 0.0, SymMat::identity(d));
        const ConePoint v(d * std::log(k) / k, 1.0 / k, SymMat::identity(d));
        const double dist_face_val = dist_face(fd, w);
        const double closed = d * std::log(k) / k;
        double dist = 0.0, gd_val = 0.0, ratio = 0.0;
        double converged = 1.0;
        try {
            dist = dist_cone(w, 1e-11);
            gd_val = eval_gd(dist);
            ratio = dist_face_val / gd_val;
        } catch (const std::exception&) {
            converged = 0.0;
        }
        t.rows.push_back({k, dist_face_val, closed, dist, 1.0 / k, gd_val, ratio,
                          member_primal(v, 1e-9) ? 1.0 : 0.0, converged});
    }
    return t;
}

namespace detail {

// block matrix [[I_{d-r}, Q^T/k], [Q/k, C]] conjugated by R
inline SymMat holder_block(const Mat& rot, const Mat& q, double k, double corner, int d, int r) {
    SymMat inner_m(d);
    for (int i = 0; i < d - r; ++i) inner_m.set(i, i, 1.0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < d - r; ++j) inner_m.set(d - r + i, j, q(i, j) / k);
    for (int i = 0; i < r; ++i) inner_m.set(d - r + i, d - r + i, corner);
    Mat full(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) full(i, j) = inner_m(i, j);
    Mat prod = rot * full * rot.transposed();
    SymMat out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out.set(i, j, 0.5 * (prod(i, j) + prod(j, i)));
    return out;
}

} // namespace detail

/// Hoelder-rate run on the kernel-restricted face: w^k carries off-diagonal
/// coupling Q/k, the feasible comparison point adds an I_r/k^2 corner.
inline Table run_tight_fs_holder(const ExperimentSpec& spec) {
    spec.validate();
    const int d = spec.d, r = spec.r;
    if (!(r > 0 && r < d)) throw std::invalid_argument("tight_fs_holder: need 0 < r < d");

    Rng rng(spec.seed);
    Mat rot = spec.random_n ? random_orthogonal(rng, d) : Mat::identity(d);
    Mat q(r, d - r);
    for (auto& v : q.a) v = rng.normal();
    // scale so that lambda_max(Q^T Q) is exactly 1
    {
        SymMat qtq(d - r);
        for (int i = 0; i < d - r; ++i)
            for (int j = i; j < d - r; ++j) {
                double s = 0.0;
                for (int l = 0; l < r; ++l) s += q(l, i) * q(l, j);
                qtq.set(i, j, s);
            }
        const double lmax = eigen_sym(qtq).values.back();
        for (auto& v : q.a) v /= std::sqrt(lmax);
    }
    double q_norm = 0.0;
    for (double v : q.a) q_norm += v * v;
    q_norm = std::sqrt(q_norm);

    SymMat nz(d);
    for (int i = 0; i < r; ++i) nz.set(d - r + i, d - r + i, 1.0);
    nz = [&] {
        Mat full(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) full(i, j) = nz(i, j);
        Mat prod = rot * full * rot.transposed();
        SymMat out(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) out.set(i, j, 0.5 * (prod(i, j) + prod(j, i)));
        return out;
    }();
    FaceDescriptor fs = classify_face(ConePoint(0.0, 1.0, nz));

    Table t;
    t.schema = "tight_fs_holder.v1";
    t.columns = {"k",  "dist_face", "dist_face_closed", "dist_cone", "dist_cone_ub",
                 "sqrt_dist_cone", "ratio", "v_in_cone", "converged"};
    for (double k : log_spaced(spec.k_min, spec.k_max, spec.points)) {
        const ConePoint w(-1.0, 0.0, detail::holder_block(rot, q, k, 0.0, d, r));
        const ConePoint v(-1.0, 0.0, detail::holder_block(rot, q, k, 1.0 / (k * k), d, r));
        const double dist_face_val = dist_face(fs, w);
        const double closed = std::sqrt(2.0) * q_norm / k;
        double dist = 0.0, root = 0.0, ratio = 0.0, converged = 1.0;
        try {
            dist = dist_cone(w, 1e-12);
            root = std::sqrt(dist);
            ratio = dist_face_val / root;
            // distances below the double-precision floor are not resolvable
            if (dist <= 1e-13 * (1.0 + norm(w))) converged = 0.0;
        } catch (const std::exception&) {
            converged = 0.0;
        }
        t.rows.push_back({k, dist_face_val, closed, dist, std::sqrt(static_cast<double>(r)) / (k * k),
                          root, ratio, member_primal(v, 1e-9) ? 1.0 : 0.0, converged});
    }
    return t;
}

/// Log-type run shared by the kernel face and the exceptional ray:
/// w^k = (-1, 1/k, 0) with comparison point (-1, 1/k, I e^{-k/d} / k).
/// The e^{k/d} factors stay in the log domain; the numeric projection is used
/// only while the scales are representable, otherwise the closed-form bound
/// substitutes (dist_source column: 0 = projection, 1 = closed form).
inline Table run_tight_log(const ExperimentSpec& spec, bool full_rank) {
    spec.validate();
    const int d = spec.d;
    Rng rng(spec.seed);
    FaceDescriptor face =
        full_rank
            ? classify_face(ConePoint(
                  0.0, 0.0, spec.random_n ? random_spd(rng, d, 0.5, 2.0) : SymMat::identity(d)))
            : classify_face(ConePoint(0.0, 0.0, random_psd_rank(rng, d, spec.r)));

    Table t;
    t.schema = full_rank ? "tight_finf_log.v1" : "tight_fs_log.v1";
    t.columns = {"k", "dist_face", "dist_cone", "log_dist_cone_ub", "glog_dist_cone",
                 "ratio", "dist_source", "u_ok", "converged"};
    const ConePoint u_expect(-1.0, 0.0, SymMat(d));
    for (double k : log_spaced(spec.k_min, spec.k_max, spec.points)) {
        const ConePoint w(-1.0, 1.0 / k, SymMat(d));
        const double dist_face_val = dist_face(face, w);
        const double log_ub = 0.5 * std::log(static_cast<double>(d)) - std::log(k) - k / d;
        double dist = 0.0, source = 0.0, converged = 1.0;
        if (k / d <= 120.0) {
            try {
                dist = dist_cone(w, 1e-12);
            } catch (const std::exception&) {
                converged = 0.0;
            }
        } else {
            dist = std::exp(log_ub);
            source = 1.0;
        }
        double glog_val = 0.0, ratio = 0.0;
        if (converged > 0.0) {
            // -1/log t evaluated through the log-domain bound when t underflows
            glog_val = dist > 0.0 ? eval_glog(dist) : -1.0 / log_ub;
            ratio = dist_face_val / glog_val;
        }
        const double u_ok = distance(project_face(face, w), u_expect) <= 1e-9 ? 1.0 : 0.0;
        t.rows.push_back({k, dist_face_val, dist, log_ub, glog_val, ratio, source, u_ok, converged});
    }
    return t;
}

inline Table run_tight_fs_log(const ExperimentSpec& spec) { return run_tight_log(spec, false); }
inline Table run_tight_finf_log(const ExperimentSpec& spec) { return run_tight_log(spec, true); }

struct RayLimit {
    ConePoint n;
    double mu = 0.0;
    double nu = 0.0;
    double c_r = 0.0;
    double l_r = 0.0;
};

/// Closed-form limit constant of the ray-face ratio.
inline RayLimit ray_limit_constants(const ConePoint& n) {
    FaceDescriptor f = classify_face(n);
    if (f.kind != FaceKind::Ray_Fr) throw std::domain_error("ray_limit_constants: n must expose a ray");
    const int d = n.dim();
    EigenDecomposition e = eigen_sym(n.Z);
    double mu = 0.0, inv_frob2 = 0.0;
    for (double lam : e.values) {
        mu += std::log(-n.x / lam);
        inv_frob2 += 1.0 / (lam * lam);
    }
    const double nu = n.x * n.x * inv_frob2;
    const double den = mu * mu + nu + 1.0;
    const double t1 = (nu * (1.0 - mu / d) + 1.0) / den;
    const double t2 = (mu + nu / d) / den;
    const double t3 = (mu * mu / d - mu + 1.0 / d) / den;
    const double c_r = t1 * t1 + t2 * t2 + nu * t3 * t3;
    return {n, mu, nu, c_r, std::sqrt(2.0 * norm(n) * c_r * d / (-n.x))};
}

/// Ray-face tightness: the ratio ||w-u|| / ||w-v||^(1/2) along the feasible
/// perturbation of the ray generator converges to the closed-form constant.
inline Table run_tight_fr(const ExperimentSpec& spec) {
    spec.validate();
    const int d = spec.d;
    Rng rng(spec.seed);
    ConePoint n = ConePoint(-1.0, -static_cast<double>(d), SymMat::identity(d));
    if (spec.random_n) {
        const double nx = -rng.loguniform(0.5, 2.0);
        SymMat nz = random_spd(rng, d, 0.5, 2.0);
        const double ld = logdet_or_neg_inf(nz);
        n = ConePoint(nx, nx * (ld - d * std::log(-nx) + d), nz);
    }
    FaceDescriptor face = classify_face(n);
    RayLimit lim = ray_limit_constants(n);
    // B = -n_x n_Z^{-1} from the ray generator
    const SymMat b = face.ray_generator->Z;

    Table t;
    t.schema = "tight_fr.v1";
    char note[160];
    std::snprintf(note, sizeof note, "mu=%.17g nu=%.17g C_r=%.17g L_r=%.17g", lim.mu, lim.nu,
                  lim.c_r, lim.l_r);
    t.notes.push_back(note);
    t.columns = {"k", "norm_wv", "norm_wu", "ratio", "l_r", "rel_gap"};
    for (double k : log_spaced(spec.k_min, spec.k_max, spec.points)) {
        const double xi = 1.0 / k;
        const ConePoint v(lim.mu + xi, 1.0, b * std::exp(xi / d));
        const ConePoint w = project_hyperplane(v, n);
        const ConePoint u = project_face(face, w);
        const double wv = distance(w, v);
        const double wu = distance(w, u);
        const double ratio = wu / std::sqrt(wv);
        t.rows.push_back({k, wv, wu, ratio, lim.l_r, std::abs(ratio - lim.l_r) / lim.l_r});
    }
    return t;
}

/// Nested-prefix gamma scan: the empirical infimum over the first N samples
/// is nonincreasing in N by construction.
inline Table run_gamma_scan(const ExperimentSpec& spec, const FaceDescriptor& face) {
    spec.validate();
    auto g = residual_by_name(spec.g_name);

    std::vector<ConePoint> inject;
    if (spec.adversarial) {
        for (double k = 10.0; k <= 1e6; k *= 4.0) {
            ConePoint v(spec.d * std::log(k) / k, 1.0 / k, SymMat::identity(spec.d));
            inject.push_back(v * (spec.eta / norm(v)));
        }
    }

    Table t;
    t.schema = "gamma_scan.v1";
    t.columns = {"n_samples", "gamma_min", "valid", "skipped"};
    for (int n = 100; n <= spec.samples; n *= 10) {
        GammaReport rep = estimate_gamma_report(face, g, spec.eta, n, spec.seed, inject);
        t.rows.push_back({static_cast<double>(n), rep.gamma, static_cast<double>(rep.valid_samples),
                          static_cast<double>(rep.skipped)});
    }
    return t;
}

/// Error-bound certificate check rows plus summary note.
inline Table run_certificate_check(const ExperimentSpec& spec, const FeasProblem& prob,
                                   const ErrorBoundCertificate& cert) {
    spec.validate();
    CertCheckReport rep = check_certificate_empirically(prob, cert, spec.samples, spec.eta, spec.seed);
    Table t;
    t.schema = "certificate_check.v1";
    char note[200];
    std::snprintf(note, sizeof note, "c_fit=%.17g slope_emp=%.6f slope_cert=%.6f diverged=%d",
                  rep.c_fit, rep.slope_emp, rep.slope_cert, rep.diverged ? 1 : 0);
    t.notes.push_back(note);
    t.notes.push_back("residual: " + cert.residual.sexpr());
    t.columns = {"arg", "lhs", "rhs", "ratio"};
    for (const auto& row : rep.rows) t.rows.push_back({row.arg, row.lhs, row.rhs, row.ratio});
    return t;
}

} // namespace ldcone
