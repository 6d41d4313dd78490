#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldcone/faces.hpp"

namespace ldcone {

/// Piecewise modified Boltzmann-Shannon entropy:
///   0 at 0,  -t log t on (0, e^-2],  t + e^-2 beyond.
inline double eval_gd(double t) {
    if (t < 0.0) throw std::domain_error("eval_gd: t must be >= 0");
    if (t == 0.0) return 0.0;
    const double brk = std::exp(-2.0);
    if (t <= brk) return -t * std::log(t);
    return t + brk;
}

/// Log-type residual:
///   0 at 0,  -1/log t on (0, e^-2],  1/4 + e^2 t / 4 beyond.
inline double eval_glog(double t) {
    if (t < 0.0) throw std::domain_error("eval_glog: t must be >= 0");
    if (t == 0.0) return 0.0;
    const double brk = std::exp(-2.0);
    if (t <= brk) return -1.0 / std::log(t);
    return 0.25 + 0.25 * std::exp(2.0) * t;
}

/// Gamma parameter of a one-step residual function: either a frozen constant
/// (serializable, the default) or a callable re-estimated per ball radius.
struct GammaParam {
    double constant = 1.0;
    std::function<double(double)> fn;  // empty -> constant mode

    GammaParam() = default;
    GammaParam(double c) : constant(c) {}
    GammaParam(std::function<double(double)> f) : fn(std::move(f)) {}

    double operator()(double t) const {
        const double g = fn ? fn(t) : constant;
        if (!(g > 0.0)) throw std::domain_error("gamma must be positive");
        return g;
    }
    bool is_constant() const { return !fn; }
};

enum class FrfForm { Entropic, Sqrt, LogType, Lipschitz };

inline const char* to_string(FrfForm f) {
    switch (f) {
        case FrfForm::Entropic: return "entropic";
        case FrfForm::Sqrt: return "sqrt";
        case FrfForm::LogType: return "logtype";
        case FrfForm::Lipschitz: return "lipschitz";
    }
    return "?";
}

/// Symbolic residual function. A value tree rather than a closure so
/// certificates can be serialized and printed.
class ResidualFn {
public:
    enum class Node { Power, Entropy_gd, LogType_glog, SymCone, OneStep, Compose };

    static ResidualFn power(double alpha) {
        if (!(alpha > 0.0) || alpha > 1.0)
            throw std::domain_error("ResidualFn::power: alpha must be in (0, 1]");
        ResidualFn f(Node::Power);
        f.alpha_ = alpha;
        return f;
    }
    static ResidualFn identity() { return power(1.0); }
    static ResidualFn gd() { return ResidualFn(Node::Entropy_gd); }
    static ResidualFn glog() { return ResidualFn(Node::LogType_glog); }

    static ResidualFn symcone(double kappa) {
        if (!(kappa > 0.0)) throw std::domain_error("ResidualFn::symcone: kappa must be > 0");
        ResidualFn f(Node::SymCone);
        f.kappa_ = kappa;
        return f;
    }

    static ResidualFn onestep(FrfForm form, double norm_n, GammaParam gamma) {
        if (!(norm_n > 0.0)) throw std::domain_error("ResidualFn::onestep: ||n|| must be > 0");
        ResidualFn f(Node::OneStep);
        f.form_ = form;
        f.norm_n_ = norm_n;
        f.gamma_ = std::move(gamma);
        return f;
    }

    /// Composition; members listed outermost first, applied innermost first.
    static ResidualFn compose(std::vector<ResidualFn> fns) {
        if (fns.empty()) throw std::domain_error("ResidualFn::compose: empty list");
        for (const auto& f : fns)
            if (!f.is_scalar()) throw std::domain_error("ResidualFn::compose: members must be scalar");
        if (fns.size() == 1) return fns.front();
        ResidualFn f(Node::Compose);
        f.children_ = std::move(fns);
        return f;
    }

    Node node() const { return node_; }
    double alpha() const { return alpha_; }
    bool is_scalar() const { return node_ != Node::SymCone && node_ != Node::OneStep; }

    /// Single-argument evaluation (scalar nodes only).
    double eval(double t) const {
        switch (node_) {
            case Node::Power:
                if (t < 0.0) throw std::domain_error("ResidualFn: t must be >= 0");
                return std::pow(t, alpha_);
            case Node::Entropy_gd: return eval_gd(t);
            case Node::LogType_glog: return eval_glog(t);
            case Node::Compose: {
                double v = t;
                for (auto it = children_.rbegin(); it != children_.rend(); ++it) v = it->eval(v);
                return v;
            }
            default:
                throw std::domain_error("ResidualFn::eval: node requires (eps, t) arguments");
        }
    }

    /// Two-argument facial-residual evaluation; scalar nodes ignore t.
    double eval_frf(double eps, double t) const {
        if (eps < 0.0 || t < 0.0) throw std::domain_error("ResidualFn: arguments must be >= 0");
        switch (node_) {
            case Node::SymCone:
                return kappa_ * eps + kappa_ * std::sqrt(eps * t);
            case Node::OneStep: {
                const double me = std::max(eps, eps / norm_n_);
                const double g = gamma_(t);
                switch (form_) {
                    case FrfForm::Entropic:
                        return me + std::max(2.0, 2.0 / g) * eval_gd(eps + me);
                    case FrfForm::Sqrt:
                        return me + std::max(2.0 * std::sqrt(t), 2.0 / g) * std::sqrt(eps + me);
                    case FrfForm::LogType:
                        return me + std::max(2.0, 2.0 / g) * eval_glog(eps + me);
                    case FrfForm::Lipschitz:
                        return me + std::max(2.0, 2.0 / g) * (eps + me);
                }
                throw std::logic_error("ResidualFn: unreachable");
            }
            default:
                return eval(eps);
        }
    }

    std::string sexpr() const {
        char buf[64];
        switch (node_) {
            case Node::Power:
                std::snprintf(buf, sizeof buf, "(pow %g)", alpha_);
                return buf;
            case Node::Entropy_gd: return "(gd)";
            case Node::LogType_glog: return "(glog)";
            case Node::SymCone:
                std::snprintf(buf, sizeof buf, "(symcone %g)", kappa_);
                return buf;
            case Node::OneStep: {
                std::string g = gamma_.is_constant()
                                    ? (std::snprintf(buf, sizeof buf, "%g", gamma_.constant), std::string(buf))
                                    : std::string("fn");
                char head[96];
                std::snprintf(head, sizeof head, "(frf %s %g %s)", to_string(form_), norm_n_, g.c_str());
                return head;
            }
            case Node::Compose: {
                std::string s = "(compose";
                for (const auto& c : children_) s += " " + c.sexpr();
                return s + ")";
            }
        }
        return "?";
    }

    /// Human-readable formula with "t" as the innermost argument.
    std::string pretty() const { return pretty_of("t"); }

private:
    explicit ResidualFn(Node n) : node_(n) {}

    std::string pretty_of(const std::string& inner) const {
        char buf[160];
        switch (node_) {
            case Node::Power:
                if (alpha_ == 1.0) return inner;
                std::snprintf(buf, sizeof buf, "(%s)^%g", inner.c_str(), alpha_);
                return buf;
            case Node::Entropy_gd: return "g_d(" + inner + ")";
            case Node::LogType_glog: return "g_log(" + inner + ")";
            case Node::SymCone:
                std::snprintf(buf, sizeof buf, "%g*eps + %g*sqrt(eps*t)", kappa_, kappa_);
                return buf;
            case Node::OneStep: {
                const char* core = nullptr;
                switch (form_) {
                    case FrfForm::Entropic: core = "g_d(eps + m)"; break;
                    case FrfForm::Sqrt: core = "sqrt(eps + m)"; break;
                    case FrfForm::LogType: core = "g_log(eps + m)"; break;
                    case FrfForm::Lipschitz: core = "(eps + m)"; break;
                }
                const char* coef = form_ == FrfForm::Sqrt ? "max{2 sqrt(t), 2/gamma(t)}" : "max{2, 2/gamma(t)}";
                std::snprintf(buf, sizeof buf, "m + %s * %s  with m = max{eps, eps/%g}", coef, core,
                              norm_n_);
                return buf;
            }
            case Node::Compose: {
                std::string s = inner;
                for (auto it = children_.rbegin(); it != children_.rend(); ++it) s = it->pretty_of(s);
                return s;
            }
        }
        return "?";
    }

    Node node_;
    double alpha_ = 1.0;
    double kappa_ = 1.0;
    FrfForm form_ = FrfForm::Entropic;
    double norm_n_ = 1.0;
    GammaParam gamma_;
    std::vector<ResidualFn> children_;
};

/// One-step facial residual function for the cone and exposing vector n.
/// The form follows the face kind and the sign pattern of n:
///   Big_Fd -> entropic, Ray_Fr -> sqrt,
///   Mid_Fs -> sqrt if n_y > 0 else log-type,
///   Exceptional_Finf -> Lipschitz if n_y > 0 else log-type.
inline ResidualFn make_onestep_frf(FaceKind face_kind, const ConePoint& n, GammaParam gamma,
                                   double tol = 1e-9) {
    const FaceDescriptor checked = classify_face(n, tol);
    if (checked.kind != face_kind)
        throw std::domain_error(std::string("make_onestep_frf: n exposes ") + to_string(checked.kind) +
                                ", not " + to_string(face_kind));
    const double s = tol * std::max(1.0, norm(n));
    FrfForm form;
    switch (face_kind) {
        case FaceKind::Big_Fd: form = FrfForm::Entropic; break;
        case FaceKind::Ray_Fr: form = FrfForm::Sqrt; break;
        case FaceKind::Mid_Fs: form = n.y > s ? FrfForm::Sqrt : FrfForm::LogType; break;
        case FaceKind::Exceptional_Finf: form = n.y > s ? FrfForm::Lipschitz : FrfForm::LogType; break;
        default:
            throw std::domain_error("make_onestep_frf: face kind has no one-step residual form");
    }
    return ResidualFn::onestep(form, norm(n), std::move(gamma));
}

inline ResidualFn make_symcone_frf(double kappa) { return ResidualFn::symcone(kappa); }

inline ResidualFn compose_chain(std::vector<ResidualFn> fns) {
    return ResidualFn::compose(std::move(fns));
}

inline double estimate_gamma(const FaceDescriptor& f, const ResidualFn& g, double eta, int samples,
                             std::uint64_t seed, const std::vector<ConePoint>& extra = {}) {
    return estimate_gamma(f, [&g](double t) { return g.eval(t); }, eta, samples, seed, extra);
}

/// Innermost residual of the composed error bound when the second face in a
/// reduction chain is Big_Fd or Mid_Fs.
inline ResidualFn select_gbar(FaceKind f2_kind, const ConePoint& n1, double tol = 1e-9) {
    const double s = tol * std::max(1.0, norm(n1));
    if (f2_kind == FaceKind::Big_Fd) return ResidualFn::gd();
    if (f2_kind == FaceKind::Mid_Fs) return n1.y > s ? ResidualFn::power(0.5) : ResidualFn::glog();
    throw std::domain_error("select_gbar: composition applies only to Big_Fd or Mid_Fs");
}

} // namespace ldcone
