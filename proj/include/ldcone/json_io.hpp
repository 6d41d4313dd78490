#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldcone/cone.hpp"
#include "ldcone/faces.hpp"
#include "ldcone/reduction.hpp"

namespace ldcone {

using nlohmann::json;

inline json to_json(const ConePoint& p) {
    json z = json::array();
    for (int i = 0; i < p.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < p.dim(); ++j) row.push_back(p.Z(i, j));
        z.push_back(row);
    }
    return json{{"x", p.x}, {"y", p.y}, {"Z", z}};
}

inline ConePoint cone_point_from_json(const json& j) {
    if (!j.contains("x") || !j.contains("y") || !j.contains("Z"))
        throw std::invalid_argument("cone point JSON needs fields x, y, Z");
    const auto& z = j.at("Z");
    const int d = static_cast<int>(z.size());
    if (d < 1) throw std::invalid_argument("cone point JSON: empty matrix");
    std::vector<double> full;
    full.reserve(static_cast<std::size_t>(d) * d);
    for (const auto& row : z) {
        if (static_cast<int>(row.size()) != d)
            throw std::invalid_argument("cone point JSON: matrix is not square");
        for (const auto& v : row) full.push_back(v.get<double>());
    }
    return ConePoint(j.at("x").get<double>(), j.at("y").get<double>(),
                     SymMat::from_full(d, full, 1e-9));
}

inline json to_json(const FaceDescriptor& f, double tol = 1e-9) {
    json j{{"kind", to_string(f.kind)}, {"tol", tol}};
    if (f.n) j["n"] = to_json(*f.n);
    return j;
}

/// Face JSON carries the exposing vector; the descriptor is rebuilt through
/// classification and checked against the declared kind.
inline FaceDescriptor face_from_json(const json& j) {
    if (!j.contains("n")) throw std::invalid_argument("face JSON needs the exposing vector n");
    const double tol = j.value("tol", 1e-9);
    FaceDescriptor f = classify_face(cone_point_from_json(j.at("n")), tol);
    if (j.contains("kind")) {
        const std::string want = j.at("kind").get<std::string>();
        if (want != to_string(f.kind))
            throw std::invalid_argument("face JSON kind '" + want + "' does not match classified '" +
                                        to_string(f.kind) + "'");
    }
    return f;
}

struct ProblemFile {
    int d = 0;
    std::vector<ConePoint> basis;
    ConePoint offset;
    std::vector<ConePoint> chain;
    std::vector<double> gammas;

    FeasProblem problem() const { return FeasProblem(d, basis, offset); }
};

inline ProblemFile problem_from_json(const json& j) {
    ProblemFile pf;
    pf.d = j.at("d").get<int>();
    pf.offset = j.contains("offset") ? cone_point_from_json(j.at("offset")) : ConePoint::zero(pf.d);
    if (j.contains("basis"))
        for (const auto& b : j.at("basis")) pf.basis.push_back(cone_point_from_json(b));
    if (j.contains("chain"))
        for (const auto& n : j.at("chain")) pf.chain.push_back(cone_point_from_json(n));
    if (j.contains("gammas"))
        for (const auto& g : j.at("gammas")) pf.gammas.push_back(g.get<double>());
    return pf;
}

inline json to_json(const ErrorBoundCertificate& cert) {
    json steps = json::array();
    for (const auto& st : cert.chain)
        steps.push_back(json{{"n", to_json(st.n)},
                             {"face_before", to_string(st.face_before.kind)},
                             {"face_after", to_string(st.face_after.kind)}});
    return json{{"verified", true},
                {"case_tag", cert.case_tag},
                {"d_pps_chain", cert.d_pps},
                {"d_pps_upper_bound", cert.d_pps_bound},
                {"residual_sexpr", cert.residual.sexpr()},
                {"residual_pretty", cert.residual.pretty()},
                {"gammas", cert.gammas},
                {"steps", steps}};
}

inline json to_json(const ChainReport& rep) {
    return json{{"pass", rep.pass},
                {"failing_step", rep.failing_step},
                {"condition", to_string(rep.condition)},
                {"message", rep.message}};
}

inline json to_json(const ExposureReport& rep) {
    return json{{"pass", rep.pass},
                {"face_samples", rep.face_samples},
                {"boundary_samples", rep.boundary_samples},
                {"violations", rep.violations},
                {"first_violation", rep.first_violation}};
}

inline json to_json(const GammaReport& rep) {
    return json{{"gamma", rep.gamma},
                {"valid_samples", rep.valid_samples},
                {"skipped", rep.skipped},
                {"histogram_log10", rep.histogram}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace ldcone
