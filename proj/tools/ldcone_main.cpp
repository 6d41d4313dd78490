// Batch experiment runner for the log-determinant cone toolkit: tightness
// sequences, gamma scans, and error-bound certificates. Run-then-inspect,
// no interactive steering.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ldcone/experiments.hpp"
#include "ldcone/json_io.hpp"

namespace {

std::map<std::string, std::string> parse_config(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

void apply_config(ldcone::ExperimentSpec& spec, const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("d")) spec.d = std::stoi(*v);
    if (auto* v = get("kmin")) spec.k_min = std::stod(*v);
    if (auto* v = get("kmax")) spec.k_max = std::stod(*v);
    if (auto* v = get("points")) spec.points = std::stoi(*v);
    if (auto* v = get("seed")) spec.seed = std::stoull(*v);
    if (auto* v = get("r")) spec.r = std::stoi(*v);
    if (auto* v = get("eta")) spec.eta = std::stod(*v);
    if (auto* v = get("samples")) spec.samples = std::stoi(*v);
    if (auto* v = get("g")) spec.g_name = *v;
    if (auto* v = get("random_n")) spec.random_n = *v == "1" || *v == "true";
    if (auto* v = get("adversarial")) spec.adversarial = *v == "1" || *v == "true";
}

void write_table(const ldcone::Table& table, const std::string& out) {
    if (out.empty() || out == "-") {
        ldcone::write_csv(table, std::cout);
        return;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + out);
    ldcone::write_csv(table, os);
}

int cmd_run(const std::string& experiment, ldcone::ExperimentSpec spec,
            const std::string& problem_path, const std::string& face_path) {
    spec.name = experiment;
    ldcone::Table table;
    if (experiment == "tight_fd") {
        table = ldcone::run_tight_fd(spec);
    } else if (experiment == "tight_fs_holder") {
        table = ldcone::run_tight_fs_holder(spec);
    } else if (experiment == "tight_fs_log") {
        table = ldcone::run_tight_fs_log(spec);
    } else if (experiment == "tight_finf_log") {
        table = ldcone::run_tight_finf_log(spec);
    } else if (experiment == "tight_fr") {
        table = ldcone::run_tight_fr(spec);
    } else if (experiment == "gamma_scan") {
        ldcone::FaceDescriptor face =
            face_path.empty()
                ? ldcone::classify_face(ldcone::ConePoint(0.0, 1.0, ldcone::SymMat(spec.d)))
                : ldcone::face_from_json(ldcone::load_json_file(face_path));
        table = ldcone::run_gamma_scan(spec, face);
    } else if (experiment == "certificate_check") {
        if (problem_path.empty())
            throw std::runtime_error("certificate_check needs --problem <file.json>");
        ldcone::ProblemFile pf = ldcone::problem_from_json(ldcone::load_json_file(problem_path));
        ldcone::FeasProblem prob = pf.problem();
        auto [steps, rep] = ldcone::build_chain(prob, pf.chain);
        if (!rep.pass) {
            std::cerr << "chain verification failed at step " << rep.failing_step << " ("
                      << ldcone::to_string(rep.condition) << "): " << rep.message << "\n";
            return 1;
        }
        auto cert = ldcone::build_certificate(prob, steps, pf.gammas);
        table = ldcone::run_certificate_check(spec, prob, cert);
    } else {
        throw std::runtime_error("unknown experiment: " + experiment);
    }
    write_table(table, spec.out);
    return 0;
}

int cmd_certify(const std::string& problem_path, const std::string& out) {
    ldcone::ProblemFile pf = ldcone::problem_from_json(ldcone::load_json_file(problem_path));
    ldcone::FeasProblem prob = pf.problem();
    auto [steps, rep] = ldcone::build_chain(prob, pf.chain);
    if (!rep.pass) {
        ldcone::json failure = ldcone::to_json(rep);
        std::cerr << failure.dump(2) << "\n";
        if (!out.empty()) ldcone::save_json_file(out, failure);
        return 1;
    }
    auto cert = ldcone::build_certificate(prob, steps, pf.gammas);
    ldcone::json j = ldcone::to_json(cert);
    if (auto probe = ldcone::feasibility_probe(prob); !probe)
        j["feasibility_warning"] = "alternating projections failed to locate a feasible point";

    std::cout << "case:      " << cert.case_tag << "\n";
    std::cout << "chain len: " << cert.d_pps << "  (upper bound " << cert.d_pps_bound << ")\n";
    std::cout << "residual:  " << cert.residual.sexpr() << "\n";
    std::cout << "           t -> " << cert.residual.pretty() << "\n";
    if (!out.empty()) ldcone::save_json_file(out, j);
    return 0;
}

int cmd_gamma(const std::string& face_path, const std::string& g_name, double eta, int samples,
              std::uint64_t seed, const std::string& out) {
    ldcone::FaceDescriptor face = ldcone::face_from_json(ldcone::load_json_file(face_path));
    ldcone::GammaReport rep =
        ldcone::estimate_gamma_report(face, ldcone::residual_by_name(g_name), eta, samples, seed);
    ldcone::json j = ldcone::to_json(rep);
    j["face"] = ldcone::to_string(face.kind);
    j["g"] = g_name;
    j["eta"] = eta;
    std::cout << j.dump(2) << "\n";
    if (!out.empty()) ldcone::save_json_file(out, j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-determinant cone experiments and certificates"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a batch experiment and emit CSV");
    std::string experiment;
    run->add_option("experiment", experiment,
                    "tight_fd | tight_fs_holder | tight_fs_log | tight_finf_log | tight_fr | "
                    "gamma_scan | certificate_check")
        ->required();
    ldcone::ExperimentSpec spec;
    std::string config_path, problem_path, face_path;
    auto* od = run->add_option("--d", spec.d, "matrix dimension (>= 2)");
    auto* okmin = run->add_option("--kmin", spec.k_min, "smallest k (>= 2)");
    auto* okmax = run->add_option("--kmax", spec.k_max, "largest k");
    auto* opts = run->add_option("--points", spec.points, "number of log-spaced k values");
    auto* oseed = run->add_option("--seed", spec.seed, "random seed");
    run->add_option("--out", spec.out, "output CSV path (default stdout)");
    run->add_option("--config", config_path, "key=value overrides");
    run->add_option("--problem", problem_path, "problem JSON (certificate_check)");
    run->add_option("--face", face_path, "face JSON (gamma_scan)");

    // certify
    auto* certify = app.add_subcommand("certify", "verify a reduction chain and emit a certificate");
    std::string certify_problem, certify_out;
    certify->add_option("--problem", certify_problem, "problem JSON")->required();
    certify->add_option("--out", certify_out, "certificate JSON output");

    // gamma
    auto* gamma = app.add_subcommand("gamma", "empirical gamma estimate for a face");
    std::string gamma_face, gamma_g = "gd", gamma_out;
    double gamma_eta = 1.0;
    int gamma_samples = 100000;
    std::uint64_t gamma_seed = 1;
    gamma->add_option("--face", gamma_face, "face JSON")->required();
    gamma->add_option("--g", gamma_g, "residual: gd | glog | sqrt | abs");
    gamma->add_option("--eta", gamma_eta, "ball radius")->required();
    gamma->add_option("--samples", gamma_samples, "sample count");
    gamma->add_option("--seed", gamma_seed, "random seed");
    gamma->add_option("--out", gamma_out, "report JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!config_path.empty()) {
                // explicit flags take precedence over config-file values
                ldcone::ExperimentSpec flags = spec;
                apply_config(spec, parse_config(config_path));
                if (od->count()) spec.d = flags.d;
                if (okmin->count()) spec.k_min = flags.k_min;
                if (okmax->count()) spec.k_max = flags.k_max;
                if (opts->count()) spec.points = flags.points;
                if (oseed->count()) spec.seed = flags.seed;
            }
            return cmd_run(experiment, spec, problem_path, face_path);
        }
        if (certify->parsed()) return cmd_certify(certify_problem, certify_out);
        if (gamma->parsed()) return cmd_gamma(gamma_face, gamma_g, gamma_eta, gamma_samples,
                                              gamma_seed, gamma_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
