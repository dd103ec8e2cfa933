// Command-line surface: cone audits, ray solves, torus solves, the dHYM
// front-end, functional evaluation, and the self-verification suite.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "formeq/dhym.hpp"
#include "formeq/functional.hpp"
#include "formeq/json_io.hpp"

namespace fs = std::filesystem;
using namespace formeq;

int run_verify(std::uint64_t seed, const std::string& out_dir);  // verify.cpp

namespace {

// exit codes: 0 pass/converged, 2 cone exit, 3 input error, 4 verification failure
constexpr int EXIT_CONE = 2;
constexpr int EXIT_INPUT = 3;
constexpr int EXIT_VERIFY = 4;

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open problem file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed JSON: ") + e.what());
    }
    return j;
}

void ensure_dir(const std::string& out) {
    if (!out.empty()) fs::create_directories(out);
}

std::string joined(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

struct CommonOpts {
    std::string problem;
    std::string out = ".";
    std::uint64_t seed = 0;
    double tol = 1e-11;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_problem = true) {
    auto* p = cmd->add_option("--problem", o.problem, "problem JSON file");
    if (needs_problem) p->required();
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "sampler seed (recorded in outputs)");
    cmd->add_option("--tol", o.tol, "solver tolerance on sup|residual|");
    cmd->add_option("--threads", o.threads, "parallelism degree (0: serial kernels)");
}

int cmd_check_cone(const CommonOpts& o) {
    json j = load_json(o.problem);
    TorusProblem p = parse_problem(j);
    OperatorContext ctx = p.context();
    SamplerConfig cfg;
    cfg.seed = o.seed;
    json reports = json::array();
    // constant reduced data: the audit at omega0 covers every grid point; a
    // varying density never enters the cone form
    ConeReport rep = subsolution_check(p.omega0, ctx, cfg);
    try {
        rep.radius_R = subsolution_radius(p.omega0, ctx, cfg);
    } catch (const input_error&) {
    }
    json rj = cone_report_to_json(rep);
    rj["seed"] = o.seed;
    H2DerivativeReport h2;
    {
        Spectral sp(p.grid());
        h2 = h2_derivative_report(p, sp);
    }
    rj["h2_derivative_c"] = h2.c_h2;
    reports.push_back(rj);
    ensure_dir(o.out);
    write_text(joined(o.out, "cone_report.json"), reports.dump(2) + "\n");
    std::cout << reports.dump(2) << "\n";
    return rep.pass ? 0 : EXIT_CONE;
}

int cmd_solve_ray(const CommonOpts& o) {
    json j = load_json(o.problem);
    TorusProblem p = parse_problem(j);
    OperatorContext ctx = p.context();
    Mat A0 = p.omega0, B = Mat::Identity(p.n, p.n);
    if (j.contains("ray")) {
        if (j["ray"].contains("A0")) A0 = parse_matrix(j["ray"]["A0"], "/ray/A0");
        if (j["ray"].contains("B")) B = parse_matrix(j["ray"]["B"], "/ray/B");
    }
    auto t = solve_ray(A0, B, ctx);
    json out;
    out["seed"] = o.seed;
    out["kappa"] = ctx.kappa;
    out["F_at_A0"] = F_value(A0, ctx);
    out["ray_limit"] = ray_limit(A0, hermitian_part(B), ctx);
    if (t) {
        out["root_t"] = *t;
        out["F_at_root"] = F_value(A0 + *t * hermitian_part(B), ctx);
    } else {
        out["root_t"] = nullptr;
    }
    ensure_dir(o.out);
    write_text(joined(o.out, "ray_report.json"), out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int solve_and_emit(const TorusProblem& p, const CommonOpts& o, const std::string& prefix,
                   json extra = json::object()) {
    SolveOptions opts;
    opts.tol = o.tol;
    opts.threads = o.threads;
    auto [u, trace] = continuity_solve(p, opts);
    json tj = trace_to_json(trace);
    tj["seed"] = o.seed;
    for (auto& [k, v] : extra.items()) tj[k] = v;
    ensure_dir(o.out);
    write_text(joined(o.out, prefix + "_trace.json"), tj.dump(2) + "\n");
    write_text(joined(o.out, prefix + "_steps.csv"), steps_to_csv(trace));
    write_text(joined(o.out, prefix + "_u.csv"), field_to_csv(u));
    std::cout << tj.dump(2) << "\n";
    if (trace.status == SolveStatus::Converged) return 0;
    if (trace.status == SolveStatus::ConeExit) return EXIT_CONE;
    return EXIT_INPUT;
}

int cmd_solve_torus(const CommonOpts& o) {
    TorusProblem p = parse_problem(load_json(o.problem));
    return solve_and_emit(p, o, "solve");
}

int cmd_dhym(const CommonOpts& o) {
    json j = load_json(o.problem);
    DhymInstance inst;
    inst.n = j.at("n").get<int>();
    inst.rho = parse_matrix(j.at("rho"), "/rho");
    inst.omega0 = parse_matrix(j.at("omega0"), "/omega0");
    int N = j.value("N", 8);
    SolveOptions opts;
    opts.tol = o.tol;
    opts.threads = o.threads;
    DhymSolveResult res = dhym_solve(inst, N, opts);
    json out = trace_to_json(res.trace);
    out["seed"] = o.seed;
    out["theta"] = res.inst.theta;
    out["theta_in_range"] =
        res.inst.theta > 0 && res.inst.theta <= M_PI / std::max(1, inst.n - 1);
    out["h1_ok"] = res.h1_ok;
    out["kappa_reduced"] = res.reduced.kappa;
    out["max_angle_defect"] = res.max_angle_defect;
    ensure_dir(o.out);
    write_text(joined(o.out, "dhym_report.json"), out.dump(2) + "\n");
    write_text(joined(o.out, "dhym_steps.csv"), steps_to_csv(res.trace));
    write_text(joined(o.out, "dhym_u.csv"), field_to_csv(res.u));
    // residual fields of the solved metric
    {
        Spectral sp(res.reduced.grid());
        HermField H = sp.complex_hessian(res.u);
        double cot = std::cos(res.inst.theta) / std::sin(res.inst.theta);
        std::string csv = "r_direct,r_angle,r_reduced\n";
        char buf[128];
        for (size_t q = 0; q < res.reduced.grid().points(); ++q) {
            Mat omega = res.reduced.omega0 + H.at(q) + cot * inst.rho;
            DhymResiduals r = dhym_residuals(omega, res.inst);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.r_direct, r.r_angle,
                          r.r_reduced);
            csv += buf;
        }
        write_text(joined(o.out, "dhym_residuals.csv"), csv);
    }
    std::cout << out.dump(2) << "\n";
    return res.trace.status == SolveStatus::Converged
               ? 0
               : (res.trace.status == SolveStatus::ConeExit ? EXIT_CONE : EXIT_INPUT);
}

int cmd_functional(const CommonOpts& o, const std::string& u_csv) {
    TorusProblem p = parse_problem(load_json(o.problem));
    Spectral sp(p.grid());
    RealField u(p.grid());
    if (!u_csv.empty()) {
        std::ifstream f(u_csv);
        if (!f) throw input_error("cannot open field CSV: " + u_csv);
        std::string line;
        size_t q = 0;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (q >= u.v.size()) throw input_error("field CSV longer than the grid");
            u.v[q++] = std::stod(line);
        }
        if (q != u.v.size()) throw input_error("field CSV shorter than the grid");
    }
    json out;
    out["seed"] = o.seed;
    out["functional"] = functional_F(u, p, sp, o.threads);
    // convexity scan along a seeded mean-zero direction
    std::mt19937_64 rng(o.seed + 17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealField dir(p.grid());
    for (auto& v : dir.v) v = gauss(rng);
    Spectral::project_mean_zero(dir);
    RealField endpoint = u;
    double scale = 0.01 / std::max(1.0, dir.sup());
    for (size_t q = 0; q < endpoint.v.size(); ++q) endpoint.v[q] += scale * dir.v[q];
    auto conv = segment_convexity(u, endpoint, p, sp, {0.0, 0.25, 0.5, 0.75, 1.0});
    out["segment_second_variation"] = conv;
    double cmin = *std::min_element(conv.begin(), conv.end());
    out["convex"] = cmin >= -1e-10;
    ensure_dir(o.out);
    write_text(joined(o.out, "functional_report.json"), out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"form-type Monge-Ampere equations on flat tori: cone audits and solvers"};
    app.require_subcommand(1);

    CommonOpts check_o, ray_o, torus_o, dhym_o, func_o, verify_o;
    std::string func_u;

    add_common(app.add_subcommand("check-cone", "audit the cone condition of a problem"), check_o);
    add_common(app.add_subcommand("solve-ray", "scalar ray solve F(A0 + tB) = kappa"), ray_o);
    add_common(app.add_subcommand("solve-torus", "continuity-method solve on the torus"), torus_o);
    add_common(app.add_subcommand("dhym", "reduce and solve a dHYM instance"), dhym_o);
    auto* fc = app.add_subcommand("functional", "evaluate the global functional for a solve");
    add_common(fc, func_o);
    fc->add_option("--u", func_u, "potential field CSV (defaults to zero)");
    add_common(app.add_subcommand("verify", "run the property suite with counts"), verify_o,
               false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("check-cone")) return cmd_check_cone(check_o);
        if (app.got_subcommand("solve-ray")) return cmd_solve_ray(ray_o);
        if (app.got_subcommand("solve-torus")) return cmd_solve_torus(torus_o);
        if (app.got_subcommand("dhym")) return cmd_dhym(dhym_o);
        if (app.got_subcommand("functional")) return cmd_functional(func_o, func_u);
        if (app.got_subcommand("verify")) return run_verify(verify_o.seed, verify_o.out);
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return EXIT_INPUT;
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return EXIT_INPUT;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_VERIFY;
    }
    return 0;
}
