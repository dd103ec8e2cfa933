#include "formeq/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace formeq {

namespace {

cd parse_entry(const json& e, const std::string& where) {
    if (e.is_number()) return cd(e.get<double>(), 0.0);
    if (e.is_array() && e.size() == 2) return cd(e[0].get<double>(), e[1].get<double>());
    throw input_error(where + ": matrix entry must be a number or [re, im]");
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

Mat parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw input_error(where + ": expected matrix rows");
    const int n = static_cast<int>(j.size());
    Mat A(n, n);
    for (int r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != n)
            throw input_error(where + ": row " + std::to_string(r) + " has wrong length");
        for (int c = 0; c < n; ++c) A(r, c) = parse_entry(j[r][c], where);
    }
    return A;
}

json matrix_to_json(const Mat& A) {
    json rows = json::array();
    for (int r = 0; r < A.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < A.cols(); ++c) row.push_back({A(r, c).real(), A(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

FormBundle parse_bundle(const json& j, int n, const Mat& rho, const std::string& where) {
    FormBundle b;
    b.n = n;
    b.rho = rho;
    if (j.contains("components")) {
        for (const auto& cj : j.at("components")) {
            int k = cj.at("k").get<int>();
            if (k < 1 || k > n - 1) throw input_error(where + ": component degree out of range");
            FormComponent c(n, k);
            for (const auto& ej : cj.at("entries")) {
                if (!ej.is_array() || ej.size() != 4)
                    throw input_error(where + ": entry must be [I, J, re, im]");
                IndexSet I, J;
                for (const auto& v : ej[0]) I.push_back(v.get<int>() - 1);
                for (const auto& v : ej[1]) J.push_back(v.get<int>() - 1);
                if (static_cast<int>(I.size()) != k || static_cast<int>(J.size()) != k)
                    throw input_error(where + ": index set size != k");
                for (size_t t = 0; t < I.size(); ++t) {
                    if (I[t] < 0 || I[t] >= n || J[t] < 0 || J[t] >= n)
                        throw input_error(where + ": index out of range");
                    if (t > 0 && (I[t] <= I[t - 1] || J[t] <= J[t - 1]))
                        throw input_error(where + ": index sets must be increasing");
                }
                c.at(subset_rank(I, n), subset_rank(J, n)) =
                    cd(ej[2].get<double>(), ej[3].get<double>());
            }
            if (c.reality_defect() > 1e-10)
                throw input_error(where + ": component " + std::to_string(k) + " fails reality");
            b.add(std::move(c));
        }
    }
    return b;
}

json bundle_to_json(const FormBundle& b) {
    json out;
    out["n"] = b.n;
    out["rho"] = matrix_to_json(b.rho);
    out["f"] = b.f;
    json comps = json::array();
    for (const auto& c : b.comps) {
        json cj;
        cj["k"] = c.k;
        json entries = json::array();
        const auto& subs = subset_table(c.n, c.k);
        for (size_t p = 0; p < subs.size(); ++p)
            for (size_t q = 0; q < subs.size(); ++q) {
                cd v = c.at(p, q);
                if (v == cd(0)) continue;
                json I = json::array(), J = json::array();
                for (int x : subs[p]) I.push_back(x + 1);
                for (int x : subs[q]) J.push_back(x + 1);
                entries.push_back({I, J, v.real(), v.imag()});
            }
        cj["entries"] = entries;
        comps.push_back(cj);
    }
    out["components"] = comps;
    return out;
}

RealField field_from_modes(const GridShape& g, const json& modes) {
    RealField u(g);
    const int axes = g.axes();
    const int N = g.N;
    std::vector<size_t> strides(axes);
    size_t s = 1;
    for (int a = axes - 1; a >= 0; --a) {
        strides[a] = s;
        s *= N;
    }
    for (const auto& mj : modes) {
        std::vector<double> k;
        for (const auto& v : mj.at("k")) k.push_back(v.get<double>());
        if (static_cast<int>(k.size()) != axes)
            throw input_error("modes: wave vector must have 2n entries");
        double amp = mj.at("amp").get<double>();
        double phase = mj.value("phase", 0.0);
        for (size_t p = 0; p < g.points(); ++p) {
            double arg = phase;
            for (int a = 0; a < axes; ++a) {
                double x = static_cast<double>((p / strides[a]) % N) / N;
                arg += 2.0 * M_PI * k[a] * x;
            }
            u.v[p] += amp * std::cos(arg);
        }
    }
    return u;
}

TorusProblem parse_problem(const json& j) {
    TorusProblem p;
    try {
        p.n = j.at("n").get<int>();
        p.N = j.at("N").get<int>();
        p.rho = parse_matrix(j.at("rho"), "/rho");
        p.omega0 = parse_matrix(j.at("omega0"), "/omega0");
        if (p.rho.rows() != p.n || p.omega0.rows() != p.n)
            throw input_error("/rho, /omega0: dimension != n");
        p.bundle = j.contains("bundle") ? parse_bundle(j.at("bundle"), p.n, p.rho, "/bundle")
                                        : FormBundle{p.n, p.rho, {}, 0.0};
        p.f = RealField(p.grid());
        double kappa_given = j.value("kappa", -1.0);
        if (!j.contains("f") || j.at("f").is_number()) {
            double fc = j.contains("f") ? j.at("f").get<double>() : 0.0;
            for (auto& v : p.f.v) v = fc;
            p.bundle.f = fc;
        } else if (j.at("f").contains("grid")) {
            const auto& arr = j.at("f").at("grid");
            if (arr.size() != p.grid().points())
                throw input_error("/f/grid: wrong length, expected " +
                                  std::to_string(p.grid().points()));
            for (size_t q = 0; q < p.f.v.size(); ++q) p.f.v[q] = arr[q].get<double>();
            p.bundle.f = p.f.mean();
        } else if (j.at("f").contains("manufactured")) {
            RealField u_star = field_from_modes(p.grid(), j.at("f").at("manufactured").at("modes"));
            Spectral sp(p.grid());
            double kap = kappa_given > 0 ? kappa_given : 1.0;
            TorusProblem q = manufactured_problem(u_star, p.bundle, p.omega0, kap, sp);
            p.f = q.f;
            p.bundle.f = p.f.mean();
            p.kappa = kap;
            return p;
        } else {
            throw input_error("/f: expected number, {grid}, or {manufactured}");
        }
        p.kappa = kappa_given > 0 ? kappa_given : kappa_from_classes(p);
    } catch (const json::exception& e) {
        throw input_error(std::string("problem JSON: ") + e.what());
    }
    return p;
}

json cone_report_to_json(const ConeReport& r) {
    json out;
    out["p_value"] = r.p_value;
    out["q_min"] = r.q_min;
    out["pass"] = r.pass;
    out["marginal"] = r.marginal;
    out["verdicts_agree"] = r.verdicts_agree;
    if (r.witness_covector) {
        json w = json::array();
        for (int i = 0; i < r.witness_covector->size(); ++i)
            w.push_back({(*r.witness_covector)(i).real(), (*r.witness_covector)(i).imag()});
        out["witness_covector"] = w;
    }
    if (r.radius_R) out["radius_R"] = *r.radius_R;
    return out;
}

json trace_to_json(const SolveTrace& t) {
    json out;
    const char* status = t.status == SolveStatus::Converged  ? "converged"
                         : t.status == SolveStatus::ConeExit ? "CONE_EXIT"
                                                             : "stalled";
    out["status"] = status;
    out["total_newton"] = t.total_newton;
    out["reached_t"] = t.reached_t;
    out["warnings"] = t.warnings;
    out["message"] = t.message;
    if (t.status == SolveStatus::ConeExit) {
        out["exit_point"] = t.exit_point;
        out["exit_q_min"] = t.exit_q_min;
    }
    json steps = json::array();
    for (const auto& s : t.steps) {
        steps.push_back({{"t", s.t},
                         {"newton_iters", s.newton_iters},
                         {"residual_sup", s.residual_sup},
                         {"min_eig", s.min_eig},
                         {"q_min", s.q_min},
                         {"functional", s.functional}});
    }
    out["steps"] = steps;
    return out;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot open for writing: " + path);
    f << body;
}

std::string field_to_csv(const RealField& u) {
    std::string out = "# torus field, axes (x_1..x_n, y_1..y_n), row-major, N=" +
                      std::to_string(u.g.N) + ", n=" + std::to_string(u.g.n) + "\n";
    for (double v : u.v) {
        out += fmt(v);
        out += "\n";
    }
    return out;
}

std::string steps_to_csv(const SolveTrace& t) {
    std::string out = "t,newton_iters,residual_sup,min_eig,q_min,functional\n";
    for (const auto& s : t.steps) {
        out += fmt(s.t) + "," + std::to_string(s.newton_iters) + "," + fmt(s.residual_sup) + "," +
               fmt(s.min_eig) + "," + fmt(s.q_min) + "," + fmt(s.functional) + "\n";
    }
    return out;
}

} // namespace formeq
