#include "nonlin/harness/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "nonlin/harness/config.hpp"
#include "nonlin/harness/experiments.hpp"

namespace nonlin::harness {

using nlohmann::json;

namespace {

struct Args {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
};

const json& section(const Problem& p, const char* name) {
    static const json empty = json::object();
    auto it = p.experiments.find(name);
    if (it == p.experiments.end()) return empty;
    if (!it->is_object()) throw ConfigError(std::string("config field 'experiments.") + name + "': expected an object");
    return *it;
}

std::vector<double> list_or(const json& sec, const char* sec_name, const char* key, std::vector<double> fallback) {
    auto it = sec.find(key);
    if (it == sec.end()) return fallback;
    const std::string where = std::string("experiments.") + sec_name + "." + key;
    if (!it->is_array()) throw ConfigError("config field '" + where + "': expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : *it) {
        if (!x.is_number()) throw ConfigError("config field '" + where + "': expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

double number_or(const json& sec, const char* sec_name, const char* key, double fallback) {
    auto it = sec.find(key);
    if (it == sec.end()) return fallback;
    if (!it->is_number())
        throw ConfigError(std::string("config field 'experiments.") + sec_name + "." + key + "': expected a number");
    return it->get<double>();
}

// Writes to --out, or stdout when no path is given.
class Output {
  public:
    explicit Output(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ConfigError("cannot open output '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    /// `<out>.json` next to a CSV file; stderr summary when writing to stdout.
    void sidecar(const json& j) {
        if (path_.empty()) {
            std::cerr << j.dump(2) << '\n';
            return;
        }
        std::ofstream s(path_ + ".json");
        s << j.dump(2) << '\n';
    }

  private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

int emit_rates(const RateReport& r, const Args& a) {
    Output out(a.out);
    json j = r.to_json();
    if (a.format == "json") {
        out.stream() << j.dump(2) << '\n';
    } else {
        r.write_csv(out.stream());
        out.sidecar(j);
    }
    if (j.contains("details") && j["details"].contains("aborted"))
        std::cerr << "aborted: " << j["details"]["aborted"].get<std::string>() << '\n';
    return r.passed ? 0 : 1;
}

int cmd_solve(const Problem& p, const Args& a) {
    auto mesh = build_mesh(p.domain, p.h, p.width);
    auto op = assemble(p.F, p.f, mesh);
    auto mono = monotonicity_check(op, 2000, p.seed);
    if (mono.violations > 0) throw AssertionFailure("assembled operator is not monotone");
    auto sol = solve_dirichlet(op, p.g, p.solver);
    json j{{"method", sol.report.method},
           {"iterations", sol.report.iterations},
           {"residual", sol.report.residual},
           {"elapsed_s", sol.report.elapsed_s},
           {"converged", sol.report.converged},
           {"points", mesh->size()},
           {"h", p.h}};
    if (p.exact) {
        double e = 0.0;
        for (std::size_t i = 0; i < mesh->size(); ++i) e = std::max(e, std::fabs(p.exact->value(mesh->point(i)) - sol.v[i]));
        j["error"] = e;
    }
    Output out(a.out);
    if (a.format == "json") {
        json vals = json::array();
        for (std::size_t i = 0; i < mesh->size(); ++i) {
            auto x = mesh->point(i);
            vals.push_back({{"x", std::vector<double>(x.begin(), x.end())}, {"v", sol.v[i]}});
        }
        j["solution"] = vals;
        out.stream() << j.dump(2) << '\n';
    } else {
        auto& os = out.stream();
        for (int k = 0; k < mesh->dim(); ++k) os << 'x' << k << ',';
        os << "v\n";
        os.precision(17);
        for (std::size_t i = 0; i < mesh->size(); ++i) {
            for (double c : mesh->point(i)) os << c << ',';
            os << sol.v[i] << '\n';
        }
        out.sidecar(j);
    }
    if (!sol.report.converged) {
        std::cerr << "solver did not converge: residual " << sol.report.residual << '\n';
        return 1;
    }
    return 0;
}

int cmd_barrier(const Problem& p, const Args& a) {
    const json& sec = section(p, "barrier");
    auto cs = list_or(sec, "barrier", "c", {0.1, 1.0, 10.0});
    const double h = number_or(sec, "barrier", "h", p.h);
    json rows = json::array();
    bool ok = true;
    Output out(a.out);
    if (a.format != "json") out.stream() << "c,min_gap,max_gap,bound,passed\n";
    for (double c : cs) {
        auto r = run_barrier(p, c, h);
        ok = ok && r.passed;
        rows.push_back(r.to_json());
        if (a.format != "json") {
            out.stream().precision(17);
            out.stream() << c << ',' << r.min_gap << ',' << r.max_gap << ',' << r.bound << ',' << (r.passed ? 1 : 0) << '\n';
        }
    }
    json j{{"experiment", "barrier"}, {"h", h}, {"rows", rows}, {"passed", ok}};
    if (a.format == "json") out.stream() << j.dump(2) << '\n';
    else out.sidecar(j);
    return ok ? 0 : 1;
}

int cmd_check(const Problem& p, const Args& a) {
    const json& sec = section(p, "check");
    const int trials = static_cast<int>(number_or(sec, "check", "trials", 10000));
    auto r = run_check(p, number_or(sec, "check", "h", p.h), trials);
    json j = r.to_json();
    Output out(a.out);
    out.stream() << j.dump(2) << '\n';
    return r.passed ? 0 : 1;
}

int run(const std::string& cmd, const Args& a) {
    Problem p = load_problem(a.config);
    if (a.seed) p.seed = *a.seed;
    if (cmd == "solve") return cmd_solve(p, a);
    if (cmd == "rates") {
        auto hs = list_or(section(p, "rates"), "rates", "h", {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64});
        return emit_rates(run_rates(p, hs), a);
    }
    if (cmd == "delta") {
        const json& sec = section(p, "delta");
        DeltaOptions o;
        o.h = number_or(sec, "delta", "h", o.h);
        o.samples = static_cast<std::size_t>(number_or(sec, "delta", "samples", double(o.samples)));
        if (auto it = sec.find("verify"); it != sec.end() && it->is_boolean()) o.verify = it->get<bool>();
        // The touch ball is open, so the stencil must stay strictly inside B_{Nh}: N >= 2.
        p.width = static_cast<int>(number_or(sec, "delta", "stencil_width", p.width));
        return emit_rates(run_delta(p, list_or(sec, "delta", "theta", {0.04, 0.01, 0.0025}), o), a);
    }
    if (cmd == "freeze") {
        const json& sec = section(p, "freeze");
        Point x0 = p.domain.barycenter();
        if (auto it = sec.find("x0"); it != sec.end()) x0 = list_or(sec, "freeze", "x0", {});
        return emit_rates(run_freeze(p, x0, list_or(sec, "freeze", "r", {0.2, 0.1, 0.05}), number_or(sec, "freeze", "h", p.h)), a);
    }
    if (cmd == "perturb") {
        const json& sec = section(p, "perturb");
        return emit_rates(run_perturb(p, list_or(sec, "perturb", "eps", {0.2, 0.1, 0.05, 0.025}), number_or(sec, "perturb", "h", p.h)), a);
    }
    if (cmd == "barrier") return cmd_barrier(p, a);
    return cmd_check(p, a);
}

} // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Monotone wide-stencil schemes for fully nonlinear elliptic equations"};
    app.require_subcommand(1);
    Args args;
    std::uint64_t seed = 0;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"solve", "Solve the configured problem and write the mesh solution"},
        {"rates", "Convergence study over mesh sizes"},
        {"delta", "Error of inf-convolved discrete solutions against the regularization scale"},
        {"freeze", "Frozen-coefficient error on shrinking balls"},
        {"perturb", "Error of the coefficient-perturbed problem"},
        {"barrier", "Sandwich bound between F = f and F = f + c"},
        {"check", "Monotonicity, consistency and ellipticity checks"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config, "Problem configuration (JSON)")->required();
        sub->add_option("--out", args.out, "Output path (default: stdout)");
        sub->add_option("--seed", seed, "Override the configured seed");
        sub->add_option("--format", args.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    std::string cmd;
    for (auto* sub : app.get_subcommands()) {
        cmd = sub->get_name();
        if (sub->count("--seed") > 0) args.seed = seed;
    }
    try {
        return run(cmd, args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DecompositionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateMeshError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const AssertionFailure& e) {
        std::cerr << "assertion failed: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace nonlin::harness
