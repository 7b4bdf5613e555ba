#include "roughstokes/config.hpp"
#include "roughstokes/quadrature.hpp"
#include "roughstokes/verify.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace rs = roughstokes;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kVerification = 4 };

struct RunFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_override(CLI::App& cmd, RunFlags& flags, const std::string& flag, const std::string& key,
                  const std::string& help)
{
    cmd.add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags.overrides[key] = v; }, help);
}

void write_level_vtk(const rs::RunConfig& config, int level, const rs::StokesSolution& sol,
                     const rs::IndicatorField& est, const std::vector<int>& marked)
{
    std::vector<double> flag(sol.mesh->num_triangles(), 0.0);
    for (int t : marked) {
        flag[t] = 1.0;
    }
    const std::vector<std::pair<std::string, std::vector<double>>> data{
        {"eta", est.eta}, {"residual", est.residual}, {"divergence", est.divergence},
        {"jump", est.jump}, {"marked", flag}};
    char name[32];
    std::snprintf(name, sizeof name, "level_%03d.vtk", level);
    const std::filesystem::path path = std::filesystem::path(config.vtk_dir) / name;
    std::ofstream out(path);
    if (!out) {
        throw rs::ConfigError("cannot write '" + path.string() + "'");
    }
    rs::write_vtk(out, *sol.mesh, data);
}

int cmd_run(const RunFlags& flags)
{
    rs::RunConfig config;
    try {
        if (!flags.config_file.empty()) {
            config = rs::load_config(flags.config_file);
        }
        for (const auto& [key, value] : flags.overrides) {
            rs::apply_setting(config, key, value);
        }
        rs::validate(config);
        rs::validate_paths(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }

    rs::LevelObserver observer;
    if (!config.vtk_dir.empty()) {
        observer = [&config](int level, const rs::StokesSolution& sol, const rs::IndicatorField& est,
                             const std::vector<int>& marked) { write_level_vtk(config, level, sol, est, marked); };
    }

    rs::ConvergenceRecord record;
    try {
        record = rs::run_study(config, observer);
    } catch (const rs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const rs::IncompatibleDatumError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const rs::NoCorrectionNodeError& e) {
        std::cerr << "config error: mesh too coarse: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    }

    std::cout << "# method=" << rs::to_string(record.method) << " mode=" << rs::to_string(record.mode)
              << " regularizer=" << rs::to_string(record.regularizer)
              << " jump_policy=" << rs::to_string(record.jump_policy)
              << " estimator_edges=" << rs::to_string(record.estimator_edges);
    if (record.mode == rs::RefinementMode::Adaptive) {
        std::cout << " theta=" << record.theta;
    }
    std::cout << '\n';
    rs::write_table(std::cout, record);
    if (!config.csv.empty()) {
        std::ofstream out(config.csv, std::ios::binary);
        rs::write_csv(out, record);
        if (!out) {
            std::cerr << "config error: cannot write '" << config.csv << "'\n";
            return kConfig;
        }
    }
    return kOk;
}

int cmd_verify(const std::vector<std::string>& suites, const std::string& fault)
{
    rs::VerifyOptions options;
    if (!fault.empty()) {
        if (fault != "quadrature") {
            std::cerr << "config error: unknown fault '" << fault << "'\n";
            return kConfig;
        }
        options.rule_source = [](bool triangle, int degree) {
            rs::QuadratureRule rule = triangle ? rs::triangle_rule(degree) : rs::segment_rule(degree);
            if (triangle && degree == 4) {
                rule.weights[0] *= 1.001;
            }
            return rule;
        };
    }
    const std::vector<std::string>& names = suites.empty() ? rs::default_suites() : suites;
    bool ok = true;
    for (const std::string& name : names) {
        rs::SuiteResult r;
        try {
            r = rs::run_suite(name, options);
        } catch (const std::invalid_argument& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kConfig;
        } catch (const std::exception& e) {
            r.name = name;
            r.failures.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks, "
                  << r.failures.size() << " failures)\n";
        for (std::size_t i = 0; i < r.failures.size() && i < 10; ++i) {
            std::cout << "  " << r.failures[i] << '\n';
        }
        ok = ok && r.passed();
    }
    return ok ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stokes flow with rough Dirichlet data: convergence studies and verification"};
    app.require_subcommand(1);

    RunFlags flags;
    CLI::App* run = app.add_subcommand("run", "Run a uniform or adaptive convergence study");
    run->add_option("--config", flags.config_file, "key = value configuration file (flags override it)");
    add_override(*run, flags, "--datum", "datum", "cavity | linear | parabolic-normal | custom | <file>");
    add_override(*run, flags, "--regularizer", "regularizer", "modified-lagrange | l2-projection | carstensen");
    add_override(*run, flags, "--jump-policy", "jump_policy", "lower-segment | left | right | average");
    add_override(*run, flags, "--method", "method", "mini | hood-taylor");
    add_override(*run, flags, "--mode", "mode", "uniform | adaptive");
    add_override(*run, flags, "--theta", "theta", "bulk fraction for adaptive marking, in (0, 1)");
    add_override(*run, flags, "--n", "n", "structured initial mesh with n x n squares");
    add_override(*run, flags, "--mesh-file", "mesh_file", "initial mesh in the plain-text format");
    add_override(*run, flags, "--levels", "levels", "uniform refinements to record");
    add_override(*run, flags, "--max-dofs", "max_dofs", "adaptive: stop beyond this many velocity nodes");
    add_override(*run, flags, "--max-iters", "max_iters", "adaptive: maximum refinement steps");
    add_override(*run, flags, "--estimator-edges", "estimator_edges", "interior | all");
    add_override(*run, flags, "--csv", "csv", "write the convergence table as CSV");
    add_override(*run, flags, "--vtk-dir", "vtk_dir", "write one VTK file per level");

    std::vector<std::string> suites;
    std::string fault;
    CLI::App* verify = app.add_subcommand("verify", "Run the oracle suites");
    verify->add_option("--suite", suites, "suite to run (repeatable); default: all but table1")
        ->check(CLI::IsMember(rs::known_suites()));
    verify->add_option("--inject-fault", fault, "corrupt an input to check failure reporting (quadrature)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    if (run->parsed()) {
        return cmd_run(flags);
    }
    return cmd_verify(suites, fault);
}
