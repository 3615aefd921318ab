#include "fucik/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fucik/cache.hpp"
#include "fucik/curve_tracer.hpp"
#include "fucik/errors.hpp"
#include "fucik/plap_spectrum.hpp"

namespace fucik {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Options {
    std::string config_path;
    std::string cache_dir;
    std::string output;
    int threads = 1;
    int k = 2;
    int grid = 9;
    double a = 0.0;
    double b = 0.0;
    double p = 0.0;
    std::string u_file;
    std::string tgrid = "0.6,0.8,1,1.25,1.67";
    std::string out_dir;
    std::string export_dir;
    int vector_index = 0;
    std::string vector_out;
    int path_nodes = 17;
};

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

ProblemConfig load(const Options& opt) {
    if (opt.config_path.empty()) return ProblemConfig{};
    return load_config(opt.config_path);
}

std::filesystem::path cache_dir(const Options& opt) {
    return cache_directory(opt.cache_dir.empty() ? std::nullopt : std::optional<std::string>(opt.cache_dir));
}

SolverSettings settings_for(const ProblemConfig& cfg) {
    SolverSettings s;
    s.solver_tol = cfg.tolerances.solver_tol;
    s.seed = cfg.seed;
    return s;
}

TracerOptions tracer_options(const ProblemConfig& cfg, int threads) {
    TracerOptions t;
    t.bisect_tol = cfg.tolerances.bisect_tol;
    t.threads = threads;
    return t;
}

void check_k(const EigenDecomposition& decomp, int k) {
    if (k > decomp.num_distinct() - 1)
        throw ConfigError("k must be <= " + std::to_string(decomp.num_distinct() - 1) +
                          " for this discretization");
}

// Writes to --output when given, else to the command's stream.
void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.output);
    if (!f) throw ConfigError("cannot open output file " + opt.output);
    f << text;
}

std::string curve_csv(const CurveSample& sample) {
    std::ostringstream os;
    os << "a,nu,mu,flags\n";
    for (const auto& r : sample.rows) os << fmt(r.a) << ',' << fmt(r.nu) << ',' << fmt(r.mu) << ',' << r.flags() << '\n';
    return os.str();
}

json label_json(const RegionLabel& label) {
    return {{"label", to_string(label.region)}, {"n", label.n}, {"m", label.m}, {"itilde_signs", label.signs}};
}

json gap_json(const GapResult& g) {
    return {{"nonempty", g.nonempty},
            {"measure", g.measure},
            {"witness_norms", {g.plus_norm, g.minus_norm}}};
}

Vector read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open vector file " + path);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        for (auto& ch : token)
            if (ch == ',') ch = ' ';
        std::istringstream ts(token);
        double x;
        while (ts >> x) values.push_back(x);
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int cmd_assemble(const Options& opt, std::ostream& out) {
    const ProblemConfig cfg = load(opt);
    const auto prep = prepare_problem(cfg, cache_dir(opt), false);
    if (!opt.export_dir.empty()) {
        std::filesystem::create_directories(opt.export_dir);
        write_matrix_csv((std::filesystem::path(opt.export_dir) / "A.csv").string(), prep.forms.A);
        write_matrix_csv((std::filesystem::path(opt.export_dir) / "M.csv").string(), prep.forms.M);
        write_matrix_csv((std::filesystem::path(opt.export_dir) / "m_lumped.csv").string(), prep.forms.m_lumped);
    }
    const json j = {{"config_hash", hash_hex(prep.hash)},
                    {"cache_file", prep.forms_file.string()},
                    {"cache_hit", prep.forms_cache_hit},
                    {"dofs", prep.forms.size()}};
    emit(opt, out, j.dump(2) + "\n");
    return 0;
}

int cmd_eigs(const Options& opt, std::ostream& out) {
    const ProblemConfig cfg = load(opt);
    const auto prep = prepare_problem(cfg, cache_dir(opt), true);
    const auto& d = prep.decomp;
    if (!opt.vector_out.empty()) {
        if (opt.vector_index < 1 || opt.vector_index > d.size())
            throw ConfigError("eigenvector index out of range");
        std::ofstream f(opt.vector_out);
        if (!f) throw ConfigError("cannot open " + opt.vector_out);
        const Vector v = d.vectors.col(opt.vector_index - 1);
        for (Eigen::Index i = 0; i < v.size(); ++i) f << fmt(v[i]) << '\n';
    }
    const json j = {{"lambdas", d.lambdas}, {"mults", d.mults}, {"d", d.d}, {"residuals", d.residuals}};
    emit(opt, out, j.dump(2) + "\n");
    return 0;
}

struct SpectrumRun {
    PreparedProblem prep;
    std::shared_ptr<const SpectralData> data;
};

SpectrumRun spectrum(const Options& opt, bool needs_k = true) {
    if (needs_k && opt.k < 2) throw ConfigError("k must be ≥ 2");
    SpectrumRun run{prepare_problem(load(opt), cache_dir(opt), true), nullptr};
    if (run.prep.config.p != 2.0) throw ConfigError("this command requires p = 2");
    run.data = make_spectral_data(run.prep.forms, run.prep.decomp);
    return run;
}

int cmd_curve(const Options& opt, std::ostream& out) {
    const auto run = spectrum(opt);
    check_k(run.prep.decomp, opt.k);
    const CurveTracer tracer(run.data, settings_for(run.prep.config), tracer_options(run.prep.config, opt.threads));
    emit(opt, out, curve_csv(tracer.trace_curves(opt.k, opt.grid)));
    return 0;
}

int cmd_classify(const Options& opt, std::ostream& out) {
    const auto run = spectrum(opt);
    check_k(run.prep.decomp, opt.k);
    const CurveTracer tracer(run.data, settings_for(run.prep.config), tracer_options(run.prep.config, 1));
    emit(opt, out, label_json(tracer.classify_point(opt.a, opt.b, opt.k)).dump(2) + "\n");
    return 0;
}

int cmd_gap(const Options& opt, std::ostream& out) {
    const auto run = spectrum(opt);
    check_k(run.prep.decomp, opt.k);
    emit(opt, out, gap_json(gap_condition(*run.data, opt.k)).dump(2) + "\n");
    return 0;
}

int cmd_verify(const Options& opt, std::ostream& out) {
    const auto run = spectrum(opt, false);
    const Vector u = read_vector(opt.u_file);
    if (u.size() != run.prep.forms.size())
        throw ConfigError("vector length " + std::to_string(u.size()) + " does not match " +
                          std::to_string(run.prep.forms.size()) + " dofs");
    if (u.cwiseAbs().maxCoeff() == 0.0) throw ConfigError("cannot verify the zero vector");
    const double r = residual_check(*run.data, u, opt.a, opt.b);
    const json j = {{"residual", r}, {"accepted", r <= 1e-6}, {"a", opt.a}, {"b", opt.b}};
    emit(opt, out, j.dump(2) + "\n");
    return 0;
}

struct PLapRun {
    PreparedProblem prep;
    std::unique_ptr<PLapProblem> problem;
};

PLapRun plap(const Options& opt) {
    ProblemConfig cfg = load(opt);
    if (opt.p != 0.0) cfg.p = opt.p;
    cfg.validate();
    PLapRun run{prepare_problem(cfg, cache_dir(opt), false), nullptr};
    run.problem = std::make_unique<PLapProblem>(run.prep.mesh, cfg, run.prep.forms);
    return run;
}

int cmd_plap_lambda1(const Options& opt, std::ostream& out) {
    const auto run = plap(opt);
    const auto res = run.problem->minimize_lambda1(run.prep.config.seed, run.prep.config.tolerances.solver_tol);
    const json j = {{"lambda1", res.lambda1}, {"iterations", res.iterations}, {"residual", res.residual},
                    {"p", run.prep.config.p}};
    emit(opt, out, j.dump(2) + "\n");
    return 0;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("invalid number in list: '" + item + "'");
        }
    }
    if (values.empty()) throw ConfigError("empty t grid");
    return values;
}

int cmd_plap_curve(const Options& opt, std::ostream& out) {
    const auto run = plap(opt);
    const auto& cfg = run.prep.config;
    const auto ts = parse_list(opt.tgrid);
    const auto first = run.problem->minimize_lambda1(cfg.seed, cfg.tolerances.solver_tol);
    MountainPassOptions mp;
    mp.path_nodes = opt.path_nodes;
    mp.seed = cfg.seed;
    // λ₂ surrogate: the mountain-pass value at t = 1.
    const double lambda2 = run.problem->mountain_pass_c2(1.0, first, std::nullopt, mp).c;
    std::ostringstream os;
    os << "t,c,a,b,residual\n";
    for (double t : ts) {
        const auto pt = run.problem->mountain_pass_c2(t, first, lambda2, mp);
        os << fmt(pt.t) << ',' << fmt(pt.c) << ',' << fmt(pt.a) << ',' << fmt(pt.b) << ',' << fmt(pt.residual) << '\n';
    }
    emit(opt, out, os.str());
    return 0;
}

int cmd_full(const Options& opt, std::ostream& out) {
    if (opt.out_dir.empty()) throw ConfigError("--out-dir is required");
    const auto t0 = Clock::now();
    const auto run = spectrum(opt);
    check_k(run.prep.decomp, opt.k);
    const auto& cfg = run.prep.config;
    const auto& dec = run.prep.decomp;
    const CurveTracer tracer(run.data, settings_for(cfg), tracer_options(cfg, opt.threads));

    const auto t1 = Clock::now();
    const CurveSample sample = tracer.trace_curves(opt.k, opt.grid);
    const auto t2 = Clock::now();

    const double lower = dec.lambda(opt.k - 1);
    const double upper = dec.lambda(opt.k + 1);
    const double offset = 0.05 * (upper - lower);
    json rows = json::array();
    for (const auto& r : sample.rows) {
        json probes = json::array();
        if (r.flags() == "ok") {
            for (double b : {r.nu - offset, 0.5 * (r.nu + r.mu), r.mu + offset}) {
                if (!(b > lower && b < upper)) continue;
                json probe = label_json(tracer.classify_point(r.a, b, opt.k));
                probe["b"] = b;
                probes.push_back(probe);
            }
        }
        rows.push_back({{"a", r.a}, {"nu", r.nu}, {"mu", r.mu}, {"flags", r.flags()}, {"probes", probes}});
    }
    const json classification = {{"k", opt.k},
                                 {"lambda_k", dec.lambda(opt.k)},
                                 {"square", {lower, upper}},
                                 {"gap", gap_json(gap_condition(*run.data, opt.k))},
                                 {"rows", rows}};
    const auto t3 = Clock::now();

    const std::filesystem::path dir(opt.out_dir);
    std::filesystem::create_directories(dir);
    const auto csv_path = dir / "curve.csv";
    const auto cls_path = dir / "classification.json";
    const auto manifest_path = dir / "manifest.json";
    {
        std::ofstream f(csv_path);
        f << curve_csv(sample);
    }
    {
        std::ofstream f(cls_path);
        f << classification.dump(2) << '\n';
    }
    auto seconds = [](Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    const json manifest = {
        {"config_hash", hash_hex(run.prep.hash)},
        {"config", config_to_json(cfg)},
        {"versions",
         {{"fucik", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}}},
        {"cache", {{"forms", run.prep.forms_file.string()}, {"forms_hit", run.prep.forms_cache_hit},
                   {"eigen", run.prep.eigen_file.string()}, {"eigen_hit", run.prep.eigen_cache_hit}}},
        {"outputs", {csv_path.string(), cls_path.string(), manifest_path.string()}},
        {"timings_seconds",
         {{"assemble", run.prep.assemble_seconds},
          {"eigen", run.prep.eigen_seconds},
          {"trace", seconds(t1, t2)},
          {"classify", seconds(t2, t3)},
          {"total", seconds(t0, Clock::now())}}}};
    {
        std::ofstream f(manifest_path);
        f << manifest.dump(2) << '\n';
    }
    out << manifest.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Fractional Fucik spectrum toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    app.add_option("--cache-dir", opt.cache_dir, std::string("Cache directory (default $") + kCacheEnv + " or ./.fucik-cache)");

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config,-c", opt.config_path, "Problem config JSON (defaults apply when omitted)");
        sub->add_option("--output,-o", opt.output, "Write the result here instead of stdout");
        return sub;
    };
    auto* assemble = with_config(app.add_subcommand("assemble", "Assemble and cache the Galerkin forms"));
    assemble->add_option("--export-csv", opt.export_dir, "Also write A, M, m_lumped as CSV into this directory");
    auto* eigs = with_config(app.add_subcommand("eigs", "Linear spectrum as JSON"));
    eigs->add_option("--vector", opt.vector_index, "1-based eigenvector index to export");
    eigs->add_option("--vector-out", opt.vector_out, "File for the exported eigenvector");
    auto* curve = with_config(app.add_subcommand("curve", "Trace nu_{k-1} and mu_k across Q_k (CSV)"));
    curve->add_option("--k", opt.k)->required();
    curve->add_option("--grid", opt.grid, "Number of a-grid points");
    curve->add_option("--threads", opt.threads)->check(CLI::PositiveNumber);
    auto* classify = with_config(app.add_subcommand("classify", "Region label of (a,b) in Q_k"));
    classify->add_option("--k", opt.k)->required();
    classify->add_option("--a", opt.a)->required();
    classify->add_option("--b", opt.b)->required();
    auto* gap = with_config(app.add_subcommand("gap", "Gap condition on E_k"));
    gap->add_option("--k", opt.k)->required();
    auto* verify = with_config(app.add_subcommand("verify", "Residual of a candidate solution"));
    verify->add_option("--u", opt.u_file, "Nodal values, one per line or comma separated")->required();
    verify->add_option("--a", opt.a)->required();
    verify->add_option("--b", opt.b)->required();
    auto* lambda1 = with_config(app.add_subcommand("plap-lambda1", "First eigenvalue of the fractional p-Laplacian"));
    lambda1->add_option("--p", opt.p, "Override the config exponent");
    auto* pcurve = with_config(app.add_subcommand("plap-curve", "Mountain-pass points (c, ct) of the first nontrivial curve"));
    pcurve->add_option("--p", opt.p, "Override the config exponent");
    pcurve->add_option("--tgrid", opt.tgrid, "Comma-separated t values");
    pcurve->add_option("--path-nodes", opt.path_nodes);
    auto* full = with_config(app.add_subcommand("full", "Curves, classification and manifest"));
    full->add_option("--k", opt.k)->required();
    full->add_option("--grid", opt.grid);
    full->add_option("--threads", opt.threads)->check(CLI::PositiveNumber);
    full->add_option("--out-dir", opt.out_dir)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (assemble->parsed()) return cmd_assemble(opt, out);
        if (eigs->parsed()) return cmd_eigs(opt, out);
        if (curve->parsed()) return cmd_curve(opt, out);
        if (classify->parsed()) return cmd_classify(opt, out);
        if (gap->parsed()) return cmd_gap(opt, out);
        if (verify->parsed()) return cmd_verify(opt, out);
        if (lambda1->parsed()) return cmd_plap_lambda1(opt, out);
        if (pcurve->parsed()) return cmd_plap_curve(opt, out);
        if (full->parsed()) return cmd_full(opt, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}

}  // namespace fucik
