#include "nmp/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "nmp/assembly.hpp"
#include "nmp/cloud_io.hpp"
#include "nmp/error.hpp"
#include "nmp/operators.hpp"
#include "nmp/problems.hpp"
#include "nmp/solver.hpp"
#include "nmp/study.hpp"

namespace nmp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(schema_version), "schema_version");
    }
    make_problem(manifold, problem.empty() ? problem_ids(manifold).front() : problem);
    if (n < 16) throw ConfigError("n must be at least 16", "n");
    if (m_b != 0 && m_b < 8) throw ConfigError("m_b must be at least 8", "m_b");
    parse_sampling_mode(mode);
    parse_weight_mode(weight_mode);
    if (delta && !(*delta > 0.0 && std::isfinite(*delta))) throw ConfigError("delta must be positive", "delta");
    if (!(tol > 0.0) || tol >= 1.0) throw ConfigError("tol must lie in (0, 1)", "tol");
    if (resolution < 4) throw ConfigError("resolution must be at least 4", "resolution");
    if (draws < 1) throw ConfigError("draws must be positive", "draws");
    if (out.empty()) throw ConfigError("output directory must not be empty", "out");
}

json RunConfig::to_json() const {
    return {
        {"schema_version", schema_version},
        {"manifold", manifold},
        {"problem", problem.empty() ? problem_ids(manifold).front() : problem},
        {"n", n},
        {"m_b", m_b == 0 ? default_boundary_count(n) : m_b},
        {"n_list", n_list.empty() ? standard_n_list() : n_list},
        {"seed", seed},
        {"mode", mode},
        {"weight_mode", weight_mode},
        {"delta", delta ? json(*delta) : json("(2/n)^(1/4)")},
        {"tol", tol},
        {"max_iter", max_iter},
        {"resolution", resolution},
        {"draws", draws},
        {"cloud", cloud},
        {"out", out},
    };
}

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object", "config");
    RunConfig c;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "schema_version") c.schema_version = value.get<int>();
            else if (key == "manifold") c.manifold = value.get<std::string>();
            else if (key == "problem") c.problem = value.get<std::string>();
            else if (key == "n") c.n = value.get<std::size_t>();
            else if (key == "m_b") c.m_b = value.get<std::size_t>();
            else if (key == "n_list") c.n_list = value.get<std::vector<std::size_t>>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "mode") c.mode = value.get<std::string>();
            else if (key == "weight_mode") c.weight_mode = value.get<std::string>();
            else if (key == "delta") {
                if (value.is_number()) c.delta = value.get<double>();
                else if (!value.is_string()) throw ConfigError("delta must be a number", "delta");
            } else if (key == "tol") c.tol = value.get<double>();
            else if (key == "max_iter") c.max_iter = value.get<std::size_t>();
            else if (key == "resolution") c.resolution = value.get<int>();
            else if (key == "draws") c.draws = value.get<int>();
            else if (key == "cloud") c.cloud = value.get<std::string>();
            else if (key == "out") c.out = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'", key);
        } catch (const json::exception& e) {
            throw ConfigError("bad value for '" + key + "': " + e.what(), key);
        }
    }
    if (doc.contains("schema_version") == false) throw ConfigError("config lacks schema_version", "schema_version");
    return c;
}

namespace {

std::string problem_id(const RunConfig& c) { return c.problem.empty() ? problem_ids(c.manifold).front() : c.problem; }

std::shared_ptr<const PointCloud> make_cloud(const RunConfig& c) {
    if (!c.cloud.empty()) {
        auto cloud = std::make_shared<const PointCloud>(load_cloud(c.cloud));
        if (cloud->manifold != c.manifold) {
            throw ConfigError("cloud " + c.cloud + " samples " + cloud->manifold + ", config says " + c.manifold,
                              "manifold");
        }
        return cloud;
    }
    SamplingOptions o;
    o.n = c.n;
    o.m_b = c.m_b == 0 ? default_boundary_count(c.n) : c.m_b;
    o.seed = c.seed;
    o.mode = parse_sampling_mode(c.mode);
    o.weights = parse_weight_mode(c.weight_mode);
    o.delta = c.delta;
    const TestProblem p = make_problem(c.manifold, problem_id(c));
    return std::make_shared<const PointCloud>(sample_manifold(p.manifold, o));
}

fs::path output_dir(const RunConfig& c) {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message(), c.out);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing", path.string());
    os << text;
    if (!os) throw IoError("write failed for " + path.string(), path.string());
}

SolveOptions solve_options(const RunConfig& c) {
    SolveOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    return o;
}

json cmd_gen(const RunConfig& c) {
    const auto cloud = make_cloud(c);
    const fs::path dir = output_dir(c);
    json doc = cloud_to_json(*cloud);
    doc["config"] = c.to_json();
    write_text(dir / "cloud.json", doc.dump() + "\n");
    std::ostringstream csv;
    csv << "# config " << c.to_json().dump() << '\n';
    write_cloud_csv(csv, *cloud);
    write_text(dir / "cloud.csv", csv.str());
    return {{"command", "gen"},
            {"n", cloud->interior.size()},
            {"m_b", cloud->boundary.size()},
            {"delta", cloud->delta},
            {"total_area", cloud->total_area()},
            {"total_length", cloud->total_length()},
            {"artifacts", {(dir / "cloud.json").string(), (dir / "cloud.csv").string()}}};
}

json cmd_assemble(const RunConfig& c) {
    const auto cloud = make_cloud(c);
    const TestProblem p = make_problem(c.manifold, problem_id(c));
    const DiscreteSystem s = assemble(cloud, KernelFamily::cosine(cloud->delta), p);
    const fs::path dir = output_dir(c) / "system";
    export_system(s, dir.string(), c.to_json().dump());
    return {{"command", "assemble"},
            {"n", s.n()},
            {"m_b", s.m_b()},
            {"delta", s.delta},
            {"nnz", {{"L", s.L.nnz()}, {"G", s.G.nnz()}, {"D", s.D.nnz()}}},
            {"warnings", s.warnings},
            {"artifacts", {dir.string()}}};
}

json cmd_solve(const RunConfig& c) {
    const auto cloud = make_cloud(c);
    const TestProblem p = make_problem(c.manifold, problem_id(c));
    const DiscreteSystem s = assemble(cloud, KernelFamily::cosine(cloud->delta), p);
    const SolveResult r = solve(s, solve_options(c));
    const BlockResidual br = block_residual(s, r);
    const fs::path dir = output_dir(c);

    std::ostringstream csv;
    csv << "# config " << c.to_json().dump() << '\n';
    write_solution_csv(csv, s, r);
    write_text(dir / "solution.csv", csv.str());

    json doc = {{"command", "solve"},
                {"n", s.n()},
                {"m_b", s.m_b()},
                {"delta", s.delta},
                {"iterations", r.iterations},
                {"residual", r.residual},
                {"wall_time", r.wall_time},
                {"block_residual", {{"interior", br.interior}, {"boundary", br.boundary}}},
                {"warnings", s.warnings}};
    bool nonzero = false;
    for (const auto& x : cloud->interior) nonzero = nonzero || p.u_exact(x.position) != 0.0;
    if (nonzero) doc["e2"] = error_interior(r.u, p, *cloud);
    const BoundaryError eb = error_boundary(r.v, p, *cloud);
    doc["e2b"] = eb.value;
    doc["e2b_absolute"] = eb.absolute;
    doc["config"] = c.to_json();
    write_text(dir / "solve.json", doc.dump(2) + "\n");
    doc["artifacts"] = {(dir / "solution.csv").string(), (dir / "solve.json").string()};
    doc.erase("config");
    return doc;
}

json cmd_study(const RunConfig& c) {
    StudyConfig sc;
    sc.manifold = c.manifold;
    sc.problem = problem_id(c);
    sc.n_list = c.n_list.empty() ? standard_n_list() : c.n_list;
    if (c.delta) sc.delta_list.assign(sc.n_list.size(), *c.delta);
    sc.seed = c.seed;
    sc.mode = parse_sampling_mode(c.mode);
    sc.weights = parse_weight_mode(c.weight_mode);
    sc.tol = c.tol;
    sc.max_iter = c.max_iter;
    const StudyResult result = run_study(sc);
    const fs::path dir = output_dir(c);

    std::ostringstream csv;
    write_study_csv(csv, result);
    write_text(dir / "study.csv", csv.str());
    json summary = study_summary(result);
    summary["run_config"] = c.to_json();
    write_text(dir / "study_summary.json", summary.dump(2) + "\n");
    return {{"command", "study"},
            {"rows", result.records.size()},
            {"slope_interior", result.interior_fit.slope},
            {"slope_boundary", result.boundary_fit.slope},
            {"artifacts", {(dir / "study.csv").string(), (dir / "study_summary.json").string()}}};
}

json cmd_verify(const RunConfig& c) {
    json report = verify_report(c);
    const fs::path dir = output_dir(c);
    write_text(dir / "verify.json", report.dump(2) + "\n");
    report.erase("config");
    report["command"] = "verify";
    report["artifacts"] = {(dir / "verify.json").string()};
    return report;
}

json cmd_energy(const RunConfig& c) {
    const auto cloud = make_cloud(c);
    const TestProblem p = make_problem(c.manifold, problem_id(c));
    const DiscreteSystem s = assemble(cloud, KernelFamily::cosine(cloud->delta), p);
    const SolveResult r = solve(s, solve_options(c));

    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal;
    std::vector<double> u(s.n()), v(s.m_b());
    double min_energy = INFINITY;
    int negative = 0;
    for (int d = 0; d < c.draws; ++d) {
        for (auto& x : u) x = normal(rng);
        for (auto& x : v) x = normal(rng);
        const double e = discrete_energy(s, u, v);
        min_energy = std::min(min_energy, e);
        negative += e < 0.0;
    }
    json doc = {{"command", "energy"},
                {"energy_solution", discrete_energy(s, r.u, r.v)},
                {"draws", c.draws},
                {"min_random_energy", min_energy},
                {"negative_draws", negative},
                {"config", c.to_json()}};
    const fs::path dir = output_dir(c);
    write_text(dir / "energy.json", doc.dump(2) + "\n");
    doc.erase("config");
    doc["artifacts"] = {(dir / "energy.json").string()};
    return doc;
}

json error_json(const std::string& kind, const std::string& message, const std::string& field = {}) {
    json e = {{"kind", kind}, {"message", message}};
    if (!field.empty()) e["field"] = field;
    return {{"error", e}};
}

// Flag values held until parsing finishes; only flags actually given override the file.
struct Flags {
    std::string config;
    std::string manifold, problem, mode, weight_mode, cloud, out;
    std::size_t n = 0, m_b = 0, max_iter = 0;
    std::vector<std::size_t> n_list;
    std::uint64_t seed = 0;
    double delta = 0.0, tol = 0.0;
    int resolution = 0, draws = 0;
};

void add_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "JSON config file (flags override its values)");
    app.add_option("--manifold", f.manifold, "hemisphere or disk");
    app.add_option("--problem", f.problem, "test problem identifier");
    app.add_option("--n", f.n, "interior point count");
    app.add_option("--mb", f.m_b, "boundary point count");
    app.add_option("--n-list", f.n_list, "interior counts for a study")->delimiter(',');
    app.add_option("--seed", f.seed, "RNG seed");
    app.add_option("--mode", f.mode, "random or lattice");
    app.add_option("--weight-mode", f.weight_mode, "auto, uniform or voronoi");
    app.add_option("--delta", f.delta, "kernel scale (default (2/n)^(1/4))");
    app.add_option("--tol", f.tol, "CG relative residual tolerance");
    app.add_option("--max-iter", f.max_iter, "CG iteration cap (default 10 n)");
    app.add_option("--resolution", f.resolution, "quadrature nodes per unit parameter length");
    app.add_option("--draws", f.draws, "random draws for the energy check");
    app.add_option("--cloud", f.cloud, "input point cloud JSON");
    app.add_option("--out", f.out, "output directory");
}

RunConfig resolve(const CLI::App& app, const Flags& f) {
    RunConfig c;
    if (app.count("--config")) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot read config file '" + f.config + "'", "config_path");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config file '" + f.config + "' is not valid JSON: " + e.what(), "config_path");
        }
        c = RunConfig::from_json(doc);
    }
    if (app.count("--manifold")) c.manifold = f.manifold;
    if (app.count("--problem")) c.problem = f.problem;
    if (app.count("--n")) c.n = f.n;
    if (app.count("--mb")) c.m_b = f.m_b;
    if (app.count("--n-list")) c.n_list = f.n_list;
    if (app.count("--seed")) c.seed = f.seed;
    if (app.count("--mode")) c.mode = f.mode;
    if (app.count("--weight-mode")) c.weight_mode = f.weight_mode;
    if (app.count("--delta")) c.delta = f.delta;
    if (app.count("--tol")) c.tol = f.tol;
    if (app.count("--max-iter")) c.max_iter = f.max_iter;
    if (app.count("--resolution")) c.resolution = f.resolution;
    if (app.count("--draws")) c.draws = f.draws;
    if (app.count("--cloud")) c.cloud = f.cloud;
    if (app.count("--out")) c.out = f.out;
    c.validate();
    return c;
}

}  // namespace

json verify_report(const RunConfig& c) {
    const std::string main_id = problem_id(c);
    const TestProblem main = make_problem(c.manifold, main_id);
    const ParametricManifold& m = main.manifold;
    constexpr int kPoints = 32;
    constexpr double kStep = 1e-3;
    const double two_pi = 2.0 * std::numbers::pi;

    json identity = json::object();
    for (const auto& id : problem_ids(c.manifold)) {
        if (id == "zero") continue;
        const TestProblem p = make_problem(c.manifold, id);
        double worst = 0.0;
        for (int k = 0; k < kPoints; ++k) worst = std::max(worst, identity_residual(p, two_pi * (k + 0.5) / kPoints, kStep));
        identity[id] = worst;
    }
    double kmin = INFINITY, kmax = -INFINITY;
    for (int k = 0; k < kPoints; ++k) {
        const double kappa = m.kappa_n(two_pi * (k + 0.5) / kPoints);
        kmin = std::min(kmin, kappa);
        kmax = std::max(kmax, kappa);
    }

    const QuadratureGrid coarse(m, c.resolution);
    const QuadratureGrid fine(m, 2 * c.resolution);
    const std::vector<double> deltas = {0.2, 0.1};
    const auto probes = interior_probe_points(m, 2.0 * deltas.front() + 0.01, 64);
    std::vector<TruncationSample> samples;
    json truncation = json::array();
    for (double d : deltas) {
        samples.push_back(probe_truncation(main, coarse, fine, d, probes, 64));
        truncation.push_back({{"delta", d}, {"rin_rms", samples.back().interior_rms}, {"rbd_l2", samples.back().boundary_l2}});
    }
    auto slope = [&](double a, double b) {
        return (a > 0.0 && b > 0.0) ? json(std::log(a / b) / std::log(deltas[0] / deltas[1])) : json(nullptr);
    };

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng), a3 = coef(rng), b0 = coef(rng), b1 = coef(rng);
    const Vec3 kw(coef(rng) * 3, coef(rng) * 3, coef(rng) * 3), ks(coef(rng) * 3, coef(rng) * 3, coef(rng) * 3);
    const ScalarField w = [=](const Vec3& x) { return a0 + a1 * x.x() + a2 * x.y() + a3 * x.z() + std::sin(kw.dot(x)); };
    const ScalarField s = [=](const Vec3& x) { return b0 + b1 * std::cos(ks.dot(x)); };
    const NonlocalOperators ops(coarse, KernelFamily::cosine(0.1));
    const auto adj = ops.adjointness(w, s);
    const double gap = std::abs(adj.interior_side - adj.boundary_side) / (adj.w_norm * adj.s_norm);

    return {
        {"manifold", c.manifold},
        {"problem", main_id},
        {"identity_residuals", identity},
        {"kappa_n", {{"min", kmin}, {"max", kmax}}},
        {"rin_slope", slope(samples[0].interior_rms, samples[1].interior_rms)},
        {"rbd_slope", slope(samples[0].boundary_l2, samples[1].boundary_l2)},
        {"truncation", truncation},
        {"adjointness_gap", gap},
        {"config", c.to_json()},
    };
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nonlocal Poisson solver on point clouds"};
    app.require_subcommand(1);
    struct Command {
        const char* name;
        const char* help;
        json (*fn)(const RunConfig&);
    };
    const Command commands[] = {
        {"gen", "sample a point cloud", cmd_gen},
        {"assemble", "assemble and export the discrete system", cmd_assemble},
        {"solve", "assemble and solve one system", cmd_solve},
        {"study", "convergence study over a list of cloud sizes", cmd_study},
        {"verify", "identity, truncation and adjointness checks", cmd_verify},
        {"energy", "discrete energy of the solution and of random draws", cmd_energy},
    };
    std::vector<Flags> flags(std::size(commands));
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        subs.push_back(app.add_subcommand(commands[i].name, commands[i].help));
        add_flags(*subs.back(), flags[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("config_error", e.what()).dump() << '\n';
        return 2;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            const RunConfig config = resolve(*subs[i], flags[i]);
            out << commands[i].fn(config).dump() << '\n';
            return 0;
        } catch (const ConfigError& e) {
            err << error_json(to_string(e.kind()), e.what(), e.field()).dump() << '\n';
            return 2;
        } catch (const IoError& e) {
            json j = error_json(to_string(e.kind()), e.what());
            j["error"]["path"] = e.path();
            err << j.dump() << '\n';
            return 3;
        } catch (const Error& e) {
            err << error_json(to_string(e.kind()), e.what()).dump() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err << error_json("internal_error", e.what()).dump() << '\n';
            return 1;
        }
    }
    return 2;
}

}  // namespace nmp::cli
