#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rrde::cli {

void write_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + path + "'");
        }
        out << content;
        if (!out.flush()) {
            throw InputError("failed writing '" + path + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw InputError("cannot move output into place at '" + path + "'");
    }
}

namespace {

using Clock = std::chrono::steady_clock;

void emit(const Options& opt, const std::string& content)
{
    if (opt.out) {
        write_atomic(*opt.out, content);
    } else {
        std::cout << content;
    }
}

json vec_json(const Vector& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

json list_json(const std::vector<double>& v)
{
    return json(v);
}

/// Non-finite values become null so the document stays valid JSON.
json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json verify_json(const SkorokhodReport& r)
{
    return {{"ok", r.ok()},
            {"decomposition_ok", r.decomposition_ok},
            {"barrier_ok", r.barrier_ok},
            {"monotone_ok", r.monotone_ok},
            {"minimality_ok", r.minimality_ok},
            {"decomposition_error", number(r.decomposition_error)},
            {"barrier_violation", number(r.barrier_violation)},
            {"monotonicity_violation", number(r.monotonicity_violation)},
            {"minimality_residual", number(r.minimality_residual)}};
}

json report_json(const SolveReport& r, const TimeGrid& grid)
{
    json windows = json::array();
    for (const WindowRecord& w : r.windows) {
        windows.push_back({{"first", w.first},
                           {"last", w.last},
                           {"admission_norm", w.admission_norm},
                           {"iterations", w.iterations},
                           {"max_ratio", w.max_ratio},
                           {"shrinks", w.shrinks},
                           {"damping", w.damping},
                           {"distances", list_json(w.distances)},
                           {"ratios", list_json(w.ratios)}});
    }
    json jumps = json::array();
    for (const JumpRecord& j : r.jumps) {
        if (j.delta_k.isZero(0.0)) {
            continue;
        }
        jumps.push_back({{"node", j.node},
                         {"time", grid[j.node]},
                         {"unreflected", vec_json(j.unreflected)},
                         {"delta_k", vec_json(j.delta_k)}});
    }
    json out = {{"converged", r.converged},
                {"total_iterations", r.total_iterations},
                {"residual", number(r.residual)},
                {"max_contraction_ratio", r.max_contraction_ratio},
                {"non_unique_risk", r.non_unique_risk},
                {"partition", r.partition},
                {"windows", windows},
                {"reflection_jumps", jumps}};
    if (r.failure) {
        out["failure"] = {{"kind", to_string(r.failure->kind)},
                          {"window_first", r.failure->window_first},
                          {"window_last", r.failure->window_last},
                          {"distances", list_json(r.failure->distances)},
                          {"ratios", list_json(r.failure->ratios)},
                          {"message", r.failure->message}};
    }
    return out;
}

std::vector<std::string> names(const std::string& prefix, std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(prefix + std::to_string(i + 1));
    }
    return out;
}

std::string solution_csv(const GridPath& y, const GridPath& k)
{
    std::ostringstream os;
    auto header = names("y", y.dim());
    const auto kn = names("k", k.dim());
    header.insert(header.end(), kn.begin(), kn.end());
    write_csv(os, y.grid(), header, {&y.values(), &k.values()});
    return os.str();
}

json metadata(const Options& opt, const Scenario* sc)
{
    json m = {{"command", opt.command}, {"rng", Rng::algorithm}};
    if (sc) {
        m["seed"] = sc->seed();
        if (sc->doc().contains("name")) {
            m["scenario"] = sc->doc().at("name");
        }
    }
    return m;
}

void finish(const Options& opt, json& doc, Clock::time_point started)
{
    if (opt.timing) {
        doc["wall_clock_seconds"] =
            std::chrono::duration<double>(Clock::now() - started).count();
    }
}

void write_report(const Options& opt, const json& doc)
{
    if (opt.report) {
        write_atomic(*opt.report, doc.dump(2) + "\n");
    }
}

Scenario need_scenario(const Options& opt)
{
    if (!opt.scenario) {
        throw InputError("--scenario is required for " + opt.command);
    }
    return Scenario::load(*opt.scenario, opt.overrides);
}

std::optional<Scenario> maybe_scenario(const Options& opt)
{
    if (!opt.scenario) {
        return std::nullopt;
    }
    return Scenario::load(*opt.scenario, opt.overrides);
}

GridPath input_path(const Options& opt, const std::optional<Scenario>& sc, const std::string& flag,
                    const std::optional<std::string>& file, const std::string& key,
                    std::optional<std::size_t> dim, std::uint64_t slot)
{
    if (file) {
        return read_csv_file(*file);
    }
    if (sc && sc->has(key)) {
        const std::size_t d = dim ? *dim : sc->y0().size();
        return sc->path(key, d, sc->grid(), slot);
    }
    throw InputError(opt.command + ": provide " + flag + " or a scenario with '" + key + "'");
}

struct YoungProblem {
    VectorField f;
    Vector y0;
    GridPath a;
    GridPath x;
    GridPath l;
    YoungSolveConfig cfg;
};

YoungProblem young_problem(const Scenario& sc)
{
    const TimeGrid grid = sc.grid();
    const Vector y0 = sc.y0();
    const auto n = static_cast<std::size_t>(y0.size());
    VectorField f = sc.field(n);
    GridPath a = sc.path("driver_a", f.driver_dim(), grid, 1);
    GridPath x = sc.has("driver_x") ? sc.path("driver_x", n, grid, 2)
                                    : GridPath::constant(grid, Vector::Zero(y0.size()));
    GridPath l = sc.path("barrier", n, grid, 3);
    return {std::move(f), y0, std::move(a), std::move(x), std::move(l), sc.young_config()};
}

struct RoughProblem {
    VectorField f;
    Vector y0;
    Level2RoughPath x;
    GridPath l;
    RdeSolveConfig cfg;
};

RoughProblem rough_problem(const Scenario& sc)
{
    const TimeGrid grid = sc.grid();
    const Vector y0 = sc.y0();
    const auto n = static_cast<std::size_t>(y0.size());
    VectorField f = sc.field(n);
    Level2RoughPath x = sc.rough_driver(f.driver_dim(), grid);
    GridPath l = sc.path("barrier", n, grid, 3);
    return {std::move(f), y0, std::move(x), std::move(l), sc.rde_config()};
}

int finish_solve(const Options& opt, const Scenario& sc, const GridPath& y, const GridPath& k,
                 const GridPath& l, const SolveReport& report, Clock::time_point started)
{
    json doc = metadata(opt, &sc);
    doc["report"] = report_json(report, y.grid());
    if (report.converged) {
        // (Y, K) must solve the reflection problem for the unreflected input Y - K
        const SkorokhodSolution pair{y, k};
        doc["verify"] = verify_json(
            skorokhod_verify(pair, y - k, l.resample(y.grid()), default_skorokhod_tolerance(k)));
    }
    finish(opt, doc, started);
    write_report(opt, doc);
    if (opt.format == "json") {
        doc["solution"] = {{"time", std::vector<double>(y.grid().times().begin(), y.grid().times().end())},
                           {"y", json::array()},
                           {"k", json::array()}};
        for (std::size_t i = 0; i < y.dim(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            doc["solution"]["y"].push_back(vec_json(y.values().row(row).transpose()));
            doc["solution"]["k"].push_back(vec_json(k.values().row(row).transpose()));
        }
        emit(opt, doc.dump(2) + "\n");
    } else {
        emit(opt, solution_csv(y, k));
    }
    return report.converged ? Ok : NotConverged;
}

int cmd_young(const Options& opt, std::ostream& err)
{
    const auto started = Clock::now();
    const Scenario sc = need_scenario(opt);
    const YoungProblem pb = young_problem(sc);
    const YoungSolution sol = solve_reflected_young(pb.f, pb.y0, pb.a, pb.x, pb.l, pb.cfg);
    if (!sol.report.converged) {
        err << "young-solve: " << sol.report.failure->message << "\n";
    }
    return finish_solve(opt, sc, sol.y, sol.k, pb.l, sol.report, started);
}

int cmd_rde(const Options& opt, std::ostream& err)
{
    const auto started = Clock::now();
    const Scenario sc = need_scenario(opt);
    const RoughProblem pb = rough_problem(sc);
    const RdeSolution sol = solve_reflected_rde(pb.f, pb.y0, pb.x, pb.l, pb.cfg);
    if (!sol.report.converged) {
        err << "rde-solve: " << sol.report.failure->message << "\n";
    }
    if (sol.report.non_unique_risk) {
        err << "rde-solve: warning: field is not lower-triangular; solutions may not be unique\n";
    }
    return finish_solve(opt, sc, sol.y, sol.k, pb.l, sol.report, started);
}

int cmd_pvar(const Options& opt, std::ostream&)
{
    const auto started = Clock::now();
    const auto sc = maybe_scenario(opt);
    const GridPath x = input_path(opt, sc, "--input", opt.input, "input", std::nullopt, 5);
    const double p = opt.p ? *opt.p : (sc ? get_number(sc->doc(), "p", "", 2.0) : 2.0);
    const double s = opt.s.value_or(0.0);
    const double t = opt.t.value_or(x.grid().t_end());
    if (opt.format == "json") {
        json doc = metadata(opt, sc ? &*sc : nullptr);
        doc["p"] = p;
        doc["s"] = s;
        doc["t"] = t;
        doc["value"] = p_variation(x, p, s, t);
        if (s < t) {
            doc["open_value"] = p_variation_open(x, p, s, t);
        }
        finish(opt, doc, started);
        emit(opt, doc.dump(2) + "\n");
        return Ok;
    }
    // running variation t_j -> ||X||_{p,[s,t_j]} (or [s,t_j) with --open)
    const std::size_t first = x.grid().index_at_or_before(s);
    const std::size_t last = x.grid().index_at_or_before(t);
    auto cell = [&x](std::size_t i, std::size_t j) { return (x.node(j) - x.node(i)).norm(); };
    RunningVariation rv(first, p, cell);
    std::ostringstream os;
    os << "time,pvar\n";
    double previous = 0.0;
    for (std::size_t j = first; j <= last; ++j) {
        if (j > first) {
            rv.extend();
        }
        const double v = opt.open ? previous : rv.value();
        previous = rv.value();
        os << format_double(x.grid()[j]) << ',' << format_double(v) << '\n';
    }
    emit(opt, os.str());
    return Ok;
}

int cmd_skorokhod(const Options& opt, std::ostream& err)
{
    const auto started = Clock::now();
    const auto sc = maybe_scenario(opt);
    GridPath y = input_path(opt, sc, "--input", opt.input, "input", std::nullopt, 5);
    GridPath l = input_path(opt, sc, "--barrier", opt.barrier, "barrier", y.dim(), 3);
    if (!(y.grid() == l.grid())) {
        const TimeGrid g = merge(y.grid(), l.grid());
        y = y.resample(g);
        l = l.resample(g);
    }
    const SkorokhodSolution sol = skorokhod_solve(y, l);
    const SkorokhodReport rep = skorokhod_verify(sol, y, l, default_skorokhod_tolerance(sol.k));
    if (!rep.ok()) {
        err << "skorokhod: verification failed\n";
    }
    json doc = metadata(opt, sc ? &*sc : nullptr);
    doc["verify"] = verify_json(rep);
    finish(opt, doc, started);
    write_report(opt, doc);
    if (opt.format == "json") {
        emit(opt, doc.dump(2) + "\n");
    } else {
        std::ostringstream os;
        auto header = names("z", y.dim());
        const auto kn = names("k", y.dim());
        header.insert(header.end(), kn.begin(), kn.end());
        write_csv(os, y.grid(), header, {&sol.z.values(), &sol.k.values()});
        emit(opt, os.str());
    }
    return rep.ok() ? Ok : NotConverged;
}

int cmd_lift(const Options& opt, std::ostream&)
{
    const auto sc = maybe_scenario(opt);
    GridPath x = input_path(opt, sc, "--input", opt.input, "input", std::nullopt, 5);
    const double p = opt.p ? *opt.p : 2.5;
    const Level2RoughPath lift = Level2RoughPath::left_point_lift(x, p);
    const auto d = static_cast<Eigen::Index>(x.dim());
    Matrix flat(d * d, static_cast<Eigen::Index>(x.size()));
    std::vector<std::string> header = names("x", x.dim());
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            header.push_back("xx" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        const Matrix& m = lift.prefix()[j];
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) {
                flat(r * d + c, static_cast<Eigen::Index>(j)) = m(r, c);
            }
        }
    }
    if (opt.format == "json") {
        json doc = metadata(opt, sc ? &*sc : nullptr);
        doc["p"] = p;
        doc["seminorm"] = rough_seminorm(lift);
        emit(opt, doc.dump(2) + "\n");
        return Ok;
    }
    std::ostringstream os;
    write_csv(os, x.grid(), header, {&x.values(), &flat});
    emit(opt, os.str());
    return Ok;
}

std::uint64_t sample_seed(std::uint64_t base, std::uint64_t i)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

GridPath perturb(const GridPath& x, double scale, std::uint64_t seed)
{
    GeneratorSpec g;
    g.kind = GeneratorKind::Brownian;
    g.dim = x.dim();
    g.seed = seed;
    g.volatility = scale;
    return x + generate(g, x.grid());
}

json running_max_summary(const std::vector<double>& ratios)
{
    double half = 0.0;
    double full = 0.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!std::isfinite(ratios[i])) continue;
        full = std::max(full, ratios[i]);
        if (i < ratios.size() / 2) half = full;
    }
    return {{"max_first_half", half},
            {"max", full},
            {"relative_change", full > 0.0 ? (full - half) / full : 0.0}};
}

int cmd_stability(const Options& opt, std::ostream& err)
{
    const auto started = Clock::now();
    const Scenario sc = need_scenario(opt);
    const json st = sc.section("stability");
    const std::uint64_t samples = get_count(st, "samples", "stability", 100);
    const double scale = get_number(st, "scale", "stability", 0.05);
    const std::string mode = st.value("mode", std::string("young"));
    if (!(scale > 0.0)) {
        throw InputError("stability.scale: must be positive");
    }

    json runs = json::array();
    std::vector<double> ratios;
    std::size_t failures = 0;
    if (mode == "skorokhod") {
        const double p = get_number(st, "p", "stability", get_number(sc.doc(), "p", "", 2.0));
        const std::size_t n = static_cast<std::size_t>(sc.y0().size());
        const TimeGrid grid = sc.grid();
        const GridPath y = sc.path("input", n, grid, 5);
        const GridPath l = sc.path("barrier", n, grid, 3);
        for (std::uint64_t i = 0; i < samples; ++i) {
            const std::uint64_t s = sample_seed(sc.seed(), i);
            GridPath lt = perturb(l, scale, s ^ 0x1ULL);
            GridPath yt = perturb(y, scale, s ^ 0x2ULL);
            const Vector gap = (lt.node(0) - yt.node(0)).cwiseMax(0.0);
            yt = yt + GridPath::constant(grid, gap);
            const double r = lipschitz_ratio(y, l, yt, lt, p);
            ratios.push_back(r);
            runs.push_back({{"sample", i}, {"ratio", number(r)}, {"converged", true}});
        }
    } else if (mode == "young") {
        const YoungProblem pb = young_problem(sc);
        const YoungData base{pb.y0, pb.a, pb.x, pb.l};
        for (std::uint64_t i = 0; i < samples; ++i) {
            const std::uint64_t s = sample_seed(sc.seed(), i);
            Rng rng(s);
            YoungData pert{pb.y0, perturb(pb.a, scale, s ^ 0x1ULL), perturb(pb.x, scale, s ^ 0x2ULL),
                           perturb(pb.l, scale, s ^ 0x3ULL)};
            for (Eigen::Index c = 0; c < pert.y0.size(); ++c) {
                pert.y0(c) = std::max(pert.y0(c) + scale * rng.normal(), pert.l.node(0)(c));
            }
            const StabilitySample r = stability_ratio(pb.f, base, pert, pb.cfg);
            if (!r.converged) {
                ++failures;
                runs.push_back({{"sample", i}, {"converged", false}});
                continue;
            }
            ratios.push_back(r.ratio);
            runs.push_back({{"sample", i},
                            {"ratio", number(r.ratio)},
                            {"numerator", number(r.numerator)},
                            {"denominator", number(r.denominator)},
                            {"converged", true}});
        }
    } else {
        throw InputError("stability.mode: expected 'young' or 'skorokhod'");
    }

    json doc = metadata(opt, &sc);
    doc["mode"] = mode;
    doc["samples"] = samples;
    doc["scale"] = scale;
    doc["empirical_constant"] = running_max_summary(ratios);
    doc["non_converged"] = failures;
    doc["runs"] = runs;
    finish(opt, doc, started);
    emit(opt, doc.dump(2) + "\n");
    if (failures > 0) {
        err << "stability: " << failures << " of " << samples << " samples did not converge\n";
        return NotConverged;
    }
    return Ok;
}

double sup_distance(const GridPath& a, const GridPath& b)
{
    return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

int cmd_uniqueness(const Options& opt, std::ostream& err)
{
    const auto started = Clock::now();
    const Scenario sc = need_scenario(opt);
    const json un = sc.section("uniqueness");
    const std::uint64_t seeds = get_count(un, "seeds", "uniqueness", 1);
    const double tol = get_number(un, "tol", "uniqueness", 1e-6);
    const std::string solver = un.value("solver", std::string("rough"));
    std::vector<PicardStart> starts = {PicardStart::Constant, PicardStart::Unreflected};
    if (un.contains("starts")) {
        starts.clear();
        for (const json& s : un.at("starts")) {
            if (!s.is_string()) {
                throw InputError("uniqueness.starts: expected strings");
            }
            starts.push_back(picard_start_from_string(s.get<std::string>()));
        }
        if (starts.size() < 2) {
            throw InputError("uniqueness.starts: need at least two initial guesses");
        }
    }
    if (solver != "rough" && solver != "young") {
        throw InputError("uniqueness.solver: expected 'rough' or 'young'");
    }

    json runs = json::array();
    double worst = 0.0;
    std::size_t failures = 0;
    bool risk = false;
    for (std::uint64_t i = 0; i < seeds; ++i) {
        const Scenario inst = seeds == 1 ? sc : sc.with_seed(sc.seed() + i);
        std::vector<GridPath> ys;
        std::vector<GridPath> ks;
        json entry = {{"seed", inst.seed()}};
        bool ok = true;
        for (PicardStart start : starts) {
            if (solver == "rough") {
                RoughProblem pb = rough_problem(inst);
                pb.cfg.start = start;
                const RdeSolution sol = solve_reflected_rde(pb.f, pb.y0, pb.x, pb.l, pb.cfg);
                risk = risk || sol.report.non_unique_risk;
                ok = ok && sol.report.converged;
                entry["residuals"].push_back(number(sol.report.residual));
                ys.push_back(sol.y);
                ks.push_back(sol.k);
            } else {
                YoungProblem pb = young_problem(inst);
                pb.cfg.start = start;
                const YoungSolution sol = solve_reflected_young(pb.f, pb.y0, pb.a, pb.x, pb.l, pb.cfg);
                ok = ok && sol.report.converged;
                entry["residuals"].push_back(number(sol.report.residual));
                ys.push_back(sol.y);
                ks.push_back(sol.k);
            }
        }
        entry["converged"] = ok;
        if (!ok) {
            ++failures;
        } else {
            double dev = 0.0;
            for (std::size_t r = 1; r < ys.size(); ++r) {
                dev = std::max({dev, sup_distance(ys[0], ys[r]), sup_distance(ks[0], ks[r])});
            }
            entry["max_deviation"] = dev;
            worst = std::max(worst, dev);
        }
        runs.push_back(entry);
    }

    json doc = metadata(opt, &sc);
    doc["solver"] = solver;
    json start_names = json::array();
    for (PicardStart s : starts) start_names.push_back(to_string(s));
    doc["initial_guesses"] = start_names;
    doc["tol"] = tol;
    doc["max_deviation"] = worst;
    doc["agree"] = worst <= tol;
    doc["runs_total"] = seeds;
    doc["non_converged"] = failures;
    doc["non_unique_risk"] = risk;
    doc["runs"] = runs;
    finish(opt, doc, started);
    emit(opt, doc.dump(2) + "\n");
    if (failures > 0) {
        err << "uniqueness-check: " << failures << " of " << seeds << " runs did not converge\n";
        return NotConverged;
    }
    return Ok;
}

}  // namespace

int run(const Options& opt, std::ostream& err)
{
    if (opt.format != "csv" && opt.format != "json") {
        throw InputError("--format must be csv or json");
    }
    if (opt.command == "pvar") return cmd_pvar(opt, err);
    if (opt.command == "skorokhod") return cmd_skorokhod(opt, err);
    if (opt.command == "young-solve") return cmd_young(opt, err);
    if (opt.command == "rde-solve") return cmd_rde(opt, err);
    if (opt.command == "lift") return cmd_lift(opt, err);
    if (opt.command == "stability") return cmd_stability(opt, err);
    if (opt.command == "uniqueness-check") return cmd_uniqueness(opt, err);
    throw InputError("unknown command '" + opt.command + "'");
}

}  // namespace rrde::cli
