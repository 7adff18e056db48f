#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using rrde::cli::Options;

    CLI::App app{"Reflected Young and rough differential equations on grid paths"};
    app.require_subcommand(1);

    Options opt;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid_n;

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"pvar", "p-variation of a path (CSV: running variation, JSON: summary)"},
        {"skorokhod", "reflect a path at a lower barrier; emits time,z..,k.."},
        {"young-solve", "solve a reflected Young equation; emits time,y..,k.."},
        {"rde-solve", "solve a reflected rough equation; emits time,y..,k.."},
        {"lift", "left-point level-2 lift; path columns then row-major prefix matrices"},
        {"stability", "empirical stability constants over random perturbations"},
        {"uniqueness-check", "compare solutions from different initial guesses"},
    };
    for (const Spec& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--scenario", opt.scenario, "scenario JSON file");
        sub->add_option("--input", opt.input, "input path CSV (time,x1..xd)");
        sub->add_option("--barrier", opt.barrier, "barrier CSV");
        sub->add_option("--out", opt.out, "output file (stdout when omitted)");
        sub->add_option("--report", opt.report, "also write a JSON report here");
        sub->add_option("--seed", seed, "master seed, overrides the scenario");
        sub->add_option("--grid-n", grid_n, "number of uniform grid nodes, overrides the scenario")
            ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--p", opt.p, "variation exponent");
        sub->add_option("--s", opt.s, "interval start");
        sub->add_option("--t", opt.t, "interval end");
        sub->add_flag("--open", opt.open, "use [s,t) instead of [s,t]");
        sub->add_flag("--timing", opt.timing, "add wall-clock time to JSON reports");
        sub->callback([&opt, sub] { opt.command = sub->get_name(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rrde::cli::InputFailure;
    }
    opt.overrides.seed = seed;
    opt.overrides.grid_n = grid_n;

    try {
        return rrde::cli::run(opt, std::cerr);
    } catch (const rrde::InputError& e) {
        std::cerr << opt.command << ": " << e.what() << "\n";
        return rrde::cli::InputFailure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << opt.command << ": " << e.what() << "\n";
        return rrde::cli::InputFailure;
    }
}
