// polywidth: generate benchmarks, fit polynomial manifolds, and compare
// their worst-case errors against linear width bounds.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "polywidth/errors.hpp"
#include "polywidth/harness.hpp"

using namespace polywidth;

namespace {

struct Flag {
    const char *name;
    const char *key;
    const char *help;
};

const std::vector<Flag> kFlags{
    {"--benchmark", "benchmark", "advection, wave, smooth or qtruth"},
    {"--cells", "cells", "grid cells for the PDE benchmarks"},
    {"--params", "params", "number of snapshots K"},
    {"--length", "length", "domain length"},
    {"--rate", "rate", "spectral decay rate of the smooth benchmark"},
    {"--ambient", "ambient", "ambient dimension of qtruth"},
    {"--reduced", "reduced", "reduced dimension of qtruth"},
    {"--seed", "seed", "qtruth seed"},
    {"--n-list", "n_list", "reduced dimensions, e.g. 2,4,8 or 1:6"},
    {"--p-list", "p_list", "polynomial degrees, e.g. 1,2,3"},
    {"--ridge", "ridge", "ridge parameter or 'auto'"},
    {"--center", "center", "subtract the snapshot mean before fitting (true/false)"},
    {"--restarts", "restarts", "random restarts per projection"},
    {"--restart-scale", "restart_scale", "spread of random restarts"},
    {"--projection-seed", "projection_seed", "seed for restarts"},
    {"--max-iterations", "max_iterations", "Levenberg-Marquardt iteration cap"},
    {"--gradient-tolerance", "gradient_tolerance", "relative gradient stopping tolerance"},
    {"--out", "output", "output directory"},
    {"--snapshots", "snapshots", "read snapshots from a .pwss file"},
    {"--threads", "threads", "worker threads (0: POLYWIDTH_THREADS or all cores)"},
    {"--widths-csv", "widths_csv", "widths.csv consumed by decay"},
};

struct Options {
    std::string config;
    std::map<std::string, std::string> values;
};

void add_common(CLI::App *sub, Options &opts)
{
    sub->add_option("--config", opts.config, "key = value config file");
    for (const Flag &f : kFlags)
        sub->add_option(f.name, opts.values[f.key], f.help);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Polynomial manifold widths"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    using Command = std::function<int(const ExperimentConfig &, std::ostream &)>;
    const std::vector<std::tuple<const char *, const char *, Command>> commands{
        {"generate", "write a benchmark snapshot set", cmd_generate},
        {"fit", "fit decoders for every (n, p)", cmd_fit},
        {"widths", "linear width upper and lower bounds", cmd_widths},
        {"sandwich", "evaluate both sides of the sandwich for every (n, p)", cmd_sandwich},
        {"decay", "fit decay laws to a widths CSV", cmd_decay},
        {"report", "summarize an output directory", cmd_report},
    };

    Options opts;
    std::vector<std::pair<CLI::App *, Command>> subs;
    for (const auto &[name, help, fn] : commands) {
        CLI::App *sub = app.add_subcommand(name, help);
        add_common(sub, opts);
        subs.emplace_back(sub, fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        ExperimentConfig cfg;
        if (!opts.config.empty())
            cfg = load_config(opts.config);
        for (const auto &[sub, fn] : subs) {
            if (!sub->parsed())
                continue;
            for (const Flag &f : kFlags)
                if (sub->count(f.name) > 0)
                    apply_setting(cfg, f.key, opts.values[f.key]);
            return fn(cfg, std::cerr);
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError &e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitConfig;
}
