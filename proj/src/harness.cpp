#include "polywidth/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "polywidth/benchmarks.hpp"
#include "polywidth/decoder_io.hpp"
#include "polywidth/fitting.hpp"
#include "polywidth/kron.hpp"
#include "polywidth/parallel.hpp"
#include "polywidth/widths.hpp"

namespace polywidth {

using nlohmann::json;

const std::vector<std::string> &benchmark_names()
{
    static const std::vector<std::string> names{"advection", "wave", "smooth", "qtruth"};
    return names;
}

namespace {

std::string trim(const std::string &text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

long long parse_integer(const std::string &key, const std::string &value)
{
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception &) {
        throw ConfigError("setting '" + key + "': '" + value + "' is not an integer");
    }
    if (used != value.size())
        throw ConfigError("setting '" + key + "': '" + value + "' is not an integer");
    return out;
}

double parse_real(const std::string &key, const std::string &value)
{
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception &) {
        throw ConfigError("setting '" + key + "': '" + value + "' is not a number");
    }
    if (used != value.size())
        throw ConfigError("setting '" + key + "': '" + value + "' is not a number");
    return out;
}

bool parse_bool(const std::string &key, const std::string &value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw ConfigError("setting '" + key + "': '" + value + "' is not a boolean");
}

std::vector<Index> parse_index_list(const std::string &key, const std::string &value)
{
    std::vector<Index> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        // a:b expands to the inclusive range.
        const auto colon = item.find(':');
        if (colon != std::string::npos) {
            const auto lo = parse_integer(key, trim(item.substr(0, colon)));
            const auto hi = parse_integer(key, trim(item.substr(colon + 1)));
            if (hi < lo)
                throw ConfigError("setting '" + key + "': empty range '" + item + "'");
            for (auto v = lo; v <= hi; ++v)
                out.push_back(static_cast<Index>(v));
        } else {
            out.push_back(static_cast<Index>(parse_integer(key, item)));
        }
    }
    return out;
}

std::string join(const std::vector<Index> &values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

std::string format_real(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string sha256_hex(const std::string &bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i)
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

} // namespace

void apply_setting(ExperimentConfig &cfg, const std::string &raw_key, const std::string &raw_value)
{
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw_value);

    if (key == "benchmark") {
        cfg.benchmark = value;
    } else if (key == "cells") {
        cfg.cells = static_cast<Index>(parse_integer(key, value));
    } else if (key == "params") {
        cfg.params = static_cast<Index>(parse_integer(key, value));
    } else if (key == "length") {
        cfg.length = parse_real(key, value);
    } else if (key == "rate") {
        cfg.rate = parse_real(key, value);
    } else if (key == "ambient") {
        cfg.ambient = static_cast<Index>(parse_integer(key, value));
    } else if (key == "reduced") {
        cfg.reduced = static_cast<Index>(parse_integer(key, value));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_integer(key, value));
    } else if (key == "n_list") {
        cfg.n_list = parse_index_list(key, value);
    } else if (key == "p_list") {
        cfg.p_list = parse_index_list(key, value);
    } else if (key == "ridge") {
        if (value == "auto")
            cfg.ridge.reset();
        else
            cfg.ridge = parse_real(key, value);
    } else if (key == "center") {
        cfg.center = parse_bool(key, value);
    } else if (key == "restarts") {
        cfg.restarts = static_cast<int>(parse_integer(key, value));
    } else if (key == "restart_scale") {
        cfg.restart_scale = parse_real(key, value);
    } else if (key == "projection_seed") {
        cfg.projection_seed = static_cast<std::uint64_t>(parse_integer(key, value));
    } else if (key == "max_iterations") {
        cfg.max_iterations = static_cast<int>(parse_integer(key, value));
    } else if (key == "gradient_tolerance") {
        cfg.gradient_tolerance = parse_real(key, value);
    } else if (key == "output" || key == "out") {
        cfg.output = value;
    } else if (key == "snapshots") {
        cfg.snapshots = value;
    } else if (key == "widths_csv") {
        cfg.widths_csv = value;
    } else if (key == "threads") {
        const auto t = parse_integer(key, value);
        if (t < 0)
            throw ConfigError("setting 'threads' must be non-negative");
        cfg.threads = static_cast<unsigned>(t);
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

ExperimentConfig parse_config(const std::string &text, ExperimentConfig base)
{
    std::stringstream stream(text);
    std::string line;
    int number = 0;
    while (std::getline(stream, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

std::string canonical_config(const ExperimentConfig &cfg)
{
    std::map<std::string, std::string> entries{
        {"benchmark", cfg.benchmark},
        {"cells", std::to_string(cfg.cells)},
        {"params", std::to_string(cfg.params)},
        {"length", format_real(cfg.length)},
        {"rate", format_real(cfg.rate)},
        {"ambient", std::to_string(cfg.ambient)},
        {"reduced", std::to_string(cfg.reduced)},
        {"seed", std::to_string(cfg.seed)},
        {"n_list", join(cfg.n_list)},
        {"p_list", join(cfg.p_list)},
        {"ridge", cfg.ridge ? format_real(*cfg.ridge) : "auto"},
        {"center", cfg.center ? "true" : "false"},
        {"restarts", std::to_string(cfg.restarts)},
        {"restart_scale", format_real(cfg.restart_scale)},
        {"projection_seed", std::to_string(cfg.projection_seed)},
        {"max_iterations", std::to_string(cfg.max_iterations)},
        {"gradient_tolerance", format_real(cfg.gradient_tolerance)},
        {"snapshots", cfg.snapshots.empty() ? "" : file_sha256(cfg.snapshots)},
    };
    std::string out;
    for (const auto &[k, v] : entries)
        out += k + " = " + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig &cfg) { return sha256_hex(canonical_config(cfg)).substr(0, 16); }

std::string file_sha256(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

void validate(const ExperimentConfig &cfg)
{
    const auto &names = benchmark_names();
    if (cfg.snapshots.empty() && std::find(names.begin(), names.end(), cfg.benchmark) == names.end()) {
        std::string valid;
        for (const auto &n : names)
            valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown benchmark '" + cfg.benchmark + "' (valid: " + valid + ")");
    }
    if (cfg.n_list.empty())
        throw ConfigError("n_list must not be empty");
    if (cfg.p_list.empty())
        throw ConfigError("p_list must not be empty");
    for (Index n : cfg.n_list)
        if (n < 1)
            throw ConfigError("n_list entries must be at least 1");
    for (Index p : cfg.p_list)
        if (p < 1)
            throw ConfigError("p_list entries must be at least 1");
    if (cfg.ridge && !(*cfg.ridge >= 0.0))
        throw ConfigError("ridge must be non-negative");
    if (cfg.restarts < 0 || cfg.max_iterations < 1)
        throw ConfigError("restarts must be >= 0 and max_iterations >= 1");
    if (!(cfg.restart_scale >= 0.0) || !(cfg.gradient_tolerance > 0.0))
        throw ConfigError("restart_scale must be >= 0 and gradient_tolerance > 0");
    if (cfg.cells < 2 || cfg.params < 2)
        throw ConfigError("cells and params must be at least 2");
    if (!(cfg.length > 0.0) || !(cfg.rate > 0.0))
        throw ConfigError("length and rate must be positive");
}

unsigned effective_threads(const ExperimentConfig &cfg)
{
    if (cfg.threads > 0)
        return cfg.threads;
    if (const char *env = std::getenv("POLYWIDTH_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0)
            return static_cast<unsigned>(value);
    }
    return resolve_threads(0);
}

SnapshotSet make_benchmark(const ExperimentConfig &cfg)
{
    const GridSpec grid{cfg.length, cfg.cells};
    if (cfg.benchmark == "advection")
        return advection_snapshots(grid, cfg.params);
    if (cfg.benchmark == "wave")
        return wave_snapshots(grid, cfg.params);
    if (cfg.benchmark == "smooth")
        return smooth_snapshots(grid, cfg.params, cfg.rate);
    if (cfg.benchmark == "qtruth")
        return quadratic_truth_snapshots(cfg.ambient, cfg.reduced, cfg.params, cfg.seed).snapshots;
    validate(cfg);
    throw ConfigError("unknown benchmark '" + cfg.benchmark + "'");
}

SnapshotSet load_or_generate(const ExperimentConfig &cfg)
{
    if (!cfg.snapshots.empty())
        return load_snapshots(cfg.snapshots);
    return make_benchmark(cfg);
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string quote(const std::string &field)
{
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_quoted(const std::string &line)
{
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (quoted)
        throw IoError("unterminated quote in CSV line");
    fields.push_back(std::move(current));
    return fields;
}

std::optional<Index> optional_index(const std::string &text)
{
    if (text.empty())
        return std::nullopt;
    return static_cast<Index>(parse_integer("csv", text));
}

} // namespace

void write_records_csv(std::ostream &out, const std::vector<Record> &records)
{
    out << kCsvHeader << '\n';
    const auto opt = [](const std::optional<Index> &v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto &r : records) {
        out << quote(r.record_kind) << ',' << quote(r.benchmark) << ',' << opt(r.n) << ',' << opt(r.p) << ','
            << opt(r.dim) << ',' << quote(r.kind) << ',' << (r.value ? format_real(*r.value) : std::string()) << ','
            << quote(r.extra_json) << '\n';
    }
    if (!out)
        throw IoError("failed writing CSV");
}

std::vector<Record> read_records_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader)
        throw IoError("CSV does not start with the expected header");
    std::vector<Record> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split_quoted(line);
        if (f.size() != 8)
            throw IoError("CSV row has " + std::to_string(f.size()) + " fields, expected 8");
        Record r;
        r.record_kind = f[0];
        r.benchmark = f[1];
        r.n = optional_index(f[2]);
        r.p = optional_index(f[3]);
        r.dim = optional_index(f[4]);
        r.kind = f[5];
        if (!f[6].empty())
            r.value = parse_real("csv", f[6]);
        r.extra_json = f[7];
        out.push_back(std::move(r));
    }
    return out;
}

void save_records_csv(const std::filesystem::path &path, const std::vector<Record> &records)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    write_records_csv(out, records);
}

std::vector<Record> load_records_csv(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_records_csv(in);
}

// --- subcommands -----------------------------------------------------------

namespace {

std::string benchmark_label(const ExperimentConfig &cfg)
{
    return cfg.snapshots.empty() ? cfg.benchmark : cfg.snapshots.filename().string();
}

json provenance(const ExperimentConfig &cfg)
{
    return {{"config_hash", config_hash(cfg)}, {"version", kVersion}};
}

std::string with_provenance(const ExperimentConfig &cfg, json extra)
{
    extra.update(provenance(cfg));
    return extra.dump();
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
}

void ensure_output(const ExperimentConfig &cfg)
{
    std::error_code ec;
    std::filesystem::create_directories(cfg.output, ec);
    if (ec)
        throw IoError("cannot create output directory " + cfg.output.string() + ": " + ec.message());
}

ProjectionStrategy strategy_from(const ExperimentConfig &cfg, unsigned threads)
{
    ProjectionStrategy s;
    s.restarts = cfg.restarts;
    s.restart_scale = cfg.restart_scale;
    s.seed = cfg.projection_seed;
    s.lm.max_iterations = cfg.max_iterations;
    s.lm.gradient_tolerance = cfg.gradient_tolerance;
    s.threads = threads;
    return s;
}

// Maps exceptions onto the exit-code contract.
template <typename Body>
int guarded(std::ostream &log, Body &&body)
{
    try {
        return body();
    } catch (const ConfigError &e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ContractViolation &e) {
        log << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ProvableCheckFailure &e) {
        log << "provable inequality violated: " << e.what() << '\n';
        return kExitProvable;
    } catch (const IoError &e) {
        log << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error &e) {
        log << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
}

json report_to_json(const SandwichReport &r, Index reduced_dim)
{
    json checks = json::array();
    for (const auto &c : r.checks)
        checks.push_back({{"name", c.name}, {"provable", c.provable}, {"passed", c.passed}, {"lhs", c.lhs}, {"rhs", c.rhs}});
    return {{"n", r.n},
            {"p", r.p},
            {"reduced_dim", reduced_dim},
            {"lifted_dim", r.lifted_dim},
            {"lower_at_lifted_dim", r.lower_at_lifted_dim},
            {"span_distance", r.span_distance},
            {"delta_estimate", r.delta_estimate},
            {"upper_at_n", r.upper_at_n},
            {"encoder_distortion", r.encoder_distortion},
            {"tolerance", r.tolerance},
            {"checks", checks}};
}

} // namespace

int cmd_generate(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        if (!cfg.snapshots.empty())
            throw ConfigError("generate builds a benchmark; do not pass snapshots");
        validate(cfg);
        ensure_output(cfg);
        const SnapshotSet s = make_benchmark(cfg);
        const auto file = cfg.output / "snapshots.pwss";
        save_snapshots(file, s);

        json params{{"benchmark", cfg.benchmark}, {"params", cfg.params}};
        if (cfg.benchmark == "qtruth") {
            params.update({{"ambient", cfg.ambient}, {"reduced", cfg.reduced}, {"seed", cfg.seed}});
        } else {
            params.update({{"cells", cfg.cells}, {"length", cfg.length}});
            if (cfg.benchmark == "smooth")
                params["rate"] = cfg.rate;
        }
        json manifest{{"generator", params},
                      {"file", file.filename().string()},
                      {"N", s.ambient_dim()},
                      {"K", s.count()},
                      {"sha256", file_sha256(file)},
                      {"labels", s.labels()},
                      {"config_hash", config_hash(cfg)},
                      {"version", kVersion}};
        write_text(cfg.output / "manifest.json", manifest.dump(2) + "\n");
        log << "wrote " << file.string() << " (" << s.ambient_dim() << " x " << s.count() << ")\n";
        return int(kExitOk);
    });
}

int cmd_fit(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        validate(cfg);
        ensure_output(cfg);
        const SnapshotSet s = load_or_generate(cfg);
        std::vector<Record> records;
        for (Index n : cfg.n_list) {
            for (Index p : cfg.p_list) {
                FitConfig fit{n, p, cfg.ridge, cfg.center};
                const auto d = fit_polynomial_manifold(s, fit);
                const std::string stem = "decoder_n" + std::to_string(n) + "_p" + std::to_string(p);
                save_decoder(cfg.output / (stem + ".pwdc"), d);
                write_text(cfg.output / (stem + ".json"), decoder_to_json(d) + "\n");
                records.push_back({"fit", benchmark_label(cfg), n, p, n, "encoder_distortion",
                                   encoder_distortion(d, s), with_provenance(cfg, {{"file", stem + ".pwdc"}})});
            }
        }
        save_records_csv(cfg.output / "fit.csv", records);
        log << "wrote " << records.size() << " decoders to " << cfg.output.string() << '\n';
        return int(kExitOk);
    });
}

int cmd_widths(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        validate(cfg);
        ensure_output(cfg);
        const SnapshotSet s = load_or_generate(cfg);
        const Index rank = numerical_rank(s, false);
        const std::string label = benchmark_label(cfg);

        std::vector<Record> records;
        std::vector<Index> dims;
        for (Index d : cfg.n_list) {
            if (d > rank) {
                records.push_back({"warning", label, std::nullopt, std::nullopt, d, "truncated", std::nullopt,
                                   with_provenance(cfg, {{"message", "dimension exceeds snapshot rank"}, {"rank", rank}})});
                log << "warning: dim " << d << " exceeds rank " << rank << ", skipped\n";
                continue;
            }
            dims.push_back(d);
        }
        if (dims.empty())
            throw ConfigError("every requested dimension exceeds the snapshot rank " + std::to_string(rank));

        json curves = json::array();
        const auto lower = width_lower(s, dims);
        for (BasisKind kind : {BasisKind::pod, BasisKind::greedy}) {
            const auto upper = width_upper(s, dims, kind);
            for (std::size_t i = 0; i < dims.size(); ++i)
                records.push_back({"width", label, std::nullopt, std::nullopt, dims[i], "upper", upper[i],
                                   with_provenance(cfg, {{"method", to_string(kind)}})});
            curves.push_back({{"dims", dims}, {"upper", upper}, {"lower", lower}, {"upper_method", to_string(kind)},
                              {"lower_method", "svd_tail"}});
        }
        for (std::size_t i = 0; i < dims.size(); ++i)
            records.push_back({"width", label, std::nullopt, std::nullopt, dims[i], "lower", lower[i],
                               with_provenance(cfg, {{"method", "svd_tail"}})});

        save_records_csv(cfg.output / "widths.csv", records);
        json doc{{"benchmark", label}, {"curves", curves}, {"rank", rank}};
        doc.update(provenance(cfg));
        write_text(cfg.output / "widths.json", doc.dump(2) + "\n");
        log << "wrote width curves for " << dims.size() << " dimensions\n";
        return int(kExitOk);
    });
}

int cmd_sandwich(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        validate(cfg);
        ensure_output(cfg);
        const SnapshotSet s = load_or_generate(cfg);
        const Index rank = numerical_rank(s, cfg.center);
        const std::string label = benchmark_label(cfg);

        struct Cell {
            Index n, p, reduced = 0;
            std::optional<SandwichReport> report;
            bool provable_failure = false;
            std::string error;
        };
        std::vector<Cell> cells;
        for (Index n : cfg.n_list)
            for (Index p : cfg.p_list)
                cells.push_back(Cell{n, p, 0, std::nullopt, false, {}});

        const ProjectionStrategy strategy = strategy_from(cfg, 1);
        parallel_for(cells.size(), effective_threads(cfg), [&](std::size_t i) {
            Cell &cell = cells[i];
            // A decoder of smaller reduced dimension is a valid candidate for the (n, p) cell.
            cell.reduced = std::min(cell.n, rank);
            if (cell.reduced < 1)
                return;
            const auto decoder = fit_polynomial_manifold(s, {cell.reduced, cell.p, cfg.ridge, cfg.center});
            try {
                cell.report = sandwich_check(s, decoder, cell.n, cell.p, strategy);
            } catch (const ProvableCheckFailure &e) {
                cell.report = e.report;
                cell.provable_failure = true;
                cell.error = e.what();
            }
        });

        std::vector<Record> records;
        json reports = json::array();
        bool violated = false;
        for (const Cell &cell : cells) {
            if (cell.reduced < cell.n)
                records.push_back({"warning", label, cell.n, cell.p, cell.reduced, "reduced_dim_clamped", std::nullopt,
                                   with_provenance(cfg, {{"message", "n exceeds snapshot rank"}, {"rank", rank}})});
            if (!cell.report)
                continue;
            const SandwichReport &r = *cell.report;
            json checks = json::object();
            for (const auto &c : r.checks)
                checks[c.name] = c.passed;
            const json common{{"reduced_dim", cell.reduced}, {"lifted_dim", r.lifted_dim}};
            auto extra = [&](json more) {
                more.update(common);
                return with_provenance(cfg, std::move(more));
            };
            records.push_back({"sandwich", label, r.n, r.p, r.lifted_dim, "lower", r.lower_at_lifted_dim,
                               extra({{"quantity", "width_lower(N(n,p))"}})});
            records.push_back({"sandwich", label, r.n, r.p, r.lifted_dim, "span", r.span_distance,
                               extra({{"quantity", "dist(S, span A)"}})});
            records.push_back({"sandwich", label, r.n, r.p, cell.reduced, "delta", r.delta_estimate,
                               extra({{"quantity", "set_distance"}, {"checks", checks},
                                      {"provable_passed", r.provable_passed()}})});
            records.push_back({"sandwich", label, r.n, r.p, cell.reduced, "upper", r.upper_at_n,
                               extra({{"quantity", "dist(S, T0 + span T1)"}})});
            records.push_back({"sandwich", label, r.n, r.p, cell.reduced, "distortion", r.encoder_distortion,
                               extra({{"quantity", "encoder_distortion"}})});
            reports.push_back(report_to_json(r, cell.reduced));
            if (cell.provable_failure) {
                violated = true;
                log << cell.error << '\n';
            }
            log << "n=" << r.n << " p=" << r.p << " delta=" << r.delta_estimate << " lower=" << r.lower_at_lifted_dim
                << " upper=" << r.upper_at_n << (r.all_passed() ? "" : "  [check failed]") << '\n';
        }

        save_records_csv(cfg.output / "sandwich.csv", records);
        json doc{{"benchmark", label}, {"reports", reports}};
        doc.update(provenance(cfg));
        write_text(cfg.output / "sandwich.json", doc.dump(2) + "\n");
        return int(violated ? kExitProvable : kExitOk);
    });
}

int cmd_decay(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        validate(cfg);
        ensure_output(cfg);
        const auto input = cfg.widths_csv.empty() ? cfg.output / "widths.csv" : cfg.widths_csv;
        const auto rows = load_records_csv(input);

        // Curves keyed by method and kind, in first-seen order.
        std::vector<std::pair<std::string, std::string>> order;
        std::map<std::pair<std::string, std::string>, std::pair<std::vector<Index>, std::vector<double>>> curves;
        std::string label;
        for (const Record &r : rows) {
            if (r.record_kind != "width" || !r.dim || !r.value)
                continue;
            label = r.benchmark;
            std::string method;
            try {
                method = json::parse(r.extra_json).value("method", "");
            } catch (const json::exception &) {
                throw IoError("widths CSV has malformed extra_json");
            }
            const auto key = std::make_pair(method, r.kind);
            if (!curves.count(key))
                order.push_back(key);
            curves[key].first.push_back(*r.dim);
            curves[key].second.push_back(*r.value);
        }
        if (order.empty())
            throw IoError("no width records in " + input.string());

        std::vector<Record> records;
        for (const auto &key : order) {
            const std::string curve = key.first + "_" + key.second;
            const auto &[dims, values] = curves[key];
            DecayFit fit;
            try {
                fit = decay_fit(dims, values, DecayModel::automatic);
            } catch (const InsufficientData &e) {
                records.push_back({"error", label, std::nullopt, std::nullopt, std::nullopt, "decay", std::nullopt,
                                   with_provenance(cfg, {{"curve", curve}, {"message", e.what()}})});
                log << curve << ": " << e.what() << '\n';
                continue;
            }
            const auto fit_extra = [&](const DecayFit &f, json more) {
                more.update({{"curve", curve}, {"scale", f.scale}, {"exponent", f.exponent}, {"rate", f.rate},
                             {"r_squared", f.r_squared}, {"points", f.points}});
                return with_provenance(cfg, std::move(more));
            };
            records.push_back({"decay", label, std::nullopt, 1, std::nullopt, to_string(fit.model), fit.exponent,
                               fit_extra(fit, json::object())});
            log << curve << ": " << to_string(fit.model) << " alpha=" << fit.exponent << " r2=" << fit.r_squared << '\n';
            for (Index p : cfg.p_list) {
                const DecayFit moved = corollary_rate_transfer(fit, p);
                records.push_back({"transfer", label, std::nullopt, p, std::nullopt, to_string(moved.model),
                                   moved.exponent, fit_extra(moved, {{"source_exponent", fit.exponent}})});
            }
        }
        save_records_csv(cfg.output / "decay.csv", records);
        return int(kExitOk);
    });
}

int cmd_report(const ExperimentConfig &cfg, std::ostream &log)
{
    return guarded(log, [&]() {
        json summary = json::object();
        bool any = false;
        const auto sandwich = cfg.output / "sandwich.csv";
        if (std::filesystem::exists(sandwich)) {
            any = true;
            int cells = 0, provable_failures = 0, heuristic_failures = 0;
            for (const Record &r : load_records_csv(sandwich)) {
                if (r.record_kind != "sandwich" || r.kind != "delta")
                    continue;
                ++cells;
                const auto extra = json::parse(r.extra_json);
                if (!extra.value("provable_passed", false))
                    ++provable_failures;
                for (const auto &[name, passed] : extra.at("checks").items())
                    if (!passed.get<bool>() && (name.rfind("D_", 0) == 0 || name.rfind("E_", 0) == 0))
                        ++heuristic_failures;
                log << "sandwich n=" << *r.n << " p=" << *r.p << " delta=" << *r.value << '\n';
            }
            summary["sandwich"] = {{"cells", cells},
                                   {"provable_failures", provable_failures},
                                   {"heuristic_failures", heuristic_failures}};
        }
        const auto widths = cfg.output / "widths.csv";
        if (std::filesystem::exists(widths)) {
            any = true;
            int rows = 0;
            for (const Record &r : load_records_csv(widths))
                rows += r.record_kind == "width";
            summary["widths"] = {{"rows", rows}};
        }
        const auto decay = cfg.output / "decay.csv";
        if (std::filesystem::exists(decay)) {
            any = true;
            json fits = json::array();
            for (const Record &r : load_records_csv(decay)) {
                if (r.record_kind != "decay")
                    continue;
                const auto extra = json::parse(r.extra_json);
                fits.push_back({{"curve", extra.value("curve", "")},
                                {"model", r.kind},
                                {"exponent", *r.value},
                                {"r_squared", extra.value("r_squared", 0.0)}});
                log << "decay " << extra.value("curve", "") << ": " << r.kind << " alpha=" << *r.value << '\n';
            }
            summary["decay"] = fits;
        }
        if (!any)
            throw IoError("no sandwich.csv, widths.csv or decay.csv in " + cfg.output.string());
        write_text(cfg.output / "report.json", summary.dump(2) + "\n");
        return int(kExitOk);
    });
}

} // namespace polywidth
