#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polywidth/snapshots.hpp"

namespace polywidth {

inline constexpr const char *kVersion = "polywidth/1.0.0";

/// Process exit codes of the CLI.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitProvable = 3,
    kExitIo = 4,
};

/// One experiment: which snapshots, which (n, p) grid, and how to fit and project.
/// Serialized as flat `key = value` lines; see `apply_setting` for the keys.
struct ExperimentConfig {
    std::string benchmark = "advection";
    Index cells = 512;
    Index params = 256;
    double length = 1.0;
    double rate = 1.0;      // smooth
    Index ambient = 200;    // qtruth N
    Index reduced = 4;      // qtruth n
    std::uint64_t seed = 1; // qtruth

    std::vector<Index> n_list{2, 4, 8};
    std::vector<Index> p_list{1, 2};

    std::optional<double> ridge; // unset: scale-invariant default
    bool center = true;

    int restarts = 4;
    double restart_scale = 0.5;
    std::uint64_t projection_seed = 0;
    int max_iterations = 200;
    double gradient_tolerance = 1e-10;

    std::filesystem::path output = "polywidth-out";
    std::filesystem::path snapshots;  // input file; empty means generate in memory
    std::filesystem::path widths_csv; // decay input; empty means <output>/widths.csv
    unsigned threads = 0;             // 0: POLYWIDTH_THREADS or hardware concurrency
};

/// Names accepted by `benchmark`.
const std::vector<std::string> &benchmark_names();

/// Sets one key from its text form. Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);

/// Parses `key = value` lines; '#' starts a comment.
ExperimentConfig parse_config(const std::string &text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base = {});

/// Sorted `key = value` lines of every setting that influences results
/// (output locations and thread counts are left out).
std::string canonical_config(const ExperimentConfig &cfg);

/// First 16 hex digits of SHA-256 over canonical_config.
std::string config_hash(const ExperimentConfig &cfg);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path &path);

void validate(const ExperimentConfig &cfg);

/// Thread count after applying POLYWIDTH_THREADS to a zero request.
unsigned effective_threads(const ExperimentConfig &cfg);

SnapshotSet make_benchmark(const ExperimentConfig &cfg);

/// Loads cfg.snapshots when set, otherwise generates the configured benchmark.
SnapshotSet load_or_generate(const ExperimentConfig &cfg);

/// One output row: record_kind,benchmark,n,p,dim,kind,value,extra_json
struct Record {
    std::string record_kind;
    std::string benchmark;
    std::optional<Index> n;
    std::optional<Index> p;
    std::optional<Index> dim;
    std::string kind;
    std::optional<double> value;
    std::string extra_json = "{}";
};

inline constexpr const char *kCsvHeader = "record_kind,benchmark,n,p,dim,kind,value,extra_json";

void write_records_csv(std::ostream &out, const std::vector<Record> &records);
std::vector<Record> read_records_csv(std::istream &in);
void save_records_csv(const std::filesystem::path &path, const std::vector<Record> &records);
std::vector<Record> load_records_csv(const std::filesystem::path &path);

/// Subcommands. Each writes into cfg.output, logs to `log`, and returns an ExitCode.
int cmd_generate(const ExperimentConfig &cfg, std::ostream &log);
int cmd_fit(const ExperimentConfig &cfg, std::ostream &log);
int cmd_widths(const ExperimentConfig &cfg, std::ostream &log);
int cmd_sandwich(const ExperimentConfig &cfg, std::ostream &log);
int cmd_decay(const ExperimentConfig &cfg, std::ostream &log);
int cmd_report(const ExperimentConfig &cfg, std::ostream &log);

} // namespace polywidth
