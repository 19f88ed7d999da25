#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qtrunc::cli {

/**
 * INI experiment description. Sections and keys:
 *   [group]   id, generators, labels
 *   [lipnorm] family, s, window, search_window
 *   [kernel]  family (auto | fejer | folner-ball | counit | delta)
 *   [levels]  min, max
 *   [run]     seed, workers, samples, budget, output
 *   [report]  inputs (comma-separated sidecar paths, relative to the config)
 */
struct ExperimentConfig
{
    std::filesystem::path path;

    std::string group = "Z";
    std::string generators;
    std::string labels;

    std::string lipnorm = "WeightedL1";
    double s = 1.0;
    int window = -1;
    int search_window = -1;

    std::string kernel = "auto";

    int level_min = 0;
    int level_max = -1;

    std::optional<std::uint64_t> seed;
    int workers = 1;
    int samples = 16;
    int budget = 8;
    std::string output;

    std::vector<std::filesystem::path> report_inputs;

    /// Sorted key=value lines of every result-relevant field.
    std::string canonical() const;
    std::vector<int> levels() const;
};

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& origin);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions
{
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool use_cache = true;
};

struct ResultRecord
{
    std::string command;
    std::string version;
    std::string config_hash;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json certificates = nlohmann::json::array();
    double seconds = 0.0;
    bool from_cache = false;

    std::string csv() const;
    nlohmann::json sidecar() const;
    static ResultRecord from_sidecar(const nlohmann::json& j);
};

const std::vector<std::string>& commands();
bool is_randomized(const std::string& command);

/// SHA-256 hex of version, command, canonical config and seed.
std::string config_hash(const std::string& command, const ExperimentConfig& cfg, std::optional<std::uint64_t> seed);

/// Runs one command, writes <out>/<command>.csv and .json, and consults the cache.
ResultRecord run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt);

struct ReportSummary
{
    std::vector<std::string> lines;
    std::string csv;
};

/// Convergence table over result sidecars; refuses records of different versions.
ReportSummary report(const std::vector<ResultRecord>& records);

/// Command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qtrunc::cli
