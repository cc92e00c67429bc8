#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "biot/majorant.hpp"

namespace biot {

// Everything needed to run one sweep of experiments.
struct RunConfig {
    CaseName case_name = CaseName::ex1;
    Variant variant = Variant::simplified;
    std::vector<int> cells;  // cells per side, one sweep point each
    int n_steps = 10;
    double T = 0.0;  // 0: the case's final time
    int iters = 5;
    Pattern pattern = Pattern::crisscross;
    InitialGuess initial_guess = InitialGuess::previous_step;
    TuningMode tuning = TuningMode::optimal;
    double user_L = 0.0;
    double rel_tol = 1e-10;
    double eta_tol = 0.0;
    MajorantOptions majorant;
    std::string out;
    bool vtk = false;
    enum class Indicators { none, final, all } indicators = Indicators::final;
};

// Invalid configuration. `where` is "file:line" or "--flag".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& msg)
        : std::runtime_error(where.empty() ? msg : where + ": " + msg) {}
};

// Known keys in config files and, with a leading "--", on the command line.
struct ConfigKey {
    std::string name;
    std::string section;
    std::string help;
};
const std::vector<ConfigKey>& config_keys();

// Sets one key from its textual value; throws std::invalid_argument on a bad
// value and ConfigError for an unknown key.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

// Key/value pairs of an INI-like text: "[section]" headers, "key = value",
// '#' or ';' comments. Keys must be known and belong to the section they
// appear under. Errors carry "source:line".
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source);
void apply_config(RunConfig& c, const std::vector<ConfigEntry>& entries, const std::string& source);

// Cross-field checks; throws ConfigError.
void validate(const RunConfig& c);

// Textual form of a config, readable by parse_config_text.
std::string config_text(const RunConfig& c);

// "1/64" or "0.015625" -> 64.
int parse_cells(const std::string& h);

// One row per iterate of one step, relative to the step's exact norms.
struct IterationRow {
    int cells = 0;
    int n = 0;
    int i = 0;
    ErrorSet errors;
    double norm_p = 0.0, norm_u = 0.0;
    bool bounded = false;  // majorants below were evaluated for this iterate
    double Mh_p = 0.0, Mh_p_l2 = 0.0, Mh_u = 0.0, Mh_u_div = 0.0;
    double delta_eta = -1.0;
    double ratio = -1.0;  // measured contraction ratio, negative when undefined
};

struct PointResult {
    int cells = 0;
    int n_steps = 0;
    double tau = 0.0;
    int I = 0;
    int m = 0;
    TuningConstants constants;
    Accumulated acc;
    std::vector<StepReport> steps;  // per-cell vectors cleared
    std::vector<IterationRow> iterations;
    std::vector<std::string> warnings;
    double seconds = 0.0;
};

// Receives the full report of each step (with per-cell data) while running.
using StepSink = std::function<void(const StepReport&, const Mesh&)>;

PointResult run_point(const RunConfig& c, int cells, const StepSink& sink = {});

// CSV emitters: fixed column order, "%.4e" values.
std::string results_csv(const std::vector<PointResult>& points);
std::string iterations_csv(const std::vector<PointResult>& points);
std::string table3_csv(const std::vector<PointResult>& points);
std::string indicators_csv(const StepReport& r);
std::string manifest_text(const RunConfig& c, const std::vector<PointResult>& points);

// Legacy ASCII VTK of the mesh with per-cell error and indicator fields.
void write_vtk(std::ostream& os, const Mesh& mesh, const StepReport& r);

// Minimal CSV reader for round-trip checks: header plus numeric rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    double value(std::size_t row, const std::string& column) const;
};
CsvTable parse_csv(const std::string& text);

// Runs the sweep and writes every artifact under c.out. Progress goes to
// `log`. Nothing is written when validation fails.
std::vector<PointResult> run_experiment(const RunConfig& c, std::ostream& log);

}  // namespace biot
