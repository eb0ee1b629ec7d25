// CSV tables, JSON sidecars and the run-configuration schema shared by the
// command-line front end.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmix/fock.hpp"
#include "spinmix/trajectory.hpp"

namespace spinmix {

using Json = nlohmann::json;

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

/// Column-major numeric table. Metadata lines are written as "# ..." above
/// the header row.
struct CsvTable {
    std::vector<std::string> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    void add_column(std::string name, std::vector<double> values);
    const std::vector<double>& column(const std::string& name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Per-column count, sum, mean, min, max, first and last.
Json summarize(const CsvTable& table);

void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

/// Flat run configuration; every key of the file format is a member here.
struct RunConfig {
    int N = 2;
    int M = 0;
    int sigma = 1;
    double q_prime = 0.0;
    double xi = 0.0;
    double dt = 1e-4;
    double t_final = 1.0;
    std::uint64_t runs = 1;
    std::uint64_t seed = 1;
    std::uint64_t trajectory = 0;
    std::string initial_state = "all_zero_component";
    std::uint64_t record_stride = 1;
    double bin_width = 0.0;
    std::uint64_t workers = 0;
    std::string scheme = "rk4";
    double t_hold = 1.0;
    double late_fraction = 0.5;
    std::string output;
    std::string manifest;
    std::string input;
    std::string column = "n0_mean";
    std::string window = "none";
    double smooth_window = 0.0;
    double smooth_cutoff = 0.0;
    std::uint64_t level = 0;
    // bloch2 only: 1 follows one measurement record, 0 the unconditional drift.
    int noise = 1;
    double kappa_hz = 0.0;
    double g0_hz = 0.0;
    double lambda_hz = 0.0;
    double eta_hz = 0.0;
    double delta_pa_hz = 0.0;
    double q_hz = 0.0;

    static const std::vector<std::string>& keys();

    // Rejects unknown keys and values of the wrong type.
    void apply(const Json& object);
    // Sets one key from command-line text.
    void apply(const std::string& key, const std::string& text);
    Json to_json() const;

    Interaction interaction() const { return interaction_from_sign(sigma); }
    DriftScheme drift_scheme() const;
    IntegratorConfig integrator() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// Resolves afm_ground | fm_ground_m0 | all_zero_component | fock:k in the
/// (N, M) sector.
StateVector make_initial_state(const std::string& spec, const BasisPtr& basis);

}  // namespace spinmix
