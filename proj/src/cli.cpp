#include "spinmix/cli.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "spinmix/analysis.hpp"
#include "spinmix/bloch.hpp"
#include "spinmix/ensemble.hpp"
#include "spinmix/ground_states.hpp"
#include "spinmix/io.hpp"

namespace spinmix {

namespace {

constexpr const char* kVersion = "1.0.0";

struct Outcome {
    int status = exit_ok;
    Json results = Json::object();
    std::vector<std::string> outputs;
};

class Session {
  public:
    Session(std::string command, RunConfig config, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), config_(std::move(config)), out_(out), err_(err)
    {
    }

    const RunConfig& config() const { return config_; }
    std::ostream& err() { return err_; }

    // Writes the table to the configured output (stdout when unset) with a
    // JSON sidecar next to it.
    void emit(const CsvTable& table, Outcome& outcome, const std::string& suffix = "")
    {
        CsvTable t = table;
        t.metadata.insert(t.metadata.begin(),
                          {"spinmix " + command_, "config " + config_.to_json().dump()});
        if (config_.output.empty()) {
            if (!suffix.empty()) return;
            write_csv(out_, t);
            to_stdout_ = true;
            return;
        }
        const std::string path = config_.output + suffix;
        write_csv(std::filesystem::path(path), t);
        Json sidecar;
        sidecar["command"] = command_;
        sidecar["version"] = kVersion;
        sidecar["config"] = config_.to_json();
        sidecar["columns"] = t.header;
        sidecar["rows"] = t.rows();
        sidecar["summary"] = summarize(t);
        sidecar["results"] = outcome.results;
        write_json(std::filesystem::path(path + ".json"), sidecar);
        outcome.outputs.push_back(path);
        outcome.outputs.push_back(path + ".json");
    }

    void finish(const Outcome& outcome)
    {
        Json manifest;
        manifest["command"] = command_;
        manifest["version"] = kVersion;
        manifest["status"] = outcome.status;
        manifest["config"] = config_.to_json();
        manifest["outputs"] = outcome.outputs;
        manifest["results"] = outcome.results;
        std::ostream& dest = to_stdout_ ? err_ : out_;
        dest << manifest.dump(2) << '\n';
        if (!config_.manifest.empty()) write_json(std::filesystem::path(config_.manifest), manifest);
    }

  private:
    std::string command_;
    RunConfig config_;
    std::ostream& out_;
    std::ostream& err_;
    bool to_stdout_ = false;
};

HamiltonianMatrix hamiltonian_of(const RunConfig& c)
{
    return build_hamiltonian(build_sector(c.N, c.M), c.interaction(), c.q_prime);
}

Json failures_json(const std::vector<std::pair<std::size_t, std::string>>& failed)
{
    Json out = Json::array();
    for (const auto& [index, message] : failed) out.push_back({{"index", index}, {"error", message}});
    return out;
}

Outcome cmd_simulate(Session& s)
{
    const RunConfig& c = s.config();
    const HamiltonianMatrix h = hamiltonian_of(c);
    const StateVector psi0 = make_initial_state(c.initial_state, h.basis_ptr());
    NoiseStream noise(c.seed, c.trajectory);
    const TrajectoryRecord rec = run_trajectory(psi0, h, c.integrator(), noise);

    CsvTable t;
    t.add_column("tau", rec.times);
    t.add_column("n0_mean", rec.n0_mean);
    t.add_column("n0_var", rec.n0_var);
    t.add_column("current", rec.current);
    t.add_column("wiener", rec.wiener);

    Outcome o;
    o.results["seed"] = rec.seed;
    o.results["trajectory"] = rec.trajectory_index;
    o.results["samples"] = rec.size();
    o.results["final_n0_mean"] = rec.n0_mean.back();
    s.emit(t, o);
    return o;
}

Outcome cmd_ensemble(Session& s)
{
    const RunConfig& c = s.config();
    const HamiltonianMatrix h = hamiltonian_of(c);
    const StateVector psi0 = make_initial_state(c.initial_state, h.basis_ptr());

    EnsembleOptions opts;
    opts.workers = c.workers;
    std::unique_ptr<CurrentAverager> averager;
    if (c.bin_width > 0.0) {
        averager = std::make_unique<CurrentAverager>(c.bin_width);
        opts.sink = [&](std::size_t, const TrajectoryRecord& rec) { averager->add(rec); };
    }
    const EnsembleResult ens = run_ensemble(psi0, h, c.integrator(), c.runs, c.seed, opts);

    Outcome o;
    o.results["requested_runs"] = ens.requested_runs;
    o.results["completed_runs"] = ens.run_count;
    o.results["failed"] = failures_json(ens.failed);
    if (ens.run_count == 0) {
        o.status = exit_numerical;
        return o;
    }
    o.status = ens.partial_failure() ? exit_partial : exit_ok;

    CsvTable t;
    t.add_column("tau", ens.times);
    t.add_column("mean_n0", ens.mean_n0);
    t.add_column("std_n0", ens.std_n0);
    t.add_column("mean_n0_sq", ens.mean_n0_sq);
    t.add_column("n0_var", variance_trace(ens));
    t.add_column("mean_current", ens.mean_current);
    s.emit(t, o);

    if (averager) {
        const AveragedCurrent avg = averager->result();
        CsvTable ct;
        ct.add_column("tau", avg.times);
        ct.add_column("current", avg.current);
        ct.add_column("signal", avg.signal);
        if (c.smooth_window > 0.0 || c.smooth_cutoff > 0.0) {
            ct.add_column("smoothed", smooth_current(avg.times, avg.current, c.smooth_window, c.smooth_cutoff));
        }
        o.results["bin_width"] = avg.bin_width;
        o.results["expected_noise_std"] = avg.expected_noise_std();
        s.emit(ct, o, ".current.csv");
    }
    return o;
}

Outcome cmd_spectrum(Session& s)
{
    const RunConfig& c = s.config();
    if (c.input.empty()) throw ConfigError("spectrum needs an input CSV (key 'input')");
    Window window;
    if (c.window == "none") {
        window = Window::none;
    } else if (c.window == "hann") {
        window = Window::hann;
    } else {
        throw ConfigError("window must be none or hann, got '" + c.window + "'");
    }
    const CsvTable in = read_csv(std::filesystem::path(c.input));
    const SpectrumTrace sp = fourier_spectrum(in.column("tau"), in.column(c.column), window);

    CsvTable t;
    t.add_column("omega", sp.frequencies);
    t.add_column("magnitude", sp.magnitudes);

    Outcome o;
    o.results["resolution"] = sp.resolution;
    Json peaks = Json::array();
    for (std::size_t i = 0; i < sp.peaks.size() && i < 10; ++i) {
        peaks.push_back({{"omega", sp.peaks[i].frequency}, {"magnitude", sp.peaks[i].magnitude}});
    }
    o.results["peaks"] = peaks;
    s.emit(t, o);
    return o;
}

Outcome cmd_groundstate(Session& s)
{
    const RunConfig& c = s.config();
    const HamiltonianMatrix h = hamiltonian_of(c);
    const SpectrumResult sp = spectrum(h);
    if (c.level >= h.dimension()) throw ConfigError("level exceeds the sector dimension");
    const StateVector state = sp.state(c.level);

    CsvTable t;
    std::vector<double> k, np, n0, nm, amp;
    for (std::size_t i = 0; i < h.dimension(); ++i) {
        const auto& occ = h.basis()[i];
        k.push_back(static_cast<double>(i));
        np.push_back(occ.n_plus);
        n0.push_back(occ.n_zero);
        nm.push_back(occ.n_minus);
        amp.push_back(state.amplitudes()(static_cast<Eigen::Index>(i)).real());
    }
    t.add_column("k", k);
    t.add_column("N_plus", np);
    t.add_column("N_0", n0);
    t.add_column("N_minus", nm);
    t.add_column("amplitude", amp);

    Outcome o;
    o.results["level"] = c.level;
    o.results["energy"] = sp.eigenvalues(static_cast<Eigen::Index>(c.level));
    if (h.dimension() > 1) o.results["gap"] = sp.gap(1);
    o.results["mean_n0"] = expectation(state, n0_diagonal(h.basis()));
    o.results["n0_fluctuation"] = n0_fluctuation(state);
    s.emit(t, o);
    return o;
}

Outcome cmd_bloch2(Session& s)
{
    const RunConfig& c = s.config();
    if (c.N != 2 || c.M != 0) throw ConfigError("bloch2 describes N = 2, M = 0 only");
    if (c.noise != 0 && c.noise != 1) throw ConfigError("noise must be 0 or 1");
    const BasisPtr basis = build_sector(2, 0);
    const std::string init = c.initial_state == "all_zero_component" ? "fock:0" : c.initial_state;
    BlochState state = bloch_from_state(make_initial_state(init, basis));

    IntegratorConfig grid = c.integrator();
    grid.validate();
    const BlochIntegrator integrator(c.interaction(), c.xi, c.dt);
    NoiseStream noise(c.seed, c.trajectory);

    std::vector<double> tau, sx, sy, sz, pop;
    auto record = [&](double t) {
        tau.push_back(t);
        sx.push_back(state.s_x);
        sy.push_back(state.s_y);
        sz.push_back(state.s_z);
        pop.push_back((1.0 + state.s_z) / 2.0);
    };
    record(0.0);
    const std::size_t steps = grid.steps();
    for (std::size_t i = 1; i <= steps; ++i) {
        state = c.noise ? integrator.step(state, noise.wiener_increment(c.dt)) : integrator.drift_step(state);
        if (!std::isfinite(state.norm())) throw NumericalFailure("Bloch vector diverged; reduce dt");
        if (i % c.record_stride == 0) record(static_cast<double>(i) * c.dt);
    }

    CsvTable t;
    t.add_column("tau", tau);
    t.add_column("s_x", sx);
    t.add_column("s_y", sy);
    t.add_column("s_z", sz);
    t.add_column("n0_over_n", pop);

    Outcome o;
    o.results["final"] = {state.s_x, state.s_y, state.s_z};
    s.emit(t, o);
    return o;
}

Outcome cmd_params(Session& s)
{
    const RunConfig& c = s.config();
    PhysicalParams p;
    p.kappa_hz = c.kappa_hz;
    p.g0_hz = c.g0_hz;
    p.lambda_hz = c.lambda_hz;
    p.eta_hz = c.eta_hz;
    p.delta_pa_hz = c.delta_pa_hz;
    p.q_hz = c.q_hz;
    const DimensionlessParams d = derive_dimensionless(p);

    Outcome o;
    o.results["xi"] = d.xi;
    o.results["q_prime"] = d.q_prime;
    o.results["alpha"] = d.alpha;
    o.results["u0_rad_per_s"] = d.u0;
    o.results["sigma"] = static_cast<int>(d.sigma);
    o.results["fast_cavity"] = d.fast_cavity;
    o.results["weak_light_shift"] = d.weak_light_shift;
    o.results["regime_ok"] = d.regime_ok();
    if (!d.fast_cavity) s.err() << "warning: kappa is not much larger than |lambda|\n";
    if (!d.weak_light_shift) s.err() << "warning: kappa is not much larger than U0 alpha^2\n";
    return o;
}

Outcome cmd_steadystate(Session& s)
{
    const RunConfig& c = s.config();
    const HamiltonianMatrix h = hamiltonian_of(c);
    const StateVector psi0 = make_initial_state(c.initial_state, h.basis_ptr());
    EnsembleOptions opts;
    opts.workers = c.workers;
    const SteadyStateResult ss =
        steady_state_distribution(psi0, h, c.integrator(), c.runs, c.t_hold, c.seed, c.late_fraction, opts);

    Outcome o;
    o.results["completed_runs"] = ss.run_count;
    o.results["failed"] = failures_json(ss.failed);
    if (ss.run_count < 2) {
        o.status = exit_numerical;
        return o;
    }
    o.status = ss.failed.empty() ? exit_ok : exit_partial;
    if (ss.chi_square) o.results["chi_square"] = *ss.chi_square;
    o.results["degrees_of_freedom"] = ss.degrees_of_freedom;
    if (ss.p_value) o.results["p_value"] = *ss.p_value;
    if (ss.hotelling_t2) o.results["hotelling_t2"] = *ss.hotelling_t2;
    if (ss.hotelling_p_value) o.results["hotelling_p_value"] = *ss.hotelling_p_value;
    o.results["half_ensemble_max_sigma"] = ss.half_ensemble_max_sigma;
    o.results["converged"] = ss.converged;

    CsvTable t;
    std::vector<double> k(static_cast<std::size_t>(ss.probabilities.size()));
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<double>(i);
    t.add_column("k", k);
    t.add_column("probability",
                 std::vector<double>(ss.probabilities.data(), ss.probabilities.data() + ss.probabilities.size()));
    t.add_column("standard_error", std::vector<double>(ss.standard_errors.data(),
                                                       ss.standard_errors.data() + ss.standard_errors.size()));
    s.emit(t, o);
    return o;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantum trajectories of a spin-1 condensate under continuous measurement of N0",
                 "spinmix"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    using Handler = std::function<Outcome(Session&)>;
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"simulate", "integrate one conditional trajectory", cmd_simulate},
        {"ensemble", "average many conditional trajectories", cmd_ensemble},
        {"spectrum", "Fourier spectrum of a column of a CSV file", cmd_spectrum},
        {"groundstate", "eigenstate amplitudes of H' in an (N, M) sector", cmd_groundstate},
        {"bloch2", "two-atom Bloch-vector trajectory", cmd_bloch2},
        {"params", "dimensionless xi and q' from physical parameters", cmd_params},
        {"steadystate", "late-time distribution over pair states", cmd_steadystate},
    };

    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::pair<CLI::App*, Handler>> subs;
    for (const auto& [name, help, handler] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "JSON configuration file");
        for (const auto& key : RunConfig::keys()) {
            sub->add_option("--" + key, overrides[key], "override configuration key " + key);
        }
        subs.emplace_back(sub, handler);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "spinmix: " << e.what() << '\n';
        return exit_usage;
    }

    for (const auto& [sub, handler] : subs) {
        if (!sub->parsed()) continue;
        try {
            RunConfig config;
            if (!config_path.empty()) config = load_config(config_path);
            for (const auto& key : RunConfig::keys()) {
                if (sub->count("--" + key) > 0) config.apply(key, overrides[key]);
            }
            Session session(sub->get_name(), config, out, err);
            const Outcome outcome = handler(session);
            session.finish(outcome);
            if (outcome.status == exit_partial) {
                err << "spinmix: " << outcome.results["failed"].size() << " trajectories failed\n";
            }
            return outcome.status;
        } catch (const NumericalFailure& e) {
            err << "spinmix: numerical failure: " << e.what() << '\n';
            return exit_numerical;
        } catch (const std::exception& e) {
            err << "spinmix: " << e.what() << '\n';
            return exit_usage;
        }
    }
    return exit_usage;
}

}  // namespace spinmix
