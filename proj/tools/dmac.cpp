// dmac: command-line front end for the delay-domain MAC models.
//
// Exit codes: 0 success, 1 usage/config/IO error, 2 domain infeasibility
// (empty feasible region, no unit convention found).

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delaymac/delaymac.hpp"

namespace fs = std::filesystem;
using namespace delaymac;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_infeasible = 2;

constexpr const char* config_dir_env = "DMAC_CONFIG_DIR";

struct Common {
    std::string config_path;
    std::string config_dir;
};

struct Loaded {
    Config config;
    fs::path dir;
};

Loaded load(const Common& common) {
    Loaded l;
    const char* env = std::getenv(config_dir_env);
    if (!common.config_path.empty()) {
        l.config = load_config(common.config_path);
        l.dir = fs::path(common.config_path).parent_path();
    } else if (env && fs::exists(fs::path(env) / "config.json")) {
        l.config = load_config(fs::path(env) / "config.json");
    } else {
        l.config = config_from_json(nlohmann::json::object());
    }
    if (!common.config_dir.empty()) {
        l.dir = common.config_dir;
    } else if (env && common.config_path.empty()) {
        l.dir = env;
    }
    if (l.dir.empty()) l.dir = ".";
    return l;
}

/// Hash of the configuration with the unit scale stripped, so that a persisted
/// calibration can be matched to the config it was computed for.
std::string calibration_key(Config c) {
    c.fit.unit_scale.reset();
    return report::config_hash(c);
}

/// A calibrated fit: from the config, else a matching persisted calibration,
/// else calibrated now against the default targets.
JitterFit resolve_fit(const Loaded& l) {
    if (l.config.fit.calibrated()) return l.config.fit;
    const fs::path persisted = l.dir / "calibration.json";
    if (fs::exists(persisted)) {
        std::ifstream in(persisted);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(persisted.string() + ": " + e.what());
        }
        if (j.value("config_key", std::string()) == calibration_key(l.config))
            return l.config.fit.with_scale(report::unit_scale_from_json(j));
        std::cerr << "note: ignoring " << persisted.string() << " (computed for a different configuration)\n";
    }
    std::cerr << "note: jitter fit uncalibrated; calibrating against the default targets\n";
    const auto r = design::calibrate_units(design::default_targets(), l.config.fit, l.config.tech, l.config.cell);
    return l.config.fit.with_scale(r.unit_scale);
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    return p.string() + suffix;
}

void write_manifest(const fs::path& out, const std::string& command, const Config& c, std::uint64_t seed,
                    std::vector<fs::path> outputs) {
    report::RunManifest m;
    m.command = command;
    m.config_hash = report::config_hash(c);
    m.seed = seed;
    for (const auto& p : outputs) m.outputs.push_back(p.filename().string());
    const fs::path path = sibling(out, ".manifest.json");
    report::write_file(path, report::dump(m.to_json()));
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> v;
    for (const auto& s : split(text, ',')) {
        try {
            v.push_back(parse_quantity(s));
        } catch (const ParseError&) {
            throw ValidationError(what, "bad entry '" + s + "'");
        }
    }
    if (v.empty()) throw ValidationError(what, "empty list");
    return v;
}

std::vector<long long> parse_int_list(const std::string& text, const char* what) {
    std::vector<long long> v;
    for (const auto& s : split(text, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ValidationError(what, "bad integer '" + s + "'");
        }
    }
    if (v.empty()) throw ValidationError(what, "empty list");
    return v;
}

/// lo:hi:steps, `steps` points inclusive of both ends.
std::vector<double> parse_range(const std::string& text, const char* what) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ValidationError(what, "expected lo:hi:steps");
    const double lo = parse_quantity(parts[0]);
    const double hi = parse_quantity(parts[1]);
    int steps = 0;
    try {
        steps = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw ValidationError(what, "bad step count");
    }
    if (steps < 1 || hi < lo || (steps == 1 && hi != lo)) throw ValidationError(what, "invalid range");
    std::vector<double> v(steps);
    for (int k = 0; k < steps; ++k) v[k] = steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1);
    return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// --- commands ---------------------------------------------------------------

struct RegionArgs {
    int bits = 0;
    double epsilon = 1.0;
    std::string out;
};

int cmd_region(const Common& common, const RegionArgs& a) {
    if (a.bits < 1 || a.bits > 30) throw ValidationError("bits", "must be in [1, 30]");
    const auto l = load(common);
    const JitterFit fit = resolve_fit(l);
    design::ConstraintOptions opt;
    opt.epsilon = a.epsilon;
    const auto region = design::constraint_region(a.bits, design::Grid::standard(), l.config.cell, l.config.tech, fit, opt);

    const fs::path out = a.out;
    const fs::path summary = sibling(out, ".summary.json");
    report::write_file(out, report::region_csv(region));
    const auto j = report::region_summary(region, a.epsilon);
    report::write_file(summary, report::dump(j));
    write_manifest(out, "region", l.config, 0, {out, summary});
    std::cout << j.dump() << "\n";
    if (region.empty()) {
        std::cerr << "no feasible design for " << a.bits << " bits\n";
        return exit_infeasible;
    }
    return exit_ok;
}

struct MaxBitsArgs {
    std::string grid = "1:16:31";
    std::string out;
};

int cmd_maxbits(const Common& common, const MaxBitsArgs& a) {
    const auto eps = parse_range(a.grid, "epsilon-grid");
    if (eps.front() < 1.0) throw ValidationError("epsilon-grid", "epsilon must be >= 1");
    const auto l = load(common);
    const JitterFit fit = resolve_fit(l);
    const auto grid = design::Grid::standard();

    std::string csv = "epsilon,n_max\n";
    for (double e : eps)
        csv += format_double(e) + ',' +
               std::to_string(design::max_bits(e, grid, l.config.cell, l.config.tech, fit)) + '\n';
    const fs::path out = a.out;
    report::write_file(out, csv);
    write_manifest(out, "maxbits", l.config, 0, {out});
    std::cout << csv;
    return exit_ok;
}

struct SimulateArgs {
    std::string weights;
    std::string va;
    std::uint64_t seed = 1;
    int trials = 1;
    std::string model = "ideal";
    std::string out;
};

int cmd_simulate(const Common& common, const SimulateArgs& a) {
    const auto weights = parse_int_list(a.weights, "weights");
    const auto va = parse_list(a.va, "va");
    if (weights.size() != va.size()) throw ValidationError("weights", "length differs from --va");
    if (a.trials < 1) throw ValidationError("trials", "must be >= 1");
    if (a.model != "ideal" && a.model != "nonlinear" && a.model != "noisy")
        throw ValidationError("model", "must be ideal, nonlinear or noisy");

    const auto l = load(common);
    mult::ChainTemplate chain;
    chain.n_bits = l.config.multiplier.n_bits;
    chain.i_star_fastest = l.config.multiplier.i_star_fastest;
    chain.v_a0 = l.config.multiplier.v_a0;
    chain.cell = l.config.cell;
    chain.tech = l.config.tech;
    chain.options.model = a.model == "nonlinear" ? mult::Model::nonlinear : mult::Model::ideal;

    double model_var = 0.0;
    if (a.model == "noisy") {
        chain.options.fit = resolve_fit(l);
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const auto spec = MultiplierSpec::from_signed(weights[j], chain.n_bits, chain.i_star_fastest, chain.v_a0);
            model_var += mult::jitter_variance(spec, chain.cell, *chain.options.fit);
        }
    }

    std::string csv = "trial,delta_t_s\n";
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> samples(a.trials);
    for (int t = 0; t < a.trials; ++t) {
        if (chain.options.fit) chain.options.seed = splitmix64(a.seed + static_cast<std::uint64_t>(t));
        samples[t] = mult::simulate_dot_product(weights, va, chain).total;
        csv += std::to_string(t) + ',' + format_double(samples[t]) + '\n';
        sum += samples[t];
    }
    const double mean = sum / a.trials;
    for (double x : samples) sum_sq += (x - mean) * (x - mean);
    const double sigma = a.trials > 1 ? std::sqrt(sum_sq / (a.trials - 1)) : 0.0;

    nlohmann::json summary = {{"model", a.model},         {"trials", a.trials}, {"seed", a.seed},
                              {"mean", mean},             {"sigma", sigma},
                              {"model_sigma", std::sqrt(model_var)}};
    const fs::path out = a.out;
    const fs::path summary_path = sibling(out, ".summary.json");
    report::write_file(out, csv);
    report::write_file(summary_path, report::dump(summary));
    write_manifest(out, "simulate", l.config, a.seed, {out, summary_path});
    std::cout << summary.dump() << "\n";
    return exit_ok;
}

struct SweepArgs {
    std::string va_grid = "0.075:1.2:16";
    std::string weights = "-31,-16,-8,0,8,16,31";
    std::string model = "ideal";
    std::string order = "iso-w";
    bool positive_means_greater_va = false;
    std::string out;
};

int cmd_sweep(const Common& common, const SweepArgs& a) {
    const auto grid = parse_range(a.va_grid, "va-grid");
    const auto weights = parse_int_list(a.weights, "weights");
    if (a.model != "ideal" && a.model != "nonlinear") throw ValidationError("model", "must be ideal or nonlinear");
    if (a.order != "iso-w" && a.order != "iso-va") throw ValidationError("order", "must be iso-w or iso-va");
    const auto l = load(common);
    mult::SimOptions opt;
    opt.model = a.model == "nonlinear" ? mult::Model::nonlinear : mult::Model::ideal;
    const mult::SweepFamily family{l.config.multiplier.n_bits, l.config.multiplier.i_star_fastest,
                                   l.config.multiplier.v_a0};
    const auto rows = mult::transfer_sweep(family, grid, weights, l.config.cell, l.config.tech, opt,
                                           a.order == "iso-w" ? mult::SweepOrder::iso_weight
                                                              : mult::SweepOrder::iso_input);
    const fs::path out = a.out;
    report::write_file(out, report::sweep_csv(rows, a.positive_means_greater_va));
    write_manifest(out, "sweep", l.config, 0, {out});
    return exit_ok;
}

struct EnergyArgs {
    std::string mode = "sense";
    double recharge = 0.0;
    std::string out;
};

int cmd_energy(const Common& common, const EnergyArgs& a) {
    if (a.mode != "sense" && a.mode != "acceleration") throw ValidationError("mode", "must be sense or acceleration");
    const auto l = load(common);
    energy::EnergyConstants k;
    k.recharge_fraction = a.recharge;
    const auto& spec = l.config.multiplier;
    const auto e = energy::mac_energy(spec, l.config.cell, l.config.tech,
                                      a.mode == "sense" ? energy::Mode::sense : energy::Mode::acceleration, k);
    const fs::path out = a.out;
    const fs::path csv = sibling(out, ".csv");
    const auto j = report::energy_json(e, spec.n_bits);
    report::write_file(out, report::dump(j));
    report::write_file(csv, report::energy_csv(e, spec.n_bits));
    write_manifest(out, "energy", l.config, 0, {out, csv});
    std::cout << j.dump() << "\n";
    return exit_ok;
}

struct BiasArgs {
    int bits = 5;
    std::optional<std::string> v_ref;
    std::optional<std::string> i_bias;
    std::string out;
};

int cmd_bias(const Common& common, const BiasArgs& a) {
    if (a.v_ref && a.i_bias) throw ValidationError("v-ref", "give either --v-ref or --i-bias");
    const auto l = load(common);
    const Volts v_ref = a.v_ref ? parse_quantity(*a.v_ref)
                                : bias::reference_for_current(
                                      a.i_bias ? parse_quantity(*a.i_bias) : l.config.multiplier.i_star_fastest,
                                      l.config.tech);
    const auto plan = bias::plan(v_ref, a.bits, l.config.tech);
    const fs::path out = a.out;
    const fs::path csv = sibling(out, ".csv");
    report::write_file(out, report::dump(report::bias_json(plan)));
    report::write_file(csv, report::bias_csv(plan));
    write_manifest(out, "bias", l.config, 0, {out, csv});
    std::cout << report::bias_csv(plan);
    return exit_ok;
}

struct CalibrateArgs {
    std::string out;
};

int cmd_calibrate(const Common& common, const CalibrateArgs& a) {
    const auto l = load(common);
    design::CalibrationResult r;
    try {
        r = design::calibrate_units(design::default_targets(), l.config.fit, l.config.tech, l.config.cell);
    } catch (const InfeasibleError& e) {
        std::cerr << e.what() << "\n";
        return exit_infeasible;
    }
    auto j = report::calibration_json(r);
    j["config_key"] = calibration_key(l.config);
    const fs::path out = a.out.empty() ? l.dir / "calibration.json" : fs::path(a.out);
    report::write_file(out, report::dump(j));
    write_manifest(out, "calibrate", l.config, 0, {out});
    std::cout << j.dump() << "\n";
    return exit_ok;
}

int cmd_show_config(const Common& common) {
    const auto l = load(common);
    std::cout << report::dump(config_to_json(l.config));
    for (const auto& line : l.config.provenance) std::cerr << line << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral models of delay-domain multiply-and-accumulate hardware"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "JSON configuration file");
    app.add_option("--config-dir", common.config_dir,
                   std::string("Directory for persisted calibration (default $") + config_dir_env + ")");

    RegionArgs region;
    auto* sc_region = app.add_subcommand("region", "Constraint masks and feasible region for one bit width");
    sc_region->add_option("--bits", region.bits, "Bit width n")->required();
    sc_region->add_option("--epsilon", region.epsilon, "Excess jitter margin (>= 1)");
    sc_region->add_option("--out", region.out, "Region CSV path")->required();

    MaxBitsArgs maxbits;
    auto* sc_maxbits = app.add_subcommand("maxbits", "Maximum bit width versus excess jitter margin");
    sc_maxbits->add_option("--epsilon-grid", maxbits.grid, "lo:hi:steps");
    sc_maxbits->add_option("--out", maxbits.out, "CSV path")->required();

    SimulateArgs sim;
    auto* sc_sim = app.add_subcommand("simulate", "Monte-Carlo dot product through a multiplier chain");
    sc_sim->add_option("--weights", sim.weights, "Comma-separated signed weights")->required();
    sc_sim->add_option("--va", sim.va, "Comma-separated input voltages")->required();
    sc_sim->add_option("--seed", sim.seed, "Seed");
    sc_sim->add_option("--trials", sim.trials, "Number of trials");
    sc_sim->add_option("--model", sim.model, "ideal | nonlinear | noisy");
    sc_sim->add_option("--out", sim.out, "Per-trial CSV path")->required();

    SweepArgs sweep;
    auto* sc_sweep = app.add_subcommand("sweep", "Multiplier transfer characteristic");
    sc_sweep->add_option("--va-grid", sweep.va_grid, "lo:hi:steps");
    sc_sweep->add_option("--weights", sweep.weights, "Comma-separated signed weights");
    sc_sweep->add_option("--model", sweep.model, "ideal | nonlinear");
    sc_sweep->add_option("--order", sweep.order, "iso-w | iso-va");
    sc_sweep->add_flag("--positive-means-greater-va", sweep.positive_means_greater_va,
                       "Report V_A > V_A0 with positive W as a positive delay");
    sc_sweep->add_option("--out", sweep.out, "CSV path")->required();

    EnergyArgs en;
    auto* sc_energy = app.add_subcommand("energy", "Per-MAC energy breakdown");
    sc_energy->add_option("--mode", en.mode, "sense | acceleration");
    sc_energy->add_option("--recharge", en.recharge, "Residual recharge fraction of bypassed cells");
    sc_energy->add_option("--out", en.out, "JSON path (CSV written alongside)")->required();

    BiasArgs bs;
    auto* sc_bias = app.add_subcommand("bias", "Bias-network currents and gate biases");
    sc_bias->add_option("--bits", bs.bits, "Bit width (1..8)");
    sc_bias->add_option("--v-ref", bs.v_ref, "Reference voltage");
    sc_bias->add_option("--i-bias", bs.i_bias, "Target bias current (alternative to --v-ref)");
    sc_bias->add_option("--out", bs.out, "JSON path (CSV written alongside)")->required();

    CalibrateArgs cal;
    auto* sc_cal = app.add_subcommand("calibrate", "Resolve the jitter-fit unit convention and persist it");
    sc_cal->add_option("--out", cal.out, "Output path (default <config-dir>/calibration.json)");

    auto* sc_show = app.add_subcommand("show-config", "Print the resolved configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        if (sc_region->parsed()) return cmd_region(common, region);
        if (sc_maxbits->parsed()) return cmd_maxbits(common, maxbits);
        if (sc_sim->parsed()) return cmd_simulate(common, sim);
        if (sc_sweep->parsed()) return cmd_sweep(common, sweep);
        if (sc_energy->parsed()) return cmd_energy(common, en);
        if (sc_bias->parsed()) return cmd_bias(common, bs);
        if (sc_cal->parsed()) return cmd_calibrate(common, cal);
        if (sc_show->parsed()) return cmd_show_config(common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
