// Command-line front end: configuration, CSV/JSON I/O, synthetic data, and
// orchestration of the simulation and fitting entry points. All physics goes
// through the C interface in wgqed.h; this file owns units and plumbing only.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wgqed.h"

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSpeedOfLight = 299792458.0; // m/s
constexpr double kPi = kTwoPi / 2.0;

// All user-facing numbers are MHz / nW / nm / degrees / ns; conversions to
// internal angular units happen exactly here and nowhere else.
double mhz_to_rad_s(double mhz) { return kTwoPi * mhz * 1e6; }
double deg_to_rad(double deg) { return deg * kPi / 180.0; }

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail(int exit_code, const std::string& message) {
    throw CliError{exit_code, message};
}

void check(wgqed_status status) {
    if (status != WGQED_OK) {
        fail(static_cast<int>(status), wgqed_last_error_message());
    }
}

struct RunConfig {
    std::string mode;
    std::string in_path;
    std::string out_dir = "run";
    std::string channel = "T";
    std::string noise = "none";
    std::string model = "lorentzian";
    std::uint64_t seed = 1;
    double beta = 0.143;
    double linewidth_mhz = 26.7;
    double pc_nw = 0.32;
    double wavelength_nm = 619.0;
    double xi = 0.0;
    double phi_deg = 0.0;
    double drive_fraction = 1e-3;
    double grid_min = -200.0;
    double grid_max = 200.0;
    int grid_points = 41;
    double counts_scale = 1e4;
    double noise_sigma = 0.01;
    json model_params = json::object();

    json echo() const {
        return json{{"mode", mode},
                    {"in", in_path},
                    {"out", out_dir},
                    {"channel", channel},
                    {"noise", noise},
                    {"model", model},
                    {"seed", seed},
                    {"beta", beta},
                    {"linewidth_mhz", linewidth_mhz},
                    {"pc_nw", pc_nw},
                    {"wavelength_nm", wavelength_nm},
                    {"xi", xi},
                    {"phi_deg", phi_deg},
                    {"drive_fraction", drive_fraction},
                    {"grid_min", grid_min},
                    {"grid_max", grid_max},
                    {"grid_points", grid_points},
                    {"counts_scale", counts_scale},
                    {"noise_sigma", noise_sigma},
                    {"params", model_params}};
    }
};

template <typename T>
void from_config(const json& j, const char* key, T& value) {
    if (j.contains(key)) {
        try {
            value = j.at(key).get<T>();
        } catch (const json::exception& e) {
            fail(2, std::string("config key '") + key + "': " + e.what());
        }
    }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) fail(2, "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(2, std::string("config file is not valid JSON: ") + e.what());
    }
    from_config(j, "mode", cfg.mode);
    from_config(j, "in", cfg.in_path);
    from_config(j, "out", cfg.out_dir);
    from_config(j, "channel", cfg.channel);
    from_config(j, "noise", cfg.noise);
    from_config(j, "model", cfg.model);
    from_config(j, "seed", cfg.seed);
    from_config(j, "beta", cfg.beta);
    from_config(j, "linewidth_mhz", cfg.linewidth_mhz);
    from_config(j, "pc_nw", cfg.pc_nw);
    from_config(j, "wavelength_nm", cfg.wavelength_nm);
    from_config(j, "xi", cfg.xi);
    from_config(j, "phi_deg", cfg.phi_deg);
    from_config(j, "drive_fraction", cfg.drive_fraction);
    from_config(j, "grid_min", cfg.grid_min);
    from_config(j, "grid_max", cfg.grid_max);
    from_config(j, "grid_points", cfg.grid_points);
    from_config(j, "counts_scale", cfg.counts_scale);
    from_config(j, "noise_sigma", cfg.noise_sigma);
    if (j.contains("params")) cfg.model_params = j.at("params");
}

// ---- CSV ------------------------------------------------------------------

struct CsvTrace {
    std::vector<std::string> columns;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma; // empty when the file has two columns
};

double parse_cell(const std::string& cell, size_t line_number) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
        fail(2, "non-numeric cell '" + cell + "' at line " + std::to_string(line_number));
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    return cells;
}

CsvTrace ingest_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(2, "cannot open input file: " + path);
    std::string line;
    size_t line_number = 0;
    CsvTrace trace;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (line_number == 1) {
            if (cells.size() < 2 || cells.size() > 3) {
                fail(2, "expected 2 or 3 header columns at line 1, got " +
                            std::to_string(cells.size()));
            }
            trace.columns = cells;
            continue;
        }
        if (cells.size() != trace.columns.size()) {
            fail(2, "expected " + std::to_string(trace.columns.size()) + " cells at line " +
                        std::to_string(line_number) + ", got " + std::to_string(cells.size()));
        }
        trace.x.push_back(parse_cell(cells[0], line_number));
        trace.y.push_back(parse_cell(cells[1], line_number));
        if (cells.size() == 3) trace.sigma.push_back(parse_cell(cells[2], line_number));
    }
    if (trace.columns.empty() || trace.x.empty()) fail(2, "empty input file: " + path);
    return trace;
}

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary); // LF line endings everywhere
    if (!out) fail(2, "cannot write " + path.string());
    for (size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c];
    }
    out << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_number(row[c]);
        }
        out << "\n";
    }
}

// ---- result assembly ------------------------------------------------------

class RunOutput {
public:
    explicit RunOutput(const RunConfig& cfg) : dir_(cfg.out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) fail(2, "cannot create output directory: " + dir_.string());
        summary_["config"] = cfg.echo();
        summary_["seed"] = cfg.seed;
        summary_["results"] = json{{"params", json::object()}};
        summary_["derived"] = json::object();
        summary_["diagnostics"] = json::object();
        std::ofstream echo(dir_ / "config.json", std::ios::binary);
        echo << summary_["config"].dump(2) << "\n";
    }

    void add_param(const std::string& name, double value, double sigma) {
        summary_["results"]["params"][name] = json{{"value", value}, {"sigma", sigma}};
    }
    void add_derived(const std::string& name, double value) { summary_["derived"][name] = value; }
    void add_diagnostic(const std::string& name, const json& value) {
        summary_["diagnostics"][name] = value;
    }

    void add_fit(const wgqed_fit_result* fit) {
        for (size_t k = 0; k < wgqed_fit_result_param_count(fit); ++k) {
            add_param(wgqed_fit_result_param_name(fit, k), wgqed_fit_result_param_value(fit, k),
                      wgqed_fit_result_param_sigma(fit, k));
        }
        for (size_t k = 0; k < wgqed_fit_result_extra_count(fit); ++k) {
            add_derived(wgqed_fit_result_extra_name(fit, k),
                        wgqed_fit_result_extra_value(fit, k));
        }
        add_diagnostic("chi2_reduced", wgqed_fit_result_reduced_chi_square(fit));
        add_diagnostic("iterations", wgqed_fit_result_iterations(fit));
        add_diagnostic("converged", wgqed_fit_result_converged(fit) == 1);
        json flags = json::array();
        for (size_t k = 0; k < wgqed_fit_result_flag_count(fit); ++k) {
            flags.push_back(wgqed_fit_result_flag(fit, k));
        }
        add_diagnostic("flags", flags);
    }

    void table(const std::string& name, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
        write_csv(dir_ / name, columns, rows);
    }

    void finish() {
        std::ofstream out(dir_ / "result.json", std::ios::binary);
        if (!out) fail(2, "cannot write result.json");
        out << summary_.dump(2) << "\n";
        std::cout << summary_.dump(2) << "\n";
    }

private:
    std::filesystem::path dir_;
    json summary_;
};

std::vector<double> make_grid(const RunConfig& cfg) {
    if (cfg.grid_points < 1) fail(2, "grid_points must be at least 1");
    if (cfg.grid_points == 1) return {cfg.grid_min};
    std::vector<double> grid;
    for (int k = 0; k < cfg.grid_points; ++k) {
        grid.push_back(cfg.grid_min +
                       (cfg.grid_max - cfg.grid_min) * k / (cfg.grid_points - 1));
    }
    return grid;
}

wgqed_channel parse_channel(char c) {
    switch (c) {
        case 'T': case 't': return WGQED_CHANNEL_TRANSMISSION;
        case 'R': case 'r': return WGQED_CHANNEL_REFLECTION;
        case 'P': case 'p': return WGQED_CHANNEL_PSB;
        default: fail(2, std::string("unknown channel letter '") + c + "'");
    }
}

void add_waveguide_derived(RunOutput& out, double beta, double pc_nw, double linewidth_mhz,
                           double wavelength_nm) {
    double n_c = 0.0, delta_t = 0.0, coop = 0.0;
    check(wgqed_critical_photon_number(beta, &n_c));
    check(wgqed_transmission_contrast(beta, 0.0, 1.0, &delta_t));
    check(wgqed_cooperativity(beta, &coop));
    out.add_derived("n_c", n_c);
    out.add_derived("delta_t", delta_t);
    out.add_derived("cooperativity", coop);
    if (pc_nw > 0.0 && linewidth_mhz > 0.0 && wavelength_nm > 0.0) {
        double eta = 0.0;
        const double nu = kSpeedOfLight / (wavelength_nm * 1e-9);
        check(wgqed_coupling_efficiency(pc_nw * 1e-9, n_c, linewidth_mhz * 1e6, nu, &eta));
        out.add_derived("eta", eta);
    }
}

// ---- modes ----------------------------------------------------------------

void run_spectrum(const RunConfig& cfg) {
    if (cfg.channel.size() != 1) fail(2, "spectrum needs a single channel letter (T, R, or P)");
    const wgqed_channel channel = parse_channel(cfg.channel[0]);
    const double gamma_total = mhz_to_rad_s(cfg.linewidth_mhz);

    const auto grid_mhz = make_grid(cfg);
    std::vector<double> grid_internal;
    for (double mhz : grid_mhz) grid_internal.push_back(mhz_to_rad_s(mhz) / gamma_total);

    std::vector<double> values(grid_internal.size());
    check(wgqed_spectrum(cfg.beta, cfg.drive_fraction, channel, cfg.xi, deg_to_rad(cfg.phi_deg),
                         grid_internal.data(), grid_internal.size(), values.data()));

    RunOutput out(cfg);
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < values.size(); ++k) rows.push_back({grid_mhz[k], values[k]});
    out.table("spectrum.csv", {"detuning_mhz", "value"}, rows);
    add_waveguide_derived(out, cfg.beta, 0.0, 0.0, 0.0);
    out.finish();
}

void run_g2(const RunConfig& cfg) {
    if (cfg.channel.size() != 2) fail(2, "g2 needs a channel pair such as TT, PT, or RR");
    const double decay_rate = mhz_to_rad_s(cfg.linewidth_mhz); // 1/s, = 2 pi * linewidth
    const auto grid_ns = make_grid(cfg);
    std::vector<double> tau_internal;
    for (double ns : grid_ns) tau_internal.push_back(ns * 1e-9 * decay_rate);

    std::vector<double> values(tau_internal.size());
    check(wgqed_g2(cfg.beta, cfg.drive_fraction, parse_channel(cfg.channel[0]),
                   parse_channel(cfg.channel[1]), cfg.xi, deg_to_rad(cfg.phi_deg),
                   tau_internal.data(), tau_internal.size(), values.data()));

    RunOutput out(cfg);
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < values.size(); ++k) rows.push_back({grid_ns[k], values[k]});
    out.table("g2.csv", {"tau_ns", "value"}, rows);
    out.add_derived("g2_zero",
                    values[std::min_element(grid_ns.begin(), grid_ns.end(),
                                            [](double a, double b) {
                                                return std::abs(a) < std::abs(b);
                                            }) -
                           grid_ns.begin()]);
    out.finish();
}

void run_fit_lorentzian(const RunConfig& cfg) {
    auto trace = ingest_trace(cfg.in_path);
    wgqed_fit_result* fit = nullptr;
    check(wgqed_fit_lorentzian(trace.x.data(), trace.y.data(),
                               trace.sigma.empty() ? nullptr : trace.sigma.data(),
                               trace.x.size(), &fit));
    RunOutput out(cfg);
    out.add_fit(fit);
    out.add_diagnostic("sigmas_supplied", !trace.sigma.empty());
    wgqed_fit_result_free(fit);
    out.finish();
}

void run_fit_saturation(const RunConfig& cfg) {
    auto trace = ingest_trace(cfg.in_path);
    wgqed_fit_result* fit = nullptr;
    check(wgqed_fit_saturation(trace.x.data(), trace.y.data(),
                               trace.sigma.empty() ? nullptr : trace.sigma.data(),
                               trace.x.size(), &fit));
    RunOutput out(cfg);
    out.add_fit(fit);

    double beta = 0.0, pc_nw = 0.0;
    for (size_t k = 0; k < wgqed_fit_result_param_count(fit); ++k) {
        const std::string name = wgqed_fit_result_param_name(fit, k);
        if (name == "beta") beta = wgqed_fit_result_param_value(fit, k);
        if (name == "P_c") pc_nw = wgqed_fit_result_param_value(fit, k);
    }
    add_waveguide_derived(out, beta, pc_nw, cfg.linewidth_mhz, cfg.wavelength_nm);
    wgqed_fit_result_free(fit);
    out.finish();
}

void run_fit_reflection(const RunConfig& cfg) {
    auto trace = ingest_trace(cfg.in_path);
    wgqed_fit_result* fit = nullptr;
    check(wgqed_fit_reflection(trace.x.data(), trace.y.data(),
                               trace.sigma.empty() ? nullptr : trace.sigma.data(),
                               trace.x.size(), &fit));
    RunOutput out(cfg);
    out.add_fit(fit);
    wgqed_fit_result_free(fit);
    out.finish();
}

void run_fit_g2(const RunConfig& cfg) {
    auto trace = ingest_trace(cfg.in_path);
    wgqed_fit_result* fit = nullptr;
    check(wgqed_fit_resonant_g2(trace.x.data(), trace.y.data(),
                                trace.sigma.empty() ? nullptr : trace.sigma.data(),
                                trace.x.size(), &fit));
    RunOutput out(cfg);
    out.add_fit(fit);
    // Delays arrive in ns, so Gamma is 1/ns and Omega rad/ns; report the
    // spectroscopist's MHz equivalents too.
    for (size_t k = 0; k < wgqed_fit_result_param_count(fit); ++k) {
        const std::string name = wgqed_fit_result_param_name(fit, k);
        const double value = wgqed_fit_result_param_value(fit, k);
        if (name == "Gamma") out.add_derived("gamma_rate_mhz", value * 1e3);
        if (name == "Omega") out.add_derived("omega_over_2pi_mhz", value * 1e3 / kTwoPi);
    }
    wgqed_fit_result_free(fit);
    out.finish();
}

void run_polarization_map(const RunConfig& cfg) {
    const auto grid_deg = make_grid(cfg);
    std::vector<double> grid_rad;
    for (double d : grid_deg) grid_rad.push_back(deg_to_rad(d));
    std::vector<double> surface(grid_rad.size() * grid_rad.size());
    check(wgqed_polarization_map(grid_rad.data(), grid_rad.size(), grid_rad.data(),
                                 grid_rad.size(), cfg.counts_scale, surface.data()));
    RunOutput out(cfg);
    std::vector<std::vector<double>> rows;
    for (size_t r = 0; r < grid_deg.size(); ++r) {
        for (size_t c = 0; c < grid_deg.size(); ++c) {
            rows.push_back({grid_deg[r], grid_deg[c], surface[r * grid_deg.size() + c]});
        }
    }
    out.table("map.csv", {"phi1_deg", "phi2_deg", "counts"}, rows);
    out.finish();
}

double param_or(const json& params, const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params.at(key).is_number()) {
        fail(2, std::string("model parameter '") + key + "' must be a number");
    }
    return params.at(key).get<double>();
}

void run_synth(const RunConfig& cfg) {
    const auto grid = make_grid(cfg);
    std::vector<double> values(grid.size());
    const json& p = cfg.model_params;

    std::string x_column = "x";
    if (cfg.model == "lorentzian") {
        x_column = "detuning_mhz";
        check(wgqed_lorentzian_curve(param_or(p, "center", 0.0), param_or(p, "fwhm", 26.7),
                                     param_or(p, "height", -0.26), param_or(p, "offset", 1.0),
                                     grid.data(), grid.size(), values.data()));
    } else if (cfg.model == "saturation") {
        x_column = "power_nw";
        check(wgqed_saturation_curve(param_or(p, "beta", cfg.beta),
                                     param_or(p, "critical_power", cfg.pc_nw), grid.data(),
                                     grid.size(), values.data()));
    } else if (cfg.model == "reflection") {
        x_column = "detuning_mhz";
        check(wgqed_reflection_curve(param_or(p, "scale", 1.0), param_or(p, "center", 0.0),
                                     param_or(p, "gamma", 26.7), param_or(p, "xi", cfg.xi),
                                     param_or(p, "phi", deg_to_rad(cfg.phi_deg)), grid.data(),
                                     grid.size(), values.data()));
    } else if (cfg.model == "g2") {
        x_column = "tau_ns";
        check(wgqed_resonant_g2_curve(param_or(p, "Gamma", 0.169), param_or(p, "Omega", 0.8),
                                      param_or(p, "offset", 0.05), grid.data(), grid.size(),
                                      values.data()));
    } else {
        fail(2, "unknown synth model: " + cfg.model);
    }

    std::vector<std::vector<double>> rows;
    std::string value_column = "value";
    if (cfg.noise == "none") {
        for (size_t k = 0; k < grid.size(); ++k) rows.push_back({grid[k], values[k]});
    } else if (cfg.noise == "gaussian") {
        wgqed_noise* noise = wgqed_noise_create(cfg.seed);
        for (size_t k = 0; k < grid.size(); ++k) {
            rows.push_back({grid[k], wgqed_noise_gaussian(noise, values[k], cfg.noise_sigma),
                            cfg.noise_sigma});
        }
        wgqed_noise_free(noise);
    } else if (cfg.noise == "poisson") {
        // Counts are drawn at counts_scale * model and written back divided
        // by the scale, so the file feeds the fits directly; the raw counts
        // are value * counts_scale with the scale echoed in config.json.
        wgqed_noise* noise = wgqed_noise_create(cfg.seed);
        for (size_t k = 0; k < grid.size(); ++k) {
            const double mean = cfg.counts_scale * values[k];
            if (mean < 0.0) fail(4, "Poisson synthesis needs a non-negative model");
            const double counts = static_cast<double>(wgqed_noise_poisson(noise, mean));
            rows.push_back({grid[k], counts / cfg.counts_scale,
                            std::sqrt(std::max(counts, 1.0)) / cfg.counts_scale});
        }
        wgqed_noise_free(noise);
    } else {
        fail(2, "unknown noise kind: " + cfg.noise + " (expected poisson, gaussian, or none)");
    }

    RunOutput out(cfg);
    std::vector<std::string> columns = {x_column, value_column};
    if (rows.front().size() == 3) columns.push_back("sigma");
    out.table("synth.csv", columns, rows);
    out.add_diagnostic("rows", rows.size());
    out.finish();
}

void dump_units(const RunConfig& cfg) {
    json dump{{"linewidth_mhz", cfg.linewidth_mhz},
              {"gamma_total_rad_s", mhz_to_rad_s(cfg.linewidth_mhz)},
              {"pc_nw", cfg.pc_nw},
              {"pc_watts", cfg.pc_nw * 1e-9},
              {"wavelength_nm", cfg.wavelength_nm},
              {"optical_frequency_hz", kSpeedOfLight / (cfg.wavelength_nm * 1e-9)},
              {"phi_deg", cfg.phi_deg},
              {"phi_rad", deg_to_rad(cfg.phi_deg)}};
    std::cout << dump.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Waveguide-QED simulator and parameter-estimation toolkit"};
    app.allow_extras(false);

    std::string mode, config_path, in_path, out_dir, channel, noise, model;
    std::uint64_t seed = 0;
    double beta = 0.0, linewidth_mhz = 0.0, pc_nw = 0.0, xi = 0.0, phi_deg = 0.0;
    double grid_min = 0.0, grid_max = 0.0, counts_scale = 0.0, noise_sigma = 0.0;
    double wavelength_nm = 0.0, drive_fraction = 0.0;
    int grid_points = 0;
    bool debug_dump_units = false;

    auto* mode_opt = app.add_option("--mode", mode,
                                    "spectrum, g2, fit-lorentzian, fit-saturation, "
                                    "fit-reflection, fit-g2, polarization-map, synth");
    auto* config_opt = app.add_option("--config", config_path, "JSON config file");
    auto* in_opt = app.add_option("--in", in_path, "input CSV trace");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (default: run)");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    auto* beta_opt = app.add_option("--beta", beta, "waveguide coupling factor");
    auto* lw_opt = app.add_option("--linewidth-mhz", linewidth_mhz, "total linewidth (MHz)");
    auto* pc_opt = app.add_option("--pc-nw", pc_nw, "critical power (nW)");
    auto* xi_opt = app.add_option("--xi", xi, "reflection amplitude ratio");
    auto* phi_opt = app.add_option("--phi-deg", phi_deg, "reflection phase (degrees)");
    auto* ch_opt = app.add_option("--channel", channel, "T/R/P for spectrum, pair for g2");
    auto* gmin_opt = app.add_option("--grid-min", grid_min, "grid start (MHz, ns, or degrees)");
    auto* gmax_opt = app.add_option("--grid-max", grid_max, "grid end (MHz, ns, or degrees)");
    auto* gpts_opt = app.add_option("--grid-points", grid_points, "number of grid points");
    auto* noise_opt = app.add_option("--noise", noise, "poisson, gaussian, or none");
    auto* model_opt = app.add_option("--model", model,
                                     "synth model: lorentzian, saturation, reflection, g2");
    auto* scale_opt = app.add_option("--counts-scale", counts_scale, "Poisson counts per unit");
    auto* nsig_opt = app.add_option("--noise-sigma", noise_sigma, "Gaussian noise sigma");
    auto* wl_opt = app.add_option("--wavelength-nm", wavelength_nm, "optical wavelength (nm)");
    auto* drv_opt = app.add_option("--drive-fraction", drive_fraction,
                                   "drive strength as a fraction of n_c");
    app.add_flag("--debug-dump-units", debug_dump_units,
                 "print the internal unit conversions and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (config_opt->count()) load_config_file(config_path, cfg);
        // Command line beats the config file, which beats defaults.
        if (mode_opt->count()) cfg.mode = mode;
        if (in_opt->count()) cfg.in_path = in_path;
        if (out_opt->count()) cfg.out_dir = out_dir;
        if (seed_opt->count()) cfg.seed = seed;
        if (beta_opt->count()) cfg.beta = beta;
        if (lw_opt->count()) cfg.linewidth_mhz = linewidth_mhz;
        if (pc_opt->count()) cfg.pc_nw = pc_nw;
        if (xi_opt->count()) cfg.xi = xi;
        if (phi_opt->count()) cfg.phi_deg = phi_deg;
        if (ch_opt->count()) cfg.channel = channel;
        if (gmin_opt->count()) cfg.grid_min = grid_min;
        if (gmax_opt->count()) cfg.grid_max = grid_max;
        if (gpts_opt->count()) cfg.grid_points = grid_points;
        if (noise_opt->count()) cfg.noise = noise;
        if (model_opt->count()) cfg.model = model;
        if (scale_opt->count()) cfg.counts_scale = counts_scale;
        if (nsig_opt->count()) cfg.noise_sigma = noise_sigma;
        if (wl_opt->count()) cfg.wavelength_nm = wavelength_nm;
        if (drv_opt->count()) cfg.drive_fraction = drive_fraction;

        if (debug_dump_units) {
            dump_units(cfg);
            return 0;
        }
        if (cfg.mode.empty()) fail(2, "--mode is required (or set 'mode' in the config file)");

        if (cfg.mode == "spectrum") run_spectrum(cfg);
        else if (cfg.mode == "g2") run_g2(cfg);
        else if (cfg.mode == "fit-lorentzian") run_fit_lorentzian(cfg);
        else if (cfg.mode == "fit-saturation") run_fit_saturation(cfg);
        else if (cfg.mode == "fit-reflection") run_fit_reflection(cfg);
        else if (cfg.mode == "fit-g2") run_fit_g2(cfg);
        else if (cfg.mode == "polarization-map") run_polarization_map(cfg);
        else if (cfg.mode == "synth") run_synth(cfg);
        else fail(2, "unknown mode: " + cfg.mode);
    } catch (const CliError& e) {
        json error{{"error", {{"class", e.exit_code}, {"message", e.message}}}};
        std::cout << error.dump(2) << "\n";
        return e.exit_code;
    }
    return 0;
}
