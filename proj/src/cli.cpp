// cli.cpp: run / compare / diagnose commands

#include "qpi/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpi/config.hpp"
#include "qpi/csv.hpp"
#include "qpi/diagnostics.hpp"
#include "qpi/redfield.hpp"

#ifndef QPI_VERSION
#define QPI_VERSION "0.0.0-unknown"
#endif

namespace qpi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version() { return QPI_VERSION; }

namespace {

constexpr int kMetadataFormat = 1;

struct RunOptions {
    std::string config;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    bool dry_run = false;
};

struct CompareOptions {
    std::string a;
    std::string b;
    bool boltzmann = false;
    bool two_temp = false;
    bool interpolate = false;
    double fraction = 0.25;
    std::string json_out;
};

struct DiagnoseOptions {
    std::string config;
    std::optional<std::string> output;
};

// A metadata sidecar carries the full config under "config"; accept it in place of a config file.
RunConfig load_config_or_metadata(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + file + "' is not valid JSON: " + e.what());
    }
    if (doc.is_object() && doc.contains("metadata_format") && doc.contains("config"))
        return parse_run_config(doc["config"]);
    return parse_run_config(doc);
}

json steady_json(const SteadyValue& v) { return {{"value", v.value}, {"stderr", v.stderr_}}; }

std::string fixed(double v, int digits = 5) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

double sigma_units(double diff, double se) {
    if (diff == 0.0) return 0.0;
    return se > 0.0 ? diff / se : std::copysign(INFINITY, diff);
}

// Steady-state references implied by the resolved system.
json references_for(const ResolvedRun& run) {
    json refs = json::object();
    if (run.baths.empty()) return refs;
    double t_low = run.baths.front().temperature;
    double t_high = t_low;
    for (const auto& b : run.baths) {
        t_low = std::min(t_low, b.temperature);
        t_high = std::max(t_high, b.temperature);
    }
    if (t_low > 0.0) {
        const Eigen::VectorXd pops = boltzmann_reference(run.system.epsilon, t_low);
        refs["boltzmann"] = {{"temperature_K", t_low},
                             {"populations", std::vector<double>(pops.data(), pops.data() + pops.size())},
                             {"difference", pops(0) - pops(1)},
                             {"normalized_difference", normalized_difference(pops(0), pops(1))}};
    }
    if (run.system.n_levels() == 3 && run.baths.size() == 2 && t_low > 0.0 && t_high > t_low) {
        const auto& e = run.system.epsilon;
        const TwoTemperatureReference tt = two_temperature_reference(e(0), e(1), e(2), t_high, t_low);
        refs["two_temperature"] = {
            {"hot_K", t_high},
            {"cold_K", t_low},
            {"populations", {tt.populations(0), tt.populations(1), tt.populations(2)}},
            {"difference", tt.populations(0) - tt.populations(1)},
            {"normalized_difference", tt.normalized_difference}};
    }
    return refs;
}

void print_resolved(const RunConfig& cfg, const ResolvedRun& run, std::ostream& out) {
    out << "scenario        " << run.name << "\n"
        << "levels          " << run.system.n_levels() << "  epsilon_cm1 = [";
    for (Eigen::Index i = 0; i < run.system.epsilon.size(); ++i) out << (i ? ", " : "") << run.system.epsilon(i);
    out << "]\n"
        << "correction      " << to_string(cfg.correction) << "\n";
    for (const auto& b : run.baths) {
        out << "reservoir       " << b.label << ": T = " << b.temperature << " K, modes = " << b.n_modes()
            << ", omega_max = " << b.omega_max << " rad/ps";
        if (b.source)
            out << ", " << to_string(b.source->family) << " eta = " << b.source->eta
                << " omega_c = " << b.source->omega_c;
        out << "\n                reorganization energy = " << b.reorganization_energy() << " rad/ps ("
            << UnitContext::to_cm1(b.reorganization_energy()) << " cm^-1)";
        if (b.source) out << ", continuum " << b.source->reorganization_energy() << " rad/ps";
        out << "\n";
    }
    const auto& e = run.ensemble;
    out << "ensemble        n_traj = " << e.n_traj << ", seed = " << e.base_seed << ", t_final = " << e.t_final
        << " ps, dt = " << e.step.dt << " ps, record every " << e.record_interval << " ps, steady window "
        << e.steady_fraction * e.t_final << " ps\n"
        << "redfield        " << (cfg.redfield_enabled ? "enabled" : "disabled")
        << (cfg.lamb_shift ? " (with Lamb shift)" : "") << "\n"
        << "output_dir      " << cfg.output_dir << "\n";
}

CsvTable series_table(const std::vector<SeriesPoint>& s) {
    CsvTable t{{"t", "value", "stderr"}, {}};
    for (const auto& p : s) t.rows.push_back({p.t, p.value, p.stderr_});
    return t;
}

CsvTable populations_table(const std::vector<double>& grid, const std::vector<Eigen::MatrixXcd>& rho,
                           const std::vector<Eigen::MatrixXd>* se) {
    const int n = static_cast<int>(rho.front().rows());
    CsvTable t;
    t.header.push_back("t");
    for (int i = 1; i <= n; ++i) {
        t.header.push_back("rho_" + std::to_string(i) + std::to_string(i));
        t.header.push_back("rho_" + std::to_string(i) + std::to_string(i) + "_stderr");
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> row{grid[g]};
        for (int i = 0; i < n; ++i) {
            row.push_back(rho[g](i, i).real());
            row.push_back(se ? (*se)[g](i, i) : 0.0);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable coherences_table(const std::vector<double>& grid, const std::vector<Eigen::MatrixXcd>& rho,
                          const std::vector<Eigen::MatrixXd>* se_re, const std::vector<Eigen::MatrixXd>* se_im) {
    const int n = static_cast<int>(rho.front().rows());
    CsvTable t;
    t.header.push_back("t");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
            for (const char* part : {"re", "im"}) {
                t.header.push_back(std::string(part) + "_rho_" + ij);
                t.header.push_back(std::string(part) + "_rho_" + ij + "_stderr");
            }
        }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> row{grid[g]};
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                row.push_back(rho[g](i, j).real());
                row.push_back(se_re ? (*se_re)[g](i, j) : 0.0);
                row.push_back(rho[g](i, j).imag());
                row.push_back(se_im ? (*se_im)[g](i, j) : 0.0);
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<SeriesPoint> redfield_difference(const RhoTrajectory& traj, bool normalized) {
    std::vector<SeriesPoint> out;
    for (std::size_t g = 0; g < traj.times.size(); ++g) {
        const double a = traj.rho[g](0, 0).real(), b = traj.rho[g](1, 1).real();
        out.push_back({traj.times[g], normalized ? normalized_difference(a, b) : a - b, 0.0, false});
    }
    return out;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    ResolvedRun run;
    try {
        cfg = load_config_or_metadata(opt.config);
        if (opt.seed) cfg.ensemble.base_seed = *opt.seed;
        if (opt.output) cfg.output_dir = *opt.output;
        cfg.ensemble.workers = opt.workers;
        run = resolve(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    if (opt.dry_run) {
        print_resolved(cfg, run, out);
        out << "dry run: nothing written\n";
        return kOk;
    }

    const auto started = std::chrono::steady_clock::now();
    EnsembleResult result;
    std::optional<RhoTrajectory> redfield;
    std::vector<std::string> redfield_warnings;
    json redfield_meta = json::object();
    try {
        const EhrenfestModel model = make_model(run.system, run.baths, cfg.correction);
        result = run_ensemble(model, run.ensemble, run.initial_state);

        const bool spectra_known = std::all_of(run.baths.begin(), run.baths.end(),
                                               [](const DiscretizedBath& b) { return b.source.has_value(); });
        if (cfg.redfield_enabled && !spectra_known) {
            redfield_meta["skipped"] = "explicit mode lists have no continuous spectral density";
        } else if (cfg.redfield_enabled) {
            std::vector<std::string> labels;
            std::vector<CorrelationSpectrum> spectra;
            for (const auto& b : run.baths) {
                labels.push_back(b.label);
                spectra.push_back({*b.source, b.temperature, cfg.correction});
            }
            const RedfieldModel rm = assemble_tensor(run.system, labels, spectra, {cfg.lamb_shift});
            redfield_warnings = rm.warnings();
            const Eigen::MatrixXcd rho0 = run.initial_state * run.initial_state.adjoint();
            redfield = integrate_rho(rm, rho0, result.grid, cfg.redfield_dt);
            const Eigen::MatrixXcd ss = rm.steady_state();
            std::vector<double> pops;
            for (Eigen::Index i = 0; i < ss.rows(); ++i) pops.push_back(ss(i, i).real());
            redfield_meta = {{"dt_used", redfield->dt_used},
                             {"halvings", redfield->halvings},
                             {"steady_state_populations", pops},
                             {"steady_difference", pops[0] - pops[1]},
                             {"steady_normalized_difference", normalized_difference(pops[0], pops[1])},
                             {"warnings", redfield_warnings}};
        }
    } catch (const EnsembleFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::runtime_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const SteadyValue diff = steady_difference(result, 0, 1, false);
    const SteadyValue norm = steady_difference(result, 0, 1, true);
    const json refs = references_for(run);

    json meta;
    meta["metadata_format"] = kMetadataFormat;
    meta["version"] = version();
    meta["scenario"] = run.name;
    meta["config"] = to_json(cfg);
    meta["seed"] = result.base_seed;
    meta["n_traj"] = result.n_traj;
    meta["n_valid"] = result.n_valid;
    meta["stderr_defined"] = result.stderr_defined;
    meta["norm_drift"] = {{"mean", result.norm_drift.mean},
                          {"max", result.norm_drift.max},
                          {"max_abs_log_norm", result.norm_drift.max_abs_log_norm},
                          {"stiff_steps", result.norm_drift.stiff_steps}};
    meta["invalid_diagnostics"] = result.invalid_diagnostics;
    std::vector<double> tail(result.tail_mean.data(), result.tail_mean.data() + result.tail_mean.size());
    meta["steady"] = {{"window_start", result.tail_start},
                      {"populations", tail},
                      {"difference", steady_json(diff)},
                      {"normalized_difference", steady_json(norm)}};
    meta["references"] = refs;
    if (cfg.redfield_enabled) meta["redfield"] = redfield_meta;
    meta["wall_seconds"] = seconds;

    try {
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        write_csv((dir / "populations.csv").string(), populations_table(result.grid, result.rho, &result.stderr_re));
        write_csv((dir / "coherences.csv").string(),
                  coherences_table(result.grid, result.rho, &result.stderr_re, &result.stderr_im));
        write_csv((dir / "difference.csv").string(), series_table(population_difference(result, 0, 1, false)));
        write_csv((dir / "normalized_difference.csv").string(),
                  series_table(population_difference(result, 0, 1, true)));
        if (redfield) {
            write_csv((dir / "redfield_populations.csv").string(),
                      populations_table(redfield->times, redfield->rho, nullptr));
            write_csv((dir / "redfield_coherences.csv").string(),
                      coherences_table(redfield->times, redfield->rho, nullptr, nullptr));
            write_csv((dir / "redfield_difference.csv").string(), series_table(redfield_difference(*redfield, false)));
            write_csv((dir / "redfield_normalized_difference.csv").string(),
                      series_table(redfield_difference(*redfield, true)));
        }
        std::ofstream m(dir / "metadata.json");
        m << meta.dump(2) << "\n";
        if (!m) throw CsvError("cannot write metadata.json");
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return kFailure;
    }

    out << run.name << ": " << result.n_valid << "/" << result.n_traj << " valid trajectories in " << fixed(seconds, 1)
        << " s\n"
        << "steady rho1-rho2                 " << fixed(diff.value) << " +- " << fixed(diff.stderr_) << "\n"
        << "steady (rho1-rho2)/(rho1+rho2)   " << fixed(norm.value) << " +- " << fixed(norm.stderr_) << "\n";
    for (const auto& [name, ref] : refs.items()) {
        const double r = ref["normalized_difference"].get<double>();
        out << "reference " << std::left << std::setw(22) << name << " " << fixed(r)
            << "  deviation " << fixed(sigma_units(norm.value - r, norm.stderr_), 2) << " sigma\n";
    }
    if (redfield_meta.contains("steady_normalized_difference"))
        out << "redfield steady normalized       "
            << fixed(redfield_meta["steady_normalized_difference"].get<double>()) << "\n";
    for (const auto& w : redfield_warnings) err << "warning: " << w << "\n";
    out << "wrote " << cfg.output_dir << "\n";
    return kOk;
}

// ---- compare ---------------------------------------------------------------

struct Steady {
    double value = 0.0;
    double stderr_ = 0.0;
    std::string source;
};

std::string observable_of(const fs::path& file) {
    std::string stem = file.stem().string();
    if (stem.rfind("redfield_", 0) == 0) stem = stem.substr(9);
    return stem;
}

std::optional<json> sidecar(const fs::path& file) {
    const fs::path m = file.parent_path() / "metadata.json";
    std::ifstream in(m);
    if (!in) return std::nullopt;
    try {
        return json::parse(in);
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

// Tail-window mean of a t,value,stderr table. The sidecar's per-trajectory estimate is
// used when it describes this exact file; otherwise the mean pointwise stderr is taken,
// which bounds the error of fully correlated points from above.
Steady steady_of(const fs::path& file, const CsvTable& t, double fraction) {
    const auto ts = t.values("t");
    const auto vs = t.values("value");
    const auto ss = t.values("stderr");
    if (ts.empty()) throw CsvError("'" + file.string() + "' has no rows");
    const double start = ts.back() - fraction * (ts.back() - ts.front());
    Steady s;
    int count = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] < start - 1e-9) continue;
        s.value += vs[k];
        s.stderr_ += ss[k];
        ++count;
    }
    s.value /= count;
    s.stderr_ /= count;
    s.source = "csv tail";

    const std::string stem = file.stem().string();
    if (stem == "difference" || stem == "normalized_difference") {
        if (auto meta = sidecar(file)) {
            const auto& steady = (*meta)["steady"];
            const auto& cfg = (*meta)["config"]["ensemble"];
            if (steady.contains(stem) && cfg.contains("steady_fraction") &&
                std::abs(cfg["steady_fraction"].get<double>() - fraction) < 1e-12) {
                s.value = steady[stem]["value"].get<double>();
                s.stderr_ = steady[stem]["stderr"].get<double>();
                s.source = "metadata";
            }
        }
    }
    return s;
}

double interpolate_at(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
    if (t <= ts.front()) return vs.front();
    if (t >= ts.back()) return vs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return (1.0 - w) * vs[k - 1] + w * vs[k];
}

int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
    const int modes = (!opt.b.empty()) + opt.boltzmann + opt.two_temp;
    if (modes != 1) {
        err << "compare: give exactly one of a second file, --boltzmann or --two-temp\n";
        return kConfigError;
    }
    if (!(opt.fraction > 0.0 && opt.fraction <= 1.0)) {
        err << "compare: --fraction must lie in (0, 1]\n";
        return kConfigError;
    }
    json summary;
    try {
        const fs::path pa(opt.a);
        const CsvTable a = read_csv(pa.string());
        const Steady sa = steady_of(pa, a, opt.fraction);
        summary["a"] = {{"file", opt.a}, {"steady", sa.value}, {"stderr", sa.stderr_}, {"source", sa.source}};
        out << "a: " << opt.a << "\n   steady " << fixed(sa.value) << " +- " << fixed(sa.stderr_) << " (" << sa.source
            << ")\n";

        double ref = 0.0, ref_se = 0.0;
        std::string ref_name;
        if (!opt.b.empty()) {
            const fs::path pb(opt.b);
            const CsvTable b = read_csv(pb.string());
            const auto ta = a.values("t"), tb = b.values("t");
            const auto va = a.values("value"), vb = b.values("value");
            const auto sea = a.values("stderr"), seb = b.values("stderr");
            bool same_grid = ta.size() == tb.size();
            for (std::size_t k = 0; same_grid && k < ta.size(); ++k)
                same_grid = std::abs(ta[k] - tb[k]) <= 1e-9 * std::max(1.0, std::abs(ta[k]));
            if (!same_grid && !opt.interpolate) {
                err << "compare: time grids differ; pass --interpolate to resample the second file\n";
                return kFailure;
            }
            double max_abs = 0.0, max_sigma = 0.0;
            for (std::size_t k = 0; k < ta.size(); ++k) {
                const double vbk = same_grid ? vb[k] : interpolate_at(tb, vb, ta[k]);
                const double sbk = same_grid ? seb[k] : interpolate_at(tb, seb, ta[k]);
                const double d = va[k] - vbk;
                max_abs = std::max(max_abs, std::abs(d));
                max_sigma = std::max(max_sigma, std::abs(sigma_units(d, std::hypot(sea[k], sbk))));
            }
            const Steady sb = steady_of(pb, b, opt.fraction);
            ref = sb.value;
            ref_se = sb.stderr_;
            ref_name = opt.b;
            summary["pointwise"] = {{"max_abs_difference", max_abs}, {"max_sigma", max_sigma},
                                    {"interpolated", !same_grid}};
            out << "b: " << opt.b << "\n   steady " << fixed(sb.value) << " +- " << fixed(sb.stderr_) << " ("
                << sb.source << ")\n"
                << "pointwise max |a-b| " << fixed(max_abs, 6) << ", max " << fixed(max_sigma, 2) << " sigma"
                << (same_grid ? "" : " (interpolated)") << "\n";
        } else {
            const std::string key = opt.boltzmann ? "boltzmann" : "two_temperature";
            const auto meta = sidecar(pa);
            if (!meta || !(*meta).contains("references") || !(*meta)["references"].contains(key)) {
                err << "compare: no " << key << " reference in the metadata next to " << opt.a << "\n";
                return kFailure;
            }
            const std::string obs = observable_of(pa);
            const auto& r = (*meta)["references"][key];
            if (!r.contains(obs)) {
                err << "compare: reference has no value for observable '" << obs << "'\n";
                return kFailure;
            }
            ref = r[obs].get<double>();
            ref_name = key;
            out << "reference " << key << " " << obs << " = " << fixed(ref) << "\n";
        }
        const double diff = sa.value - ref;
        const double dev = sigma_units(diff, std::hypot(sa.stderr_, ref_se));
        summary["reference"] = {{"name", ref_name}, {"value", ref}, {"stderr", ref_se}};
        summary["difference"] = diff;
        summary["deviation_sigma"] = dev;
        out << "steady difference a - ref = " << fixed(diff) << "  (" << fixed(dev, 2) << " sigma)\n";
        if (!opt.json_out.empty()) {
            std::ofstream j(opt.json_out);
            j << summary.dump(2) << "\n";
            if (!j) throw CsvError("cannot write '" + opt.json_out + "'");
        }
    } catch (const std::exception& e) {
        err << "compare: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

// ---- diagnose --------------------------------------------------------------

int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    ResolvedRun run;
    try {
        cfg = load_config_or_metadata(opt.config);
        if (opt.output) cfg.output_dir = *opt.output;
        run = resolve(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    DiagnosticsOptions dopt;
    dopt.n_samples = cfg.diagnostics.n_samples;
    dopt.wick_samples = cfg.diagnostics.wick_samples;
    dopt.fdt_points = cfg.diagnostics.fdt_points;
    dopt.seed = cfg.diagnostics.seed;

    bool all_passed = true;
    std::ostringstream summary;
    std::vector<std::pair<std::string, CsvTable>> files;
    try {
        for (std::size_t r = 0; r < run.baths.size(); ++r) {
            const auto& bath = run.baths[r];
            for (const auto& c : run_bath_diagnostics(bath, dopt, r)) {
                const char* status = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
                summary << status << "  " << bath.label << "/" << c.name << "  " << c.detail << "\n";
                all_passed = all_passed && (c.skipped || c.passed);
                if (!c.skipped) files.emplace_back(bath.label + "_" + c.name + ".csv", c.table);
            }
        }
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    }
    try {
        const fs::path dir = fs::path(cfg.output_dir) / "diagnostics";
        fs::create_directories(dir);
        for (const auto& [name, table] : files) write_csv((dir / name).string(), table);
        std::ofstream s(dir / "summary.txt");
        s << summary.str();
        if (!s) throw CsvError("cannot write summary.txt");
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return kFailure;
    }
    out << summary.str() << (all_passed ? "all checks passed\n" : "some checks FAILED\n");
    return all_passed ? kOk : kFailure;
}

} // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ehrenfest ensembles with detailed-balance corrected couplings, with Redfield references"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run an Ehrenfest ensemble (and the Redfield reference) from a config");
    run_cmd->add_option("config", run.config, "JSON config or metadata.json from an earlier run")->required();
    run_cmd->add_option("--workers", run.workers, "Worker threads (0 = available parallelism)")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--seed", run.seed, "Override the ensemble base seed");
    run_cmd->add_option("--output", run.output, "Override output_dir");
    run_cmd->add_flag("--dry-run", run.dry_run, "Validate and print resolved parameters without running");

    CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare steady states of t,value,stderr CSV files");
    cmp_cmd->add_option("a", cmp.a, "CSV file")->required();
    cmp_cmd->add_option("b", cmp.b, "Second CSV file");
    cmp_cmd->add_flag("--boltzmann", cmp.boltzmann, "Compare against the Boltzmann reference in metadata.json");
    cmp_cmd->add_flag("--two-temp", cmp.two_temp, "Compare against the two-temperature chain reference");
    cmp_cmd->add_flag("--interpolate", cmp.interpolate, "Resample the second file onto the first file's grid");
    cmp_cmd->add_option("--fraction", cmp.fraction, "Trailing share of the time window treated as steady");
    cmp_cmd->add_option("--json", cmp.json_out, "Write the summary as JSON");

    DiagnoseOptions diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Run the bath validation suite for every reservoir of a config");
    diag_cmd->add_option("config", diag.config, "JSON config")->required();
    diag_cmd->add_option("--output", diag.output, "Override output_dir");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kConfigError;
    }

    if (*run_cmd) return cmd_run(run, out, err);
    if (*cmp_cmd) return cmd_compare(cmp, out, err);
    return cmd_diagnose(diag, out, err);
}

} // namespace qpi::cli
