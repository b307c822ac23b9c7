#pragma once

// Executes RunConfigs. Every result is computed in memory before anything is
// written, so a failing run leaves no partial files behind. CSV bodies depend
// only on the configuration; the manifest adds timing and provenance.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "jtcqed/analysis.hpp"
#include "jtcqed/cli/config.hpp"
#include "jtcqed/model.hpp"
#include "jtcqed/version.hpp"

namespace jtcqed::cli {

namespace fs = std::filesystem;

/// Worker count from JTCQED_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("JTCQED_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096)
            throw ConfigError("JTCQED_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string format_value(double v, int precision) {
    if (v == 0.0) v = 0.0;  // fold -0 so identical runs print identical bytes
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline QOperator build_hamiltonian(const ModelConfig& m, double delta) {
    const SpaceSpec space = SpaceSpec::two_mode(m.fock_dims[0], m.fock_dims[1]);
    if (m.hamiltonian == HamiltonianKind::dimensionless)
        return build_dimensionless_hamiltonian(space, m.k, delta, m.include_quadratic, m.j_override);

    ModelParams p = symmetric_coupling(1.0, 1.0 - delta, m.k);
    if (m.j_override) p.j_hop = *m.j_override;
    const auto norm = m.obrien_normalization ? EffectiveNormalization::squared : EffectiveNormalization::as_printed;
    return m.include_quadratic ? build_effective_hamiltonian(space, p, norm) : build_effective_jt(space, p, norm);
}

struct OutputFile {
    std::string path;
    std::string body;
};

struct RunResult {
    std::vector<OutputFile> files;
    json notes = json::object();
};

namespace detail {

inline std::string csv_path(const std::string& base, std::size_t index, std::size_t count) {
    if (count == 1) return base;
    const fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "_" + std::to_string(index) + p.extension().string())).string();
}

inline json peak_table(const std::vector<Peak>& peaks) {
    json t = json::array();
    for (const Peak& p : peaks) t.push_back({{"omega", p.omega}, {"power", p.power}, {"prominence", p.prominence}});
    return t;
}

inline DensityMatrix initial_state(const NumericsConfig& n, const Liouvillian& L) {
    if (n.initial_state.steady) return steady_state(L);
    const int levels[1] = {n.initial_state.qubit_level};
    return DensityMatrix::basis(L.space(), n.initial_state.fock, levels);
}

/// Early/late window statistics of z used by the structural checks.
inline json imbalance_summary(const ImbalanceSeries& s) {
    const std::size_t n = s.times.size();
    const double t0 = s.times.front(), t1 = s.times.back();
    const double early_end = t0 + 0.2 * (t1 - t0), late_start = t1 - 0.2 * (t1 - t0);
    double early_max = 0.0, late_max = 0.0, late_min = 1.0, min_z = 1.0, max_z = -1.0;
    int sign_changes = 0, last_sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.z[i]) continue;
        const double z = *s.z[i];
        min_z = std::min(min_z, z);
        max_z = std::max(max_z, z);
        if (s.times[i] <= early_end) early_max = std::max(early_max, std::abs(z));
        if (s.times[i] >= late_start) {
            late_max = std::max(late_max, std::abs(z));
            late_min = std::min(late_min, std::abs(z));
        }
        const int sign = z > 0.0 ? 1 : (z < 0.0 ? -1 : 0);
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) ++sign_changes;
            last_sign = sign;
        }
    }
    return {{"early_max_abs_z", early_max}, {"late_max_abs_z", late_max}, {"late_min_abs_z", late_min},
            {"min_z", min_z},               {"max_z", max_z},             {"sign_changes", sign_changes}};
}

}  // namespace detail

inline RunResult run_eigenscan(const RunConfig& c, unsigned workers) {
    const SpaceSpec space = SpaceSpec::two_mode(c.model.fock_dims[0], c.model.fock_dims[1]);
    EigenScan scan;
    if (c.model.hamiltonian == HamiltonianKind::dimensionless) {
        scan = eigen_scan(c.model.k, c.model.deltas, c.numerics.eigen_count, space,
                          {c.model.include_quadratic, c.model.j_override, workers});
    } else {
        scan.deltas = c.model.deltas;
        scan.levels.resize(scan.deltas.size());
        parallel_for(scan.deltas.size(), workers, [&](std::size_t i) {
            scan.levels[i] = eigen_lowest(build_hamiltonian(c.model, scan.deltas[i]), c.numerics.eigen_count);
        });
    }
    // Rows keyed by delta so the file does not depend on the grid order given.
    std::vector<std::size_t> order(scan.deltas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scan.deltas[a] < scan.deltas[b]; });

    std::string body = "delta";
    for (int i = 1; i <= c.numerics.eigen_count; ++i) body += ",E" + std::to_string(i);
    body += "\n";
    for (std::size_t r : order) {
        body += format_value(scan.deltas[r], c.output.precision);
        for (double e : scan.levels[r]) body += "," + format_value(e, c.output.precision);
        body += "\n";
    }
    return {{{c.output.path, body}}, json::object()};
}

inline RunResult run_spectrum(const RunConfig& c, unsigned workers) {
    const std::size_t count = c.model.deltas.size();
    std::vector<SpectrumSeries> series(count);
    std::vector<double> purity(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const Liouvillian L = build_liouvillian(build_hamiltonian(c.model, c.model.deltas[i]), c.dissipation);
        const DensityMatrix ss = steady_state(L);
        purity[i] = ss.purity();
        SpectrumOptions opt;
        opt.mode = c.numerics.spectrum_mode;
        opt.ordering = c.numerics.correlation_ordering;
        opt.propagation = {c.numerics.propagation, c.numerics.tolerances};
        series[i] = power_spectrum(L, ss, c.numerics.tau_max, c.numerics.n_samples, opt);
    });

    RunResult res;
    json points = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        const SpectrumSeries& s = series[i];
        std::string body = "omega,power\n";
        for (std::size_t r = 0; r < s.omegas.size(); ++r)
            body += format_value(s.omegas[r], c.output.precision) + "," +
                    format_value(s.values[r], c.output.precision) + "\n";
        const std::string path = detail::csv_path(c.output.path, i, count);
        res.files.push_back({path, body});

        json p;
        p["file"] = fs::path(path).filename().string();
        p["delta"] = c.model.deltas[i];
        p["steady_state_purity"] = purity[i];
        p["resolution"] = s.resolution;
        p["c0"] = {s.c0.real(), s.c0.imag()};
        p["decay_ratio"] = s.decay_ratio;
        p["warning"] = s.warning ? json(*s.warning) : json(nullptr);
        p["integral_over_2pi_c0"] = integrate_spectrum(s) / (2.0 * std::numbers::pi * s.c0.real());
        p["dominant_peaks"] = detail::peak_table(dominant_peaks(s));
        p["peaks"] = detail::peak_table(significant_peaks(s));
        points.push_back(p);
    }
    res.notes["spectra"] = points;
    res.notes["peak_rules"] = {{"dominant", "prominence >= 0.4 of the maximum power"},
                               {"peaks", "local maxima with power >= 1% of the maximum"}};
    return res;
}

inline RunResult run_g2(const RunConfig& c, unsigned workers) {
    const std::size_t count = c.model.deltas.size();
    std::vector<CorrelationSeries<double>> res_r(count), res_q(count);
    parallel_for(2 * count, workers, [&](std::size_t job) {
        const std::size_t i = job / 2;
        const Liouvillian L = build_liouvillian(build_hamiltonian(c.model, c.model.deltas[i]), c.dissipation);
        const DensityMatrix rho0 = detail::initial_state(c.numerics, L);
        G2Options opt;
        opt.normalization = c.numerics.g2_normalization;
        opt.reference = c.numerics.g2_reference;
        opt.method = c.numerics.propagation;
        opt.tolerances = c.numerics.tolerances;
        const G2Target target = job % 2 == 0 ? G2Target::resonator : G2Target::qubit;
        (job % 2 == 0 ? res_r : res_q)[i] = g2(L, rho0, target, c.numerics.times, opt);
    });

    RunResult res;
    json points = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        std::string body = "tau,g2_resonator,g2_qubit\n";
        for (std::size_t r = 0; r < c.numerics.times.size(); ++r)
            body += format_value(c.numerics.times[r], c.output.precision) + "," +
                    format_value(res_r[i].values[r], c.output.precision) + "," +
                    format_value(res_q[i].values[r], c.output.precision) + "\n";
        const std::string path = detail::csv_path(c.output.path, i, count);
        res.files.push_back({path, body});
        json p;
        p["file"] = fs::path(path).filename().string();
        p["delta"] = c.model.deltas[i];
        p["resonator"] = res_r[i].metadata;
        p["qubit"] = res_q[i].metadata;
        p["g2_resonator_0"] = res_r[i].values.front();
        p["g2_qubit_0"] = res_q[i].values.front();
        points.push_back(p);
    }
    res.notes["g2"] = points;
    return res;
}

inline RunResult run_imbalance(const RunConfig& c, unsigned workers) {
    const std::size_t count = c.model.deltas.size();
    std::vector<ImbalanceSeries> series(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const Liouvillian L = build_liouvillian(build_hamiltonian(c.model, c.model.deltas[i]), c.dissipation);
        const DensityMatrix rho0 = detail::initial_state(c.numerics, L);
        EvolveOptions opt;
        opt.method = c.numerics.propagation;
        opt.tolerances = c.numerics.tolerances;
        series[i] = imbalance(L, rho0, c.numerics.times, opt);
    });

    RunResult res;
    json points = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        const ImbalanceSeries& s = series[i];
        std::string body = "t,n1,n2,z\n";
        for (std::size_t r = 0; r < s.times.size(); ++r) {
            body += format_value(s.times[r], c.output.precision) + "," + format_value(s.n1[r], c.output.precision) +
                    "," + format_value(s.n2[r], c.output.precision) + ",";
            if (s.z[r]) body += format_value(*s.z[r], c.output.precision);
            body += "\n";
        }
        const std::string path = detail::csv_path(c.output.path, i, count);
        res.files.push_back({path, body});
        json p = detail::imbalance_summary(s);
        p["file"] = fs::path(path).filename().string();
        p["delta"] = c.model.deltas[i];
        points.push_back(p);
    }
    res.notes["imbalance"] = points;
    return res;
}

inline RunResult execute(const RunConfig& c, unsigned workers) {
    switch (c.task) {
        case Task::eigenscan: return run_eigenscan(c, workers);
        case Task::spectrum: return run_spectrum(c, workers);
        case Task::g2: return run_g2(c, workers);
        case Task::imbalance: return run_imbalance(c, workers);
    }
    throw ConfigError("unknown task");
}

/// Writes through a sibling temporary file and a rename.
inline void write_atomic(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << body;
        if (!out.flush()) throw Error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

inline fs::path manifest_path(const std::string& output_path) {
    fs::path p(output_path);
    return p.parent_path() / (p.stem().string() + ".manifest.json");
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunReport {
    std::vector<std::string> written;
};

/// Runs one configuration and writes its CSVs and manifest. Relative output
/// paths are resolved against `base_dir`.
inline RunReport run_and_write(RunConfig c, const fs::path& base_dir, unsigned workers) {
    if (fs::path(c.output.path).is_relative()) c.output.path = (base_dir / c.output.path).lexically_normal().string();
    const std::string started = utc_timestamp();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r = execute(c, workers);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunReport report;
    json files = json::array();
    for (const OutputFile& f : r.files) {
        write_atomic(f.path, f.body);
        report.written.push_back(f.path);
        files.push_back(fs::path(f.path).filename().string());
    }
    json manifest;
    manifest["tool"] = "jtcqed";
    manifest["version"] = kVersion;
    manifest["started_utc"] = started;
    manifest["wall_clock_seconds"] = wall;
    manifest["workers"] = workers;
    manifest["config"] = to_json(c);
    manifest["outputs"] = files;
    manifest["provenance"] = r.notes;
    const fs::path mp = manifest_path(c.output.path);
    write_atomic(mp, manifest.dump(2) + "\n");
    report.written.push_back(mp.string());
    return report;
}

}  // namespace jtcqed::cli
