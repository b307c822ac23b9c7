#pragma once

// Bundled figure parameter sets. Each preset is one or more RunConfigs whose
// output paths are bare file names, resolved against the --out directory.

#include <cmath>
#include <string>
#include <vector>

#include "jtcqed/cli/config.hpp"

namespace jtcqed::cli {

struct Preset {
    std::string name;
    std::string tasks;    ///< short task summary for the listing
    std::string summary;  ///< parameter set for the listing
    std::vector<RunConfig> runs;
};

namespace detail {

inline const double kSqrt2 = std::sqrt(2.0);

inline RunConfig eigenscan_preset(const std::string& file, double k) {
    RunConfig c;
    c.task = Task::eigenscan;
    c.model.k = k;
    c.model.delta_is_grid = true;
    for (int i = 0; i <= 200; ++i) c.model.deltas.push_back(-1.0 + 0.01 * i);
    c.model.fock_dims = {2, 2};
    c.numerics.eigen_count = 5;
    c.output.path = file;
    return c;
}

inline RunConfig spectrum_preset(const std::string& file, double k, double delta, double j) {
    RunConfig c;
    c.task = Task::spectrum;
    c.model.k = k;
    c.model.deltas = {delta};
    c.model.j_override = j;
    c.model.fock_dims = {5, 5};
    c.numerics.tau_max = 16384.0;
    c.numerics.n_samples = 16384;
    c.output.path = file;
    return c;
}

inline std::vector<double> fig4_times() {
    std::vector<double> t;
    for (int i = 0; i <= 600; ++i) t.push_back(static_cast<double>(i));
    return t;
}

/// Imbalance and g2 runs from |1,0,e> over t in [0, 600].
inline std::vector<RunConfig> fig4_bundle(const std::string& name, double k, double gamma_phi, json thresholds) {
    RunConfig base;
    base.model.k = k;
    base.model.deltas = {0.01};
    base.model.fock_dims = {5, 5};
    base.dissipation.gamma_phi = gamma_phi;
    base.numerics.times = fig4_times();
    base.numerics.initial_state = {{1, 0}, 0, false};

    RunConfig imb = base;
    imb.task = Task::imbalance;
    imb.output.path = name + "_imbalance.csv";
    imb.notes = {{"thresholds", thresholds},
                 {"windows", "early = first 20% of the horizon, late = last 20%"}};

    RunConfig g = base;
    g.task = Task::g2;
    g.numerics.g2_reference = ReferenceTime::at(0.0);
    g.output.path = name + "_g2.csv";
    g.notes = {{"reference_time", "t* = 0: the curves start from the initial excitation"}};
    return {imb, g};
}

}  // namespace detail

inline std::vector<Preset> presets() {
    using detail::kSqrt2;
    std::vector<Preset> out;

    out.push_back({"fig1a", "eigenscan", "k=0.1/sqrt2, delta in [-1,1] (201 pts), fock [2,2], 5 levels",
                   {detail::eigenscan_preset("fig1a.csv", 0.1 / kSqrt2)}});
    out.push_back({"fig1b", "eigenscan", "k=1.0/sqrt2, delta in [-1,1] (201 pts), fock [2,2], 5 levels",
                   {detail::eigenscan_preset("fig1b.csv", 1.0 / kSqrt2)}});

    out.push_back({"fig2a", "spectrum x2",
                   "k=0.05/sqrt2, J in {0, 0.5}, delta=0.05, fock [5,5], tau_max=16384, n_samples=16384",
                   {detail::spectrum_preset("fig2a_J0.csv", 0.05 / kSqrt2, 0.05, 0.0),
                    detail::spectrum_preset("fig2a_J0.5.csv", 0.05 / kSqrt2, 0.05, 0.5)}});
    out.push_back({"fig2b", "spectrum x2",
                   "k=0.05, J in {0, 0.5}, delta=0.05, fock [5,5], tau_max=16384, n_samples=16384",
                   {detail::spectrum_preset("fig2b_J0.csv", 0.05, 0.05, 0.0),
                    detail::spectrum_preset("fig2b_J0.5.csv", 0.05, 0.05, 0.5)}});

    out.push_back({"fig3a", "spectrum x2",
                   "k=0.1/sqrt2, J in {0, 0.5}, delta=0.5, fock [5,5], tau_max=16384, n_samples=16384",
                   {detail::spectrum_preset("fig3a_J0.csv", 0.1 / kSqrt2, 0.5, 0.0),
                    detail::spectrum_preset("fig3a_J0.5.csv", 0.1 / kSqrt2, 0.5, 0.5)}});
    out.push_back({"fig3b", "spectrum x2",
                   "k=0.5/sqrt2, J in {0, 0.5}, delta=0.5, fock [5,5], tau_max=16384, n_samples=16384",
                   {detail::spectrum_preset("fig3b_J0.csv", 0.5 / kSqrt2, 0.5, 0.0),
                    detail::spectrum_preset("fig3b_J0.5.csv", 0.5 / kSqrt2, 0.5, 0.5)}});

    out.push_back({"fig4a", "imbalance + g2",
                   "k=0.01/sqrt2, delta=0.01, gamma_phi=0.01, |1,0,e>, fock [5,5], t in [0,600]",
                   detail::fig4_bundle("fig4a", 0.01 / kSqrt2, 0.01,
                                       {{"min_sign_changes", 2}, {"late_over_early_max_abs_z", 0.5}})});
    out.push_back({"fig4b", "imbalance + g2",
                   "k=0.1/sqrt2, delta=0.01, gamma_phi=0.01, |1,0,e>, fock [5,5], t in [0,600]",
                   detail::fig4_bundle("fig4b", 0.1 / kSqrt2, 0.01,
                                       {{"late_abs_z_min", 0.1}, {"late_abs_z_max", 0.9}})});
    out.push_back({"fig4c", "imbalance + g2",
                   "k=1.0/sqrt2, delta=0.01, gamma_phi=0.1, |1,0,e>, fock [5,5], t in [0,600]",
                   detail::fig4_bundle("fig4c", 1.0 / kSqrt2, 0.1,
                                       {{"min_z_over_horizon", 0.9}, {"g2_resonator_at_0_below", 0.5}})});
    return out;
}

inline const Preset* find_preset(const std::vector<Preset>& all, const std::string& name) {
    for (const Preset& p : all)
        if (p.name == name) return &p;
    return nullptr;
}

}  // namespace jtcqed::cli
