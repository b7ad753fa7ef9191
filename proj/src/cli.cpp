#include "vibrokit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vibrokit/design.hpp"

namespace vibrokit {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json spectrum_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back({{"re", v(i).real()}, {"im", v(i).imag()}});
    return out;
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg, const CliOptions& opts) {
    std::filesystem::path dir = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << contents;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const Trajectory& traj, int stride) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << header << "\n";
    out << std::setprecision(17);
    auto write_row = [&](int s) {
        out << traj.times(s);
        for (int c = 0; c < traj.states.cols(); ++c) out << "," << traj.states(s, c);
        out << "\n";
    };
    int last = -1;
    for (int s = 0; s < traj.samples(); s += stride) {
        write_row(s);
        last = s;
    }
    if (last != traj.samples() - 1) write_row(traj.samples() - 1);
}

std::string full_header(int n) {
    std::string h = "t";
    for (int i = 1; i <= n; ++i) h += ",theta_" + std::to_string(i);
    return h;
}

Eigen::VectorXd initial_state_from(const ExperimentConfig& cfg, const CliOptions& opts) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    const auto& t0 = cfg.simulation.theta0;
    if (t0.mode == "explicit") {
        Eigen::VectorXd theta(net.size());
        for (int i = 0; i < net.size(); ++i) theta(i) = t0.values[i];
        return theta;
    }
    const std::uint64_t seed = opts.seed.value_or(cfg.simulation.seed);
    return default_initial_state(net, part, seed, t0.perturbation, t0.cluster_phases);
}

}  // namespace

int cmd_validate(const ExperimentConfig& cfg, std::ostream& out) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    ValidationReport report = validate_invariance(net, part);

    out << "invariance check (tolerance " << report.tolerance << ")\n";
    for (const auto& e : report.structural_errors) out << "  structural: " << e << "\n";
    for (const auto& v : report.frequency_violations) {
        out << "  cluster " << v.cluster + 1 << ": frequencies differ between nodes "
            << v.node_a + 1 << " (" << v.freq_a << ") and " << v.node_b + 1 << " (" << v.freq_b
            << ")\n";
    }
    for (const auto& v : report.row_sum_violations) {
        out << "  clusters " << v.cluster + 1 << "->" << v.other_cluster + 1
            << ": row sums differ between nodes " << v.node_a + 1 << " (" << v.sum_a << ") and "
            << v.node_b + 1 << " (" << v.sum_b << ")\n";
    }
    out << (report.passed() ? "PASS" : "FAIL") << " (config " << config_digest(cfg) << ")\n";
    return report.passed() ? 0 : 2;
}

int cmd_certify(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    VibrationSchedule sched = cfg.schedule();
    if (opts.eps) sched.epsilon = *opts.eps;
    CertifyOptions copts = cfg.certify_options();
    if (opts.s0) copts.s0 = *opts.s0;

    StabilityCertificate cert = certify(net, part, sched, copts);
    std::optional<EpsilonThreshold> threshold;
    if (!cfg.analysis.eps_grid.empty() && sched.any_nonzero()) {
        EpsilonSearchOptions sopts;
        sopts.horizon = cfg.simulation.horizon;
        sopts.tol_sync = cfg.simulation.tol_sync;
        sopts.seed = opts.seed.value_or(cfg.simulation.seed);
        sopts.perturbation = cfg.simulation.theta0.perturbation;
        sopts.cluster_phases = cfg.simulation.theta0.cluster_phases;
        try {
            threshold = estimate_epsilon_threshold(net, part, sched, cfg.analysis.eps_grid, sopts);
            cert.epsilon_threshold = threshold;
        } catch (const NumericalError& e) {
            out << "epsilon threshold: " << e.what() << "\n";
        }
    }

    const int r = part.num_clusters();
    out << std::setprecision(6);
    for (int k = 0; k < r; ++k) {
        out << "cluster " << k + 1 << ":\n";
        out << "  J = " << cert.J_blocks[k].format(Eigen::IOFormat(6, 0, ", ", "; ", "", "", "[", "]"))
            << "\n";
        out << "  J_avg = "
            << cert.J_bar_blocks[k].format(Eigen::IOFormat(6, 0, ", ", "; ", "", "", "[", "]"))
            << "\n";
        out << "  robustness: " << cert.robustness_uncontrolled(k) << " -> "
            << cert.robustness_controlled(k) << "\n";
    }
    out << "J_avg Hurwitz: " << (cert.hurwitz_J_bar ? "yes" : "no") << "\n";
    out << "M-matrix: " << (cert.m_matrix.is_m_matrix ? "yes" : "no");
    if (!cert.m_matrix.is_m_matrix) out << " (" << cert.m_matrix.reason << ")";
    out << "\n";
    if (cert.epsilon_threshold) {
        out << "largest stable epsilon in grid: " << cert.epsilon_threshold->epsilon << "\n";
    }
    out << "certified: " << (cert.certified ? "yes" : "no") << "\n";

    json doc;
    doc["config_digest"] = config_digest(cfg);
    doc["s0"] = cert.s0;
    doc["quadrature_points"] = cert.quadrature_points;
    doc["hurwitz_J"] = cert.hurwitz_J;
    doc["hurwitz_J_avg"] = cert.hurwitz_J_bar;
    doc["certified"] = cert.certified;
    doc["gamma_method_for_S"] =
        cert.gamma_for_S == GammaMethod::Analytic ? "analytic" : "sampled";
    for (int k = 0; k < r; ++k) {
        json cluster;
        cluster["J"] = matrix_json(cert.J_blocks[k]);
        cluster["P_hat"] = matrix_json(cert.P_hat_blocks[k]);
        cluster["J_avg"] = matrix_json(cert.J_bar_blocks[k]);
        cluster["J_spectrum"] = spectrum_json(cert.J_spectra[k]);
        cluster["J_avg_spectrum"] = spectrum_json(cert.J_bar_spectra[k]);
        cluster["X"] = matrix_json(cert.X_uncontrolled[k]);
        cluster["X_avg"] = matrix_json(cert.X_controlled[k]);
        cluster["robustness_uncontrolled"] = cert.robustness_uncontrolled(k);
        cluster["robustness_controlled"] = cert.robustness_controlled(k);
        doc["clusters"].push_back(cluster);
    }
    doc["gamma_analytic"] = matrix_json(cert.gamma_analytic);
    doc["gamma_sampled"] = matrix_json(cert.gamma_sampled);
    doc["S"] = matrix_json(cert.S);
    doc["m_matrix"] = {{"verdict", cert.m_matrix.is_m_matrix},
                       {"leading_minors", vector_json(cert.m_matrix.leading_minors)},
                       {"spectrum", spectrum_json(cert.m_matrix.spectrum)},
                       {"reason", cert.m_matrix.reason}};
    if (cert.epsilon_threshold) {
        doc["epsilon_threshold"] = {{"epsilon", cert.epsilon_threshold->epsilon},
                                    {"grid_resolution", cert.epsilon_threshold->grid_resolution},
                                    {"method", "simulation bisection"}};
    }
    write_file(prepare_out_dir(cfg, opts) / "certificate.json", doc.dump(2) + "\n");
    return cert.certified ? 0 : 2;
}

int cmd_simulate(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    VibrationSchedule sched = cfg.schedule();
    if (opts.eps) sched.epsilon = *opts.eps;
    if (!opts.controlled) sched.amplitudes.clear();

    double dt = cfg.simulation.dt;
    if (sched.any_nonzero()) dt = std::min(dt, sched.epsilon / 20.0);

    const Eigen::VectorXd theta0 = initial_state_from(cfg, opts);
    Trajectory traj = simulate_full(net, part, sched, theta0, cfg.simulation.horizon, dt,
                                    cfg.simulation.record_stride);
    SyncVerdict v = verdict(traj, part, cfg.simulation.tol_sync);

    const auto dir = prepare_out_dir(cfg, opts);
    write_csv(dir / "trajectory.csv", full_header(net.size()), traj, 1);

    // Per-cluster error series, downsampled to at most 5000 rows.
    {
        std::ofstream err_csv(dir / "plotdata_errors.csv");
        err_csv << "t";
        for (int k = 1; k <= part.num_clusters(); ++k) err_csv << ",e_" << k;
        err_csv << "\n" << std::setprecision(17);
        const int stride = traj.samples() / 5000 + 1;  // at most 5000 rows
        for (int s = 0; s < traj.samples(); s += stride) {
            Eigen::VectorXd e = lift_error(traj.states.row(s).transpose(), part);
            err_csv << traj.times(s);
            for (int k = 0; k < e.size(); ++k) err_csv << "," << e(k);
            err_csv << "\n";
        }
    }

    json doc;
    doc["config_digest"] = config_digest(cfg);
    doc["controlled"] = opts.controlled;
    doc["epsilon"] = sched.epsilon;
    doc["dt"] = dt;
    doc["horizon"] = cfg.simulation.horizon;
    doc["converged"] = v.converged;
    doc["tol_sync"] = v.tol_sync;
    doc["terminal_errors"] = vector_json(v.terminal_error);
    doc["tail_max_error"] = v.tail_max_error;
    doc["tail_slope_sign"] = v.tail_slope_sign;
    write_file(dir / "verdict.json", doc.dump(2) + "\n");

    out << std::setprecision(6);
    out << (opts.controlled ? "controlled" : "uncontrolled") << " run, horizon "
        << cfg.simulation.horizon << ", dt " << dt << "\n";
    out << "per-cluster terminal error:";
    for (int k = 0; k < v.terminal_error.size(); ++k) out << " " << v.terminal_error(k);
    out << "\nconverged: " << (v.converged ? "yes" : "no") << " (tol " << v.tol_sync << ")\n";
    return v.converged ? 0 : 2;
}

int cmd_design(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    std::vector<int> targets = cfg.analysis.design_targets;
    if (targets.empty()) {
        for (int k = 0; k < part.num_clusters(); ++k) {
            if (part.cluster_size(k) >= 3) targets.push_back(k);
        }
    }
    if (targets.empty()) {
        out << "no cluster large enough to vibrate\n";
        return 2;
    }
    std::vector<double> grid = cfg.analysis.u_grid;
    if (grid.empty()) grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
    const double s0 = opts.s0.value_or(cfg.analysis.s0);

    DesignResult result = amplitude_scan(net, part, targets, grid, s0,
                                         opts.eps.value_or(cfg.epsilon),
                                         cfg.analysis.quadrature_points);

    out << std::setprecision(6);
    out << "targets:";
    for (int k : targets) out << " " << k + 1;
    out << "\n";
    for (const auto& p : result.trace) {
        out << "  u = " << p.u << ": "
            << (p.hurwitz ? "objective " + std::to_string(p.objective) : "not Hurwitz") << "\n";
    }
    if (result.improved) {
        out << "selected u = " << result.selected_u << ", robustness";
        for (int t = 0; t < result.robustness_before.size(); ++t) {
            out << " " << result.robustness_before(t) << " -> " << result.robustness_after(t);
        }
        out << "\n";
    } else {
        out << "no amplitude in the grid improves robustness\n";
    }

    json doc;
    doc["config_digest"] = config_digest(cfg);
    doc["targets"] = json::array();
    for (int k : targets) doc["targets"].push_back(k + 1);
    doc["u_grid"] = grid;
    doc["improved"] = result.improved;
    doc["selected_u"] = result.selected_u;
    doc["robustness_before"] = vector_json(result.robustness_before);
    doc["robustness_after"] = vector_json(result.robustness_after);
    doc["schedule"] = json::array();
    for (const auto& [key, u] : result.schedule.amplitudes) {
        doc["schedule"].push_back({{"i", key.first + 1}, {"j", key.second + 1}, {"u", u}});
    }
    doc["trace"] = json::array();
    for (const auto& p : result.trace) {
        doc["trace"].push_back({{"u", p.u},
                                {"hurwitz", p.hurwitz},
                                {"objective", p.hurwitz ? json(p.objective) : json()}});
    }
    write_file(prepare_out_dir(cfg, opts) / "design.json", doc.dump(2) + "\n");
    return result.improved ? 0 : 2;
}

int cmd_sweep(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const auto net = cfg.network();
    const auto part = cfg.cluster_partition();
    const VibrationSchedule sched = cfg.schedule();

    IncidenceReduction red = build_reduction(net, part);
    ReductionMatrices rm = compute_R(red);
    const auto J = assemble_J(red, rm);
    const auto P_hat = assemble_P_hat(red, rm, sched);

    int dim = 0;
    for (const auto& b : J) dim += static_cast<int>(b.rows());
    std::mt19937_64 rng(opts.seed.value_or(cfg.simulation.seed));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd x0(dim);
    for (int i = 0; i < dim; ++i) x0(i) = 0.05 * dist(rng);

    const double eps0 = opts.eps.value_or(cfg.epsilon);
    const double horizon = std::min(cfg.simulation.horizon, 50.0);
    SweepStudy study =
        averaging_sweep(J, P_hat, opts.s0.value_or(cfg.analysis.s0), eps0, 2, horizon, x0);

    out << std::setprecision(6);
    std::ostringstream csv;
    csv << std::setprecision(17) << "eps,deviation\n";
    for (std::size_t i = 0; i < study.epsilons.size(); ++i) {
        out << "eps = " << study.epsilons[i] << ": deviation " << study.deviations[i];
        if (i > 0) out << " (ratio " << study.ratios[i - 1] << ")";
        out << "\n";
        csv << study.epsilons[i] << "," << study.deviations[i] << "\n";
    }
    json doc;
    doc["config_digest"] = config_digest(cfg);
    doc["eps0"] = eps0;
    doc["epsilons"] = study.epsilons;
    doc["deviations"] = study.deviations;
    doc["ratios"] = study.ratios;
    json orders = json::array();
    for (std::size_t i = 0; i < study.ratios.size(); ++i) {
        const double order = std::log2(study.ratios[i]);
        out << "empirical order eps/2^" << i << " -> /2^" << i + 1 << ": " << order << "\n";
        orders.push_back(order);
    }
    doc["empirical_orders"] = orders;
    const auto dir = prepare_out_dir(cfg, opts);
    write_file(dir / "sweep.csv", csv.str());
    write_file(dir / "sweep.json", doc.dump(2) + "\n");
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"vibrational stabilization toolkit for clustered Kuramoto networks"};
    app.require_subcommand(1);

    std::string config_path;
    CliOptions opts;
    bool uncontrolled = false;
    double s0_value = 0.0, eps_value = 0.0;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed_value, "seed override");
        sub->add_option("--s0", s0_value, "anchor phase for averaging (rad)");
        sub->add_option("--eps", eps_value, "dither scale override");
    };

    CLI::App* validate = app.add_subcommand("validate", "check the invariance conditions");
    CLI::App* certify_cmd = app.add_subcommand("certify", "run the stability certificate pipeline");
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "integrate the full model");
    CLI::App* design_cmd = app.add_subcommand("design", "scan dither amplitudes");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "averaging-error refinement study");
    for (CLI::App* sub : {validate, certify_cmd, simulate_cmd, design_cmd, sweep_cmd}) {
        add_common(sub);
    }
    simulate_cmd->add_flag("--uncontrolled", uncontrolled, "drop the dither schedule");
    simulate_cmd->add_flag("--controlled", "apply the dither schedule (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 1;
    }
    opts.controlled = !uncontrolled;
    for (CLI::App* sub : {validate, certify_cmd, simulate_cmd, design_cmd, sweep_cmd}) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) opts.seed = seed_value;
        if (sub->count("--s0")) opts.s0 = s0_value;
        if (sub->count("--eps")) opts.eps = eps_value;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error at byte " << e.position << ": " << e.what() << "\n";
        return 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(cfg, out);
        if (certify_cmd->parsed()) return cmd_certify(cfg, opts, out);
        if (simulate_cmd->parsed()) return cmd_simulate(cfg, opts, out);
        if (design_cmd->parsed()) return cmd_design(cfg, opts, out);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, opts, out);
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace vibrokit
