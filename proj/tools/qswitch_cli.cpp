// qswitch command-line front end.
//
// Subcommands:
//   certificate <file>                  print the design certificate as JSON
//   simulate <file...> [--out F] [--monitor] [--h H] [--horizon T] [--jobs N]
//   reproduce-paper [--outdir D]        run the built-in reference example
//   gen-signal <file> --seed S          emit an ADT-compliant random signal
//
// Exit codes: 0 ok, 1 input/schema error, 2 infeasible design,
// 3 divergence, 4 monitor failure. QSWITCH_LOG=info enables progress notes.

#include "qswitch/qswitch.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qswitch;

namespace {

bool log_enabled() {
    const char* v = std::getenv("QSWITCH_LOG");
    return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

void log_info(const std::string& msg) {
    if (log_enabled()) std::cerr << "[qswitch] " << msg << "\n";
}

json certificate_to_json(const DesignCertificate& cert) {
    json j;
    for (const auto& [id, p] : cert.P) j["P"][std::to_string(id)] = detail::matrix_to_json(p);
    j["lambda_P_max"] = cert.lambda_p_max;
    j["lambda_P_min"] = cert.lambda_p_min;
    j["lambda_Q_min"] = cert.lambda_q_min;
    j["C_max"] = cert.c_max_norm;
    j["Theta"] = cert.theta;
    j["Gamma"] = cert.gamma;
    j["Lambda"] = cert.lambda_jump;
    j["Omega"] = cert.omega;
    for (const auto& [key, v] : cert.c_pairs)
        j["c_pairs"][std::to_string(key.first) + "," + std::to_string(key.second)] = v;
    j["c"] = cert.c;
    j["T"] = cert.T;
    j["tau_a_min"] = cert.tau_a_min;
    j["N"] = cert.capture_window_count;
    for (const auto& [id, w] : cert.W) j["W"][std::to_string(id)] = detail::matrix_to_json(w);
    for (const auto& [id, u] : cert.upsilon) j["Upsilon"][std::to_string(id)] = u;
    return j;
}

json monitor_to_json(const MonitorReport& rep) {
    auto one = [](const MonitorVerdict& v) {
        return json{{"name", v.name},
                    {"pass", v.pass},
                    {"worst_margin", v.worst_margin},
                    {"violations", v.violations},
                    {"checks", v.checks}};
    };
    return json{{"R1_membership", one(rep.r1_membership)},
                {"lyapunov_decrease", one(rep.lyapunov_decrease)},
                {"zoom_out_bound", one(rep.zoom_out_bound)},
                {"mu_envelope", one(rep.mu_envelope)},
                {"all_pass", rep.all_pass()}};
}

int cmd_certificate(const std::string& path) {
    try {
        Scenario sc = load_scenario(path);
        DesignCertificate cert = compute_certificate(sc.inputs);
        std::cout << certificate_to_json(cert).dump(2) << "\n";
        std::cerr << "certificate summary\n"
                  << "  Theta      = " << cert.theta << "\n"
                  << "  Omega      = " << cert.omega << "\n"
                  << "  c          = " << cert.c << "\n"
                  << "  T          = " << cert.T << "\n"
                  << "  tau_a_min  = " << cert.tau_a_min << "\n"
                  << "  N          = " << cert.capture_window_count << "\n";
        return 0;
    } catch (const InfeasibleDesign& e) {
        std::cout << json{{"error", e.what()},
                          {"violated", e.inequality},
                          {"min_feasible_M", e.min_feasible_M}}
                         .dump(2)
                  << "\n";
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}}.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

struct SimJob {
    std::string input;
    std::string out_csv;     // empty = no CSV
    bool monitor = false;
    double h_override = 0.0;
    double horizon_override = 0.0;
};

int run_one_simulation(const SimJob& job, json& summary) {
    try {
        Scenario sc = load_scenario(job.input);
        if (job.h_override > 0.0) sc.h = job.h_override;
        if (job.horizon_override > 0.0) sc.horizon = job.horizon_override;
        DesignCertificate cert = compute_certificate(sc.inputs);
        log_info("simulating " + job.input);
        TrajectoryRecord rec = simulate(sc, cert);
        summary["capture_time"] = rec.capture_time;
        summary["diverged"] = rec.diverged;
        summary["steps"] = rec.rows.size();
        if (!job.out_csv.empty()) {
            std::ofstream f(job.out_csv);
            if (!f) {
                summary["error"] = "cannot open output file: " + job.out_csv;
                return 1;
            }
            write_csv(f, rec, sc.inputs.plant.n(), sc.inputs.plant.m(), sc.inputs.plant.p());
            std::ofstream fe(job.out_csv + ".events.csv");
            if (fe) write_events_csv(fe, rec);
            summary["csv"] = job.out_csv;
        }
        if (job.monitor) {
            MonitorReport rep = monitor_invariants(rec, cert, sc.inputs, sc.x0);
            summary["monitors"] = monitor_to_json(rep);
            if (!job.out_csv.empty()) {
                std::ofstream fr(job.out_csv + ".report.json");
                if (fr) fr << monitor_to_json(rep).dump(2) << "\n";
            }
            if (rec.diverged) return 3;
            if (!rep.all_pass()) return 4;
        }
        if (rec.diverged) return 3;
        return 0;
    } catch (const InfeasibleDesign& e) {
        summary = {{"error", e.what()}, {"violated", e.inequality}};
        return 2;
    } catch (const std::exception& e) {
        summary = {{"error", e.what()}};
        return 1;
    }
}

int cmd_simulate(const std::vector<std::string>& files, const std::string& out, bool monitor,
                 double h_override, double horizon_override, unsigned jobs) {
    std::vector<SimJob> work;
    for (const auto& f : files) {
        SimJob job;
        job.input = f;
        job.monitor = monitor;
        job.h_override = h_override;
        job.horizon_override = horizon_override;
        if (!out.empty()) {
            if (files.size() == 1) {
                job.out_csv = out;
            } else {
                fs::create_directories(out);
                job.out_csv = (fs::path(out) / (fs::path(f).stem().string() + ".csv")).string();
            }
        }
        work.push_back(std::move(job));
    }
    std::vector<json> summaries(work.size());
    std::vector<int> codes(work.size(), 0);
    if (jobs <= 1 || work.size() == 1) {
        for (std::size_t i = 0; i < work.size(); ++i) codes[i] = run_one_simulation(work[i], summaries[i]);
    } else {
        std::vector<std::future<int>> futs;
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            int worst = 0;
            for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1))
                codes[i] = run_one_simulation(work[i], summaries[i]);
            return worst;
        };
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, work.size()); ++t)
            futs.push_back(std::async(std::launch::async, worker));
        for (auto& f : futs) f.get();
    }
    json outj = json::array();
    int rc = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        summaries[i]["input"] = work[i].input;
        outj.push_back(summaries[i]);
        rc = std::max(rc, codes[i]);
    }
    std::cout << (work.size() == 1 ? outj[0] : outj).dump(2) << "\n";
    return rc;
}

int cmd_reproduce_paper(const std::string& outdir) {
    Scenario sc = reference_scenario();
    ReferenceConstants ref;
    DesignCertificate cert = compute_certificate(sc.inputs);
    auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };

    json j;
    j["constants"] = {
        {"T", {{"computed", cert.T}, {"reference", ref.T}, {"rel_error", rel(cert.T, ref.T)}}},
        {"Omega",
         {{"computed", cert.omega}, {"reference", ref.omega}, {"rel_error", rel(cert.omega, ref.omega)}}},
        {"c", {{"computed", cert.c}, {"reference", ref.c}, {"rel_error", rel(cert.c, ref.c)}}},
        {"tau_a_min",
         {{"computed", cert.tau_a_min},
          {"reference", ref.tau_a_min},
          {"rel_error", rel(cert.tau_a_min, ref.tau_a_min)}}}};

    TrajectoryRecord rec = simulate(sc, cert);
    MonitorReport rep = monitor_invariants(rec, cert, sc.inputs, sc.x0);
    j["capture_time"] = rec.capture_time;
    j["monitors"] = monitor_to_json(rep);

    std::cerr << "constant     computed    reference   rel.error\n";
    for (const char* name : {"T", "Omega", "c", "tau_a_min"}) {
        const auto& e = j["constants"][name];
        std::fprintf(stderr, "%-11s %11.6f %11.4f   %.4f%%\n", name,
                     e["computed"].get<double>(), e["reference"].get<double>(),
                     100.0 * e["rel_error"].get<double>());
    }
    std::fprintf(stderr, "capture finished at t = %g\n", rec.capture_time);

    if (!outdir.empty()) {
        fs::create_directories(outdir);
        {
            std::ofstream f(fs::path(outdir) / "trajectory.csv");
            write_csv(f, rec, sc.inputs.plant.n(), sc.inputs.plant.m(), sc.inputs.plant.p());
        }
        {
            std::ofstream f(fs::path(outdir) / "events.csv");
            write_events_csv(f, rec);
        }
        {
            // figure-style series: norms of x and xi plus the zoom parameter
            std::ofstream f(fs::path(outdir) / "fig2.csv");
            f << "t,x_norm,xi_norm,mu\n";
            char buf[128];
            for (const auto& r : rec.rows) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.x.norm(),
                              r.xi.norm(), r.mu);
                f << buf;
            }
        }
        j["outdir"] = outdir;
    }
    std::cout << j.dump(2) << "\n";
    bool ok = rec.capture_time == 0.5 && rep.all_pass();
    for (const char* name : {"T", "Omega", "c", "tau_a_min"})
        ok = ok && j["constants"][name]["rel_error"].get<double>() <= 0.02;
    return ok ? 0 : 4;
}

int cmd_gen_signal(const std::string& path, std::uint64_t seed) {
    try {
        Scenario sc = load_scenario(path);
        std::vector<ModeId> ids;
        for (const auto& [id, md] : sc.inputs.plant.modes) ids.push_back(id);
        SwitchingSignal sig =
            generate_adt_signal(ids, sc.inputs.n0, sc.inputs.tau_a, sc.horizon, seed);
        AdtReport rep = verify_adt(sig, sc.inputs.n0, sc.inputs.tau_a, sc.horizon);
        json j;
        j["initial_mode"] = sig.initial_mode;
        j["switches"] = json::array();
        for (const auto& [t, m] : sig.switches) j["switches"].push_back(json::array({t, m}));
        j["adt_pass"] = rep.pass;
        std::cout << j.dump(2) << "\n";
        return rep.pass ? 0 : 4;
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}}.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantized output-feedback stabilization of switched linear systems"};
    app.require_subcommand(1);

    std::string cert_file;
    auto* c_cert = app.add_subcommand("certificate", "compute and print the design certificate");
    c_cert->add_option("file", cert_file, "scenario JSON")->required();

    std::vector<std::string> sim_files;
    std::string sim_out;
    bool sim_monitor = false;
    double sim_h = 0.0, sim_horizon = 0.0;
    unsigned sim_jobs = 1;
    auto* c_sim = app.add_subcommand("simulate", "simulate the closed loop, write trajectory CSV");
    c_sim->set_help_flag("--help", "print help");  // frees --h for the step size
    c_sim->add_option("file", sim_files, "scenario JSON file(s)")->required();
    c_sim->add_option("--out", sim_out, "output CSV path (directory when multiple files)");
    c_sim->add_flag("--monitor", sim_monitor, "run the invariant monitors, write *.report.json");
    c_sim->add_option("--h", sim_h, "override step size");
    c_sim->add_option("--horizon", sim_horizon, "override horizon");
    c_sim->add_option("--jobs", sim_jobs, "parallel workers for multiple scenarios");

    std::string repro_outdir;
    auto* c_repro = app.add_subcommand("reproduce-paper", "run the built-in reference example");
    c_repro->add_option("--outdir", repro_outdir, "directory for trajectory/fig2 CSV output");

    std::string gen_file;
    std::uint64_t gen_seed = 0;
    auto* c_gen = app.add_subcommand("gen-signal", "generate an ADT-compliant switching signal");
    c_gen->add_option("file", gen_file, "scenario JSON")->required();
    c_gen->add_option("--seed", gen_seed, "RNG seed")->required();

    CLI11_PARSE(app, argc, argv);

    if (c_cert->parsed()) return cmd_certificate(cert_file);
    if (c_sim->parsed())
        return cmd_simulate(sim_files, sim_out, sim_monitor, sim_h, sim_horizon, sim_jobs);
    if (c_repro->parsed()) return cmd_reproduce_paper(repro_outdir);
    if (c_gen->parsed()) return cmd_gen_signal(gen_file, gen_seed);
    return 1;
}
