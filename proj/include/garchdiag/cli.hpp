#pragma once

#include "garchdiag/diagnostics.hpp"
#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"
#include "garchdiag/io.hpp"
#include "garchdiag/kde.hpp"
#include "garchdiag/montecarlo.hpp"
#include "garchdiag/psp.hpp"
#include "garchdiag/qmle.hpp"
#include "garchdiag/variance_path.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace garchdiag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitComputation = 2;

namespace detail {

struct ModelFlags {
    std::string fit;
    std::string theta;
    std::size_t p = 1;
    std::size_t q = 1;
    std::uint64_t seed = 0;
};

inline void add_model_flags(CLI::App* sub, ModelFlags& m) {
    sub->add_option("--fit", m.fit, "Estimate theta by QMLE (only 'auto')")
        ->check(CLI::IsMember({"auto"}));
    sub->add_option("--theta", m.theta, "Known theta a0,a1..ap,b1..bq (skips fitting)");
    sub->add_option("--p", m.p, "ARCH order")->capture_default_str();
    sub->add_option("--q", m.q, "GARCH order")->capture_default_str();
    sub->add_option("--seed", m.seed, "QMLE restart seed")->capture_default_str();
}

struct ResolvedModel {
    GarchParams theta;
    std::optional<FitResult> fit;
};

inline ResolvedModel resolve_model(const ModelFlags& m, std::span<const double> x) {
    if (!m.fit.empty() && !m.theta.empty()) {
        throw Error(ErrorCode::UsageError, "--fit and --theta are mutually exclusive");
    }
    ResolvedModel out;
    if (!m.theta.empty()) {
        out.theta = validate_params(parse_theta(m.theta, m.p, m.q));
        return out;
    }
    FitOptions opts;
    opts.seed = m.seed;
    out.fit = fit(x, m.p, m.q, ParameterSpace{}, opts);
    out.theta = out.fit->theta_hat;
    return out;
}

inline void add_model_provenance(TestReport& rep, const ResolvedModel& model) {
    rep.provenance["theta"] = theta_string(model.theta);
    rep.provenance["estimator"] = model.fit ? "qmle" : "given";
    if (model.fit) rep.provenance["fit_converged"] = model.fit->converged ? "true" : "false";
}

// Writes to the --out path when given, else to `fallback`.
inline void emit(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::UsageError, "cannot write '" + path + "'");
    write(f);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::UsageError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

/**
 * @brief Runs one command line (without the program name).
 *
 * Exit status: 0 on success, 1 on usage errors, 2 on computation errors.
 */
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"GARCH residual diagnostics: simulate, fit, residual tests, KDE, Monte Carlo tables",
                 "garchdiag"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a GARCH(p,q) path X_0..X_n");
    std::string sim_theta, sim_out, sim_dist = "normal", sim_theta_prime;
    std::size_t sim_n = 0, sim_burn = 1000, sim_p = 1, sim_q = 1;
    std::uint64_t sim_seed = 0;
    double sim_dof = 8.0, sim_break = 0.5;
    std::optional<double> sim_mu;
    sim->add_option("--theta", sim_theta, "a0,a1..ap,b1..bq")->required();
    sim->add_option("--n", sim_n, "Observations after X_0")->required();
    sim->add_option("--seed", sim_seed, "Random seed")->required();
    sim->add_option("--burn-in", sim_burn, "Discarded initial steps")->capture_default_str();
    sim->add_option("--p", sim_p)->capture_default_str();
    sim->add_option("--q", sim_q)->capture_default_str();
    sim->add_option("--dist", sim_dist, "Innovation law")->check(CLI::IsMember({"normal", "t"}));
    sim->add_option("--dof", sim_dof, "Student-t degrees of freedom")->capture_default_str();
    sim->add_option("--mean-change", sim_mu, "Shift mu after the break");
    sim->add_option("--theta-prime", sim_theta_prime, "Post-break theta");
    sim->add_option("--break", sim_break, "Break fraction u*")->capture_default_str();
    sim->add_option("--out", sim_out, "Output CSV");

    // fit
    auto* fitc = app.add_subcommand("fit", "Gaussian QMLE of theta");
    std::string fit_in, fit_out;
    detail::ModelFlags fit_flags;
    fitc->add_option("--in", fit_in, "Series CSV")->required();
    fitc->add_option("--p", fit_flags.p)->capture_default_str();
    fitc->add_option("--q", fit_flags.q)->capture_default_str();
    fitc->add_option("--seed", fit_flags.seed, "Restart seed")->capture_default_str();
    fitc->add_option("--out", fit_out, "Report path");

    // residuals
    auto* resc = app.add_subcommand("residuals", "Residuals or their partial-sum processes");
    std::string res_in, res_out, res_process = "residuals";
    detail::ModelFlags res_flags;
    unsigned res_k = 1;
    std::optional<double> res_lambda;
    resc->add_option("--in", res_in, "Series CSV")->required();
    detail::add_model_flags(resc, res_flags);
    resc->add_option("--process", res_process, "residuals|raw|centered|cusum|self-normalized")
        ->check(CLI::IsMember({"residuals", "raw", "centered", "cusum", "self-normalized"}));
    resc->add_option("--k", res_k, "Moment order")->capture_default_str();
    resc->add_option("--lambda", res_lambda, "Reference lambda_k (default: normal)");
    resc->add_option("--out", res_out, "Output CSV");

    // test
    auto* testc = app.add_subcommand("test", "CUSUM or Jarque-Bera test on residuals");
    std::string test_in, test_out, test_stat;
    detail::ModelFlags test_flags;
    double test_level = 0.05;
    bool test_correct = false, test_drop = false;
    testc->add_option("--in", test_in, "Series CSV")->required();
    testc->add_option("--stat", test_stat, "Statistic")
        ->required()
        ->check(CLI::IsMember({"cusum1", "cusum2_1", "cusum2_2", "jb"}));
    testc->add_option("--level", test_level)->capture_default_str();
    testc->add_flag("--correct", test_correct, "Finite-sample JB critical value");
    testc->add_flag("--drop-scale", test_drop, "Omit sigma_hat in cusum1");
    detail::add_model_flags(testc, test_flags);
    testc->add_option("--out", test_out, "Report path");

    // kde
    auto* kdec = app.add_subcommand("kde", "Kernel density of the residuals");
    std::string kde_in, kde_out;
    detail::ModelFlags kde_flags;
    kdec->add_option("--in", kde_in, "Series CSV")->required();
    detail::add_model_flags(kdec, kde_flags);
    kdec->add_option("--out", kde_out, "Output CSV");

    // mc-table
    auto* mcc = app.add_subcommand("mc-table", "Monte Carlo size/power table");
    std::string mc_config, mc_out;
    std::optional<std::size_t> mc_reps;
    std::uint64_t mc_seed = 0;
    std::size_t mc_threads = 0;
    mcc->add_option("--config", mc_config, "Experiment config (JSON)")->required();
    mcc->add_option("--reps", mc_reps, "Override replicates");
    mcc->add_option("--seed", mc_seed, "Master seed")->required();
    mcc->add_option("--threads", mc_threads, "Workers (0 = all cores)")->capture_default_str();
    mcc->add_option("--out", mc_out, "Output CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*sim) {
            const auto theta = validate_params(parse_theta(sim_theta, sim_p, sim_q));
            const auto innov = sim_dist == "t" ? InnovationSpec::student_t(sim_dof)
                                               : InnovationSpec::normal();
            if (sim_mu && !sim_theta_prime.empty()) {
                throw Error(ErrorCode::UsageError,
                            "--mean-change and --theta-prime are mutually exclusive");
            }
            SimulatedPath path;
            if (sim_mu) {
                path = simulate_mean_change(theta, innov, *sim_mu, sim_break, sim_n, sim_burn, sim_seed);
            } else if (!sim_theta_prime.empty()) {
                const auto prime = validate_params(parse_theta(sim_theta_prime, sim_p, sim_q));
                path = simulate_variance_change(theta, prime, innov, sim_break, sim_n, sim_burn, sim_seed);
            } else {
                path = simulate(theta, innov, sim_n, sim_burn, sim_seed);
            }
            detail::emit(sim_out, out, [&](std::ostream& o) { write_series(o, path.x); });
        } else if (*fitc) {
            const auto x = load_series(fit_in, kMinSeriesRows);
            FitOptions opts;
            opts.seed = fit_flags.seed;
            const auto fr = fit(x, fit_flags.p, fit_flags.q, ParameterSpace{}, opts);
            detail::emit(fit_out, out, [&](std::ostream& o) { o << serialize(to_record(fr)); });
        } else if (*resc) {
            const auto x = load_series(res_in, kMinSeriesRows);
            const auto model = detail::resolve_model(res_flags, x);
            const auto res = residuals(model.theta, x);
            detail::emit(res_out, out, [&](std::ostream& o) {
                if (res_process == "residuals") {
                    o << "t,eps_hat,sigma2_hat\n";
                    for (std::size_t t = 1; t <= res.eps_hat.size(); ++t) {
                        o << t << ',' << garchdiag::detail::full_precision(res.eps_hat[t - 1]) << ','
                          << garchdiag::detail::full_precision(res.sigma2_hat[t - 1]) << '\n';
                    }
                    return;
                }
                StepProcess s;
                if (res_process == "raw") {
                    s = moment_psp(res.eps_hat, res_k);
                } else if (res_process == "centered") {
                    s = centered_psp(res.eps_hat, res_k);
                } else if (res_process == "cusum") {
                    s = cusum_transform(moment_psp(res.eps_hat, res_k));
                } else {
                    const double lambda = res_lambda ? *res_lambda : normal_lambdas(res_k)[res_k];
                    s = self_normalized_psp(res.eps_hat, res_k, lambda);
                }
                write_process_csv(o, s);
            });
        } else if (*testc) {
            const auto x = load_series(test_in);
            if (test_stat == "jb" && test_correct && x.size() < kMinSeriesRows) {
                throw Error(ErrorCode::CorrectionDomain,
                            "finite-sample JB correction needs n >= 100, got " +
                                std::to_string(x.empty() ? 0 : x.size() - 1));
            }
            if (x.size() < kMinSeriesRows) {
                throw Error(ErrorCode::TooShort, "series has " + std::to_string(x.size()) +
                                                     " rows, need at least " +
                                                     std::to_string(kMinSeriesRows));
            }
            const auto model = detail::resolve_model(test_flags, x);
            const auto res = residuals(model.theta, x);
            auto rep = run_statistic(parse_statistic(test_stat), res.eps_hat, test_level, test_drop,
                                     test_correct);
            detail::add_model_provenance(rep, model);
            detail::emit(test_out, out, [&](std::ostream& o) { o << serialize(to_record(rep)); });
        } else if (*kdec) {
            const auto x = load_series(kde_in, kMinSeriesRows);
            const auto model = detail::resolve_model(kde_flags, x);
            const auto est = kde(residuals(model.theta, x).eps_hat);
            detail::emit(kde_out, out, [&](std::ostream& o) { write_kde_csv(o, est); });
        } else if (*mcc) {
            auto config = parse_config(detail::read_file(mc_config));
            config.master_seed = mc_seed;
            if (mc_reps) config.replicates = *mc_reps;
            const auto table = run_experiment(config, mc_threads);
            detail::emit(mc_out, out, [&](std::ostream& o) { write_table_csv(o, table); });
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::UsageError ? kExitUsage : kExitComputation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }
    return kExitOk;
}

}  // namespace garchdiag::cli
