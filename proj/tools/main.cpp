// priorshift - adapt probabilistic classifier outputs to test-time class
// prior shift.
//
// Subcommands: adjust, estimate, online, evaluate, simulate, diagnose-split.
// Configuration is flags-only so recorded command lines replay exactly.
// Exit codes: 0 success, 1 validation/parse/io errors (one-line diagnostic
// on stderr), 2 usage errors. File outputs are written atomically.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "priorshift/priorshift.hpp"

namespace {

using priorshift::EstimatorConfig;
using priorshift::Method;
using priorshift::PriorFamily;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Method parse_method(const std::string& name) {
    if (name == "em") return Method::em;
    if (name == "pga-mle") return Method::pga_mle;
    if (name == "pga-map") return Method::pga_map;
    throw UsageError("unknown method '" + name + "'");
}

PriorFamily parse_family(const std::string& name) {
    if (name == "uniform") return PriorFamily::uniform;
    if (name == "exp") return PriorFamily::exponential;
    if (name == "linear") return PriorFamily::linear;
    throw UsageError("unknown prior family '" + name + "'");
}

// Flags shared by estimate, online and diagnose-split.
struct EstimatorFlags {
    std::string method = "em";
    double alpha = 1.0;
    double learning_rate = 0.0;
    std::size_t max_iterations = 1000;
    double tolerance = 1e-8;
    std::string init_file;
    bool full_trace = false;
    CLI::Option* alpha_option = nullptr;
    CLI::Option* lr_option = nullptr;
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& flags, bool with_init) {
    cmd->add_option("--method", flags.method, "Estimator: em, pga-mle or pga-map")
        ->required()
        ->check(CLI::IsMember({"em", "pga-mle", "pga-map"}));
    flags.alpha_option = cmd->add_option(
        "--alpha", flags.alpha, "Dirichlet concentration (>= 1), pga-map only");
    flags.lr_option = cmd->add_option(
        "--lr", flags.learning_rate, "PGA learning rate (default 0.1 / row count)");
    cmd->add_option("--max-iters", flags.max_iterations, "Iteration cap (default 1000)");
    cmd->add_option("--tol", flags.tolerance,
                    "Convergence threshold on max-abs estimate change (default 1e-8)");
    if (with_init)
        cmd->add_option("--init", flags.init_file,
                        "Initial estimate file (default: the training prior)");
    cmd->add_flag("--full-trace", flags.full_trace,
                  "Record the estimate on every trace iteration");
}

EstimatorConfig build_config(const EstimatorFlags& flags, const priorshift::PriorVector& train_prior) {
    EstimatorConfig config;
    config.method = parse_method(flags.method);
    if (config.method == Method::pga_map && flags.alpha_option->count() == 0)
        throw UsageError("--alpha is required with --method pga-map");
    config.alpha = flags.alpha;
    if (flags.lr_option->count() > 0) config.learning_rate = flags.learning_rate;
    config.max_iterations = flags.max_iterations;
    config.convergence_tol = flags.tolerance;
    if (!flags.init_file.empty())
        config.initial_estimate = priorshift::read_prior(flags.init_file);
    else
        config.initial_estimate = train_prior;
    config.full_trace = flags.full_trace;
    return config;
}

std::string summarize(const priorshift::EstimationResult& result) {
    const auto& last = result.trace.records.back();
    std::string line = "converged=";
    line += result.trace.termination == priorshift::Termination::converged ? "yes" : "no";
    line += " iterations=" + std::to_string(last.iteration);
    line += " objective=" + priorshift::format_value(last.objective);
    return line;
}

int run_adjust(const std::string& posteriors_file, const std::string& train_file,
               const std::string& test_file, const std::string& out_file) {
    const auto posteriors = priorshift::read_posteriors(posteriors_file);
    const auto train_prior = priorshift::read_prior(train_file);
    const auto test_prior = priorshift::read_prior(test_file);
    priorshift::write_posteriors(out_file,
                                 priorshift::adjust_posteriors(posteriors, train_prior, test_prior));
    return 0;
}

int run_estimate(const std::string& posteriors_file, const std::string& train_file,
                 const EstimatorFlags& flags, const std::string& trace_file,
                 const std::string& out_file) {
    const auto posteriors = priorshift::read_posteriors(posteriors_file);
    const auto train_prior = priorshift::read_prior(train_file);
    const auto config = build_config(flags, train_prior);
    const auto ratios = priorshift::compute_ratios(posteriors, train_prior);
    const auto result = priorshift::estimate(ratios, config);
    priorshift::write_prior(out_file, result.estimate);
    if (!trace_file.empty()) priorshift::write_trace(trace_file, result.trace);
    std::cout << "method=" << flags.method << ' ' << summarize(result) << '\n';
    return 0;
}

int run_online(const std::string& posteriors_file, const std::string& train_file,
               const EstimatorFlags& flags, std::size_t refit_every,
               const std::string& out_file, const std::string& snapshots_file) {
    const auto posteriors = priorshift::read_posteriors(posteriors_file);
    const auto train_prior = priorshift::read_prior(train_file);
    const auto config = build_config(flags, train_prior);
    const auto result = priorshift::online_adapt(posteriors, train_prior, config, refit_every);
    priorshift::write_posteriors(out_file, result.adjusted);
    if (!snapshots_file.empty()) {
        std::string payload = "row";
        for (std::size_t k = 0; k < train_prior.size(); ++k)
            payload += ",p" + std::to_string(k);
        payload += '\n';
        for (const auto& snapshot : result.snapshots) {
            payload += std::to_string(snapshot.first_row);
            for (std::size_t k = 0; k < snapshot.estimate.size(); ++k) {
                payload += ',';
                payload += priorshift::format_value(snapshot.estimate[k]);
            }
            payload += '\n';
        }
        priorshift::detail::write_file_atomic(snapshots_file, payload);
    }
    std::cout << "rows=" << result.adjusted.rows()
              << " refits=" << result.snapshots.size() - 1 << '\n';
    return 0;
}

int run_evaluate(const std::string& posteriors_file, const std::string& labels_file,
                 const std::string& train_file, const std::string& test_file,
                 const std::string& report_file) {
    if (train_file.empty() != test_file.empty())
        throw UsageError("--train-prior and --test-prior must be given together");
    auto posteriors = priorshift::read_posteriors(posteriors_file);
    const auto labels = priorshift::read_labels(labels_file, posteriors.cols());
    if (!train_file.empty()) {
        const auto train_prior = priorshift::read_prior(train_file);
        const auto test_prior = priorshift::read_prior(test_file);
        posteriors = priorshift::adjust_posteriors(posteriors, train_prior, test_prior);
    }
    const double accuracy = priorshift::top1_accuracy(posteriors, labels);
    const auto marginalized = priorshift::marginalized_prior(posteriors);
    const auto empirical = priorshift::empirical_prior(labels, posteriors.cols());
    const double hd = priorshift::hellinger(marginalized, empirical);
    std::string kl_text;
    try {
        kl_text = priorshift::format_value(priorshift::kl_divergence(empirical, marginalized));
    } catch (const priorshift::Error& e) {
        if (e.code() != priorshift::ErrorCode::absolute_continuity_violation) throw;
        kl_text = "inf";
    }
    const auto errors = priorshift::per_class_errors(posteriors, labels);

    std::string payload = "metric,value\n";
    payload += "top1_accuracy," + priorshift::format_value(accuracy) + '\n';
    payload += "hellinger_marginalized_vs_empirical," + priorshift::format_value(hd) + '\n';
    payload += "kl_empirical_vs_marginalized," + kl_text + '\n';
    payload += "class,count,expected_error,empirical_error\n";
    for (std::size_t k = 0; k < errors.size(); ++k) {
        payload += std::to_string(k) + ',' + std::to_string(errors[k].count) + ',';
        if (!errors[k].absent()) {
            payload += priorshift::format_value(errors[k].expected_error);
            payload += ',';
            payload += priorshift::format_value(errors[k].empirical_error);
        } else {
            payload += ',';
        }
        payload += '\n';
    }
    priorshift::detail::write_file_atomic(report_file, payload);
    std::cout << "accuracy=" << priorshift::format_value(accuracy) << '\n';
    return 0;
}

int run_simulate(std::size_t classes, std::size_t symbols, double separability,
                 const std::string& train_family, const std::string& test_family,
                 double train_rate, bool train_rate_set, double test_rate,
                 bool test_rate_set, std::size_t count, double outliers,
                 double outlier_alpha, std::uint64_t seed,
                 const std::string& out_posteriors, const std::string& out_labels,
                 const std::string& out_train, const std::string& out_test) {
    const PriorFamily train_pf = parse_family(train_family);
    const PriorFamily test_pf = parse_family(test_family);
    const auto default_rate = [](PriorFamily family) {
        return family == PriorFamily::linear ? 1.0 : 0.5;
    };
    if (!train_rate_set) train_rate = default_rate(train_pf);
    if (!test_rate_set) test_rate = default_rate(test_pf);

    const auto model = priorshift::make_model(classes, symbols, separability, seed,
                                              train_pf, train_rate);
    const auto test_prior = priorshift::family_prior(classes, test_pf, test_rate);
    // Model and sampling consume distinct streams so regenerating with a new
    // sample count keeps the same model.
    const auto dataset = priorshift::sample_testset(model, test_prior, count, seed + 1,
                                                    outliers, outlier_alpha);
    priorshift::write_posteriors(out_posteriors, dataset.posteriors);
    priorshift::write_labels(out_labels, dataset.labels);
    priorshift::write_prior(out_train, model.train_prior);
    priorshift::write_prior(out_test, test_prior);
    return 0;
}

int run_diagnose_split(const std::string& posteriors_file, const std::string& train_file,
                       const EstimatorFlags& flags, double split_fraction,
                       std::uint64_t seed, const std::string& out_file) {
    const auto posteriors = priorshift::read_posteriors(posteriors_file);
    const auto train_prior = priorshift::read_prior(train_file);
    const auto config = build_config(flags, train_prior);
    const auto ratios = priorshift::compute_ratios(posteriors, train_prior);
    const auto diagnostic =
        priorshift::split_likelihood_diagnostic(ratios, config, split_fraction, seed);

    std::string payload = "iteration,optimization_loglik,holdout_loglik\n";
    for (std::size_t t = 0; t < diagnostic.trace.records.size(); ++t) {
        payload += std::to_string(diagnostic.trace.records[t].iteration);
        payload += ',' + priorshift::format_value(diagnostic.optimize_loglik[t]);
        payload += ',' + priorshift::format_value(diagnostic.holdout_loglik[t]);
        payload += '\n';
    }
    priorshift::detail::write_file_atomic(out_file, payload);
    std::cout << "iterations=" << diagnostic.trace.records.back().iteration
              << " optimization_rows=" << diagnostic.optimize_rows.size()
              << " holdout_rows=" << diagnostic.holdout_rows.size()
              << " final_holdout_loglik="
              << priorshift::format_value(diagnostic.holdout_loglik.back()) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adapt probabilistic classifier outputs to test-time class prior shift"};
    app.require_subcommand(1);

    // adjust
    std::string adj_posteriors, adj_train, adj_test, adj_out;
    auto* adjust = app.add_subcommand("adjust", "Reweight posteriors for known new priors");
    adjust->add_option("--posteriors", adj_posteriors, "Posterior CSV")->required();
    adjust->add_option("--train-prior", adj_train, "Training prior file")->required();
    adjust->add_option("--test-prior", adj_test, "New prior file")->required();
    adjust->add_option("--out", adj_out, "Output posterior CSV")->required();

    // estimate
    std::string est_posteriors, est_train, est_trace, est_out;
    EstimatorFlags est_flags;
    auto* estimate = app.add_subcommand("estimate", "Estimate unknown test-set priors");
    estimate->add_option("--posteriors", est_posteriors, "Posterior CSV")->required();
    estimate->add_option("--train-prior", est_train, "Training prior file")->required();
    add_estimator_flags(estimate, est_flags, true);
    estimate->add_option("--trace", est_trace, "Write the per-iteration trace CSV here");
    estimate->add_option("--out", est_out, "Output prior file")->required();

    // online
    std::string onl_posteriors, onl_train, onl_out, onl_snapshots;
    std::size_t onl_refit_every = 10;
    EstimatorFlags onl_flags;
    auto* online = app.add_subcommand(
        "online", "Adjust rows sequentially with priors estimated from seen rows");
    online->add_option("--posteriors", onl_posteriors, "Posterior CSV in arrival order")
        ->required();
    online->add_option("--train-prior", onl_train, "Training prior file")->required();
    add_estimator_flags(online, onl_flags, false);
    online->add_option("--refit-every", onl_refit_every,
                       "Refit the estimate every R arrivals (default 10)");
    online->add_option("--out", onl_out, "Adjusted posterior CSV")->required();
    online->add_option("--snapshots", onl_snapshots, "Write estimate snapshots CSV here");

    // evaluate
    std::string ev_posteriors, ev_labels, ev_train, ev_test, ev_report;
    auto* evaluate = app.add_subcommand("evaluate", "Score posteriors against labels");
    evaluate->add_option("--posteriors", ev_posteriors, "Posterior CSV")->required();
    evaluate->add_option("--labels", ev_labels, "Ground-truth label file")->required();
    evaluate->add_option("--train-prior", ev_train,
                         "Adjust with this training prior before scoring");
    evaluate->add_option("--test-prior", ev_test,
                         "Adjust with this new prior before scoring");
    evaluate->add_option("--report", ev_report, "Report CSV")->required();

    // simulate
    std::size_t sim_classes = 0, sim_symbols = 0, sim_count = 0;
    double sim_separability = 0.0, sim_outliers = 0.0, sim_outlier_alpha = 1.0;
    double sim_train_rate = 0.5, sim_test_rate = 0.5;
    std::uint64_t sim_seed = 0;
    std::string sim_train_family = "uniform", sim_test_family = "uniform";
    std::string sim_out_posteriors, sim_out_labels, sim_out_train, sim_out_test;
    auto* simulate = app.add_subcommand(
        "simulate", "Generate exactly calibrated classifier outputs under prior shift");
    simulate->add_option("--classes", sim_classes, "Class count K")->required();
    simulate->add_option("--symbols", sim_symbols, "Observation symbol count M >= K")
        ->required();
    simulate->add_option("--separability", sim_separability,
                         "Mass each class keeps on its own symbol, in (0, 1]")
        ->required();
    simulate->add_option("--train-prior-family", sim_train_family,
                         "uniform, exp or linear (default uniform)")
        ->check(CLI::IsMember({"uniform", "exp", "linear"}));
    simulate->add_option("--test-prior-family", sim_test_family,
                         "uniform, exp or linear (default uniform)")
        ->check(CLI::IsMember({"uniform", "exp", "linear"}));
    auto* train_rate_opt = simulate->add_option(
        "--train-prior-rate", sim_train_rate, "Decay rate (default 0.5 exp, 1.0 linear)");
    auto* test_rate_opt = simulate->add_option(
        "--test-prior-rate", sim_test_rate, "Decay rate (default 0.5 exp, 1.0 linear)");
    simulate->add_option("--n", sim_count, "Sample count")->required();
    simulate->add_option("--outliers", sim_outliers,
                         "Fraction of rows replaced by Dirichlet noise (default 0)");
    simulate->add_option("--outlier-alpha", sim_outlier_alpha,
                         "Outlier Dirichlet concentration (default 1; below 1 gives "
                         "confident random rows)");
    simulate->add_option("--seed", sim_seed, "Generator seed")->required();
    simulate->add_option("--out-posteriors", sim_out_posteriors, "Posterior CSV")->required();
    simulate->add_option("--out-labels", sim_out_labels, "Label file")->required();
    simulate->add_option("--out-train-prior", sim_out_train, "Training prior file")->required();
    simulate->add_option("--out-test-prior", sim_out_test, "Sampling prior file")->required();

    // diagnose-split
    std::string ds_posteriors, ds_train, ds_out;
    double ds_fraction = 0.5;
    std::uint64_t ds_seed = 0;
    EstimatorFlags ds_flags;
    auto* diagnose = app.add_subcommand(
        "diagnose-split", "Estimate on part of the rows, score likelihood on both parts");
    diagnose->add_option("--posteriors", ds_posteriors, "Posterior CSV")->required();
    diagnose->add_option("--train-prior", ds_train, "Training prior file")->required();
    add_estimator_flags(diagnose, ds_flags, true);
    diagnose->add_option("--split-fraction", ds_fraction,
                         "Fraction of rows used for optimization, in (0, 1)")
        ->required();
    diagnose->add_option("--seed", ds_seed, "Partition seed")->required();
    diagnose->add_option("--out", ds_out, "Paired likelihood trace CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (adjust->parsed()) return run_adjust(adj_posteriors, adj_train, adj_test, adj_out);
        if (estimate->parsed())
            return run_estimate(est_posteriors, est_train, est_flags, est_trace, est_out);
        if (online->parsed())
            return run_online(onl_posteriors, onl_train, onl_flags, onl_refit_every, onl_out,
                              onl_snapshots);
        if (evaluate->parsed())
            return run_evaluate(ev_posteriors, ev_labels, ev_train, ev_test, ev_report);
        if (simulate->parsed())
            return run_simulate(sim_classes, sim_symbols, sim_separability, sim_train_family,
                                sim_test_family, sim_train_rate, train_rate_opt->count() > 0,
                                sim_test_rate, test_rate_opt->count() > 0, sim_count,
                                sim_outliers, sim_outlier_alpha, sim_seed, sim_out_posteriors,
                                sim_out_labels, sim_out_train, sim_out_test);
        if (diagnose->parsed())
            return run_diagnose_split(ds_posteriors, ds_train, ds_flags, ds_fraction, ds_seed,
                                      ds_out);
    } catch (const UsageError& e) {
        std::cerr << "priorshift: " << e.what() << '\n';
        return 2;
    } catch (const priorshift::Error& e) {
        std::cerr << "priorshift: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "priorshift: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
