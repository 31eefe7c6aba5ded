#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omht/exponents.hpp"
#include "omht/mmd.hpp"
#include "recipes.hpp"

namespace {

using namespace omht;
using namespace omht::cli;

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number '" + s + "'");
    }
    if (pos != s.size()) {
        throw std::invalid_argument("cannot parse number '" + s + "'");
    }
    return v;
}

// Threshold expressions: a plain number, "mmd2", or "<number>*mmd2".
double resolve_threshold(const std::string& raw, double mmd2v) {
    const std::string expr = strip(raw);
    if (expr == "mmd2") {
        return mmd2v;
    }
    const std::size_t star = expr.find('*');
    if (star != std::string::npos) {
        const std::string lhs = strip(expr.substr(0, star));
        const std::string rhs = strip(expr.substr(star + 1));
        if (rhs == "mmd2") {
            return parse_number(lhs) * mmd2v;
        }
        if (lhs == "mmd2") {
            return parse_number(rhs) * mmd2v;
        }
        throw std::invalid_argument("threshold must be <number>, mmd2, or <number>*mmd2, got '" + raw + "'");
    }
    return parse_number(expr);
}

std::vector<double> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open sample file " + path);
    }
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        double v = 0.0;
        try {
            v = parse_number(t);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": invalid sample line '" + t + "'");
        }
        values.push_back(v);
    }
    if (values.size() < 2) {
        throw std::runtime_error("insufficient samples in " + path + " (need at least 2 per side)");
    }
    return values;
}

GaussianSpec gaussian_from(const std::vector<double>& mv, const char* flag) {
    if (mv.size() != 2) {
        throw std::invalid_argument(std::string(flag) + " needs exactly mean,variance");
    }
    GaussianSpec g{mv[0], mv[1]};
    g.validate();
    return g;
}

void print_report(const ExponentReport& r) {
    std::cout << "misclass=" << fmt_double(r.misclass) << "\n";
    std::cout << "misclass_valid=" << (r.misclass_valid ? 1 : 0) << "\n";
    std::cout << "false_reject=" << fmt_double(r.false_reject) << "\n";
    std::cout << "false_reject_valid=" << (r.false_reject_valid ? 1 : 0) << "\n";
    std::cout << "false_alarm=" << fmt_double(r.false_alarm) << "\n";
    std::cout << "false_alarm_valid=" << (r.false_alarm_valid ? 1 : 0) << "\n";
    std::cout << "bayesian=" << fmt_double(r.bayesian()) << "\n";
}

void write_text(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file " + path);
    }
    out << body;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MMD-based outlier hypothesis testing toolkit"};
    app.require_subcommand(1);

    // ---- mmd ----
    CLI::App* mmd_cmd = app.add_subcommand("mmd", "Squared MMD values, population or estimated");
    mmd_cmd->require_subcommand(1);

    std::vector<double> pop_fn{0.0, 1.0};
    std::vector<double> pop_fa{1.5, 1.0};
    double pop_sigma = 1.0;
    CLI::App* pop_cmd = mmd_cmd->add_subcommand("pop", "Closed-form population value for two Gaussians");
    pop_cmd->add_option("--fn", pop_fn, "nominal Gaussian as mean,variance")->delimiter(',');
    pop_cmd->add_option("--fa", pop_fa, "anomalous Gaussian as mean,variance")->delimiter(',');
    pop_cmd->add_option("--sigma", pop_sigma, "Gaussian kernel bandwidth");

    std::string est_file1;
    std::string est_file2;
    double est_sigma = 1.0;
    CLI::App* est_cmd = mmd_cmd->add_subcommand("est", "Unbiased estimate from two sample files");
    est_cmd->add_option("--file1", est_file1, "first sample file, one real per line")
        ->required()
        ->check(CLI::ExistingFile);
    est_cmd->add_option("--file2", est_file2, "second sample file, one real per line")
        ->required()
        ->check(CLI::ExistingFile);
    est_cmd->add_option("--sigma", est_sigma, "Gaussian kernel bandwidth");

    // ---- exponents ----
    CLI::App* exp_cmd = app.add_subcommand("exponents", "Error-exponent lower bounds and their best Bayesian values");
    std::size_t exp_m = 10;
    std::size_t exp_t = 0;
    std::size_t exp_s = 1;
    double exp_k0 = 1.0;
    std::string exp_mmd2;
    std::vector<double> exp_fn{0.0, 1.0};
    std::vector<double> exp_fa{1.5, 1.0};
    double exp_sigma = 1.0;
    std::string exp_test = "fixed";
    std::string exp_lambda = "0.5*mmd2";
    std::string exp_lambda1 = "0.8*mmd2";
    std::string exp_lambda2 = "0.1*mmd2";
    std::string exp_lambda3 = "0.5*mmd2";
    std::size_t exp_k = 4;
    bool exp_table1 = false;
    bool exp_table2 = false;
    std::string exp_eps = "0.1*mmd2";
    exp_cmd->add_option("--m", exp_m, "number of sequences");
    exp_cmd->add_option("--t", exp_t, "outlier cap T, 0 for ceil(M/2)-1");
    exp_cmd->add_option("--s", exp_s, "true outlier count");
    exp_cmd->add_option("--k0", exp_k0, "kernel bound");
    exp_cmd->add_option("--mmd2", exp_mmd2, "population separation; computed from --fn/--fa/--sigma when empty");
    exp_cmd->add_option("--fn", exp_fn, "nominal Gaussian as mean,variance")->delimiter(',');
    exp_cmd->add_option("--fa", exp_fa, "anomalous Gaussian as mean,variance")->delimiter(',');
    exp_cmd->add_option("--sigma", exp_sigma, "Gaussian kernel bandwidth");
    exp_cmd->add_option("--test", exp_test, "which test to bound")
        ->check(CLI::IsMember({"fixed", "sequential", "two_phase", "fixed_multi", "sequential_multi",
                               "two_phase_multi", "known_s"}));
    exp_cmd->add_option("--lambda", exp_lambda, "fixed-style threshold expression");
    exp_cmd->add_option("--lambda1", exp_lambda1, "upper threshold expression");
    exp_cmd->add_option("--lambda2", exp_lambda2, "lower threshold expression");
    exp_cmd->add_option("--lambda3", exp_lambda3, "second-phase threshold expression");
    exp_cmd->add_option("--k", exp_k, "two-phase length factor K");
    exp_cmd->add_flag("--table1", exp_table1, "print best Bayesian exponents, single-outlier family");
    exp_cmd->add_flag("--table2", exp_table2, "print best Bayesian exponents, multi-outlier family");
    exp_cmd->add_option("--eps", exp_eps, "pinned reject margin expression for --table1/--table2");

    // ---- simulate ----
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo experiment recipes");
    std::string sim_config;
    sim_cmd->add_option("--config", sim_config, "flat key=value config file; command-line flags win");
    std::string sim_recipe;
    std::size_t sim_trials = 2000;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    bool sim_paper = false;
    std::string sim_format = "csv";
    unsigned sim_threads = 0;
    std::size_t sim_max_failed = 0;
    std::string sim_lambda;
    std::string sim_lambda1;
    std::string sim_lambda2;
    std::string sim_lambda3;
    std::size_t sim_factor = 4;
    std::size_t sim_m = 10;
    std::size_t sim_tmax = 0;
    std::size_t sim_s = 2;
    std::size_t sim_horizon = 0;
    double sim_anomalous_mean = 1.5;
    double sim_sigma = 1.0;
    sim_cmd->add_option("--recipe", sim_recipe, "experiment recipe")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}));
    sim_cmd->add_option("--trials", sim_trials, "Monte Carlo repetitions per grid point");
    sim_cmd->add_option("--seed", sim_seed, "base seed");
    sim_cmd->add_option("--out", sim_out, "output file; stdout when empty");
    sim_cmd->add_flag("--paper-scale", sim_paper, "denser grids and 15000 trials unless --trials is given");
    sim_cmd->add_option("--format", sim_format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sim_cmd->add_option("--threads", sim_threads, "worker threads; 0 consults OMHT_THREADS, default 1");
    sim_cmd->add_option("--max-failed", sim_max_failed, "tolerated failed trials before exit code 3");
    sim_cmd->add_option("--lambda", sim_lambda, "override for every fixed-style threshold (fixed, baseline, known_count)");
    sim_cmd->add_option("--lambda1", sim_lambda1, "override for the sequential/two-phase upper threshold");
    sim_cmd->add_option("--lambda2", sim_lambda2, "override for the sequential/two-phase lower threshold");
    sim_cmd->add_option("--lambda3", sim_lambda3, "override for the two-phase second-phase threshold");
    sim_cmd->add_option("--factor", sim_factor, "two-phase length factor K");
    sim_cmd->add_option("--m", sim_m, "number of sequences");
    sim_cmd->add_option("--t-max", sim_tmax, "outlier cap T, 0 for ceil(M/2)-1");
    sim_cmd->add_option("--s", sim_s, "true outlier count for the multi-outlier recipes");
    sim_cmd->add_option("--horizon", sim_horizon, "sequential horizon, 0 for 100*N");
    sim_cmd->add_option("--anomalous-mean", sim_anomalous_mean, "mean of the anomalous Gaussian");
    sim_cmd->add_option("--sigma", sim_sigma, "Gaussian kernel bandwidth");

    // Keys mirror the option names; a key is skipped when the same option was
    // given on the command line, so flags always win.
    bool cfg_gave_trials = false;
    const auto apply_sim_config = [&](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
        const auto to_size = [](const std::string& v) { return static_cast<std::size_t>(std::stoull(v)); };
        const auto to_bool = [](const std::string& v) { return v == "1" || v == "true" || v == "on"; };
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip(line);
            if (t.empty() || t[0] == '#') continue;
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("config line " + std::to_string(lineno) + " is not key=value");
            }
            const std::string key = strip(t.substr(0, eq));
            const std::string value = strip(t.substr(eq + 1));
            try {
                if (key == "trials") {
                    if (sim_cmd->count("--trials") == 0) {
                        sim_trials = to_size(value);
                        cfg_gave_trials = true;
                    }
                } else if (key == "seed") {
                    if (sim_cmd->count("--seed") == 0) sim_seed = std::stoull(value);
                } else if (key == "out") {
                    if (sim_cmd->count("--out") == 0) sim_out = value;
                } else if (key == "paper-scale") {
                    if (sim_cmd->count("--paper-scale") == 0) sim_paper = to_bool(value);
                } else if (key == "format") {
                    if (value != "csv" && value != "json") throw std::invalid_argument("format must be csv or json");
                    if (sim_cmd->count("--format") == 0) sim_format = value;
                } else if (key == "threads") {
                    if (sim_cmd->count("--threads") == 0) sim_threads = static_cast<unsigned>(std::stoul(value));
                } else if (key == "max-failed") {
                    if (sim_cmd->count("--max-failed") == 0) sim_max_failed = to_size(value);
                } else if (key == "lambda") {
                    if (sim_cmd->count("--lambda") == 0) sim_lambda = value;
                } else if (key == "lambda1") {
                    if (sim_cmd->count("--lambda1") == 0) sim_lambda1 = value;
                } else if (key == "lambda2") {
                    if (sim_cmd->count("--lambda2") == 0) sim_lambda2 = value;
                } else if (key == "lambda3") {
                    if (sim_cmd->count("--lambda3") == 0) sim_lambda3 = value;
                } else if (key == "factor") {
                    if (sim_cmd->count("--factor") == 0) sim_factor = to_size(value);
                } else if (key == "m") {
                    if (sim_cmd->count("--m") == 0) sim_m = to_size(value);
                } else if (key == "t-max") {
                    if (sim_cmd->count("--t-max") == 0) sim_tmax = to_size(value);
                } else if (key == "s") {
                    if (sim_cmd->count("--s") == 0) sim_s = to_size(value);
                } else if (key == "horizon") {
                    if (sim_cmd->count("--horizon") == 0) sim_horizon = to_size(value);
                } else if (key == "anomalous-mean") {
                    if (sim_cmd->count("--anomalous-mean") == 0) sim_anomalous_mean = parse_number(value);
                } else if (key == "sigma") {
                    if (sim_cmd->count("--sigma") == 0) sim_sigma = parse_number(value);
                } else {
                    throw std::invalid_argument("unknown key");
                }
            } catch (const std::exception& e) {
                throw std::invalid_argument("config key '" + key + "': " + e.what());
            }
        }
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*pop_cmd) {
            const KernelSpec kernel = KernelSpec::gaussian(pop_sigma);
            const GaussianSpec fn = gaussian_from(pop_fn, "--fn");
            const GaussianSpec fa = gaussian_from(pop_fa, "--fa");
            std::cout << fmt_double(mmd2_population_gaussian(kernel, fn, fa)) << "\n";
            return 0;
        }
        if (*est_cmd) {
            const KernelSpec kernel = KernelSpec::gaussian(est_sigma);
            const std::vector<double> x = read_samples(est_file1);
            const std::vector<double> y = read_samples(est_file2);
            std::cout << fmt_double(mmd2_unbiased(kernel, x, y)) << "\n";
            return 0;
        }
        if (*exp_cmd) {
            const double m2 = exp_mmd2.empty()
                                  ? mmd2_population_gaussian(KernelSpec::gaussian(exp_sigma),
                                                             gaussian_from(exp_fn, "--fn"),
                                                             gaussian_from(exp_fa, "--fa"))
                                  : parse_number(exp_mmd2);
            ProblemParams pp;
            pp.m = exp_m;
            pp.t_max = exp_t == 0 ? max_outliers(exp_m) : exp_t;
            pp.s = exp_s;
            pp.k0 = exp_k0;
            pp.mmd2 = m2;
            pp.validate();
            std::cout << "mmd2=" << fmt_double(m2) << "\n";
            if (exp_table1 || exp_table2) {
                const double eps = resolve_threshold(exp_eps, m2);
                std::cout << "eps=" << fmt_double(eps) << "\n";
                if (exp_table1) {
                    std::cout << "table1_fixed=" << fmt_double(best_bayesian_fixed_single(pp)) << "\n";
                    std::cout << "table1_sequential=" << fmt_double(best_bayesian_seq_single(pp, eps)) << "\n";
                    std::cout << "table1_two_phase=" << fmt_double(best_bayesian_twophase_single(pp, eps, exp_k))
                              << "\n";
                }
                if (exp_table2) {
                    std::cout << "table2_fixed=" << fmt_double(best_bayesian_fixed_multi(pp)) << "\n";
                    std::cout << "table2_sequential=" << fmt_double(best_bayesian_seq_multi(pp, eps)) << "\n";
                    std::cout << "table2_two_phase=" << fmt_double(best_bayesian_twophase_multi(pp, eps, exp_k))
                              << "\n";
                }
                return 0;
            }
            const double la = resolve_threshold(exp_lambda, m2);
            const double l1 = resolve_threshold(exp_lambda1, m2);
            const double l2 = resolve_threshold(exp_lambda2, m2);
            const double l3 = resolve_threshold(exp_lambda3, m2);
            ExponentReport report;
            if (exp_test == "fixed") {
                report = bounds_fixed_single(pp, la);
            } else if (exp_test == "sequential") {
                report = bounds_seq_single(pp, l1, l2);
            } else if (exp_test == "two_phase") {
                report = bounds_twophase_single(pp, l1, l2, l3, exp_k);
            } else if (exp_test == "fixed_multi") {
                report = bounds_fixed_multi(pp, la);
            } else if (exp_test == "sequential_multi") {
                report = bounds_seq_multi(pp, l1, l2);
            } else if (exp_test == "two_phase_multi") {
                report = bounds_twophase_multi(pp, l1, l2, l3, exp_k);
            } else {
                report = bounds_known_s(pp, la);
            }
            print_report(report);
            return 0;
        }
        if (*sim_cmd) {
            if (!sim_config.empty()) apply_sim_config(sim_config);
            RecipeParams rp;
            rp.m = sim_m;
            rp.sigma0 = sim_sigma;
            rp.anomalous_mean = sim_anomalous_mean;
            rp.paper_scale = sim_paper;
            rp.factor = sim_factor;
            rp.t_max = sim_tmax;
            rp.s = sim_s;
            rp.horizon = sim_horizon;
            const double m2 = rp.mmd2();
            if (!sim_lambda.empty()) rp.lambda = resolve_threshold(sim_lambda, m2);
            if (!sim_lambda1.empty()) rp.lambda1 = resolve_threshold(sim_lambda1, m2);
            if (!sim_lambda2.empty()) rp.lambda2 = resolve_threshold(sim_lambda2, m2);
            if (!sim_lambda3.empty()) rp.lambda3 = resolve_threshold(sim_lambda3, m2);
            if (sim_paper && sim_cmd->count("--trials") == 0 && !cfg_gave_trials) {
                sim_trials = 15000;
            }

            std::ostringstream resolved;
            resolved << "recipe=" << sim_recipe << " mmd2=" << fmt_double(m2) << " trials=" << sim_trials
                     << " seed=" << sim_seed << " threads=" << sim_threads
                     << " lambda=" << (rp.lambda >= 0 ? fmt_double(rp.lambda) : "default")
                     << " lambda1=" << (rp.lambda1 >= 0 ? fmt_double(rp.lambda1) : "default")
                     << " lambda2=" << (rp.lambda2 >= 0 ? fmt_double(rp.lambda2) : "default")
                     << " lambda3=" << (rp.lambda3 >= 0 ? fmt_double(rp.lambda3) : "default");
            std::cerr << resolved.str() << "\n";

            std::string body;
            std::string schema;
            std::string columns;
            std::size_t failures = 0;
            std::size_t row_count = 0;
            if (sim_recipe == "fig1" || sim_recipe == "fig2" || sim_recipe == "fig5") {
                std::vector<EstimatorRow> rows;
                if (sim_recipe == "fig1") {
                    rows = run_fig1(rp, sim_seed);
                } else if (sim_recipe == "fig2") {
                    rows = run_fig2(rp, sim_seed);
                } else {
                    EstimatorResult res = run_fig5(rp, sim_trials, sim_seed, sim_threads);
                    rows = std::move(res.rows);
                    failures = res.failures;
                }
                row_count = rows.size();
                schema = "estimator";
                columns = estimator_columns;
                body = sim_format == "csv" ? estimator_csv(rows) : estimator_json(rows);
            } else {
                std::vector<SweepPoint> points;
                if (sim_recipe == "fig3") {
                    points = recipe_fig3(rp);
                } else if (sim_recipe == "fig4") {
                    points = recipe_fig4(rp);
                } else if (sim_recipe == "fig6") {
                    points = recipe_fig6(rp);
                } else {
                    points = recipe_fig7(rp);
                }
                const std::vector<SweepRecord> records = sweep(points, sim_trials, sim_seed, sim_threads);
                for (const SweepRecord& r : records) {
                    failures += r.summary.failures;
                }
                row_count = records.size();
                schema = "summary";
                columns = summary_columns;
                body = sim_format == "csv" ? summary_csv(records) : summary_json(records);
            }

            write_text(sim_out, body);
            if (!sim_out.empty()) {
                nlohmann::json thresholds;
                thresholds["lambda"] = rp.lambda >= 0 ? nlohmann::json(rp.lambda) : nlohmann::json(nullptr);
                thresholds["lambda1"] = rp.lambda1 >= 0 ? nlohmann::json(rp.lambda1) : nlohmann::json(nullptr);
                thresholds["lambda2"] = rp.lambda2 >= 0 ? nlohmann::json(rp.lambda2) : nlohmann::json(nullptr);
                thresholds["lambda3"] = rp.lambda3 >= 0 ? nlohmann::json(rp.lambda3) : nlohmann::json(nullptr);
                nlohmann::json meta{{"recipe", sim_recipe},
                                    {"schema", schema},
                                    {"columns", columns},
                                    {"format", sim_format},
                                    {"trials", sim_trials},
                                    {"base_seed", sim_seed},
                                    {"threads", sim_threads},
                                    {"paper_scale", sim_paper},
                                    {"m", sim_m},
                                    {"t_max", sim_tmax},
                                    {"s", sim_s},
                                    {"factor", sim_factor},
                                    {"horizon", sim_horizon},
                                    {"sigma0", sim_sigma},
                                    {"anomalous_mean", sim_anomalous_mean},
                                    {"mmd2", m2},
                                    {"thresholds", thresholds},
                                    {"rows", row_count},
                                    {"failures", failures}};
                write_text(sim_out + ".meta.json", meta.dump(2) + "\n");
            }
            if (failures > sim_max_failed) {
                std::cerr << "error: " << failures << " trials failed (tolerated " << sim_max_failed << ")\n";
                return 3;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
