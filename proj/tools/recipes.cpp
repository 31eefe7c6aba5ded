#include "recipes.hpp"

#include <charconv>
#include <stdexcept>

#include "json.hpp"
#include "omht/mmd.hpp"
#include "omht/random.hpp"

namespace omht::cli {

namespace {

double pick(double override_value, double fallback) {
    return override_value >= 0.0 ? override_value : fallback;
}

GroundTruth make_truth(const RecipeParams& p, std::size_t s) {
    GroundTruth truth;
    truth.outliers.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        truth.outliers[i] = i;
    }
    truth.nominal = p.nominal();
    truth.anomalous = p.anomalous();
    return truth;
}

DetectorPlan base_plan(const RecipeParams& p, DetectorKind kind, std::size_t n) {
    DetectorPlan plan;
    plan.kind = kind;
    plan.kernel = p.kernel();
    plan.m = p.m;
    plan.n = n;
    plan.factor = p.factor;
    plan.t_max = p.t_max;
    plan.s = p.s;
    plan.horizon = p.horizon;
    return plan;
}

SweepPoint make_point(std::string detector, std::size_t n, DetectorPlan plan, GroundTruth truth) {
    SweepPoint point;
    point.detector = std::move(detector);
    point.param_name = "n";
    point.param_value = static_cast<double>(n);
    point.plan = std::move(plan);
    point.truth = std::move(truth);
    return point;
}

}  // namespace

KernelSpec RecipeParams::kernel() const { return KernelSpec::gaussian(sigma0); }

double RecipeParams::mmd2() const { return mmd2_population_gaussian(kernel(), nominal(), anomalous()); }

double RecipeParams::multi_limit() const {
    if (m < s + 2) {
        throw std::invalid_argument("recipe: need M - s - 1 >= 1");
    }
    const double ratio = static_cast<double>(s) / static_cast<double>(m - s - 1);
    return (1.0 - ratio) * (1.0 - ratio) * mmd2();
}

std::vector<std::size_t> length_grid(bool paper_scale) {
    if (paper_scale) {
        return {10, 15, 20, 25, 30, 35, 40, 45, 50};
    }
    return {10, 20, 30, 40, 50};
}

std::vector<SweepPoint> recipe_fig3(const RecipeParams& p) {
    const double g = p.mmd2();
    const GroundTruth truth = make_truth(p, 1);
    const auto grid = length_grid(p.paper_scale);
    std::vector<SweepPoint> out;

    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::FixedSingle, n);
        plan.lambda = pick(p.lambda, 0.5 * g);
        out.push_back(make_point("fixed", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::SequentialSingle, n);
        plan.lambda1 = pick(p.lambda1, 0.85 * g);
        plan.lambda2 = pick(p.lambda2, 0.01 * g);
        out.push_back(make_point("sequential", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::TwoPhaseSingle, n);
        plan.lambda1 = pick(p.lambda1, 0.6 * g);
        plan.lambda2 = pick(p.lambda2, 0.05 * g);
        plan.lambda3 = pick(p.lambda3, 0.5 * g);
        out.push_back(make_point("two_phase", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::Baseline, n);
        plan.lambda = pick(p.lambda, 0.6 * g);
        out.push_back(make_point("baseline", n, plan, truth));
    }
    return out;
}

std::vector<SweepPoint> recipe_fig4(const RecipeParams& p) {
    const double g = p.mmd2();
    const double lim = p.multi_limit();
    const GroundTruth truth = make_truth(p, p.s);
    const std::size_t n = 40;
    std::vector<SweepPoint> out;

    DetectorPlan plan = base_plan(p, DetectorKind::Baseline, n);
    plan.lambda = pick(p.lambda, 0.6 * g);
    out.push_back(make_point("baseline", n, plan, truth));

    plan = base_plan(p, DetectorKind::FixedMulti, n);
    plan.lambda = pick(p.lambda, 0.3 * g);
    out.push_back(make_point("fixed_multi", n, plan, truth));

    plan = base_plan(p, DetectorKind::TwoPhaseMulti, n);
    plan.lambda1 = pick(p.lambda1, 0.6 * lim);
    plan.lambda2 = pick(p.lambda2, 0.25 * lim);
    plan.lambda3 = pick(p.lambda3, 0.3 * g);
    out.push_back(make_point("two_phase_multi", n, plan, truth));

    plan = base_plan(p, DetectorKind::SequentialMulti, n);
    plan.lambda1 = pick(p.lambda1, 0.8 * lim);
    plan.lambda2 = pick(p.lambda2, 0.1 * lim);
    out.push_back(make_point("sequential_multi", n, plan, truth));

    return out;
}

std::vector<SweepPoint> recipe_fig6(const RecipeParams& p) {
    const double g = p.mmd2();
    const double lim = p.multi_limit();
    const GroundTruth truth = make_truth(p, p.s);
    const auto grid = length_grid(p.paper_scale);
    std::vector<SweepPoint> out;

    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::FixedMulti, n);
        plan.lambda = pick(p.lambda, 0.3 * g);
        out.push_back(make_point("fixed_multi", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::SequentialMulti, n);
        plan.lambda1 = pick(p.lambda1, 0.8 * lim);
        plan.lambda2 = pick(p.lambda2, 0.1 * lim);
        out.push_back(make_point("sequential_multi", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::TwoPhaseMulti, n);
        plan.lambda1 = pick(p.lambda1, 0.6 * lim);
        plan.lambda2 = pick(p.lambda2, 0.25 * lim);
        plan.lambda3 = pick(p.lambda3, 0.3 * g);
        out.push_back(make_point("two_phase_multi", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::Baseline, n);
        plan.lambda = pick(p.lambda, 0.6 * g);
        out.push_back(make_point("baseline", n, plan, truth));
    }
    return out;
}

std::vector<SweepPoint> recipe_fig7(const RecipeParams& p) {
    const double g = p.mmd2();
    const GroundTruth truth = make_truth(p, p.s);
    const auto grid = length_grid(p.paper_scale);
    std::vector<SweepPoint> out;

    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::KnownCount, n);
        plan.lambda = pick(p.lambda, 0.3 * g);
        out.push_back(make_point("known_count", n, plan, truth));
    }
    for (std::size_t n : grid) {
        DetectorPlan plan = base_plan(p, DetectorKind::FixedMulti, n);
        plan.lambda = pick(p.lambda, 0.3 * g);
        out.push_back(make_point("fixed_multi", n, plan, truth));
    }
    return out;
}

std::vector<EstimatorRow> run_fig1(const RecipeParams& p, std::uint64_t base_seed) {
    const KernelSpec kernel = p.kernel();
    const GaussianSpec nominal = p.nominal();
    const std::vector<double> shifts = {1.0, p.anomalous_mean};
    const std::vector<std::size_t> checkpoints =
        p.paper_scale ? std::vector<std::size_t>{100, 250, 500, 1000, 2000, 4000, 6000}
                      : std::vector<std::size_t>{100, 500, 2000, 6000};
    const std::size_t seeds = 10;

    std::vector<EstimatorRow> rows;
    for (double shift : shifts) {
        const GaussianSpec shifted{shift, 1.0};
        const std::string series = "shift_" + fmt_double(shift);
        rows.push_back({"population", "shift", shift, 0, mmd2_population_gaussian(kernel, nominal, shifted)});
        for (std::size_t r = 0; r < seeds; ++r) {
            const std::uint64_t sd = base_seed + r;
            PairMmdState state(kernel);
            std::size_t next = 0;
            for (std::size_t a = 0; a < checkpoints.back(); ++a) {
                state.append_x(normal_sample(sd, 0, a, nominal));
                state.append_y(normal_sample(sd, 1, a, shifted));
                if (a + 1 == checkpoints[next]) {
                    rows.push_back({series, "n", static_cast<double>(a + 1), sd, state.mmd2()});
                    ++next;
                }
            }
        }
    }
    return rows;
}

std::vector<EstimatorRow> run_fig2(const RecipeParams& p, std::uint64_t base_seed) {
    const KernelSpec kernel = p.kernel();
    const GaussianSpec nominal = p.nominal();
    const std::vector<double> deltas = p.paper_scale
                                           ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}
                                           : std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0};
    const std::size_t n = 6000;
    const std::size_t seeds = 5;

    std::vector<EstimatorRow> rows;
    for (double delta : deltas) {
        const GaussianSpec shifted{delta, 1.0};
        rows.push_back({"population", "delta", delta, 0, mmd2_population_gaussian(kernel, nominal, shifted)});
    }
    for (std::size_t r = 0; r < seeds; ++r) {
        const std::uint64_t sd = base_seed + r;
        std::vector<double> x(n), z(n);
        for (std::size_t a = 0; a < n; ++a) {
            x[a] = normal_sample(sd, 0, a, nominal);
            z[a] = normal_sample(sd, 1, a, nominal);
        }
        std::vector<double> y(n);
        for (double delta : deltas) {
            for (std::size_t a = 0; a < n; ++a) {
                y[a] = z[a] + delta;
            }
            rows.push_back({"estimate", "delta", delta, sd, mmd2_unbiased(kernel, x, y)});
        }
    }
    return rows;
}

EstimatorResult run_fig5(const RecipeParams& p, std::size_t trials, std::uint64_t base_seed, unsigned threads) {
    const double g = p.mmd2();
    DetectorPlan plan = base_plan(p, DetectorKind::SequentialSingle, 20);
    plan.lambda1 = pick(p.lambda1, 0.85 * g);
    plan.lambda2 = pick(p.lambda2, 0.01 * g);
    const GroundTruth truth = make_truth(p, 1);

    const std::vector<TrialOutcome> records = run_trial_records(plan, truth, trials, base_seed, threads);
    EstimatorResult out;
    out.rows.reserve(records.size());
    for (std::size_t t = 0; t < records.size(); ++t) {
        if (records[t].failed) {
            ++out.failures;
            continue;
        }
        out.rows.push_back({"tau", "trial", static_cast<double>(t), base_seed + t,
                            static_cast<double>(records[t].tau)});
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string summary_csv(const std::vector<SweepRecord>& records) {
    std::string out(summary_columns);
    out += '\n';
    for (const SweepRecord& r : records) {
        const ErrorSummary& s = r.summary;
        out += r.point.detector;
        out += ',';
        out += r.point.param_name;
        out += ',';
        out += fmt_double(r.point.param_value);
        out += ',';
        out += fmt_double(s.mean_tau);
        out += ',';
        out += fmt_double(s.tau_std);
        out += ',';
        out += fmt_double(s.err_misclass);
        out += ',';
        out += fmt_double(s.err_false_reject);
        out += ',';
        out += fmt_double(s.err_false_alarm);
        out += ',';
        out += fmt_double(s.err_sum);
        out += ',';
        out += fmt_double(s.ci_half_width);
        out += ',';
        out += fmt_double(s.mean_wall_ms);
        out += ',';
        out += std::to_string(s.horizon_stops);
        out += ',';
        out += std::to_string(s.trials);
        out += ',';
        out += std::to_string(s.base_seed);
        out += '\n';
    }
    return out;
}

std::string estimator_csv(const std::vector<EstimatorRow>& rows) {
    std::string out(estimator_columns);
    out += '\n';
    for (const EstimatorRow& r : rows) {
        out += r.series;
        out += ',';
        out += r.param_name;
        out += ',';
        out += fmt_double(r.param_value);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += fmt_double(r.value);
        out += '\n';
    }
    return out;
}

std::string summary_json(const std::vector<SweepRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRecord& r : records) {
        const ErrorSummary& s = r.summary;
        arr.push_back({{"detector", r.point.detector},
                       {"param_name", r.point.param_name},
                       {"param_value", r.point.param_value},
                       {"mean_tau", s.mean_tau},
                       {"tau_std", s.tau_std},
                       {"err_misclass", s.err_misclass},
                       {"err_false_reject", s.err_false_reject},
                       {"err_false_alarm", s.err_false_alarm},
                       {"err_sum", s.err_sum},
                       {"ci_half_width", s.ci_half_width},
                       {"wall_ms", s.mean_wall_ms},
                       {"horizon_stops", s.horizon_stops},
                       {"trials", s.trials},
                       {"seed", s.base_seed}});
    }
    return arr.dump(2) + "\n";
}

std::string estimator_json(const std::vector<EstimatorRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EstimatorRow& r : rows) {
        arr.push_back({{"series", r.series},
                       {"param_name", r.param_name},
                       {"param_value", r.param_value},
                       {"seed", r.seed},
                       {"value", r.value}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace omht::cli
