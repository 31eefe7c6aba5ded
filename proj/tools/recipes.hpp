#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omht/simulation.hpp"

namespace omht::cli {

// Row of the estimator-study output (recipes fig1, fig2, fig5), one value per
// (series, parameter, seed).
struct EstimatorRow {
    std::string series;
    std::string param_name;
    double param_value = 0.0;
    std::uint64_t seed = 0;
    double value = 0.0;
};

struct EstimatorResult {
    std::vector<EstimatorRow> rows;
    std::size_t failures = 0;
};

// Experiment knobs shared by the recipes. Threshold fields left negative use
// the recipe's documented default; anything else was resolved from a flag or
// config entry and applies to every detector slot of that name.
struct RecipeParams {
    std::size_t m = 10;
    double sigma0 = 1.0;
    double anomalous_mean = 1.5;
    bool paper_scale = false;
    std::size_t factor = 4;
    std::size_t t_max = 0;
    std::size_t s = 2;
    std::size_t horizon = 0;
    double lambda = -1.0;
    double lambda1 = -1.0;
    double lambda2 = -1.0;
    double lambda3 = -1.0;

    KernelSpec kernel() const;
    GaussianSpec nominal() const { return {0.0, 1.0}; }
    GaussianSpec anomalous() const { return {anomalous_mean, 1.0}; }
    double mmd2() const;
    // separation the multi-outlier statistics converge to for s outliers
    double multi_limit() const;
};

std::vector<std::size_t> length_grid(bool paper_scale);

// fig3: single-outlier error rates vs length for the four tests.
std::vector<SweepPoint> recipe_fig3(const RecipeParams& p);
// fig4: wall-time comparison of the multi-outlier tests at n = N = 40.
std::vector<SweepPoint> recipe_fig4(const RecipeParams& p);
// fig6: multi-outlier error rates vs length, s = 2.
std::vector<SweepPoint> recipe_fig6(const RecipeParams& p);
// fig7: known outlier count vs unknown count, s = 2.
std::vector<SweepPoint> recipe_fig7(const RecipeParams& p);

// fig1: estimator convergence vs sample length, 10 seeds per series.
std::vector<EstimatorRow> run_fig1(const RecipeParams& p, std::uint64_t base_seed);
// fig2: estimate vs mean shift at n = 6000, 5 seeds per shift.
std::vector<EstimatorRow> run_fig2(const RecipeParams& p, std::uint64_t base_seed);
// fig5: per-trial stopping times of the sequential test at N = 20.
EstimatorResult run_fig5(const RecipeParams& p, std::size_t trials, std::uint64_t base_seed, unsigned threads);

// Shortest round-trip decimal form.
std::string fmt_double(double v);

std::string summary_csv(const std::vector<SweepRecord>& records);
std::string estimator_csv(const std::vector<EstimatorRow>& rows);
std::string summary_json(const std::vector<SweepRecord>& records);
std::string estimator_json(const std::vector<EstimatorRow>& rows);

inline constexpr const char* summary_columns =
    "detector,param_name,param_value,mean_tau,tau_std,err_misclass,err_false_reject,"
    "err_false_alarm,err_sum,ci_half_width,wall_ms,horizon_stops,trials,seed";
inline constexpr const char* estimator_columns = "series,param_name,param_value,seed,value";

}  // namespace omht::cli
