#pragma once

#include <array>
#include <cstdint>

#include "iaei/csv.hpp"
#include "iaei/imputation.hpp"
#include "iaei/types.hpp"

namespace iaei {

struct CvSpec {
    std::vector<Method> methods;
    std::vector<double> gamma_grid;
    PenaltyVariant variant = PenaltyVariant::Basic;
    double mask_rate = 0.85;
    std::string env_column;  // provenance: the column that defines environments
    std::uint64_t seed = 0;
    int max_support_dim = 20;
    int threads = 1;
};

struct CvFoldTrace {
    int month = 0;
    // [method][gamma][day]: mean squared hourly error for that calendar day,
    // NaN when the day is absent from the month.
    std::vector<std::vector<std::array<double, 31>>> daily_mse;
};

struct CvResult {
    std::vector<Method> methods;
    std::vector<double> gamma_grid;
    std::vector<int> fold_months;
    std::array<int, 31> day_fold_counts{};  // folds that contain each day
    // Averaged across the folds containing each day.
    std::vector<std::vector<std::array<double, 31>>> daily_mse;  // [method][gamma][day]
    std::vector<std::array<double, 31>> chosen_gamma;            // [method][day]
    std::vector<std::array<double, 31>> best_daily_mse;          // [method][day]
    std::vector<CvFoldTrace> folds;
    // provenance
    std::string env_column;
    double mask_rate = 0.0;
    std::uint64_t seed = 0;
    std::string imputer_description;
};

// Month-of-year cross validation: each fold holds out one month, fits every
// method on the remaining months (environments given by the table's env
// column, outcomes masked at mask_rate except for the oracle method), and
// scores held-out hours against the true labels, aggregated per calendar day.
// `imputer` is the rule trained on designated history; it may be null when no
// method needs predictions.
CvResult monthly_cv(const Table& eval_data, const ImputationModel* imputer,
                    const CvSpec& spec);

// Per-day argmin over the gamma grid; ties pick the smaller gamma. Days with
// no data stay NaN.
std::array<double, 31> select_gamma(
    const std::vector<double>& gamma_grid,
    const std::vector<std::array<double, 31>>& per_gamma_daily);

// Sorted daily errors with normalized ranks in (0, 1]; monotone by
// construction.
std::vector<std::pair<double, double>> daily_quantile_curve(const CvResult& result,
                                                            size_t method_index);

}  // namespace iaei
