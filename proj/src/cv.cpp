#include "iaei/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "iaei/estimators.hpp"
#include "iaei/parallel.hpp"
#include "iaei/rng.hpp"

namespace iaei {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool method_needs_imputations(Method m) {
    return m == Method::Iaei || m == Method::EillsImpute || m == Method::EillsMix;
}

std::vector<std::uint8_t> draw_mask(Index total, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw ValidationError("mask rate must lie in [0, 1)");
    const Index masked =
        static_cast<Index>(std::llround(rate * static_cast<double>(total)));
    std::vector<Index> order(static_cast<size_t>(total));
    for (Index i = 0; i < total; ++i) order[static_cast<size_t>(i)] = i;
    RandomStream stream(derive_seed(seed, {hash_tag("cv_mask")}));
    for (Index i = 0; i < masked; ++i) {
        const Index j = static_cast<Index>(stream.uniform_int(i, total - 1));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    std::vector<std::uint8_t> keep(static_cast<size_t>(total), 1);
    for (Index i = 0; i < masked; ++i) keep[static_cast<size_t>(order[static_cast<size_t>(i)])] = 0;
    return keep;
}

// Builds the training dataset for one fold from the given rows. Outcomes are
// the true labels when `oracle` is set, otherwise the masked view.
struct FoldData {
    MultiEnvDataset data;
    Imputations imputations;  // aligned with data when predictions supplied
};

FoldData build_fold(const Table& table, const std::vector<Index>& rows,
                    const std::vector<std::uint8_t>& observed, bool oracle,
                    const Vector* predictions) {
    std::vector<std::string> env_order;
    std::map<std::string, std::vector<Index>> groups;
    for (Index i : rows) {
        const std::string& id = table.env[static_cast<size_t>(i)];
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) env_order.push_back(id);
        it->second.push_back(i);
    }
    if (env_order.size() < 2)
        throw ValidationError(
            "CV training folds need at least 2 distinct environment values, got " +
            std::to_string(env_order.size()));

    FoldData fold;
    std::vector<EnvironmentData> envs;
    for (const std::string& id : env_order) {
        const std::vector<Index>& members = groups[id];
        Matrix x(static_cast<Index>(members.size()), table.p);
        Vector y(static_cast<Index>(members.size()));
        std::vector<std::uint8_t> mask(members.size());
        Vector h(static_cast<Index>(members.size()));
        for (size_t k = 0; k < members.size(); ++k) {
            const Index i = members[k];
            x.row(static_cast<Index>(k)) = table.x.row(i);
            const bool labeled = oracle || observed[static_cast<size_t>(i)] != 0;
            mask[k] = labeled ? 1 : 0;
            y[static_cast<Index>(k)] = labeled ? table.y[i] : 0.0;
            if (predictions != nullptr) h[static_cast<Index>(k)] = (*predictions)[i];
        }
        envs.emplace_back(id, std::move(x), std::move(y), std::move(mask), 1.0);
        if (predictions != nullptr) fold.imputations.per_env.push_back(std::move(h));
    }
    fold.data = make_dataset(std::move(envs));
    return fold;
}

}  // namespace

std::array<double, 31> select_gamma(
    const std::vector<double>& gamma_grid,
    const std::vector<std::array<double, 31>>& per_gamma_daily) {
    if (gamma_grid.empty() || per_gamma_daily.size() != gamma_grid.size())
        throw ValidationError("gamma grid and MSE table sizes differ");
    std::array<double, 31> chosen;
    chosen.fill(kNaN);
    for (int d = 0; d < 31; ++d) {
        double best_mse = kNaN;
        double best_gamma = kNaN;
        for (size_t g = 0; g < gamma_grid.size(); ++g) {
            const double mse = per_gamma_daily[g][static_cast<size_t>(d)];
            if (std::isnan(mse)) continue;
            if (std::isnan(best_mse) || mse < best_mse ||
                (mse == best_mse && gamma_grid[g] < best_gamma)) {
                best_mse = mse;
                best_gamma = gamma_grid[g];
            }
        }
        chosen[static_cast<size_t>(d)] = best_gamma;
    }
    return chosen;
}

CvResult monthly_cv(const Table& table, const ImputationModel* imputer,
                    const CvSpec& spec) {
    if (!table.has_time())
        throw ValidationError("monthly CV requires date and hour columns");
    if (spec.methods.empty()) throw ValidationError("no methods specified");
    if (spec.gamma_grid.empty()) throw ValidationError("gamma grid is empty");
    for (Index i = 0; i < table.rows(); ++i)
        if (!table.labeled[static_cast<size_t>(i)])
            throw ValidationError(
                "CV evaluation data must carry true outcomes for every row");

    std::set<int> months;
    for (const TimeStamp& ts : table.time) months.insert(ts.month);
    if (months.size() < 2)
        throw InsufficientMonths("monthly CV needs at least 2 distinct months, got " +
                                 std::to_string(months.size()));

    const bool needs_imputations =
        std::any_of(spec.methods.begin(), spec.methods.end(),
                    method_needs_imputations);
    if (needs_imputations && imputer == nullptr)
        throw MissingModel("methods using predictions need an imputation model");

    Vector predictions;
    if (needs_imputations) {
        predictions.resize(table.rows());
        for (Index i = 0; i < table.rows(); ++i)
            predictions[i] = imputer->predict(table.x.row(i));
    }

    const std::vector<std::uint8_t> observed =
        draw_mask(table.rows(), spec.mask_rate, spec.seed);

    CvResult result;
    result.methods = spec.methods;
    result.gamma_grid = spec.gamma_grid;
    result.fold_months.assign(months.begin(), months.end());
    result.env_column = spec.env_column;
    result.mask_rate = spec.mask_rate;
    result.seed = spec.seed;
    if (imputer != nullptr) result.imputer_description = to_string(imputer->family());

    const size_t n_methods = spec.methods.size();
    const size_t n_gammas = spec.gamma_grid.size();
    const size_t n_folds = result.fold_months.size();

    result.folds.resize(n_folds);
    parallel_for(0, static_cast<int>(n_folds), spec.threads, [&](int f) {
        const int month = result.fold_months[static_cast<size_t>(f)];
        std::vector<Index> train_rows, test_rows;
        for (Index i = 0; i < table.rows(); ++i)
            (table.time[static_cast<size_t>(i)].month == month ? test_rows
                                                               : train_rows)
                .push_back(i);

        CvFoldTrace trace;
        trace.month = month;
        trace.daily_mse.assign(
            n_methods, std::vector<std::array<double, 31>>(n_gammas));
        for (auto& per_method : trace.daily_mse)
            for (auto& per_gamma : per_method) per_gamma.fill(kNaN);

        for (size_t m = 0; m < n_methods; ++m) {
            const Method method = spec.methods[m];
            const bool with_predictions = method_needs_imputations(method);
            const FoldData fold =
                build_fold(table, train_rows, observed, method == Method::Oracle,
                           with_predictions ? &predictions : nullptr);
            for (size_t g = 0; g < n_gammas; ++g) {
                EstimatorConfig cfg;
                cfg.gamma = spec.gamma_grid[g];
                cfg.variant = spec.variant;
                cfg.search.max_support_dim = spec.max_support_dim;
                const FitResult fit_result =
                    fit(method, fold.data,
                        with_predictions ? &fold.imputations : nullptr, cfg);

                std::array<double, 31> sums{};
                std::array<int, 31> counts{};
                for (Index i : test_rows) {
                    const double err =
                        table.y[i] - fit_result.beta.dot(table.x.row(i));
                    const int day = table.time[static_cast<size_t>(i)].day;
                    sums[static_cast<size_t>(day - 1)] += err * err;
                    counts[static_cast<size_t>(day - 1)] += 1;
                }
                for (int d = 0; d < 31; ++d)
                    if (counts[static_cast<size_t>(d)] > 0)
                        trace.daily_mse[m][g][static_cast<size_t>(d)] =
                            sums[static_cast<size_t>(d)] /
                            counts[static_cast<size_t>(d)];
            }
        }
        result.folds[static_cast<size_t>(f)] = std::move(trace);
    });

    // Average each day across the folds that contain it.
    result.day_fold_counts.fill(0);
    for (int d = 0; d < 31; ++d)
        for (const CvFoldTrace& trace : result.folds)
            if (!std::isnan(trace.daily_mse[0][0][static_cast<size_t>(d)]))
                result.day_fold_counts[static_cast<size_t>(d)] += 1;

    result.daily_mse.assign(n_methods,
                            std::vector<std::array<double, 31>>(n_gammas));
    for (size_t m = 0; m < n_methods; ++m)
        for (size_t g = 0; g < n_gammas; ++g) {
            auto& daily = result.daily_mse[m][g];
            daily.fill(kNaN);
            for (int d = 0; d < 31; ++d) {
                const int folds_with_day = result.day_fold_counts[static_cast<size_t>(d)];
                if (folds_with_day == 0) continue;
                double sum = 0.0;
                for (const CvFoldTrace& trace : result.folds) {
                    const double v = trace.daily_mse[m][g][static_cast<size_t>(d)];
                    if (!std::isnan(v)) sum += v;
                }
                daily[static_cast<size_t>(d)] = sum / folds_with_day;
            }
        }

    result.chosen_gamma.resize(n_methods);
    result.best_daily_mse.resize(n_methods);
    for (size_t m = 0; m < n_methods; ++m) {
        result.chosen_gamma[m] = select_gamma(spec.gamma_grid, result.daily_mse[m]);
        result.best_daily_mse[m].fill(kNaN);
        for (int d = 0; d < 31; ++d) {
            const double gamma = result.chosen_gamma[m][static_cast<size_t>(d)];
            if (std::isnan(gamma)) continue;
            for (size_t g = 0; g < n_gammas; ++g)
                if (spec.gamma_grid[g] == gamma) {
                    result.best_daily_mse[m][static_cast<size_t>(d)] =
                        result.daily_mse[m][g][static_cast<size_t>(d)];
                    break;
                }
        }
    }
    return result;
}

std::vector<std::pair<double, double>> daily_quantile_curve(const CvResult& result,
                                                            size_t method_index) {
    std::vector<double> values;
    for (double v : result.best_daily_mse.at(method_index))
        if (!std::isnan(v)) values.push_back(v);
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> curve;
    curve.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i)
        curve.emplace_back(static_cast<double>(i + 1) /
                               static_cast<double>(values.size()),
                           values[i]);
    return curve;
}

}  // namespace iaei
