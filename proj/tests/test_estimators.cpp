#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iaei/estimators.hpp"
#include "iaei/numeric.hpp"
#include "iaei/objectives.hpp"
#include "oracle_helpers.hpp"
#include "test_helpers.hpp"

using namespace iaei;
using iaei::testing::brute_force_best_value;
using iaei::testing::linear_imputations;
using iaei::testing::random_dataset;
using iaei::testing::vec;

namespace {

struct Instance {
    MultiEnvDataset full;    // all labels present
    MultiEnvDataset masked;  // some labels hidden
    Imputations imputations; // predictions for every masked-dataset row
};

Instance make_instance(RandomStream& stream, Index n, Index p,
                       double unlabeled_fraction) {
    Instance inst;
    inst.full = random_dataset(stream, 2, n, p);
    std::vector<EnvironmentData> masked;
    for (const auto& env : inst.full.environments) {
        std::vector<std::uint8_t> mask(static_cast<size_t>(n), 1);
        for (Index i = 1; i < n; ++i)
            if (stream.uniform01() < unlabeled_fraction)
                mask[static_cast<size_t>(i)] = 0;
        masked.emplace_back(env.env_id, env.covariates, env.outcomes, mask,
                            env.weight);
    }
    inst.masked = make_dataset(std::move(masked));
    Vector a(p);
    for (Index j = 0; j < p; ++j) a[j] = stream.normal();
    inst.imputations = linear_imputations(inst.masked, a, 0.25);
    return inst;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("view shapes per method") {
    RandomStream stream(61);
    Instance inst = make_instance(stream, 10, 3, 0.5);

    const PreparedView iaei_view =
        prepare_view(Method::Iaei, inst.masked, &inst.imputations);
    CHECK(iaei_view.mode == ObjectiveMode::Adjusted);
    for (size_t e = 0; e < 2; ++e)
        CHECK(iaei_view.data.environments[e].rows() ==
              inst.masked.environments[e].rows());

    const PreparedView observe = prepare_view(Method::EillsObserve, inst.masked);
    for (size_t e = 0; e < 2; ++e) {
        CHECK(observe.data.environments[e].rows() ==
              inst.masked.environments[e].labeled_count());
        CHECK(observe.data.environments[e].labeled_count() ==
              observe.data.environments[e].rows());
    }

    const PreparedView impute =
        prepare_view(Method::EillsImpute, inst.masked, &inst.imputations);
    const PreparedView mix =
        prepare_view(Method::EillsMix, inst.masked, &inst.imputations);
    for (size_t e = 0; e < 2; ++e) {
        CHECK(impute.data.environments[e].rows() ==
              inst.masked.environments[e].rows());
        CHECK(impute.data.environments[e].labeled_count() ==
              impute.data.environments[e].rows());
        CHECK(mix.data.environments[e].labeled_count() ==
              mix.data.environments[e].rows());
    }
}

TEST_CASE("oracle requires full labels") {
    RandomStream stream(67);
    Instance inst = make_instance(stream, 10, 3, 0.5);
    CHECK_THROWS_AS(prepare_view(Method::Oracle, inst.masked), OracleNeedsLabels);
    CHECK_NOTHROW(prepare_view(Method::Oracle, inst.full));
}

TEST_CASE("imputation-dependent views demand predictions") {
    RandomStream stream(71);
    Instance inst = make_instance(stream, 10, 3, 0.5);
    CHECK_THROWS_AS(prepare_view(Method::Iaei, inst.masked), MissingImputation);
    CHECK_THROWS_AS(prepare_view(Method::EillsImpute, inst.masked),
                    MissingImputation);
    CHECK_THROWS_AS(prepare_view(Method::EillsMix, inst.masked), MissingImputation);
}

TEST_CASE("mix view with perfect predictions equals the oracle view") {
    RandomStream stream(73);
    const MultiEnvDataset full = random_dataset(stream, 2, 20, 3);
    // Hide some labels but impute with the true outcomes.
    Imputations truth;
    for (const auto& env : full.environments) {
        Vector h(env.rows());
        for (Index i = 0; i < env.rows(); ++i) h[i] = env.outcomes[i];
        truth.per_env.push_back(std::move(h));
    }
    std::vector<EnvironmentData> masked_envs;
    for (const auto& env : full.environments) {
        std::vector<std::uint8_t> mask(static_cast<size_t>(env.rows()), 1);
        for (Index i = 0; i < env.rows(); i += 3) mask[static_cast<size_t>(i)] = 0;
        masked_envs.emplace_back(env.env_id, env.covariates, env.outcomes, mask,
                                 env.weight);
    }
    const MultiEnvDataset masked = make_dataset(std::move(masked_envs));

    const PreparedView mix = prepare_view(Method::EillsMix, masked, &truth);
    const PreparedView oracle = prepare_view(Method::Oracle, full);
    for (size_t e = 0; e < 2; ++e) {
        CHECK(mix.data.environments[e].covariates ==
              oracle.data.environments[e].covariates);
        CHECK(mix.data.environments[e].outcomes ==
              oracle.data.environments[e].outcomes);
    }

    EstimatorConfig cfg;
    cfg.gamma = 2.0;
    const FitResult via_mix = fit(Method::EillsMix, masked, &truth, cfg);
    const FitResult via_impute = fit(Method::EillsImpute, masked, &truth, cfg);
    const FitResult via_oracle = fit(Method::Oracle, full, nullptr, cfg);
    CHECK(via_mix.support == via_oracle.support);
    CHECK(via_impute.support == via_oracle.support);
    CHECK((via_mix.beta - via_oracle.beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((via_impute.beta - via_oracle.beta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fully labeled data: iaei and oracle coincide") {
    RandomStream stream(79);
    for (double gamma : {1.0, 10.0}) {
        const MultiEnvDataset full = random_dataset(stream, 2, 50, 4);
        const Imputations imp =
            linear_imputations(full, vec({0.5, -0.1, 0.0, 0.9}), 0.2);
        EstimatorConfig cfg;
        cfg.gamma = gamma;
        const FitResult iaei_fit = fit(Method::Iaei, full, &imp, cfg);
        const FitResult oracle_fit = fit(Method::Oracle, full, nullptr, cfg);
        CHECK(iaei_fit.support == oracle_fit.support);
        CHECK((iaei_fit.beta - oracle_fit.beta).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("every method matches the brute-force oracle on its own view") {
    RandomStream stream(83);
    Instance inst = make_instance(stream, 30, 4, 0.4);
    EstimatorConfig cfg;
    cfg.gamma = 5.0;
    cfg.variant = PenaltyVariant::Enhanced;

    for (Method method : {Method::Iaei, Method::Oracle, Method::EillsObserve,
                          Method::EillsImpute, Method::EillsMix}) {
        const MultiEnvDataset& input =
            method == Method::Oracle ? inst.full : inst.masked;
        const Imputations* imp = (method == Method::Iaei ||
                                  method == Method::EillsImpute ||
                                  method == Method::EillsMix)
                                     ? &inst.imputations
                                     : nullptr;
        const FitResult fit_result = fit(method, input, imp, cfg);

        const PreparedView view = prepare_view(method, input, imp);
        const Imputations* view_imp =
            view.imputations.has_value() ? &*view.imputations : nullptr;
        const double oracle_best = brute_force_best_value(
            view.data, view_imp, cfg.gamma, view.mode, cfg.variant);
        CHECK(nearly_equal(fit_result.objective, oracle_best, 1e-8));
    }
}

TEST_CASE("fits are invariant to row and environment permutations") {
    RandomStream stream(89);
    Instance inst = make_instance(stream, 25, 3, 0.3);

    MultiEnvDataset shuffled;
    shuffled.p = inst.masked.p;
    Imputations shuffled_imp;
    // Reverse environment order and rotate rows within each environment.
    for (size_t e = inst.masked.environments.size(); e-- > 0;) {
        const auto& env = inst.masked.environments[e];
        const Index n = env.rows();
        std::vector<Index> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::rotate(order.begin(), order.begin() + 7, order.end());

        Matrix x(n, env.cols());
        Vector y(n);
        std::vector<std::uint8_t> mask(static_cast<size_t>(n));
        Vector h(n);
        for (Index k = 0; k < n; ++k) {
            const Index i = order[static_cast<size_t>(k)];
            x.row(k) = env.covariates.row(i);
            mask[static_cast<size_t>(k)] = env.label_mask[static_cast<size_t>(i)];
            y[k] = mask[static_cast<size_t>(k)] ? env.outcomes[i] : 0.0;
            h[k] = inst.imputations.per_env[e][i];
        }
        shuffled.environments.emplace_back(env.env_id, std::move(x), std::move(y),
                                           std::move(mask), env.weight);
        shuffled_imp.per_env.push_back(std::move(h));
    }
    shuffled = validate_dataset(std::move(shuffled));

    EstimatorConfig cfg;
    cfg.gamma = 3.0;
    for (Method method : {Method::Iaei, Method::EillsObserve, Method::EillsMix}) {
        const Imputations* imp = method == Method::EillsObserve
                                     ? nullptr
                                     : &inst.imputations;
        const Imputations* imp_shuffled =
            method == Method::EillsObserve ? nullptr : &shuffled_imp;
        const FitResult a = fit(method, inst.masked, imp, cfg);
        const FitResult b = fit(method, shuffled, imp_shuffled, cfg);
        CHECK(a.support == b.support);
        CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() == 0.0);
        CHECK(nearly_equal(a.objective, b.objective, 1e-12));
    }
}

TEST_CASE("reported parts recompute exactly through the objectives module") {
    RandomStream stream(97);
    Instance inst = make_instance(stream, 20, 3, 0.35);
    EstimatorConfig cfg;
    cfg.gamma = 4.0;

    for (Method method : {Method::Iaei, Method::EillsObserve, Method::EillsImpute}) {
        const Imputations* imp = method == Method::EillsObserve
                                     ? nullptr
                                     : &inst.imputations;
        const FitResult fit_result = fit(method, inst.masked, imp, cfg);
        const PreparedView view = prepare_view(method, inst.masked, imp);
        const Imputations* view_imp =
            view.imputations.has_value() ? &*view.imputations : nullptr;
        const ObjectiveValue recomputed =
            objective(view.data, fit_result.beta, fit_result.support, cfg.gamma,
                      view.mode, view_imp, cfg.variant);
        CHECK(fit_result.loss_part == recomputed.loss);
        CHECK(fit_result.penalty_part == recomputed.penalty);
        CHECK(fit_result.objective == recomputed.total);
    }
}

TEST_CASE("method tags ride along on the result") {
    RandomStream stream(101);
    Instance inst = make_instance(stream, 15, 3, 0.3);
    EstimatorConfig cfg;
    cfg.gamma = 1.0;
    const FitResult fit_result =
        fit(Method::EillsObserve, inst.masked, nullptr, cfg);
    CHECK(fit_result.method == Method::EillsObserve);
    CHECK(fit_result.gamma == 1.0);
    CHECK(fit_result.variant == PenaltyVariant::Basic);
}

}  // TEST_SUITE
