#include <doctest.h>

#include <cmath>
#include <limits>

#include "iaei/types.hpp"
#include "test_helpers.hpp"

using namespace iaei;
using iaei::testing::single_env;
using iaei::testing::vec;

namespace {

EnvironmentData env_with(Index n, Index p, Index labeled, double weight = 1.0,
                         const std::string& id = "e") {
    Matrix x = Matrix::Constant(n, p, 0.5);
    Vector y = Vector::Constant(n, 1.0);
    std::vector<std::uint8_t> mask(static_cast<size_t>(n), 0);
    for (Index i = 0; i < labeled; ++i) mask[static_cast<size_t>(i)] = 1;
    return EnvironmentData(id, std::move(x), std::move(y), std::move(mask), weight);
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("validation accepts two fully labeled environments with equal weights") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(5, 12, 5, 1.0, "a"));
    data.environments.push_back(env_with(7, 12, 7, 1.0, "b"));
    data = validate_dataset(std::move(data));
    CHECK(data.validated);
    REQUIRE(data.normalized_weights.size() == 2);
    CHECK(data.normalized_weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(data.normalized_weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("validation rejects an environment with no labels") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(5, 3, 0));
    CHECK_THROWS_AS(validate_dataset(std::move(data)), NoLabels);
}

TEST_CASE("validation rejects unequal covariate dimensions") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(5, 12, 5, 1.0, "a"));
    data.environments.push_back(env_with(5, 11, 5, 1.0, "b"));
    CHECK_THROWS_AS(validate_dataset(std::move(data)), DimensionMismatch);
}

TEST_CASE("validation rejects non-finite covariates and labeled outcomes") {
    {
        EnvironmentData env = env_with(3, 2, 3);
        env.covariates(1, 1) = std::numeric_limits<double>::infinity();
        MultiEnvDataset data;
        data.environments.push_back(std::move(env));
        CHECK_THROWS_AS(validate_dataset(std::move(data)), NonFinite);
    }
    {
        EnvironmentData env = env_with(3, 2, 3);
        env.outcomes[0] = std::numeric_limits<double>::quiet_NaN();
        MultiEnvDataset data;
        data.environments.push_back(std::move(env));
        CHECK_THROWS_AS(validate_dataset(std::move(data)), NonFinite);
    }
}

TEST_CASE("validation rejects non-positive weights") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(3, 2, 3, 0.0));
    CHECK_THROWS_AS(validate_dataset(std::move(data)), NonPositiveWeight);
}

TEST_CASE("unlabeled outcome slots are undefined, not data") {
    Matrix x = Matrix::Zero(2, 1);
    Vector y = vec({1.5, 99.0});  // the 99 must never survive construction
    EnvironmentData env("e", std::move(x), std::move(y), {1, 0});
    CHECK(env.outcome(0) == 1.5);
    CHECK(std::isnan(env.outcomes[1]));
}

TEST_CASE("missing ratio") {
    CHECK(missing_ratio(env_with(10, 1, 10)) == 0.0);
    CHECK(missing_ratio(env_with(10, 1, 3)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(missing_ratio(env_with(4, 1, 1)) == 0.75);
}

TEST_CASE("missing ratio times N recovers the missing count on integral cases") {
    for (auto [total, labeled] : {std::pair<int, int>{10, 3},
                                  std::pair<int, int>{10, 10},
                                  std::pair<int, int>{4, 1},
                                  std::pair<int, int>{8, 2},
                                  std::pair<int, int>{100, 25}}) {
        const EnvironmentData env = env_with(total, 1, labeled);
        CHECK(missing_ratio(env) * total == static_cast<double>(total - labeled));
    }
}

TEST_CASE("normalized weights sum to one and preserve ratios") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(3, 2, 3, 0.2, "a"));
    data.environments.push_back(env_with(3, 2, 3, 1.3, "b"));
    data.environments.push_back(env_with(3, 2, 3, 4.0, "c"));
    data = validate_dataset(std::move(data));
    double sum = 0.0;
    for (double w : data.normalized_weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(data.normalized_weights[2] / data.normalized_weights[0] ==
          doctest::Approx(4.0 / 0.2).epsilon(1e-12));
}

TEST_CASE("validation is idempotent") {
    MultiEnvDataset data;
    data.environments.push_back(env_with(4, 3, 2, 0.7, "a"));
    data.environments.push_back(env_with(6, 3, 6, 1.9, "b"));
    const MultiEnvDataset once = validate_dataset(std::move(data));
    const MultiEnvDataset twice = validate_dataset(once);
    REQUIRE(twice.normalized_weights.size() == once.normalized_weights.size());
    for (size_t e = 0; e < once.normalized_weights.size(); ++e) {
        CHECK(twice.normalized_weights[e] == once.normalized_weights[e]);
        CHECK(twice.environments[e].covariates == once.environments[e].covariates);
    }
}

TEST_CASE("support invariants") {
    CHECK_THROWS_AS(Support({2, 1}), ValidationError);
    CHECK_THROWS_AS(Support({1, 1}), ValidationError);
    CHECK_THROWS_AS(Support({0}), ValidationError);
    const Support s({1, 3, 7});
    CHECK(s.contains(3));
    CHECK_FALSE(s.contains(2));
    CHECK(Support::from_mask(s.to_mask(), 8) == s);
}

TEST_CASE("support tie order: cardinality then lexicographic") {
    CHECK(support_precedes(Support({2}), Support({1, 3})));
    CHECK(support_precedes(Support({1, 3}), Support({1, 4})));
    CHECK(support_precedes(Support({1, 3}), Support({2, 3})));
    CHECK_FALSE(support_precedes(Support({1, 3}), Support({1, 3})));
}

TEST_CASE("ground truth support derives from nonzero coefficients") {
    const GroundTruth truth = GroundTruth::from_beta(vec({3, 2, -0.5, 0, 0}));
    CHECK(truth.support_star == Support({1, 2, 3}));
}

TEST_CASE("imputation coverage check") {
    const MultiEnvDataset data = single_env({{1.0}, {2.0}}, {2.0, 4.0});
    Imputations imp;
    CHECK_THROWS_AS(check_imputations(data, imp), MissingImputation);
    imp.per_env.push_back(vec({1.0}));  // one row short
    CHECK_THROWS_AS(check_imputations(data, imp), MissingImputation);
    imp.per_env[0] = vec({1.0, 2.0});
    CHECK_NOTHROW(check_imputations(data, imp));
}

}  // TEST_SUITE
