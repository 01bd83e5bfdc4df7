#include "iaei/types.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace iaei {

Support::Support(std::vector<int> indices) : indices_(std::move(indices)) {
    for (size_t k = 0; k < indices_.size(); ++k) {
        if (indices_[k] < 1)
            throw ValidationError("support indices are 1-based and must be >= 1");
        if (k > 0 && indices_[k] <= indices_[k - 1])
            throw ValidationError("support indices must be strictly increasing");
    }
}

Support Support::from_mask(std::uint32_t mask, int p) {
    std::vector<int> idx;
    for (int j = 0; j < p; ++j)
        if (mask & (1u << j)) idx.push_back(j + 1);
    return Support(std::move(idx));
}

bool Support::contains(int j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

std::uint32_t Support::to_mask() const {
    std::uint32_t m = 0;
    for (int j : indices_) m |= 1u << (j - 1);
    return m;
}

bool support_precedes(const Support& a, const Support& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.indices().begin(), a.indices().end(),
                                        b.indices().begin(), b.indices().end());
}

EnvironmentData::EnvironmentData(std::string id, Matrix x, Vector y,
                                 std::vector<std::uint8_t> mask, double w)
    : env_id(std::move(id)),
      covariates(std::move(x)),
      outcomes(std::move(y)),
      label_mask(std::move(mask)),
      weight(w) {
    if (outcomes.size() != covariates.rows() ||
        static_cast<Index>(label_mask.size()) != covariates.rows())
        throw DimensionMismatch("environment '" + env_id +
                                "': outcomes/mask length must equal row count");
    for (Index i = 0; i < outcomes.size(); ++i)
        if (!label_mask[static_cast<size_t>(i)])
            outcomes[i] = std::numeric_limits<double>::quiet_NaN();
}

EnvironmentData EnvironmentData::fully_labeled(std::string id, Matrix x, Vector y,
                                               double w) {
    std::vector<std::uint8_t> mask(static_cast<size_t>(x.rows()), 1);
    return EnvironmentData(std::move(id), std::move(x), std::move(y),
                           std::move(mask), w);
}

Index EnvironmentData::labeled_count() const {
    Index n = 0;
    for (std::uint8_t m : label_mask) n += (m != 0);
    return n;
}

double EnvironmentData::outcome(Index i) const {
    assert(labeled(i) && "outcome read on an unlabeled row");
    return outcomes[i];
}

double missing_ratio(const EnvironmentData& env) {
    const double total = static_cast<double>(env.rows());
    const double labeled = static_cast<double>(env.labeled_count());
    return (total - labeled) / total;
}

MultiEnvDataset make_dataset(std::vector<EnvironmentData> envs) {
    MultiEnvDataset data;
    data.environments = std::move(envs);
    data.p = data.environments.empty() ? 0 : data.environments.front().cols();
    return validate_dataset(std::move(data));
}

std::vector<double> normalized_weights(const MultiEnvDataset& data) {
    double total = 0.0;
    for (const auto& env : data.environments) total += env.weight;
    std::vector<double> w;
    w.reserve(data.environments.size());
    for (const auto& env : data.environments) w.push_back(env.weight / total);
    return w;
}

MultiEnvDataset validate_dataset(MultiEnvDataset data) {
    if (data.environments.empty())
        throw ValidationError("dataset has no environments");
    if (data.p == 0) data.p = data.environments.front().cols();
    for (const auto& env : data.environments) {
        if (env.cols() != data.p)
            throw DimensionMismatch("environment '" + env.env_id +
                                    "' has covariate dimension " +
                                    std::to_string(env.cols()) + ", expected " +
                                    std::to_string(data.p));
        if (env.rows() == 0 || env.labeled_count() == 0)
            throw NoLabels("environment '" + env.env_id +
                           "' has no labeled observations");
        if (!env.covariates.allFinite())
            throw NonFinite("environment '" + env.env_id +
                            "' has non-finite covariates");
        for (Index i = 0; i < env.rows(); ++i)
            if (env.labeled(i) && !std::isfinite(env.outcomes[i]))
                throw NonFinite("environment '" + env.env_id +
                                "' has a non-finite labeled outcome");
        if (!(env.weight > 0.0))
            throw NonPositiveWeight("environment '" + env.env_id +
                                    "' has non-positive weight");
    }
    data.normalized_weights = normalized_weights(data);
    data.validated = true;
    return data;
}

GroundTruth GroundTruth::from_beta(Vector beta) {
    std::vector<int> idx;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) idx.push_back(static_cast<int>(j) + 1);
    GroundTruth truth;
    truth.support_star = Support(std::move(idx));
    truth.beta_star = std::move(beta);
    return truth;
}

std::string to_string(PenaltyVariant v) {
    return v == PenaltyVariant::Basic ? "basic" : "enhanced";
}

std::string to_string(ObjectiveMode m) {
    return m == ObjectiveMode::Complete ? "complete" : "adjusted";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Iaei: return "iaei";
        case Method::Oracle: return "oracle";
        case Method::EillsObserve: return "eills_observe";
        case Method::EillsImpute: return "eills_impute";
        case Method::EillsMix: return "eills_mix";
    }
    return "unknown";
}

PenaltyVariant parse_variant(const std::string& s) {
    if (s == "basic") return PenaltyVariant::Basic;
    if (s == "enhanced") return PenaltyVariant::Enhanced;
    throw ParseError("unknown penalty variant '" + s + "'");
}

Method parse_method(const std::string& s) {
    if (s == "iaei") return Method::Iaei;
    if (s == "oracle") return Method::Oracle;
    if (s == "eills_observe") return Method::EillsObserve;
    if (s == "eills_impute") return Method::EillsImpute;
    if (s == "eills_mix") return Method::EillsMix;
    throw ParseError("unknown method '" + s + "'");
}

void check_imputations(const MultiEnvDataset& data, const Imputations& imp) {
    if (imp.per_env.size() != data.environments.size())
        throw MissingImputation("imputations cover " +
                                std::to_string(imp.per_env.size()) +
                                " environments, dataset has " +
                                std::to_string(data.environments.size()));
    for (size_t e = 0; e < imp.per_env.size(); ++e) {
        if (imp.per_env[e].size() != data.environments[e].rows())
            throw MissingImputation("environment '" +
                                    data.environments[e].env_id +
                                    "': prediction missing for some rows");
    }
}

}  // namespace iaei
