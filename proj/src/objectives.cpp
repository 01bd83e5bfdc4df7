#include "iaei/objectives.hpp"

#include <cmath>

#include "iaei/numeric.hpp"

namespace iaei {

namespace {

void check_beta(const MultiEnvDataset& data, const Vector& beta) {
    if (beta.size() != data.p)
        throw DimensionMismatch("beta has length " + std::to_string(beta.size()) +
                                ", expected " + std::to_string(data.p));
}

void check_support(const MultiEnvDataset& data, const Support& support) {
    if (support.max_index() > data.p)
        throw DimensionMismatch("support index " +
                                std::to_string(support.max_index()) +
                                " exceeds covariate dimension " +
                                std::to_string(data.p));
}

double env_empirical_loss(const EnvironmentData& env, const Vector& beta) {
    KahanSum sum;
    for (Index i = 0; i < env.rows(); ++i) {
        if (!env.labeled(i)) continue;
        const double r = env.outcomes[i] - env.covariates.row(i).dot(beta);
        sum.add(r * r);
    }
    return sum.value() / static_cast<double>(env.labeled_count());
}

// (mean_all - mean_lab) of (h - beta'x)^2, plus mean_lab of (y - beta'x)^2,
// combined in that order so the fully-labeled case collapses exactly.
double env_adjusted_loss(const EnvironmentData& env, const Vector& h,
                         const Vector& beta) {
    KahanSum all_h, lab_h, lab_y;
    for (Index i = 0; i < env.rows(); ++i) {
        const double fit = env.covariates.row(i).dot(beta);
        const double rh = h[i] - fit;
        all_h.add(rh * rh);
        if (env.labeled(i)) {
            lab_h.add(rh * rh);
            const double ry = env.outcomes[i] - fit;
            lab_y.add(ry * ry);
        }
    }
    const double n_all = static_cast<double>(env.rows());
    const double n_lab = static_cast<double>(env.labeled_count());
    return (all_h.value() / n_all - lab_h.value() / n_lab) + lab_y.value() / n_lab;
}

// mean_lab[g(x) * (y - beta'x)] where g is x_j or x_j^2.
double env_empirical_moment(const EnvironmentData& env, const Vector& beta,
                            Index col, bool squared) {
    KahanSum sum;
    for (Index i = 0; i < env.rows(); ++i) {
        if (!env.labeled(i)) continue;
        const double r = env.outcomes[i] - env.covariates.row(i).dot(beta);
        double g = env.covariates(i, col);
        if (squared) g *= g;
        sum.add(g * r);
    }
    return sum.value() / static_cast<double>(env.labeled_count());
}

double env_adjusted_moment(const EnvironmentData& env, const Vector& h,
                           const Vector& beta, Index col, bool squared) {
    KahanSum all_h, lab_h, lab_y;
    for (Index i = 0; i < env.rows(); ++i) {
        const double fit = env.covariates.row(i).dot(beta);
        double g = env.covariates(i, col);
        if (squared) g *= g;
        all_h.add(g * (h[i] - fit));
        if (env.labeled(i)) {
            lab_h.add(g * (h[i] - fit));
            lab_y.add(g * (env.outcomes[i] - fit));
        }
    }
    const double n_all = static_cast<double>(env.rows());
    const double n_lab = static_cast<double>(env.labeled_count());
    return (all_h.value() / n_all - lab_h.value() / n_lab) + lab_y.value() / n_lab;
}

}  // namespace

double empirical_loss_weighted(const MultiEnvDataset& data, const Vector& beta,
                               std::span<const double> weights) {
    check_beta(data, beta);
    double total = 0.0;
    for (size_t e = 0; e < data.environments.size(); ++e)
        total += weights[e] * env_empirical_loss(data.environments[e], beta);
    return total;
}

double empirical_loss(const MultiEnvDataset& data, const Vector& beta) {
    const auto w = normalized_weights(data);
    return empirical_loss_weighted(data, beta, w);
}

double empirical_penalty_weighted(const MultiEnvDataset& data, const Vector& beta,
                                  const Support& support, PenaltyVariant variant,
                                  std::span<const double> weights) {
    check_beta(data, beta);
    check_support(data, support);
    double total = 0.0;
    for (int j : support.indices()) {
        const Index col = j - 1;
        for (size_t e = 0; e < data.environments.size(); ++e) {
            const auto& env = data.environments[e];
            const double m = env_empirical_moment(env, beta, col, false);
            double term = m * m;
            if (variant == PenaltyVariant::Enhanced) {
                const double m2 = env_empirical_moment(env, beta, col, true);
                term += m2 * m2;
            }
            total += weights[e] * term;
        }
    }
    return total;
}

double empirical_penalty(const MultiEnvDataset& data, const Vector& beta,
                         const Support& support, PenaltyVariant variant) {
    const auto w = normalized_weights(data);
    return empirical_penalty_weighted(data, beta, support, variant, w);
}

double adjusted_loss_weighted(const MultiEnvDataset& data,
                              const Imputations& imputations, const Vector& beta,
                              std::span<const double> weights) {
    check_beta(data, beta);
    check_imputations(data, imputations);
    double total = 0.0;
    for (size_t e = 0; e < data.environments.size(); ++e)
        total += weights[e] * env_adjusted_loss(data.environments[e],
                                                imputations.per_env[e], beta);
    return total;
}

double adjusted_loss(const MultiEnvDataset& data, const Imputations& imputations,
                     const Vector& beta) {
    const auto w = normalized_weights(data);
    return adjusted_loss_weighted(data, imputations, beta, w);
}

double adjusted_penalty_weighted(const MultiEnvDataset& data,
                                 const Imputations& imputations, const Vector& beta,
                                 const Support& support, PenaltyVariant variant,
                                 std::span<const double> weights) {
    check_beta(data, beta);
    check_support(data, support);
    check_imputations(data, imputations);
    double total = 0.0;
    for (int j : support.indices()) {
        const Index col = j - 1;
        for (size_t e = 0; e < data.environments.size(); ++e) {
            const auto& env = data.environments[e];
            const auto& h = imputations.per_env[e];
            const double m = env_adjusted_moment(env, h, beta, col, false);
            double term = m * m;
            if (variant == PenaltyVariant::Enhanced) {
                const double m2 = env_adjusted_moment(env, h, beta, col, true);
                term += m2 * m2;
            }
            total += weights[e] * term;
        }
    }
    return total;
}

double adjusted_penalty(const MultiEnvDataset& data, const Imputations& imputations,
                        const Vector& beta, const Support& support,
                        PenaltyVariant variant) {
    const auto w = normalized_weights(data);
    return adjusted_penalty_weighted(data, imputations, beta, support, variant, w);
}

ObjectiveValue objective(const MultiEnvDataset& data, const Vector& beta,
                         const Support& support, double gamma, ObjectiveMode mode,
                         const Imputations* imputations, PenaltyVariant variant) {
    if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
    ObjectiveValue value;
    value.gamma = gamma;
    if (mode == ObjectiveMode::Adjusted) {
        if (imputations == nullptr)
            throw MissingImputation("adjusted objective requires imputations");
        value.loss = adjusted_loss(data, *imputations, beta);
        value.penalty = adjusted_penalty(data, *imputations, beta, support, variant);
    } else {
        value.loss = empirical_loss(data, beta);
        value.penalty = empirical_penalty(data, beta, support, variant);
    }
    value.total = value.loss + gamma * value.penalty;
    return value;
}

std::vector<Vector> adjusted_penalty_moments(const MultiEnvDataset& data,
                                             const Imputations& imputations,
                                             const Vector& beta) {
    check_beta(data, beta);
    check_imputations(data, imputations);
    std::vector<Vector> out;
    out.reserve(data.environments.size());
    for (size_t e = 0; e < data.environments.size(); ++e) {
        const auto& env = data.environments[e];
        Vector m(data.p);
        for (Index col = 0; col < data.p; ++col)
            m[col] = env_adjusted_moment(env, imputations.per_env[e], beta, col,
                                         false);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Vector> empirical_penalty_moments(const MultiEnvDataset& data,
                                              const Vector& beta) {
    check_beta(data, beta);
    std::vector<Vector> out;
    out.reserve(data.environments.size());
    for (const auto& env : data.environments) {
        Vector m(data.p);
        for (Index col = 0; col < data.p; ++col)
            m[col] = env_empirical_moment(env, beta, col, false);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace iaei
