#include "iaei/estimators.hpp"

#include <algorithm>
#include <numeric>

namespace iaei {

namespace {

// Canonical row order: covariates lexicographically, labeled rows before
// unlabeled at equal covariates, then the outcome, then the prediction when
// present. Stable sort keeps duplicates in input order.
std::vector<Index> canonical_row_order(const EnvironmentData& env, const Vector* h) {
    std::vector<Index> order(static_cast<size_t>(env.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        for (Index j = 0; j < env.cols(); ++j) {
            if (env.covariates(a, j) != env.covariates(b, j))
                return env.covariates(a, j) < env.covariates(b, j);
        }
        if (env.labeled(a) != env.labeled(b)) return env.labeled(a);
        if (env.labeled(a) && env.outcomes[a] != env.outcomes[b])
            return env.outcomes[a] < env.outcomes[b];
        if (h != nullptr && (*h)[a] != (*h)[b]) return (*h)[a] < (*h)[b];
        return false;
    });
    return order;
}

EnvironmentData permute_env(const EnvironmentData& env,
                            const std::vector<Index>& order) {
    Matrix x(env.rows(), env.cols());
    Vector y(env.rows());
    std::vector<std::uint8_t> mask(static_cast<size_t>(env.rows()));
    for (size_t k = 0; k < order.size(); ++k) {
        x.row(static_cast<Index>(k)) = env.covariates.row(order[k]);
        mask[k] = env.label_mask[static_cast<size_t>(order[k])];
        y[static_cast<Index>(k)] = mask[k] ? env.outcomes[order[k]] : 0.0;
    }
    return EnvironmentData(env.env_id, std::move(x), std::move(y), std::move(mask),
                           env.weight);
}

PreparedView canonicalize(MultiEnvDataset data, std::optional<Imputations> imp,
                          ObjectiveMode mode) {
    std::vector<size_t> env_order(data.environments.size());
    std::iota(env_order.begin(), env_order.end(), size_t{0});
    std::stable_sort(env_order.begin(), env_order.end(), [&](size_t a, size_t b) {
        return data.environments[a].env_id < data.environments[b].env_id;
    });

    MultiEnvDataset out;
    out.p = data.p;
    std::optional<Imputations> out_imp;
    if (imp.has_value()) out_imp.emplace();

    for (size_t e : env_order) {
        const EnvironmentData& env = data.environments[e];
        const Vector* h = imp.has_value() ? &imp->per_env[e] : nullptr;
        const std::vector<Index> order = canonical_row_order(env, h);
        out.environments.push_back(permute_env(env, order));
        if (h != nullptr) {
            Vector hp(env.rows());
            for (size_t k = 0; k < order.size(); ++k)
                hp[static_cast<Index>(k)] = (*h)[order[k]];
            out_imp->per_env.push_back(std::move(hp));
        }
    }

    PreparedView view;
    view.data = validate_dataset(std::move(out));
    view.imputations = std::move(out_imp);
    view.mode = mode;
    return view;
}

EnvironmentData observe_view(const EnvironmentData& env) {
    const Index n = env.labeled_count();
    Matrix x(n, env.cols());
    Vector y(n);
    Index k = 0;
    for (Index i = 0; i < env.rows(); ++i) {
        if (!env.labeled(i)) continue;
        x.row(k) = env.covariates.row(i);
        y[k] = env.outcomes[i];
        ++k;
    }
    return EnvironmentData::fully_labeled(env.env_id, std::move(x), std::move(y),
                                          env.weight);
}

EnvironmentData substitute_view(const EnvironmentData& env, const Vector& h,
                                bool keep_observed) {
    Vector y(env.rows());
    for (Index i = 0; i < env.rows(); ++i)
        y[i] = (keep_observed && env.labeled(i)) ? env.outcomes[i] : h[i];
    return EnvironmentData::fully_labeled(env.env_id, env.covariates, std::move(y),
                                          env.weight);
}

}  // namespace

PreparedView prepare_view(Method method, const MultiEnvDataset& data,
                          const Imputations* imputations) {
    MultiEnvDataset validated = validate_dataset(data);

    const bool needs_imputations = method == Method::Iaei ||
                                   method == Method::EillsImpute ||
                                   method == Method::EillsMix;
    if (needs_imputations) {
        if (imputations == nullptr)
            throw MissingImputation(to_string(method) + " requires imputations");
        check_imputations(validated, *imputations);
    }

    switch (method) {
        case Method::Iaei:
            return canonicalize(std::move(validated), *imputations,
                                ObjectiveMode::Adjusted);
        case Method::Oracle: {
            for (const auto& env : validated.environments)
                if (env.labeled_count() != env.rows())
                    throw OracleNeedsLabels("environment '" + env.env_id +
                                            "' has unlabeled rows");
            return canonicalize(std::move(validated), std::nullopt,
                                ObjectiveMode::Complete);
        }
        case Method::EillsObserve: {
            MultiEnvDataset view;
            view.p = validated.p;
            for (const auto& env : validated.environments)
                view.environments.push_back(observe_view(env));
            return canonicalize(std::move(view), std::nullopt,
                                ObjectiveMode::Complete);
        }
        case Method::EillsImpute:
        case Method::EillsMix: {
            MultiEnvDataset view;
            view.p = validated.p;
            for (size_t e = 0; e < validated.environments.size(); ++e)
                view.environments.push_back(
                    substitute_view(validated.environments[e],
                                    imputations->per_env[e],
                                    method == Method::EillsMix));
            return canonicalize(std::move(view), std::nullopt,
                                ObjectiveMode::Complete);
        }
    }
    throw ValidationError("unknown method");
}

FitResult fit(Method method, const MultiEnvDataset& data,
              const Imputations* imputations, const EstimatorConfig& config) {
    PreparedView view = prepare_view(method, data, imputations);
    SearchConfig search_config = config.search;
    search_config.gamma = config.gamma;
    search_config.variant = config.variant;
    const Imputations* view_imp =
        view.imputations.has_value() ? &*view.imputations : nullptr;
    return search(view.data, view_imp, search_config, view.mode, method);
}

}  // namespace iaei
