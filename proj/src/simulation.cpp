#include "iaei/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>

#include "iaei/estimators.hpp"
#include "iaei/numeric.hpp"
#include "iaei/parallel.hpp"

namespace iaei {

void validate_spec(const SimulationSpec& spec) {
    if (spec.models.empty()) throw ValidationError("no SEM models specified");
    if (spec.n_per_env < 1) throw ValidationError("n_per_env must be >= 1");
    if (spec.missing_ratios.empty())
        throw ValidationError("no missing ratios specified");
    for (double r : spec.missing_ratios)
        if (r < 0.0 || r >= 1.0)
            throw ValidationError("missing ratios must lie in [0, 1)");
    if (spec.gamma_grid.empty()) throw ValidationError("gamma grid is empty");
    for (double g : spec.gamma_grid)
        if (g < 0.0) throw ValidationError("gamma values must be nonnegative");
    if (spec.methods.empty()) throw ValidationError("no methods specified");
    if (spec.variants.empty()) throw ValidationError("no penalty variants specified");
    if (spec.replications < 1) throw ValidationError("replications must be >= 1");
}

std::vector<CellKey> enumerate_cells(const SimulationSpec& spec) {
    std::vector<CellKey> keys;
    for (SemModelId model : spec.models)
        for (double ratio : spec.missing_ratios)
            for (Method method : spec.methods)
                for (PenaltyVariant variant : spec.variants)
                    for (double gamma : spec.gamma_grid)
                        keys.push_back({model, ratio, method, variant, gamma});
    return keys;
}

double compute_fdr(const Support& selected, const GroundTruth& truth) {
    int false_hits = 0;
    for (int j : selected.indices())
        if (!truth.support_star.contains(j)) ++false_hits;
    const int denom = std::max(selected.size(), 1);
    return static_cast<double>(false_hits) / static_cast<double>(denom);
}

double compute_l2_error(const Vector& beta_hat, const GroundTruth& truth) {
    if (beta_hat.size() != truth.beta_star.size())
        throw DimensionMismatch("coefficient length differs from ground truth");
    return (beta_hat - truth.beta_star).norm();
}

namespace {

bool method_needs_imputations(Method m) {
    return m == Method::Iaei || m == Method::EillsImpute || m == Method::EillsMix;
}

std::uint64_t model_tag(SemModelId model) {
    return static_cast<std::uint64_t>(model);
}

MultiEnvDataset generate_pair(const SimulationSpec& spec, SemModelId model,
                              int rep, std::string_view purpose) {
    std::vector<EnvironmentData> envs;
    for (int e = 1; e <= 2; ++e) {
        GaussianNoise noise(derive_seed(
            spec.master_seed,
            {hash_tag(purpose), model_tag(model), static_cast<std::uint64_t>(rep),
             static_cast<std::uint64_t>(e)}));
        envs.push_back(sem_generate(model, e, spec.n_per_env, noise));
    }
    return make_dataset(std::move(envs));
}

}  // namespace

std::vector<RepCellMetrics> run_replication(const SimulationSpec& spec,
                                            int replication) {
    validate_spec(spec);
    const GroundTruth truth = sem_ground_truth();
    const bool any_imputed =
        std::any_of(spec.methods.begin(), spec.methods.end(),
                    method_needs_imputations);

    std::vector<RepCellMetrics> out;
    out.reserve(enumerate_cells(spec).size());

    for (SemModelId model : spec.models) {
        const MultiEnvDataset full = generate_pair(spec, model, replication, "dgp");

        ImputerSpec imputer = spec.imputer;
        imputer.seed = derive_seed(
            spec.master_seed,
            {hash_tag("imp_seed"), model_tag(model),
             static_cast<std::uint64_t>(replication)});

        // Imputer training data is an independent sample of the same size,
        // so the fitted rule is fixed relative to the evaluation data.
        EnvImputerSet imputer_set;
        if (any_imputed && !spec.train_imputer_on_labeled_subset)
            imputer_set = build_strategy(
                imputer, generate_pair(spec, model, replication, "imp_train"));

        for (double ratio : spec.missing_ratios) {
            std::vector<EnvironmentData> masked_envs;
            for (size_t e = 0; e < full.environments.size(); ++e) {
                RandomStream stream(derive_seed(
                    spec.master_seed,
                    {hash_tag("mask"), model_tag(model), double_bits(ratio),
                     static_cast<std::uint64_t>(replication),
                     static_cast<std::uint64_t>(e)}));
                masked_envs.push_back(
                    apply_mcar(full.environments[e], ratio, stream));
            }
            const MultiEnvDataset masked = make_dataset(std::move(masked_envs));

            Imputations imputations;
            if (any_imputed) {
                if (spec.train_imputer_on_labeled_subset)
                    imputer_set = build_strategy(imputer, masked);
                imputations = impute_dataset(imputer_set, masked).first;
            }

            for (Method method : spec.methods) {
                for (PenaltyVariant variant : spec.variants) {
                    for (double gamma : spec.gamma_grid) {
                        EstimatorConfig cfg;
                        cfg.gamma = gamma;
                        cfg.variant = variant;
                        cfg.search.max_support_dim = spec.max_support_dim;
                        RepCellMetrics metrics;
                        try {
                            const MultiEnvDataset& input =
                                method == Method::Oracle ? full : masked;
                            const Imputations* imp =
                                method_needs_imputations(method) ? &imputations
                                                                 : nullptr;
                            const FitResult fit_result =
                                fit(method, input, imp, cfg);
                            metrics.fdr = compute_fdr(fit_result.support, truth);
                            metrics.l2 =
                                compute_l2_error(fit_result.beta, truth);
                            metrics.support_mask = fit_result.support.to_mask();
                        } catch (const Error&) {
                            metrics.failed = true;
                        }
                        out.push_back(metrics);
                    }
                }
            }
        }
    }
    return out;
}

SimulationReport run_study(const SimulationSpec& spec, int threads) {
    validate_spec(spec);
    SimulationReport report;
    report.spec = spec;
    report.keys = enumerate_cells(spec);

    const int reps = spec.replications;
    const size_t n_cells = report.keys.size();
    std::vector<std::vector<RepCellMetrics>> results(static_cast<size_t>(reps));
    parallel_for(0, reps, threads,
                 [&](int r) { results[static_cast<size_t>(r)] = run_replication(spec, r); });

    report.cells.resize(n_cells);
    const int p = kSemCovariates;
    for (size_t c = 0; c < n_cells; ++c) {
        CellStats& stats = report.cells[c];
        stats.replications = reps;
        stats.selection_freq.assign(static_cast<size_t>(p), 0.0);

        KahanSum fdr_sum, l2_sum;
        std::vector<KahanSum> sel(static_cast<size_t>(p));
        int ok = 0;
        for (int r = 0; r < reps; ++r) {
            const RepCellMetrics& m = results[static_cast<size_t>(r)][c];
            if (m.failed) {
                ++stats.failures;
                continue;
            }
            ++ok;
            fdr_sum.add(m.fdr);
            l2_sum.add(m.l2);
            for (int j = 0; j < p; ++j)
                if (m.support_mask & (1u << j)) sel[static_cast<size_t>(j)].add(1.0);
        }
        if (ok == 0) {
            stats.fdr_mean = stats.fdr_sd = stats.l2_mean = stats.l2_sd =
                std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        stats.fdr_mean = fdr_sum.value() / ok;
        stats.l2_mean = l2_sum.value() / ok;
        for (int j = 0; j < p; ++j)
            stats.selection_freq[static_cast<size_t>(j)] =
                sel[static_cast<size_t>(j)].value() / ok;

        if (ok > 1) {
            KahanSum fdr_sq, l2_sq;
            for (int r = 0; r < reps; ++r) {
                const RepCellMetrics& m = results[static_cast<size_t>(r)][c];
                if (m.failed) continue;
                fdr_sq.add((m.fdr - stats.fdr_mean) * (m.fdr - stats.fdr_mean));
                l2_sq.add((m.l2 - stats.l2_mean) * (m.l2 - stats.l2_mean));
            }
            stats.fdr_sd = std::sqrt(fdr_sq.value() / (ok - 1));
            stats.l2_sd = std::sqrt(l2_sq.value() / (ok - 1));
        }
    }
    return report;
}

}  // namespace iaei
