#pragma once

#include <cstdint>
#include <vector>

#include "iaei/imputation.hpp"
#include "iaei/sem.hpp"
#include "iaei/types.hpp"

namespace iaei {

struct SimulationSpec {
    std::vector<SemModelId> models = {SemModelId::Model0};
    int n_per_env = 500;
    std::vector<double> missing_ratios = {0.7};
    ImputerSpec imputer;
    std::vector<double> gamma_grid = {1.0};
    std::vector<Method> methods = {Method::Iaei};
    std::vector<PenaltyVariant> variants = {PenaltyVariant::Basic};
    int replications = 100;
    std::uint64_t master_seed = 0;
    // When set, precise/bias imputers train on the evaluation data's labeled
    // subset instead of a fresh independent sample of the same size.
    bool train_imputer_on_labeled_subset = false;
    int max_support_dim = 20;
};

void validate_spec(const SimulationSpec& spec);

// Grid cell in the canonical order: models, ratios, methods, variants, gammas.
struct CellKey {
    SemModelId model;
    double ratio;
    Method method;
    PenaltyVariant variant;
    double gamma;
};

std::vector<CellKey> enumerate_cells(const SimulationSpec& spec);

// |selected \ S*| / max(|selected|, 1); empty selections score 0.
double compute_fdr(const Support& selected, const GroundTruth& truth);

// ||beta_hat - beta*||_2.
double compute_l2_error(const Vector& beta_hat, const GroundTruth& truth);

struct RepCellMetrics {
    double fdr = 0.0;
    double l2 = 0.0;
    std::uint32_t support_mask = 0;
    bool failed = false;
};

// One replication over the whole grid; a deterministic function of
// (spec, master_seed, replication index) via derived substreams for the data,
// the mask, the imputer-training sample and the imputer randomness.
std::vector<RepCellMetrics> run_replication(const SimulationSpec& spec,
                                            int replication);

struct CellStats {
    int replications = 0;
    int failures = 0;
    double fdr_mean = 0.0;
    double fdr_sd = 0.0;
    double l2_mean = 0.0;
    double l2_sd = 0.0;
    std::vector<double> selection_freq;  // per covariate
};

struct SimulationReport {
    SimulationSpec spec;
    std::vector<CellKey> keys;
    std::vector<CellStats> cells;
};

// Aggregates run_replication over all indices; replications may run in
// parallel, the reduction folds in replication order.
SimulationReport run_study(const SimulationSpec& spec, int threads = 0);

}  // namespace iaei
