#pragma once

#include <span>

#include "iaei/types.hpp"

namespace iaei {

struct ObjectiveValue {
    double loss = 0.0;
    double penalty = 0.0;
    double total = 0.0;
    double gamma = 0.0;
};

// Pooled squared loss over labeled rows:
//   sum_e w_e * mean_{labeled i} (y_i - beta'x_i)^2
// with w the normalized weight view.
double empirical_loss(const MultiEnvDataset& data, const Vector& beta);

// Invariance penalty over the given support:
//   sum_{j in S} sum_e w_e |mean_{labeled}(x_ij r_i)|^2
// The enhanced variant adds |mean_{labeled}(x_ij^2 r_i)|^2 per (j, e).
// The support is supplied by the caller (the optimizer owns support
// semantics); residuals use the full beta.
double empirical_penalty(const MultiEnvDataset& data, const Vector& beta,
                         const Support& support, PenaltyVariant variant);

// Imputation-debiased pooled loss:
//   sum_e w_e [ mean_{all}(h_i - beta'x_i)^2
//             + mean_{lab}(y_i - beta'x_i)^2 - mean_{lab}(h_i - beta'x_i)^2 ].
// May be negative in finite samples. With no unlabeled rows this equals
// empirical_loss under the fixed accumulation order.
double adjusted_loss(const MultiEnvDataset& data, const Imputations& imputations,
                     const Vector& beta);

// Imputation-debiased penalty. Per (j, e) the inner moment is
//   mean_all[x_j (h - beta'x)] + mean_lab[x_j (y - h)],
// accumulated as (mean_all - mean_lab)[x_j (h - beta'x)] + mean_lab[x_j r]
// so the m = 0 collapse to empirical_penalty is exact. The enhanced variant
// adds the x_j^2 analogue.
double adjusted_penalty(const MultiEnvDataset& data, const Imputations& imputations,
                        const Vector& beta, const Support& support,
                        PenaltyVariant variant);

// loss + gamma * penalty, dispatching on mode. Imputations are required in
// adjusted mode and ignored otherwise.
ObjectiveValue objective(const MultiEnvDataset& data, const Vector& beta,
                         const Support& support, double gamma, ObjectiveMode mode,
                         const Imputations* imputations, PenaltyVariant variant);

// Weighted variants used by the scaling property tests; `weights` replaces
// the normalized view (one entry per environment).
double empirical_loss_weighted(const MultiEnvDataset& data, const Vector& beta,
                               std::span<const double> weights);
double empirical_penalty_weighted(const MultiEnvDataset& data, const Vector& beta,
                                  const Support& support, PenaltyVariant variant,
                                  std::span<const double> weights);
double adjusted_loss_weighted(const MultiEnvDataset& data,
                              const Imputations& imputations, const Vector& beta,
                              std::span<const double> weights);
double adjusted_penalty_weighted(const MultiEnvDataset& data,
                                 const Imputations& imputations, const Vector& beta,
                                 const Support& support, PenaltyVariant variant,
                                 std::span<const double> weights);

// Debiased per-coordinate moments, one length-p vector per environment:
//   mean_all[x_j (h - beta'x)] + mean_lab[x_j (y - h)].
// These are the quantities squared inside adjusted_penalty; exposed for
// bias diagnostics and the unbiasedness checks.
std::vector<Vector> adjusted_penalty_moments(const MultiEnvDataset& data,
                                             const Imputations& imputations,
                                             const Vector& beta);

// Complete-data counterpart: mean_lab[x_j (y - beta'x)] per environment.
std::vector<Vector> empirical_penalty_moments(const MultiEnvDataset& data,
                                              const Vector& beta);

}  // namespace iaei
