#pragma once

#include <optional>

#include "iaei/types.hpp"

namespace iaei {

// Closed form of the objective restricted to a support S: for beta supported
// on S, objective(beta) = 1/2 beta'H beta - g'beta + c.
struct QuadraticForm {
    Matrix H;
    Vector g;
    double c = 0.0;
    Support support;
};

struct SearchConfig {
    double gamma = 0.0;
    PenaltyVariant variant = PenaltyVariant::Basic;
    int max_support_dim = 20;
    double ridge_jitter = 1e-10;  // scale of trace(H)/|S| applied on retry
    std::optional<std::vector<Support>> candidate_supports;  // all when absent
};

struct SupportSolution {
    Vector beta_s;  // coefficients on the support, in support order
    double value;   // objective at the embedded beta
};

// Per-environment moments shared by every support of one fit. Complete mode
// averages over labeled rows; adjusted mode combines all-row and labeled-row
// averages as (all - labeled_h) + labeled_y so that fully labeled data
// reproduces the complete-mode cache bit for bit.
struct EnvMoments {
    Matrix gram;      // E[x x']
    Vector cross;     // moment constants a_j (loss linear part and penalty)
    double y_sq = 0;  // constant term of the loss
    Matrix gram_sq;   // E[x_j^2 x_k], enhanced penalty only
    Vector cross_sq;  // enhanced-penalty constants
};

struct MomentCache {
    std::vector<EnvMoments> envs;
    std::vector<double> weights;  // normalized view
    Index p = 0;
    bool enhanced = false;
};

MomentCache build_moments(const MultiEnvDataset& data,
                          const Imputations* imputations, ObjectiveMode mode,
                          bool need_enhanced);

QuadraticForm assemble_from_cache(const MomentCache& cache, const Support& support,
                                  double gamma, PenaltyVariant variant);

// Convenience wrapper that builds the cache for a single support.
QuadraticForm assemble_quadratic(const MultiEnvDataset& data,
                                 const Imputations* imputations,
                                 const Support& support, double gamma,
                                 ObjectiveMode mode, PenaltyVariant variant);

// Solves (H + jitter I) beta = g; value is evaluated with the unjittered H.
// Throws SingularSystem when the factorization fails or yields non-finite
// coefficients.
SupportSolution solve_support(const QuadraticForm& qf, double jitter);

// Minimizes the objective over candidate supports (all 2^p subsets including
// the empty set by default). Ties within 1e-12 absolute prefer the smaller
// support, then the lexicographically smaller index set. Deterministic for
// fixed inputs and config.
FitResult search(const MultiEnvDataset& data, const Imputations* imputations,
                 const SearchConfig& config, ObjectiveMode mode, Method method);

}  // namespace iaei
