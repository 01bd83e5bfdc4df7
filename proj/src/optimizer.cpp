#include "iaei/optimizer.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "iaei/objectives.hpp"

namespace iaei {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-6;

struct EnvArrays {
    Matrix x_all;   // N x p
    Vector h_all;   // N (adjusted mode)
    Matrix x_lab;   // n x p
    Vector y_lab;   // n
    Vector h_lab;   // n
};

EnvArrays split_rows(const EnvironmentData& env, const Vector* h) {
    EnvArrays a;
    const Index n_lab = env.labeled_count();
    a.x_lab.resize(n_lab, env.cols());
    a.y_lab.resize(n_lab);
    if (h != nullptr) {
        a.x_all = env.covariates;
        a.h_all = *h;
        a.h_lab.resize(n_lab);
    }
    Index k = 0;
    for (Index i = 0; i < env.rows(); ++i) {
        if (!env.labeled(i)) continue;
        a.x_lab.row(k) = env.covariates.row(i);
        a.y_lab[k] = env.outcomes[i];
        if (h != nullptr) a.h_lab[k] = (*h)[i];
        ++k;
    }
    return a;
}

}  // namespace

MomentCache build_moments(const MultiEnvDataset& data,
                          const Imputations* imputations, ObjectiveMode mode,
                          bool need_enhanced) {
    if (mode == ObjectiveMode::Adjusted) {
        if (imputations == nullptr)
            throw MissingImputation("adjusted mode requires imputations");
        check_imputations(data, *imputations);
    }
    MomentCache cache;
    cache.p = data.p;
    cache.enhanced = need_enhanced;
    cache.weights = normalized_weights(data);
    cache.envs.reserve(data.environments.size());

    for (size_t e = 0; e < data.environments.size(); ++e) {
        const auto& env = data.environments[e];
        const Vector* h =
            mode == ObjectiveMode::Adjusted ? &imputations->per_env[e] : nullptr;
        const EnvArrays a = split_rows(env, h);
        const double n_lab = static_cast<double>(a.x_lab.rows());

        EnvMoments m;
        if (mode == ObjectiveMode::Complete) {
            m.gram = a.x_lab.transpose() * a.x_lab / n_lab;
            m.cross = a.x_lab.transpose() * a.y_lab / n_lab;
            m.y_sq = a.y_lab.dot(a.y_lab) / n_lab;
            if (need_enhanced) {
                const Matrix z = a.x_lab.array().square().matrix();
                m.gram_sq = z.transpose() * a.x_lab / n_lab;
                m.cross_sq = z.transpose() * a.y_lab / n_lab;
            }
        } else {
            const double n_all = static_cast<double>(a.x_all.rows());
            m.gram = a.x_all.transpose() * a.x_all / n_all;
            // (all - labeled_h) + labeled_y keeps the fully-labeled collapse
            // exact: the first two terms cancel bitwise when every row is
            // labeled.
            m.cross = (a.x_all.transpose() * a.h_all / n_all -
                       a.x_lab.transpose() * a.h_lab / n_lab) +
                      a.x_lab.transpose() * a.y_lab / n_lab;
            m.y_sq = (a.h_all.dot(a.h_all) / n_all - a.h_lab.dot(a.h_lab) / n_lab) +
                     a.y_lab.dot(a.y_lab) / n_lab;
            if (need_enhanced) {
                const Matrix z_all = a.x_all.array().square().matrix();
                const Matrix z_lab = a.x_lab.array().square().matrix();
                m.gram_sq = z_all.transpose() * a.x_all / n_all;
                m.cross_sq = (z_all.transpose() * a.h_all / n_all -
                              z_lab.transpose() * a.h_lab / n_lab) +
                             z_lab.transpose() * a.y_lab / n_lab;
            }
        }
        cache.envs.push_back(std::move(m));
    }
    return cache;
}

QuadraticForm assemble_from_cache(const MomentCache& cache, const Support& support,
                                  double gamma, PenaltyVariant variant) {
    if (support.empty())
        throw ValidationError("assemble_quadratic requires a nonempty support");
    if (support.max_index() > cache.p)
        throw DimensionMismatch("support index exceeds covariate dimension");
    if (variant == PenaltyVariant::Enhanced && !cache.enhanced)
        throw ValidationError("moment cache built without enhanced moments");

    const int k = support.size();
    std::vector<int> cols(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) cols[static_cast<size_t>(i)] = support.indices()[static_cast<size_t>(i)] - 1;

    QuadraticForm qf;
    qf.support = support;
    qf.H = Matrix::Zero(k, k);
    qf.g = Vector::Zero(k);
    qf.c = 0.0;

    for (size_t e = 0; e < cache.envs.size(); ++e) {
        const EnvMoments& m = cache.envs[e];
        const double w = cache.weights[e];
        qf.H += (2.0 * w) * m.gram(cols, cols);
        qf.g += (2.0 * w) * m.cross(cols);
        qf.c += w * m.y_sq;
        if (gamma == 0.0) continue;
        for (int col : cols) {
            const Vector b = m.gram(col, cols).transpose();
            const double a = m.cross[col];
            qf.H += (2.0 * gamma * w) * (b * b.transpose());
            qf.g += (2.0 * gamma * w) * (a * b);
            qf.c += gamma * w * a * a;
            if (variant == PenaltyVariant::Enhanced) {
                const Vector b2 = m.gram_sq(col, cols).transpose();
                const double a2 = m.cross_sq[col];
                qf.H += (2.0 * gamma * w) * (b2 * b2.transpose());
                qf.g += (2.0 * gamma * w) * (a2 * b2);
                qf.c += gamma * w * a2 * a2;
            }
        }
    }
    return qf;
}

QuadraticForm assemble_quadratic(const MultiEnvDataset& data,
                                 const Imputations* imputations,
                                 const Support& support, double gamma,
                                 ObjectiveMode mode, PenaltyVariant variant) {
    const MomentCache cache = build_moments(
        data, imputations, mode, variant == PenaltyVariant::Enhanced);
    return assemble_from_cache(cache, support, gamma, variant);
}

SupportSolution solve_support(const QuadraticForm& qf, double jitter) {
    Matrix h = qf.H;
    if (jitter != 0.0) h.diagonal().array() += jitter;
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("LDLT factorization failed for support of size " +
                             std::to_string(qf.support.size()));
    SupportSolution sol;
    sol.beta_s = ldlt.solve(qf.g);
    sol.value = 0.5 * sol.beta_s.dot(qf.H * sol.beta_s) - qf.g.dot(sol.beta_s) + qf.c;
    if (!sol.beta_s.allFinite() || !std::isfinite(sol.value))
        throw SingularSystem("solve produced non-finite coefficients");
    return sol;
}

namespace {

bool solution_acceptable(const QuadraticForm& qf, const SupportSolution& sol) {
    const double residual = (qf.H * sol.beta_s - qf.g).cwiseAbs().maxCoeff();
    const double bound =
        kResidualTolerance * (1.0 + qf.g.cwiseAbs().maxCoeff());
    return std::isfinite(sol.value) && residual <= bound;
}

SupportSolution solve_with_retry(const QuadraticForm& qf, double ridge_scale) {
    const double fallback =
        ridge_scale * qf.H.trace() / static_cast<double>(qf.support.size());
    try {
        SupportSolution sol = solve_support(qf, 0.0);
        if (solution_acceptable(qf, sol)) return sol;
    } catch (const SingularSystem&) {
    }
    return solve_support(qf, fallback);
}

struct Candidate {
    Support support;
    Vector beta_s;
    double value = 0.0;
};

bool candidate_improves(const Candidate& best, const Candidate& next) {
    if (next.value < best.value - kTieTolerance) return true;
    if (next.value > best.value + kTieTolerance) return false;
    return support_precedes(next.support, best.support);
}

}  // namespace

FitResult search(const MultiEnvDataset& data, const Imputations* imputations,
                 const SearchConfig& config, ObjectiveMode mode, Method method) {
    if (config.gamma < 0.0) throw ValidationError("gamma must be nonnegative");
    const int p = static_cast<int>(data.p);

    std::vector<Support> candidates;
    if (config.candidate_supports.has_value()) {
        candidates.push_back(Support{});
        for (const Support& s : *config.candidate_supports) {
            if (s.max_index() > p)
                throw DimensionMismatch("candidate support exceeds dimension");
            if (!s.empty()) candidates.push_back(s);
        }
    } else {
        if (p > config.max_support_dim)
            throw TooManyCovariates(
                "exhaustive search over " + std::to_string(p) +
                " covariates exceeds max_support_dim = " +
                std::to_string(config.max_support_dim));
        candidates.reserve(static_cast<size_t>(1) << p);
        for (std::uint32_t mask = 0; mask < (1u << p); ++mask)
            candidates.push_back(Support::from_mask(mask, p));
    }

    const MomentCache cache = build_moments(
        data, imputations, mode, config.variant == PenaltyVariant::Enhanced);

    // Value of the empty support: loss at beta = 0, no penalty terms.
    double empty_value = 0.0;
    for (size_t e = 0; e < cache.envs.size(); ++e)
        empty_value += cache.weights[e] * cache.envs[e].y_sq;

    // Candidate evaluations are independent; the argmin folds over them in
    // enumeration order so the result does not depend on scheduling.
    Candidate best;
    bool have_best = false;
    for (const Support& s : candidates) {
        Candidate cand;
        cand.support = s;
        if (s.empty()) {
            cand.value = empty_value;
        } else {
            const QuadraticForm qf =
                assemble_from_cache(cache, s, config.gamma, config.variant);
            const SupportSolution sol = solve_with_retry(qf, config.ridge_jitter);
            cand.beta_s = sol.beta_s;
            cand.value = sol.value;
        }
        if (!have_best || candidate_improves(best, cand)) {
            best = std::move(cand);
            have_best = true;
        }
    }

    FitResult fit;
    fit.method = method;
    fit.variant = config.variant;
    fit.gamma = config.gamma;
    fit.support = best.support;
    fit.beta = Vector::Zero(p);
    for (int i = 0; i < best.support.size(); ++i)
        fit.beta[best.support.indices()[static_cast<size_t>(i)] - 1] = best.beta_s[i];
    const ObjectiveValue value =
        objective(data, fit.beta, fit.support, config.gamma, mode, imputations,
                  config.variant);
    fit.loss_part = value.loss;
    fit.penalty_part = value.penalty;
    fit.objective = value.total;
    return fit;
}

}  // namespace iaei
