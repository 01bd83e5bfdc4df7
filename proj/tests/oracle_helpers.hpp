#pragma once

// Test-only reference implementations, deliberately independent of the
// library's evaluation and solver paths: plain uncompensated loops over the
// literal formulas, and a finite-difference Newton minimizer with its own
// Gaussian elimination.

#include <cmath>
#include <functional>
#include <vector>

#include "iaei/types.hpp"

namespace iaei::testing {

inline double oracle_loss(const MultiEnvDataset& data, const Imputations* imp,
                          const Vector& beta, ObjectiveMode mode) {
    const auto weights = normalized_weights(data);
    double total = 0.0;
    for (size_t e = 0; e < data.environments.size(); ++e) {
        const auto& env = data.environments[e];
        const Index n_all = env.rows();
        const Index n_lab = env.labeled_count();
        if (mode == ObjectiveMode::Complete) {
            double sum = 0.0;
            for (Index i = 0; i < n_all; ++i) {
                if (!env.labeled(i)) continue;
                const double r = env.outcomes[i] - env.covariates.row(i).dot(beta);
                sum += r * r;
            }
            total += weights[e] * sum / static_cast<double>(n_lab);
        } else {
            const Vector& h = imp->per_env[e];
            double sum_all = 0.0, sum_lab = 0.0;
            for (Index i = 0; i < n_all; ++i) {
                const double fit = env.covariates.row(i).dot(beta);
                const double rh = h[i] - fit;
                sum_all += rh * rh;
                if (env.labeled(i)) {
                    const double ry = env.outcomes[i] - fit;
                    sum_lab += ry * ry - rh * rh;
                }
            }
            total += weights[e] * (sum_all / static_cast<double>(n_all) +
                                   sum_lab / static_cast<double>(n_lab));
        }
    }
    return total;
}

inline double oracle_penalty(const MultiEnvDataset& data, const Imputations* imp,
                             const Vector& beta, const Support& support,
                             ObjectiveMode mode, PenaltyVariant variant) {
    const auto weights = normalized_weights(data);
    double total = 0.0;
    for (int j : support.indices()) {
        const Index col = j - 1;
        for (size_t e = 0; e < data.environments.size(); ++e) {
            const auto& env = data.environments[e];
            const Index n_all = env.rows();
            const Index n_lab = env.labeled_count();
            for (int power = 1; power <= (variant == PenaltyVariant::Enhanced ? 2 : 1);
                 ++power) {
                auto g = [&](Index i) {
                    const double x = env.covariates(i, col);
                    return power == 1 ? x : x * x;
                };
                double moment = 0.0;
                if (mode == ObjectiveMode::Complete) {
                    double sum = 0.0;
                    for (Index i = 0; i < n_all; ++i) {
                        if (!env.labeled(i)) continue;
                        sum += g(i) *
                               (env.outcomes[i] - env.covariates.row(i).dot(beta));
                    }
                    moment = sum / static_cast<double>(n_lab);
                } else {
                    // Literal debiased form: E_N[g (h - b'x)] + E_n[g (y - h)].
                    const Vector& h = imp->per_env[e];
                    double sum_all = 0.0, sum_lab = 0.0;
                    for (Index i = 0; i < n_all; ++i) {
                        sum_all += g(i) * (h[i] - env.covariates.row(i).dot(beta));
                        if (env.labeled(i))
                            sum_lab += g(i) * (env.outcomes[i] - h[i]);
                    }
                    moment = sum_all / static_cast<double>(n_all) +
                             sum_lab / static_cast<double>(n_lab);
                }
                total += weights[e] * moment * moment;
            }
        }
    }
    return total;
}

inline double oracle_total(const MultiEnvDataset& data, const Imputations* imp,
                           const Vector& beta, const Support& support, double gamma,
                           ObjectiveMode mode, PenaltyVariant variant) {
    return oracle_loss(data, imp, beta, mode) +
           gamma * oracle_penalty(data, imp, beta, support, mode, variant);
}

// Gaussian elimination with partial pivoting; tiny systems only.
inline Vector gauss_solve(Matrix a, Vector b) {
    const Index n = a.rows();
    for (Index c = 0; c < n; ++c) {
        Index pivot = c;
        for (Index r = c + 1; r < n; ++r)
            if (std::fabs(a(r, c)) > std::fabs(a(pivot, c))) pivot = r;
        if (std::fabs(a(pivot, c)) < 1e-14) {
            a(c, c) += 1e-8;  // degenerate direction; nudge and continue
            pivot = c;
        }
        if (pivot != c) {
            a.row(pivot).swap(a.row(c));
            std::swap(b[pivot], b[c]);
        }
        for (Index r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            a.row(r) -= f * a.row(c);
            b[r] -= f * b[c];
        }
    }
    Vector x = Vector::Zero(n);
    for (Index r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (Index c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
        x[r] = s / a(r, r);
    }
    return x;
}

// Newton with central finite differences; exact for quadratics up to FD
// roundoff, two sweeps to polish.
inline Vector fd_newton_minimize(const std::function<double(const Vector&)>& f,
                                 Index k) {
    Vector x = Vector::Zero(k);
    const double h = 1e-3;
    for (int iter = 0; iter < 2; ++iter) {
        Vector grad(k);
        Matrix hess(k, k);
        const double f0 = f(x);
        for (Index i = 0; i < k; ++i) {
            Vector xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fp = f(xp);
            const double fm = f(xm);
            grad[i] = (fp - fm) / (2.0 * h);
            hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        }
        for (Index i = 0; i < k; ++i) {
            for (Index j = i + 1; j < k; ++j) {
                Vector pp = x, pm = x, mp = x, mm = x;
                pp[i] += h; pp[j] += h;
                pm[i] += h; pm[j] -= h;
                mp[i] -= h; mp[j] += h;
                mm[i] -= h; mm[j] -= h;
                hess(i, j) = hess(j, i) =
                    (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
            }
        }
        x -= gauss_solve(hess, grad);
    }
    return x;
}

// Exhaustive dense-minimization oracle: enumerate every support, minimize the
// restricted objective by FD Newton on the reference evaluator, and return
// the smallest value found.
inline double brute_force_best_value(const MultiEnvDataset& data,
                                     const Imputations* imp, double gamma,
                                     ObjectiveMode mode, PenaltyVariant variant) {
    const int p = static_cast<int>(data.p);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
        const Support support = Support::from_mask(mask, p);
        double value;
        if (support.empty()) {
            value = oracle_loss(data, imp, Vector::Zero(p), mode);
        } else {
            const auto embed = [&](const Vector& coeffs) {
                Vector beta = Vector::Zero(p);
                for (int i = 0; i < support.size(); ++i)
                    beta[support.indices()[static_cast<size_t>(i)] - 1] = coeffs[i];
                return beta;
            };
            const auto f = [&](const Vector& coeffs) {
                return oracle_total(data, imp, embed(coeffs), support, gamma, mode,
                                    variant);
            };
            value = f(fd_newton_minimize(f, support.size()));
        }
        best = std::min(best, value);
    }
    return best;
}

}  // namespace iaei::testing
