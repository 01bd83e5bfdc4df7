#include "iaei/sem.hpp"

#include <cmath>

namespace iaei {

std::string to_string(SemModelId id) {
    switch (id) {
        case SemModelId::Model0: return "model0";
        case SemModelId::Model1: return "model1";
        case SemModelId::Model2: return "model2";
        case SemModelId::Model3: return "model3";
    }
    return "unknown";
}

SemModelId parse_sem_model(const std::string& s) {
    if (s == "model0" || s == "0") return SemModelId::Model0;
    if (s == "model1" || s == "1") return SemModelId::Model1;
    if (s == "model2" || s == "2") return SemModelId::Model2;
    if (s == "model3" || s == "3") return SemModelId::Model3;
    throw ParseError("unknown SEM model '" + s + "'");
}

GroundTruth sem_ground_truth() {
    Vector beta = Vector::Zero(kSemCovariates);
    beta[0] = 3.0;
    beta[1] = 2.0;
    beta[2] = -0.5;
    return GroundTruth::from_beta(std::move(beta));
}

namespace {

struct Row {
    double x[kSemCovariates + 1];  // 1-based access
    double y;
};

Row propagate(SemModelId model, int env, NoiseSource& noise) {
    double u[14];  // u[1..13]
    for (int k = 1; k <= 13; ++k) u[k] = noise.next();

    Row r{};
    auto& x = r.x;
    x[1] = u[1];
    x[4] = env == 1 ? u[4] : u[4] * u[4] - 1.0;
    x[2] = std::sin(x[4]) + u[2];
    x[3] = std::cos(x[4]) + u[3];
    x[5] = std::sin(x[3] + u[5]);
    x[10] = 2.5 * x[1] + 1.5 * x[2] + u[10];
    x[12] = u[12];

    r.y = 3.0 * x[1] + 2.0 * x[2] - 0.5 * x[3] + u[13];
    if (model == SemModelId::Model2 && env == 2)
        r.y += std::sin(x[12]) + (x[12] * x[12] - 1.0);
    if (model == SemModelId::Model3 && env == 2) {
        const double v14 = noise.next();
        r.y += 0.5 * x[12] + (-0.5 * x[12] * x[12] * x[12] + v14);
    }

    x[6] = 0.8 * r.y * u[6];

    if (model == SemModelId::Model0) {
        x[7] = env == 1 ? 0.5 * x[3] + r.y + u[7]
                        : 4.0 * x[3] + std::tanh(r.y) + u[7];
        x[8] = 0.5 * x[7] - r.y + x[10] + u[8];
    } else if (env == 1) {
        x[7] = 0.5 * std::sin(x[3] * x[3]) + 8.0 * r.y * r.y * r.y + u[7];
        x[8] = std::log(std::fabs(x[7] * r.y + 1.0)) + 5.0 * std::sin(r.y) + u[8];
    } else {
        x[7] = std::tanh(x[3]) + 4.0 * std::sqrt(std::fabs(r.y)) + u[7];
        x[8] = 0.5 * x[7] * x[7] + r.y * r.y * r.y + std::cos(r.y) + u[8];
    }

    x[9] = std::tanh(x[7]) + 0.1 * std::cos(x[8]) + u[9];
    x[11] = 0.4 * (x[7] + x[8]) * u[11];
    return r;
}

}  // namespace

EnvironmentData sem_generate(SemModelId model, int environment, Index n,
                             NoiseSource& noise, double weight) {
    if (environment != 1 && environment != 2)
        throw ValidationError("SEM environments are 1 and 2");
    if (n < 1) throw ValidationError("sample size must be >= 1");

    Matrix x(n, kSemCovariates);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const Row row = propagate(model, environment, noise);
        for (int j = 1; j <= kSemCovariates; ++j) x(i, j - 1) = row.x[j];
        y[i] = row.y;
    }
    return EnvironmentData::fully_labeled(std::to_string(environment), std::move(x),
                                          std::move(y), weight);
}

EnvironmentData apply_mcar(const EnvironmentData& env, double ratio,
                           RandomStream& stream) {
    if (ratio < 0.0 || ratio >= 1.0)
        throw ValidationError("missing ratio must lie in [0, 1)");
    const Index total = env.rows();
    const Index masked = static_cast<Index>(
        std::llround(ratio * static_cast<double>(total)));
    if (masked >= total)
        throw AllMissing("mask count equals the sample size in environment '" +
                         env.env_id + "'");

    // Partial Fisher-Yates: the first `masked` slots end up holding a uniform
    // subset drawn without replacement.
    std::vector<Index> order(static_cast<size_t>(total));
    for (Index i = 0; i < total; ++i) order[static_cast<size_t>(i)] = i;
    for (Index i = 0; i < masked; ++i) {
        const Index j = static_cast<Index>(stream.uniform_int(i, total - 1));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    std::vector<std::uint8_t> mask(static_cast<size_t>(total), 1);
    for (Index i = 0; i < masked; ++i) mask[static_cast<size_t>(order[static_cast<size_t>(i)])] = 0;

    Vector y(total);
    for (Index i = 0; i < total; ++i) y[i] = mask[static_cast<size_t>(i)] ? env.outcomes[i] : 0.0;
    return EnvironmentData(env.env_id, env.covariates, std::move(y), std::move(mask),
                           env.weight);
}

}  // namespace iaei
