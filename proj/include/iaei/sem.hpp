#pragma once

#include <string>

#include "iaei/rng.hpp"
#include "iaei/types.hpp"

namespace iaei {

// The four two-environment structural equation models used by the benchmark
// suite. All share p = 12 covariates, S* = {1,2,3} and beta* = (3, 2, -0.5).
enum class SemModelId { Model0, Model1, Model2, Model3 };

constexpr int kSemCovariates = 12;

std::string to_string(SemModelId id);
SemModelId parse_sem_model(const std::string& s);

GroundTruth sem_ground_truth();

// Standard-normal noise feed. The zero source is a test hook for checking the
// deterministic propagation of the equations.
class NoiseSource {
  public:
    virtual ~NoiseSource() = default;
    virtual double next() = 0;
};

class GaussianNoise final : public NoiseSource {
  public:
    explicit GaussianNoise(std::uint64_t seed) : stream_(seed) {}
    double next() override { return stream_.normal(); }

  private:
    RandomStream stream_;
};

class ZeroNoise final : public NoiseSource {
  public:
    double next() override { return 0.0; }
};

// Generates n fully labeled rows for one environment (1 or 2). Each row draws
// u_1..u_13 (plus one extra draw for Model 3, environment 2) and propagates
// the equations in a fixed topological order.
EnvironmentData sem_generate(SemModelId model, int environment, Index n,
                             NoiseSource& noise, double weight = 1.0);

// Masks exactly round(N * ratio) uniformly chosen rows. Covariates are
// untouched; masked outcome slots become undefined.
EnvironmentData apply_mcar(const EnvironmentData& env, double ratio,
                           RandomStream& stream);

}  // namespace iaei
