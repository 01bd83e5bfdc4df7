#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iaei/errors.hpp"

namespace iaei {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// -------------------------------------------------------------------------
// Support: strictly increasing 1-based covariate index set.
// -------------------------------------------------------------------------
class Support {
  public:
    Support() = default;
    explicit Support(std::vector<int> indices);

    static Support from_mask(std::uint32_t mask, int p);

    const std::vector<int>& indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    bool empty() const { return indices_.empty(); }
    bool contains(int j) const;
    int max_index() const { return indices_.empty() ? 0 : indices_.back(); }
    std::uint32_t to_mask() const;

    bool operator==(const Support& other) const { return indices_ == other.indices_; }

  private:
    std::vector<int> indices_;  // sorted, unique, >= 1
};

// Tie-break order used by the optimizer: smaller cardinality first, then
// lexicographically smaller index sequence.
bool support_precedes(const Support& a, const Support& b);

// -------------------------------------------------------------------------
// EnvironmentData: one environment's covariates plus partially observed
// outcomes. Outcome slots for unlabeled rows are undefined; the constructor
// overwrites them with quiet NaN and the accessor asserts the mask, so a
// missing label can never silently enter an objective.
// -------------------------------------------------------------------------
struct EnvironmentData {
    std::string env_id;
    Matrix covariates;                // N x p
    Vector outcomes;                  // length N, defined only where labeled
    std::vector<std::uint8_t> label_mask;  // 1 = gold-standard label observed
    double weight = 1.0;

    EnvironmentData() = default;
    EnvironmentData(std::string id, Matrix x, Vector y,
                    std::vector<std::uint8_t> mask, double w = 1.0);

    static EnvironmentData fully_labeled(std::string id, Matrix x, Vector y,
                                         double w = 1.0);

    Index rows() const { return covariates.rows(); }
    Index cols() const { return covariates.cols(); }
    Index labeled_count() const;
    bool labeled(Index i) const { return label_mask[static_cast<size_t>(i)] != 0; }
    double outcome(Index i) const;
};

// tau-hat = (N - n) / N.
double missing_ratio(const EnvironmentData& env);

// -------------------------------------------------------------------------
// MultiEnvDataset
// -------------------------------------------------------------------------
struct MultiEnvDataset {
    std::vector<EnvironmentData> environments;
    Index p = 0;
    // Filled by validate_dataset; objectives consume this view.
    std::vector<double> normalized_weights;
    bool validated = false;

    Index env_count() const { return static_cast<Index>(environments.size()); }
};

MultiEnvDataset make_dataset(std::vector<EnvironmentData> envs);

// Checks the type invariants and attaches the normalized-weight view.
// Throws DimensionMismatch, NoLabels, NonFinite or NonPositiveWeight.
MultiEnvDataset validate_dataset(MultiEnvDataset data);

// Normalized view computed from the raw weights (sums to 1).
std::vector<double> normalized_weights(const MultiEnvDataset& data);

// -------------------------------------------------------------------------
// Ground truth of a synthetic model: S* = supp(beta*).
// -------------------------------------------------------------------------
struct GroundTruth {
    Support support_star;
    Vector beta_star;

    static GroundTruth from_beta(Vector beta);
};

// -------------------------------------------------------------------------
// Objective and method tags
// -------------------------------------------------------------------------
enum class PenaltyVariant { Basic, Enhanced };
enum class ObjectiveMode { Complete, Adjusted };
enum class Method { Iaei, Oracle, EillsObserve, EillsImpute, EillsMix };

std::string to_string(PenaltyVariant v);
std::string to_string(ObjectiveMode m);
std::string to_string(Method m);
PenaltyVariant parse_variant(const std::string& s);
Method parse_method(const std::string& s);

struct FitResult {
    Support support;
    Vector beta;          // length p, zero off support
    double objective = 0.0;
    double loss_part = 0.0;
    double penalty_part = 0.0;
    double gamma = 0.0;
    Method method = Method::Oracle;
    PenaltyVariant variant = PenaltyVariant::Basic;
};

// Per-row imputation predictions, aligned with the dataset's environments.
struct Imputations {
    std::vector<Vector> per_env;
};

// Throws MissingImputation when a row lacks a prediction.
void check_imputations(const MultiEnvDataset& data, const Imputations& imp);

}  // namespace iaei
