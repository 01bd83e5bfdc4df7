#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iaei/types.hpp"

namespace iaei {

enum class ImputerFamily { Ols, RandomForest, BoostedTrees };
enum class ImputerStrategy { Precise, Bias, Hbias };

std::string to_string(ImputerFamily f);
std::string to_string(ImputerStrategy s);
ImputerFamily parse_family(const std::string& s);
ImputerStrategy parse_strategy(const std::string& s);

struct ImputerSpec {
    ImputerFamily family = ImputerFamily::Ols;
    ImputerStrategy strategy = ImputerStrategy::Precise;
    // Tree hyperparameters; `trees` is the forest size or the boosting rounds.
    int trees = 0;  // 0 -> family default (forest 100, boosting 200)
    int max_depth = -1;  // -1 -> family default (forest 6, boosting 3)
    int min_leaf = 5;
    double learning_rate = 0.1;
    bool bootstrap = true;
    std::optional<std::uint64_t> seed;  // mandatory for tree families
    // Covariate shift for bias/hbias; empty -> strategy default (0.5 / 1.0),
    // size 1 -> broadcast, otherwise one entry per covariate.
    Vector shift_delta;
    std::optional<double> noise_sd;  // hbias only; default 0.5

    int effective_trees() const;
    int effective_depth() const;
    double effective_noise_sd() const;
    Vector effective_shift(Index p) const;
};

// A trained prediction rule h: R^p -> R, deterministic after training.
class ImputationModel {
  public:
    virtual ~ImputationModel() = default;
    virtual double predict(const Eigen::Ref<const Vector>& x) const = 0;
    virtual ImputerFamily family() const = 0;
};

class OlsModel final : public ImputationModel {
  public:
    OlsModel(Vector coef, double intercept, bool degenerate)
        : coef_(std::move(coef)), intercept_(intercept), degenerate_(degenerate) {}
    double predict(const Eigen::Ref<const Vector>& x) const override {
        return intercept_ + coef_.dot(x);
    }
    ImputerFamily family() const override { return ImputerFamily::Ols; }
    const Vector& coefficients() const { return coef_; }
    double intercept() const { return intercept_; }
    bool degenerate_design() const { return degenerate_; }

  private:
    Vector coef_;
    double intercept_;
    bool degenerate_;  // rank-deficient design, minimum-norm fit used
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::Ref<const Vector>& x) const;
};

class ForestModel final : public ImputationModel {
  public:
    explicit ForestModel(std::vector<RegressionTree> trees)
        : trees_(std::move(trees)) {}
    double predict(const Eigen::Ref<const Vector>& x) const override;
    ImputerFamily family() const override { return ImputerFamily::RandomForest; }
    const std::vector<RegressionTree>& trees() const { return trees_; }

  private:
    std::vector<RegressionTree> trees_;
};

class BoostModel final : public ImputationModel {
  public:
    BoostModel(double base, double learning_rate, std::vector<RegressionTree> trees)
        : base_(base), learning_rate_(learning_rate), trees_(std::move(trees)) {}
    double predict(const Eigen::Ref<const Vector>& x) const override;
    ImputerFamily family() const override { return ImputerFamily::BoostedTrees; }
    double base() const { return base_; }
    double learning_rate() const { return learning_rate_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }

  private:
    double base_;
    double learning_rate_;
    std::vector<RegressionTree> trees_;
};

// Trains one model of the requested family on (x, y). Deterministic for a
// fixed seed. OLS fits an intercept and falls back to the minimum-norm
// solution on rank-deficient designs (flagged, not fatal).
std::unique_ptr<ImputationModel> train(ImputerFamily family, const Matrix& x,
                                       const Vector& y, const ImputerSpec& spec,
                                       std::uint64_t seed);

// Strategy-wrapped per-environment predictor. The row index only matters for
// hbias, whose covariate noise is derived from (seed, environment, row) so the
// composite rule stays a fixed function.
class EnvImputer {
  public:
    virtual ~EnvImputer() = default;
    virtual double predict_row(const Eigen::Ref<const Vector>& x, Index row) const = 0;
    virtual const ImputationModel& model() const = 0;
};

struct EnvImputerSet {
    std::vector<std::shared_ptr<const EnvImputer>> per_env;
};

// precise: one model per environment, trained on that environment's labeled
// rows. bias: one pooled model evaluated at x + shift. hbias: pooled model
// evaluated at x + shift + N(0, noise_sd^2) covariate noise with row-keyed
// seeds.
//
// The returned imputers align with `target` when given (matching training
// environments by env_id; precise requires every target id to be present),
// otherwise with the training dataset itself.
EnvImputerSet build_strategy(const ImputerSpec& spec, const MultiEnvDataset& training,
                             const MultiEnvDataset* target = nullptr);

struct ImputationDiagnostics {
    struct Env {
        double eta_hat = 0.0;   // mean of h(x) - y over labeled rows
        Vector residuals;       // z on labeled rows, storage order
        double residual_sd = 0.0;
    };
    std::vector<Env> per_env;
};

// Predictions for every row (labeled and unlabeled); diagnostics from the
// labeled rows only.
std::pair<Imputations, ImputationDiagnostics> impute_dataset(
    const EnvImputerSet& models, const MultiEnvDataset& data);

// Versioned JSON round trip; predictions are bit-exact after reload.
std::string save_model(const ImputationModel& model);
std::unique_ptr<ImputationModel> load_model(const std::string& serialized);

}  // namespace iaei
