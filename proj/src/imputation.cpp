#include "iaei/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "iaei/numeric.hpp"
#include "iaei/rng.hpp"

namespace iaei {

std::string to_string(ImputerFamily f) {
    switch (f) {
        case ImputerFamily::Ols: return "ols";
        case ImputerFamily::RandomForest: return "random_forest";
        case ImputerFamily::BoostedTrees: return "boosted_trees";
    }
    return "unknown";
}

std::string to_string(ImputerStrategy s) {
    switch (s) {
        case ImputerStrategy::Precise: return "precise";
        case ImputerStrategy::Bias: return "bias";
        case ImputerStrategy::Hbias: return "hbias";
    }
    return "unknown";
}

ImputerFamily parse_family(const std::string& s) {
    if (s == "ols" || s == "linear") return ImputerFamily::Ols;
    if (s == "random_forest" || s == "rf") return ImputerFamily::RandomForest;
    if (s == "boosted_trees" || s == "boost") return ImputerFamily::BoostedTrees;
    throw ParseError("unknown imputer family '" + s + "'");
}

ImputerStrategy parse_strategy(const std::string& s) {
    if (s == "precise") return ImputerStrategy::Precise;
    if (s == "bias") return ImputerStrategy::Bias;
    if (s == "hbias") return ImputerStrategy::Hbias;
    throw ParseError("unknown imputer strategy '" + s + "'");
}

int ImputerSpec::effective_trees() const {
    if (trees > 0) return trees;
    return family == ImputerFamily::BoostedTrees ? 200 : 100;
}

int ImputerSpec::effective_depth() const {
    if (max_depth >= 0) return max_depth;
    return family == ImputerFamily::BoostedTrees ? 3 : 6;
}

double ImputerSpec::effective_noise_sd() const { return noise_sd.value_or(0.5); }

Vector ImputerSpec::effective_shift(Index p) const {
    double scalar = strategy == ImputerStrategy::Hbias ? 1.0 : 0.5;
    if (shift_delta.size() == 1) scalar = shift_delta[0];
    if (shift_delta.size() == 0 || shift_delta.size() == 1)
        return Vector::Constant(p, scalar);
    if (shift_delta.size() != p)
        throw DimensionMismatch("shift_delta has length " +
                                std::to_string(shift_delta.size()) +
                                ", expected 1 or " + std::to_string(p));
    return shift_delta;
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

double RegressionTree::predict(const Eigen::Ref<const Vector>& x) const {
    int idx = 0;
    while (true) {
        const TreeNode& node = nodes[static_cast<size_t>(idx)];
        if (node.feature < 0) return node.value;
        idx = x[node.feature] <= node.threshold ? node.left : node.right;
    }
}

double ForestModel::predict(const Eigen::Ref<const Vector>& x) const {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(x);
    return sum / static_cast<double>(trees_.size());
}

double BoostModel::predict(const Eigen::Ref<const Vector>& x) const {
    double value = base_;
    for (const auto& tree : trees_) value += learning_rate_ * tree.predict(x);
    return value;
}

namespace {

double mean_of(const Vector& y, const std::vector<int>& rows) {
    double sum = 0.0;
    for (int i : rows) sum += y[i];
    return sum / static_cast<double>(rows.size());
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Greedy SSE split: maximize sum_l^2/n_l + sum_r^2/n_r. Features are scanned
// in ascending index order and thresholds in ascending value order; only a
// strictly larger gain replaces the incumbent, so ties resolve
// deterministically.
SplitChoice best_split(const Matrix& x, const Vector& y, const std::vector<int>& rows,
                       int min_leaf) {
    const int n = static_cast<int>(rows.size());
    SplitChoice best;
    if (n < 2 * min_leaf) return best;

    double total = 0.0;
    for (int i : rows) total += y[i];
    const double baseline = total * total / static_cast<double>(n);

    std::vector<int> order(rows);
    for (int f = 0; f < x.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
            return a < b;
        });
        double left_sum = 0.0;
        for (int k = 0; k < n - 1; ++k) {
            left_sum += y[order[static_cast<size_t>(k)]];
            const int n_left = k + 1;
            const int n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double lo = x(order[static_cast<size_t>(k)], f);
            const double hi = x(order[static_cast<size_t>(k + 1)], f);
            if (lo == hi) continue;
            const double right_sum = total - left_sum;
            const double score = left_sum * left_sum / n_left +
                                 right_sum * right_sum / n_right;
            const double gain = score - baseline;
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.feature = f;
                best.threshold = lo + 0.5 * (hi - lo);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_tree(RegressionTree& tree, const Matrix& x, const Vector& y,
              std::vector<int> rows, int depth, int max_depth, int min_leaf) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().value = mean_of(y, rows);

    if (depth >= max_depth) return node_id;
    const SplitChoice split = best_split(x, y, rows, min_leaf);
    if (!split.found || split.gain <= 0.0) return node_id;

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (int i : rows)
        (x(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    const int left = grow_tree(tree, x, y, std::move(left_rows), depth + 1,
                               max_depth, min_leaf);
    const int right = grow_tree(tree, x, y, std::move(right_rows), depth + 1,
                                max_depth, min_leaf);
    TreeNode& node = tree.nodes[static_cast<size_t>(node_id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

RegressionTree fit_tree(const Matrix& x, const Vector& y, std::vector<int> rows,
                        int max_depth, int min_leaf) {
    RegressionTree tree;
    grow_tree(tree, x, y, std::move(rows), 0, max_depth, min_leaf);
    return tree;
}

std::unique_ptr<ImputationModel> train_ols(const Matrix& x, const Vector& y) {
    const Index n = x.rows();
    const Index p = x.cols();
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    const bool degenerate = cod.rank() < p + 1;
    const Vector coef_full = cod.solve(y);
    return std::make_unique<OlsModel>(coef_full.tail(p), coef_full[0], degenerate);
}

std::unique_ptr<ImputationModel> train_forest(const Matrix& x, const Vector& y,
                                              const ImputerSpec& spec,
                                              std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<size_t>(spec.effective_trees()));
    for (int t = 0; t < spec.effective_trees(); ++t) {
        std::vector<int> rows(static_cast<size_t>(n));
        if (spec.bootstrap) {
            RandomStream stream(derive_seed(seed, {hash_tag("tree"),
                                                   static_cast<std::uint64_t>(t)}));
            for (int i = 0; i < n; ++i)
                rows[static_cast<size_t>(i)] =
                    static_cast<int>(stream.uniform_int(0, n - 1));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        trees.push_back(fit_tree(x, y, std::move(rows), spec.effective_depth(),
                                 spec.min_leaf));
    }
    return std::make_unique<ForestModel>(std::move(trees));
}

std::unique_ptr<ImputationModel> train_boost(const Matrix& x, const Vector& y,
                                             const ImputerSpec& spec) {
    const int n = static_cast<int>(x.rows());
    const double base = y.mean();
    Vector residual = y.array() - base;
    std::vector<int> all_rows(static_cast<size_t>(n));
    std::iota(all_rows.begin(), all_rows.end(), 0);

    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<size_t>(spec.effective_trees()));
    for (int t = 0; t < spec.effective_trees(); ++t) {
        RegressionTree tree = fit_tree(x, residual, all_rows,
                                       spec.effective_depth(), spec.min_leaf);
        for (int i = 0; i < n; ++i)
            residual[i] -= spec.learning_rate * tree.predict(x.row(i));
        trees.push_back(std::move(tree));
    }
    return std::make_unique<BoostModel>(base, spec.learning_rate, std::move(trees));
}

}  // namespace

std::unique_ptr<ImputationModel> train(ImputerFamily family, const Matrix& x,
                                       const Vector& y, const ImputerSpec& spec,
                                       std::uint64_t seed) {
    if (x.rows() < 2) throw TooFewRows("imputer training needs at least 2 rows");
    if (x.rows() != y.size())
        throw DimensionMismatch("imputer training rows/outcomes mismatch");
    if (!x.allFinite() || !y.allFinite())
        throw NonFinite("imputer training data contains non-finite values");
    if (spec.min_leaf < 1) throw ValidationError("min_leaf must be >= 1");

    switch (family) {
        case ImputerFamily::Ols: return train_ols(x, y);
        case ImputerFamily::RandomForest: return train_forest(x, y, spec, seed);
        case ImputerFamily::BoostedTrees: return train_boost(x, y, spec);
    }
    throw ValidationError("unknown imputer family");
}

namespace {

class PlainImputer final : public EnvImputer {
  public:
    explicit PlainImputer(std::shared_ptr<const ImputationModel> model)
        : model_(std::move(model)) {}
    double predict_row(const Eigen::Ref<const Vector>& x, Index) const override {
        return model_->predict(x);
    }
    const ImputationModel& model() const override { return *model_; }

  private:
    std::shared_ptr<const ImputationModel> model_;
};

class ShiftImputer final : public EnvImputer {
  public:
    ShiftImputer(std::shared_ptr<const ImputationModel> model, Vector shift)
        : model_(std::move(model)), shift_(std::move(shift)) {}
    double predict_row(const Eigen::Ref<const Vector>& x, Index) const override {
        return model_->predict(x + shift_);
    }
    const ImputationModel& model() const override { return *model_; }

  private:
    std::shared_ptr<const ImputationModel> model_;
    Vector shift_;
};

class NoisyShiftImputer final : public EnvImputer {
  public:
    NoisyShiftImputer(std::shared_ptr<const ImputationModel> model, Vector shift,
                      double noise_sd, std::uint64_t seed, std::uint64_t env_tag)
        : model_(std::move(model)),
          shift_(std::move(shift)),
          noise_sd_(noise_sd),
          seed_(seed),
          env_tag_(env_tag) {}

    double predict_row(const Eigen::Ref<const Vector>& x, Index row) const override {
        RandomStream stream(derive_seed(
            seed_, {hash_tag("hbias_noise"), env_tag_, static_cast<std::uint64_t>(row)}));
        Vector shifted = x + shift_;
        for (Index j = 0; j < shifted.size(); ++j)
            shifted[j] += noise_sd_ * stream.normal();
        return model_->predict(shifted);
    }
    const ImputationModel& model() const override { return *model_; }

  private:
    std::shared_ptr<const ImputationModel> model_;
    Vector shift_;
    double noise_sd_;
    std::uint64_t seed_;
    std::uint64_t env_tag_;
};

struct LabeledRows {
    Matrix x;
    Vector y;
};

LabeledRows labeled_rows(const EnvironmentData& env) {
    LabeledRows out;
    const Index n = env.labeled_count();
    out.x.resize(n, env.cols());
    out.y.resize(n);
    Index k = 0;
    for (Index i = 0; i < env.rows(); ++i) {
        if (!env.labeled(i)) continue;
        out.x.row(k) = env.covariates.row(i);
        out.y[k] = env.outcomes[i];
        ++k;
    }
    return out;
}

std::uint64_t resolve_seed(const ImputerSpec& spec) {
    if (spec.seed.has_value()) return *spec.seed;
    if (spec.family != ImputerFamily::Ols)
        throw ValidationError("tree-family imputer requires a seed");
    return 0;
}

}  // namespace

EnvImputerSet build_strategy(const ImputerSpec& spec, const MultiEnvDataset& training,
                             const MultiEnvDataset* target) {
    const std::uint64_t seed = resolve_seed(spec);
    const std::vector<EnvironmentData>& target_envs =
        target != nullptr ? target->environments : training.environments;
    EnvImputerSet set;
    set.per_env.reserve(target_envs.size());

    if (spec.strategy == ImputerStrategy::Precise) {
        std::map<std::string, std::shared_ptr<const ImputationModel>> by_id;
        for (const EnvironmentData& env : target_envs) {
            auto it = by_id.find(env.env_id);
            if (it == by_id.end()) {
                const EnvironmentData* source = nullptr;
                for (const EnvironmentData& candidate : training.environments)
                    if (candidate.env_id == env.env_id) {
                        source = &candidate;
                        break;
                    }
                if (source == nullptr)
                    throw MissingModel("no training data for environment '" +
                                       env.env_id + "'");
                const LabeledRows rows = labeled_rows(*source);
                std::shared_ptr<const ImputationModel> model =
                    train(spec.family, rows.x, rows.y, spec,
                          derive_seed(seed, {hash_tag("env"), hash_tag(env.env_id)}));
                it = by_id.emplace(env.env_id, std::move(model)).first;
            }
            set.per_env.push_back(std::make_shared<PlainImputer>(it->second));
        }
        return set;
    }

    // Pooled model for bias/hbias: concatenate all labeled rows in
    // environment order.
    Index total = 0;
    for (const auto& env : training.environments) total += env.labeled_count();
    Matrix x(total, training.p);
    Vector y(total);
    Index at = 0;
    for (const auto& env : training.environments) {
        const LabeledRows rows = labeled_rows(env);
        x.middleRows(at, rows.x.rows()) = rows.x;
        y.segment(at, rows.y.size()) = rows.y;
        at += rows.x.rows();
    }
    std::shared_ptr<const ImputationModel> pooled =
        train(spec.family, x, y, spec, derive_seed(seed, {hash_tag("pooled")}));

    const Vector shift = spec.effective_shift(training.p);
    for (const EnvironmentData& env : target_envs) {
        if (spec.strategy == ImputerStrategy::Bias) {
            set.per_env.push_back(std::make_shared<ShiftImputer>(pooled, shift));
        } else {
            set.per_env.push_back(std::make_shared<NoisyShiftImputer>(
                pooled, shift, spec.effective_noise_sd(), seed,
                hash_tag(env.env_id)));
        }
    }
    return set;
}

std::pair<Imputations, ImputationDiagnostics> impute_dataset(
    const EnvImputerSet& models, const MultiEnvDataset& data) {
    if (models.per_env.size() != data.environments.size())
        throw MissingModel("imputer set covers " +
                           std::to_string(models.per_env.size()) +
                           " environments, dataset has " +
                           std::to_string(data.environments.size()));

    Imputations imputations;
    ImputationDiagnostics diagnostics;
    imputations.per_env.reserve(data.environments.size());
    diagnostics.per_env.reserve(data.environments.size());

    for (size_t e = 0; e < data.environments.size(); ++e) {
        if (!models.per_env[e])
            throw MissingModel("environment '" + data.environments[e].env_id +
                               "' has no imputation model");
        const auto& env = data.environments[e];
        const EnvImputer& imputer = *models.per_env[e];

        Vector h(env.rows());
        for (Index i = 0; i < env.rows(); ++i)
            h[i] = imputer.predict_row(env.covariates.row(i), i);

        ImputationDiagnostics::Env diag;
        diag.residuals.resize(env.labeled_count());
        Index k = 0;
        KahanSum sum;
        for (Index i = 0; i < env.rows(); ++i) {
            if (!env.labeled(i)) continue;
            diag.residuals[k] = h[i] - env.outcomes[i];
            sum.add(diag.residuals[k]);
            ++k;
        }
        diag.eta_hat = sum.value() / static_cast<double>(k);
        if (k > 1) {
            KahanSum sq;
            for (Index i = 0; i < k; ++i) {
                const double d = diag.residuals[i] - diag.eta_hat;
                sq.add(d * d);
            }
            diag.residual_sd = std::sqrt(sq.value() / static_cast<double>(k - 1));
        }
        imputations.per_env.push_back(std::move(h));
        diagnostics.per_env.push_back(std::move(diag));
    }
    return {std::move(imputations), std::move(diagnostics)};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using json = nlohmann::ordered_json;

json tree_to_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
    return nodes;
}

RegressionTree tree_from_json(const json& nodes) {
    RegressionTree tree;
    for (const auto& n : nodes) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        tree.nodes.push_back(node);
    }
    return tree;
}

}  // namespace

std::string save_model(const ImputationModel& model) {
    json doc;
    doc["schema"] = "iaei-imputer/1";
    doc["family"] = to_string(model.family());
    switch (model.family()) {
        case ImputerFamily::Ols: {
            const auto& ols = static_cast<const OlsModel&>(model);
            doc["intercept"] = ols.intercept();
            doc["coefficients"] = std::vector<double>(
                ols.coefficients().begin(), ols.coefficients().end());
            doc["degenerate"] = ols.degenerate_design();
            break;
        }
        case ImputerFamily::RandomForest: {
            const auto& forest = static_cast<const ForestModel&>(model);
            json trees = json::array();
            for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
            doc["trees"] = std::move(trees);
            break;
        }
        case ImputerFamily::BoostedTrees: {
            const auto& boost = static_cast<const BoostModel&>(model);
            doc["base"] = boost.base();
            doc["learning_rate"] = boost.learning_rate();
            json trees = json::array();
            for (const auto& t : boost.trees()) trees.push_back(tree_to_json(t));
            doc["trees"] = std::move(trees);
            break;
        }
    }
    return doc.dump();
}

std::unique_ptr<ImputationModel> load_model(const std::string& serialized) {
    json doc;
    try {
        doc = json::parse(serialized);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model document: ") + e.what());
    }
    if (doc.value("schema", "") != "iaei-imputer/1")
        throw SchemaError("unsupported model schema");
    const ImputerFamily family = parse_family(doc.at("family").get<std::string>());
    switch (family) {
        case ImputerFamily::Ols: {
            const auto coefs = doc.at("coefficients").get<std::vector<double>>();
            Vector coef = Eigen::Map<const Vector>(coefs.data(),
                                                   static_cast<Index>(coefs.size()));
            return std::make_unique<OlsModel>(std::move(coef),
                                              doc.at("intercept").get<double>(),
                                              doc.value("degenerate", false));
        }
        case ImputerFamily::RandomForest: {
            std::vector<RegressionTree> trees;
            for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t));
            return std::make_unique<ForestModel>(std::move(trees));
        }
        case ImputerFamily::BoostedTrees: {
            std::vector<RegressionTree> trees;
            for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t));
            return std::make_unique<BoostModel>(doc.at("base").get<double>(),
                                                doc.at("learning_rate").get<double>(),
                                                std::move(trees));
        }
    }
    throw SchemaError("unknown imputer family in model document");
}

}  // namespace iaei
