#include "iaei/cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "iaei/cv.hpp"
#include "iaei/estimators.hpp"
#include "iaei/report_io.hpp"

namespace iaei {

ImputerSpec imputer_spec_from_config(const ConfigFile& config,
                                     const std::string& section) {
    ImputerSpec spec;
    spec.family = parse_family(config.get_or(section, "family", "ols"));
    spec.strategy = parse_strategy(config.get_or(section, "strategy", "precise"));
    spec.trees = config.get_int(section, "trees", 0);
    spec.max_depth = config.get_int(section, "max_depth", -1);
    spec.min_leaf = config.get_int(section, "min_leaf", 5);
    spec.learning_rate = config.get_double(section, "learning_rate", 0.1);
    spec.bootstrap = config.get_bool(section, "bootstrap", true);
    if (config.has(section, "seed"))
        spec.seed = config.get_u64(section, "seed", 0);
    if (config.has(section, "shift_delta")) {
        const auto values = config.get_double_list(section, "shift_delta");
        spec.shift_delta.resize(static_cast<Index>(values.size()));
        for (size_t i = 0; i < values.size(); ++i)
            spec.shift_delta[static_cast<Index>(i)] = values[i];
    }
    if (config.has(section, "noise_sd"))
        spec.noise_sd = config.get_double(section, "noise_sd", 0.5);
    return spec;
}

SimulationSpec simulation_spec_from_config(
    const ConfigFile& config, std::optional<std::uint64_t> seed_override) {
    SimulationSpec spec;
    spec.models.clear();
    for (const std::string& m : config.get_list("simulate", "models"))
        spec.models.push_back(parse_sem_model(m));
    if (spec.models.empty())
        spec.models.push_back(
            parse_sem_model(config.get_or("simulate", "model", "model0")));
    spec.n_per_env = config.get_int("simulate", "n_per_env", 500);
    spec.missing_ratios = config.get_double_list("simulate", "missing_ratios");
    if (spec.missing_ratios.empty())
        spec.missing_ratios = {config.get_double("simulate", "missing_ratio", 0.7)};
    spec.gamma_grid = config.get_double_list("simulate", "gamma_grid");
    if (spec.gamma_grid.empty()) spec.gamma_grid = {1.0};
    spec.methods.clear();
    for (const std::string& m : config.get_list("simulate", "methods"))
        spec.methods.push_back(parse_method(m));
    if (spec.methods.empty()) spec.methods = {Method::Iaei};
    spec.variants.clear();
    for (const std::string& v : config.get_list("simulate", "variants"))
        spec.variants.push_back(parse_variant(v));
    if (spec.variants.empty()) spec.variants = {PenaltyVariant::Basic};
    spec.replications = config.get_int("simulate", "replications", 100);
    spec.master_seed = config.get_u64("simulate", "master_seed", 0);
    if (seed_override) spec.master_seed = *seed_override;
    spec.train_imputer_on_labeled_subset =
        config.get_bool("simulate", "train_imputer_on_labeled_subset", false);
    spec.max_support_dim = config.get_int("simulate", "max_support_dim", 20);
    spec.imputer = imputer_spec_from_config(config);
    validate_spec(spec);
    return spec;
}

namespace {

struct GlobalArgs {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string config_path;
    std::string out_path;
    std::string format = "json";
};

std::vector<Method> methods_from_config(const ConfigFile& config,
                                        const std::string& section) {
    std::vector<Method> methods;
    for (const std::string& m : config.get_list(section, "methods"))
        methods.push_back(parse_method(m));
    if (methods.empty())
        throw SchemaError("config: missing key 'methods' in section [" + section +
                          "]");
    return methods;
}

bool any_needs_imputations(const std::vector<Method>& methods) {
    for (Method m : methods)
        if (m == Method::Iaei || m == Method::EillsImpute || m == Method::EillsMix)
            return true;
    return false;
}

int cmd_simulate(const GlobalArgs& args) {
    const ConfigFile config = ConfigFile::parse_file(args.config_path);
    const SimulationSpec spec = simulation_spec_from_config(config, args.seed);
    const SimulationReport report = run_study(spec, args.threads);
    write_simulation_report(report, args.out_path, parse_format(args.format));
    std::cout << "wrote " << report.keys.size() << " cells x "
              << spec.replications << " replications to " << args.out_path << "\n";
    return 0;
}

int cmd_dgp(const GlobalArgs& args, const std::string& model_name, int n,
            double ratio) {
    const SemModelId model = parse_sem_model(model_name);
    const std::uint64_t seed = args.seed.value_or(0);
    std::vector<EnvironmentData> envs;
    for (int e = 1; e <= 2; ++e) {
        GaussianNoise noise(derive_seed(
            seed, {hash_tag("dgp"), static_cast<std::uint64_t>(model), 0,
                   static_cast<std::uint64_t>(e)}));
        EnvironmentData env = sem_generate(model, e, n, noise);
        if (ratio > 0.0) {
            RandomStream stream(derive_seed(
                seed, {hash_tag("mask"), static_cast<std::uint64_t>(model),
                       double_bits(ratio), 0, static_cast<std::uint64_t>(e - 1)}));
            env = apply_mcar(env, ratio, stream);
        }
        envs.push_back(std::move(env));
    }
    const MultiEnvDataset data = make_dataset(std::move(envs));
    write_dataset_csv(data, args.out_path);
    std::cout << "wrote " << 2 * n << " rows (" << to_string(model) << ", ratio "
              << ratio << ") to " << args.out_path << "\n";
    return 0;
}

// Builds imputations for the evaluation dataset from config: trained either
// on a designated CSV or on the evaluation data's labeled subset.
Imputations build_estimate_imputations(const ConfigFile& config,
                                       const MultiEnvDataset& eval,
                                       const CsvOptions& csv_options) {
    const ImputerSpec spec = imputer_spec_from_config(config);
    MultiEnvDataset training;
    if (config.has("imputer", "train_input")) {
        training = load_csv(config.require("imputer", "train_input"), csv_options);
    } else {
        training = prepare_view(Method::EillsObserve, eval).data;
    }
    const EnvImputerSet set = build_strategy(spec, training, &eval);
    return impute_dataset(set, eval).first;
}

int cmd_estimate(const GlobalArgs& args) {
    const ConfigFile config = ConfigFile::parse_file(args.config_path);
    CsvOptions csv_options;
    csv_options.env_column = config.get_or("estimate", "env_column", "env");
    csv_options.center = config.get_bool("estimate", "center", false);
    const MultiEnvDataset data =
        load_csv(config.require("estimate", "input"), csv_options);

    const std::vector<Method> methods = methods_from_config(config, "estimate");
    std::vector<double> gammas = config.get_double_list("estimate", "gamma_grid");
    if (gammas.empty()) gammas = {config.get_double("estimate", "gamma", 0.0)};
    const PenaltyVariant variant =
        parse_variant(config.get_or("estimate", "variant", "basic"));

    Imputations imputations;
    const bool needs_imputations = any_needs_imputations(methods);
    if (needs_imputations)
        imputations = build_estimate_imputations(config, data, csv_options);

    std::vector<FitResult> fits;
    for (Method method : methods) {
        for (double gamma : gammas) {
            EstimatorConfig cfg;
            cfg.gamma = gamma;
            cfg.variant = variant;
            cfg.search.max_support_dim =
                config.get_int("estimate", "max_support_dim", 20);
            const Imputations* imp =
                (method == Method::Iaei || method == Method::EillsImpute ||
                 method == Method::EillsMix)
                    ? &imputations
                    : nullptr;
            fits.push_back(fit(method, data, imp, cfg));
        }
    }
    write_fit_report(fits, args.out_path, parse_format(args.format));
    std::cout << "wrote " << fits.size() << " fits to " << args.out_path << "\n";
    return 0;
}

int cmd_cv(const GlobalArgs& args) {
    const ConfigFile config = ConfigFile::parse_file(args.config_path);
    CvSpec spec;
    spec.methods = methods_from_config(config, "cv");
    spec.gamma_grid = config.get_double_list("cv", "gamma_grid");
    spec.variant = parse_variant(config.get_or("cv", "variant", "basic"));
    spec.mask_rate = config.get_double("cv", "mask_rate", 0.85);
    spec.env_column = config.require("cv", "env_column");
    spec.seed = args.seed.value_or(config.get_u64("cv", "seed", 0));
    spec.max_support_dim = config.get_int("cv", "max_support_dim", 20);
    spec.threads = args.threads;

    CsvOptions csv_options;
    csv_options.env_column = spec.env_column;
    csv_options.require_timestamps = true;
    const Table table = load_table(config.require("cv", "input"), csv_options);

    std::unique_ptr<ImputationModel> model;
    if (any_needs_imputations(spec.methods)) {
        const ImputerSpec imputer = imputer_spec_from_config(config);
        CsvOptions train_options;
        train_options.env_column = spec.env_column;
        const Table history =
            load_table(config.require("imputer", "train_input"), train_options);
        Matrix x(history.rows(), history.p);
        Vector y(history.rows());
        Index k = 0;
        for (Index i = 0; i < history.rows(); ++i) {
            if (!history.labeled[static_cast<size_t>(i)]) continue;
            x.row(k) = history.x.row(i);
            y[k] = history.y[i];
            ++k;
        }
        x.conservativeResize(k, history.p);
        y.conservativeResize(k);
        model = train(imputer.family, x, y, imputer,
                      imputer.seed.value_or(spec.seed));
    }

    std::cout << "environments from column '" << spec.env_column << "', mask rate "
              << spec.mask_rate << "\n";
    const CvResult result = monthly_cv(table, model.get(), spec);
    write_cv_result(result, args.out_path, parse_format(args.format));
    std::cout << "wrote CV result (" << result.fold_months.size() << " folds) to "
              << args.out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Multi-environment invariant regression under missing outcomes"};
    app.require_subcommand(1);

    GlobalArgs args;
    std::uint64_t seed_value = 0;
    auto* seed_option = app.add_option("--seed", seed_value, "master seed override");
    app.add_option("--threads", args.threads, "worker threads (0 = hardware)");
    app.add_option("--config", args.config_path, "configuration file");
    app.add_option("--out", args.out_path, "output path");
    app.add_option("--format", args.format, "output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* simulate = app.add_subcommand("simulate", "run a replication study");
    auto* estimate = app.add_subcommand("estimate", "fit methods on a CSV");
    auto* dgp = app.add_subcommand("dgp", "emit a synthetic CSV");
    auto* cv = app.add_subcommand("cv", "monthly cross-validation harness");

    std::string dgp_model = "model0";
    int dgp_n = 500;
    double dgp_ratio = 0.0;
    dgp->add_option("--model", dgp_model, "model0|model1|model2|model3");
    dgp->add_option("--n", dgp_n, "rows per environment");
    dgp->add_option("--ratio", dgp_ratio, "missing ratio in [0,1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (*seed_option) args.seed = seed_value;
        if (app.got_subcommand(simulate) || app.got_subcommand(estimate) ||
            app.got_subcommand(cv)) {
            if (args.config_path.empty())
                throw ValidationError("--config is required for this subcommand");
        }
        if (args.out_path.empty())
            throw ValidationError("--out is required");

        if (app.got_subcommand(simulate)) return cmd_simulate(args);
        if (app.got_subcommand(estimate)) return cmd_estimate(args);
        if (app.got_subcommand(dgp)) return cmd_dgp(args, dgp_model, dgp_n, dgp_ratio);
        if (app.got_subcommand(cv)) return cmd_cv(args);
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace iaei
