#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "iaei/cli.hpp"
#include "iaei/config.hpp"
#include "iaei/csv.hpp"
#include "iaei/report_io.hpp"
#include "iaei/simulation.hpp"
#include "test_helpers.hpp"

using namespace iaei;
using iaei::testing::random_dataset;
using iaei::testing::vec;

TEST_SUITE("io") {

TEST_CASE("csv grouping and missing outcomes") {
    const std::string csv =
        "env,y,x1,x2\n"
        "a,1.5,0.1,0.2\n"
        "a,,0.3,0.4\n"
        "b,2.5,0.5,0.6\n";
    const MultiEnvDataset data = table_to_dataset(parse_table(csv));
    REQUIRE(data.env_count() == 2);
    CHECK(data.environments[0].env_id == "a");
    CHECK(data.environments[0].rows() == 2);
    CHECK(data.environments[0].labeled_count() == 1);  // one empty y cell
    CHECK(data.environments[1].rows() == 1);
    CHECK(data.p == 2);
}

TEST_CASE("csv schema errors") {
    CHECK_THROWS_AS(parse_table("env,y,x1,x3\na,1,2,3\n"), SchemaError);
    CHECK_THROWS_AS(parse_table("env,x1\na,1\n"), SchemaError);
    CHECK_THROWS_AS(parse_table("y,x1\n1,2\n"), SchemaError);
}

TEST_CASE("csv parse errors carry row and column positions") {
    try {
        parse_table("env,y,x1\na,abc,1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string message = e.what();
        CHECK(message.find("row 2") != std::string::npos);
        CHECK(message.find("column y") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_table("env,y,x1\na,1\n"), ParseError);
    CHECK_THROWS_AS(parse_table("env,y,x1\na,1,\n"), ParseError);
}

TEST_CASE("dataset csv round trip is exact") {
    RandomStream stream(2027);
    MultiEnvDataset data = random_dataset(stream, 2, 15, 3, 0.4);
    const std::string csv = dataset_to_csv(data);
    const MultiEnvDataset reload = table_to_dataset(parse_table(csv));
    REQUIRE(reload.env_count() == data.env_count());
    for (Index e = 0; e < data.env_count(); ++e) {
        const auto& a = data.environments[static_cast<size_t>(e)];
        const auto& b = reload.environments[static_cast<size_t>(e)];
        CHECK(a.env_id == b.env_id);
        CHECK(a.covariates == b.covariates);
        REQUIRE(a.rows() == b.rows());
        for (Index i = 0; i < a.rows(); ++i) {
            CHECK(a.labeled(i) == b.labeled(i));
            if (a.labeled(i)) CHECK(a.outcome(i) == b.outcome(i));
        }
    }
    CHECK(dataset_to_csv(reload) == csv);
}

TEST_CASE("weight column must be constant per environment") {
    const std::string good =
        "env,y,x1,weight\na,1,2,0.5\na,2,3,0.5\nb,4,5,2\n";
    const MultiEnvDataset data = table_to_dataset(parse_table(good));
    CHECK(data.environments[0].weight == 0.5);
    CHECK(data.environments[1].weight == 2.0);

    const std::string bad = "env,y,x1,weight\na,1,2,0.5\na,2,3,0.7\n";
    CHECK_THROWS_AS(table_to_dataset(parse_table(bad)), ValidationError);
}

TEST_CASE("timestamps parse and validate") {
    CsvOptions options;
    options.require_timestamps = true;
    const Table table = parse_table(
        "env,y,x1,date,hour\na,1,2,2012-03-05,13\nb,2,3,2012-04-01,0\n", options);
    REQUIRE(table.has_time());
    CHECK(table.time[0].month == 3);
    CHECK(table.time[1].day == 1);
    CHECK_THROWS_AS(
        parse_table("env,y,x1,date,hour\na,1,2,2012-3-05,13\n", options),
        ParseError);
    CHECK_THROWS_AS(
        parse_table("env,y,x1,date,hour\na,1,2,2012-03-05,24\n", options),
        ParseError);
    CHECK_THROWS_AS(parse_table("env,y,x1\na,1,2\n", options), SchemaError);
}

TEST_CASE("centering removes means per environment") {
    const std::string csv =
        "env,y,x1\n"
        "a,1,10\n"
        "a,3,20\n"
        "b,5,1\n"
        "b,,3\n";
    CsvOptions options;
    options.center = true;
    MultiEnvDataset data = table_to_dataset(parse_table(csv), true);
    CHECK(data.environments[0].covariates.col(0).mean() ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(data.environments[0].outcome(0) == doctest::Approx(-1.0).epsilon(1e-14));
    // Environment b: covariate mean over all rows, label mean over labeled only.
    CHECK(data.environments[1].covariates(0, 0) == doctest::Approx(-1.0));
    CHECK(data.environments[1].outcome(0) == doctest::Approx(0.0));
}

TEST_CASE("config parsing") {
    const ConfigFile config = ConfigFile::parse_string(
        "# study setup\n"
        "[simulate]\n"
        "models = model1 , model3\n"
        "n_per_env = 250\n"
        "gamma_grid = 1,5,10\n"
        "master_seed = 99\n"
        "train_imputer_on_labeled_subset = true\n"
        "\n"
        "[imputer]\n"
        "family = boosted_trees ; inline comment\n"
        "strategy = bias\n"
        "shift_delta = 0.25\n");
    CHECK(config.require("simulate", "n_per_env") == "250");
    CHECK(config.get_int("simulate", "n_per_env", 0) == 250);
    CHECK(config.get_u64("simulate", "master_seed", 0) == 99);
    CHECK(config.get_bool("simulate", "train_imputer_on_labeled_subset", false));
    CHECK(config.get_list("simulate", "models") ==
          std::vector<std::string>{"model1", "model3"});
    CHECK(config.get_double_list("simulate", "gamma_grid") ==
          std::vector<double>{1.0, 5.0, 10.0});
    CHECK(config.get_or("imputer", "family", "") == "boosted_trees");
    CHECK_FALSE(config.has("imputer", "noise_sd"));
    CHECK_THROWS_AS(config.require("simulate", "absent"), SchemaError);
    CHECK_THROWS_AS(ConfigFile::parse_string("key value\n"), ParseError);
}

TEST_CASE("config to simulation spec") {
    const ConfigFile config = ConfigFile::parse_string(
        "[simulate]\n"
        "models = model1\n"
        "n_per_env = 100\n"
        "missing_ratios = 0.3,0.7\n"
        "gamma_grid = 1,10\n"
        "methods = iaei,eills_impute\n"
        "variants = basic\n"
        "replications = 3\n"
        "master_seed = 7\n"
        "[imputer]\n"
        "family = ols\n"
        "strategy = bias\n");
    const SimulationSpec spec = simulation_spec_from_config(config, std::nullopt);
    CHECK(spec.models == std::vector<SemModelId>{SemModelId::Model1});
    CHECK(spec.missing_ratios == std::vector<double>{0.3, 0.7});
    CHECK(spec.methods ==
          std::vector<Method>{Method::Iaei, Method::EillsImpute});
    CHECK(spec.master_seed == 7);
    CHECK(spec.imputer.strategy == ImputerStrategy::Bias);
    const SimulationSpec with_override =
        simulation_spec_from_config(config, 1234);
    CHECK(with_override.master_seed == 1234);
}

TEST_CASE("fit result json carries the contract keys") {
    FitResult fit;
    fit.method = Method::Iaei;
    fit.variant = PenaltyVariant::Enhanced;
    fit.gamma = 2.5;
    fit.support = Support({1, 3});
    fit.beta = vec({0.5, 0.0, -1.25});
    fit.objective = 3.75;
    fit.loss_part = 1.25;
    fit.penalty_part = 1.0;
    const ordered_json doc = fit_result_to_json(fit);
    for (const char* key : {"method", "variant", "gamma", "support", "beta",
                            "objective", "loss_part", "penalty_part"})
        CHECK(doc.contains(key));

    const FitResult reload = fit_result_from_json(doc);
    CHECK(reload.support == fit.support);
    CHECK(reload.beta == fit.beta);
    CHECK(reload.objective == fit.objective);
    CHECK(fit_result_to_json(reload).dump() == doc.dump());
}

TEST_CASE("simulation report round trip is byte-identical") {
    SimulationSpec spec;
    spec.models = {SemModelId::Model0};
    spec.n_per_env = 40;
    spec.missing_ratios = {0.5};
    spec.gamma_grid = {1.0};
    spec.methods = {Method::Oracle, Method::EillsObserve};
    spec.variants = {PenaltyVariant::Basic};
    spec.replications = 2;
    spec.master_seed = 11;
    spec.imputer.strategy = ImputerStrategy::Bias;
    const SimulationReport report = run_study(spec, 1);

    const std::string first = dump_report(simulation_report_to_json(report));
    const SimulationReport reloaded =
        simulation_report_from_json(parse_report(first));
    const std::string second = dump_report(simulation_report_to_json(reloaded));
    CHECK(first == second);
}

TEST_CASE("simulation csv has one row per cell with a fixed header") {
    SimulationSpec spec;
    spec.models = {SemModelId::Model0};
    spec.missing_ratios = {0.0};
    spec.gamma_grid = {0.0, 1.0};
    spec.methods = {Method::Oracle};
    spec.variants = {PenaltyVariant::Basic};
    spec.n_per_env = 30;
    spec.replications = 1;
    spec.master_seed = 3;
    const SimulationReport report = run_study(spec, 1);
    const std::string csv = simulation_report_to_csv(report);

    size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + report.keys.size());
    CHECK(csv.rfind("model,ratio,method,variant,gamma,replications,failures,"
                    "fdr_mean,fdr_sd,l2_mean,l2_sd,sel_x1",
                    0) == 0);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, 0.0}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("file io errors are IoError") {
    CHECK_THROWS_AS(read_text_file("/nonexistent/path.csv"), IoError);
    CHECK_THROWS_AS(write_text_file("/nonexistent/dir/file.txt", "x"), IoError);
}

}  // TEST_SUITE
