#include "iaei/report_io.hpp"

#include <cmath>
#include <limits>

#include "iaei/csv.hpp"

namespace iaei {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double maybe_null(const ordered_json& v) {
    return v.is_null() ? kNaN : v.get<double>();
}

ordered_json day_array(const std::array<double, 31>& values) {
    ordered_json arr = ordered_json::array();
    for (double v : values)
        arr.push_back(std::isnan(v) ? ordered_json() : ordered_json(v));
    return arr;
}

std::array<double, 31> day_array_from(const ordered_json& arr) {
    std::array<double, 31> out;
    out.fill(kNaN);
    for (size_t d = 0; d < 31 && d < arr.size(); ++d) out[d] = maybe_null(arr[d]);
    return out;
}

ordered_json vector_to_json(const Vector& v) {
    ordered_json arr = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const ordered_json& arr) {
    Vector v(static_cast<Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Index>(i)] = arr[i].get<double>();
    return v;
}

}  // namespace

ReportFormat parse_format(const std::string& s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    throw ParseError("unknown report format '" + s + "'");
}

ordered_json fit_result_to_json(const FitResult& fit) {
    ordered_json doc;
    doc["method"] = to_string(fit.method);
    doc["variant"] = to_string(fit.variant);
    doc["gamma"] = fit.gamma;
    doc["support"] = fit.support.indices();
    doc["beta"] = vector_to_json(fit.beta);
    doc["objective"] = fit.objective;
    doc["loss_part"] = fit.loss_part;
    doc["penalty_part"] = fit.penalty_part;
    return doc;
}

FitResult fit_result_from_json(const ordered_json& doc) {
    FitResult fit;
    fit.method = parse_method(doc.at("method").get<std::string>());
    fit.variant = parse_variant(doc.at("variant").get<std::string>());
    fit.gamma = doc.at("gamma").get<double>();
    fit.support = Support(doc.at("support").get<std::vector<int>>());
    fit.beta = vector_from_json(doc.at("beta"));
    fit.objective = doc.at("objective").get<double>();
    fit.loss_part = doc.at("loss_part").get<double>();
    fit.penalty_part = doc.at("penalty_part").get<double>();
    return fit;
}

ordered_json fit_report_to_json(const std::vector<FitResult>& fits) {
    ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["kind"] = "fit_results";
    ordered_json arr = ordered_json::array();
    for (const FitResult& fit : fits) arr.push_back(fit_result_to_json(fit));
    doc["fits"] = std::move(arr);
    return doc;
}

std::vector<FitResult> fit_report_from_json(const ordered_json& doc) {
    if (doc.value("schema", "") != kReportSchema)
        throw SchemaError("unsupported report schema");
    std::vector<FitResult> fits;
    for (const auto& item : doc.at("fits")) fits.push_back(fit_result_from_json(item));
    return fits;
}

namespace {

ordered_json imputer_to_json(const ImputerSpec& imputer) {
    ordered_json doc;
    doc["family"] = to_string(imputer.family);
    doc["strategy"] = to_string(imputer.strategy);
    doc["trees"] = imputer.effective_trees();
    doc["max_depth"] = imputer.effective_depth();
    doc["min_leaf"] = imputer.min_leaf;
    doc["learning_rate"] = imputer.learning_rate;
    doc["bootstrap"] = imputer.bootstrap;
    doc["seed"] = imputer.seed.has_value() ? ordered_json(*imputer.seed)
                                           : ordered_json();
    if (imputer.strategy != ImputerStrategy::Precise) {
        doc["shift_delta"] =
            vector_to_json(imputer.effective_shift(kSemCovariates));
        if (imputer.strategy == ImputerStrategy::Hbias)
            doc["noise_sd"] = imputer.effective_noise_sd();
    }
    return doc;
}

ImputerSpec imputer_from_json(const ordered_json& doc) {
    ImputerSpec imputer;
    imputer.family = parse_family(doc.at("family").get<std::string>());
    imputer.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    imputer.trees = doc.at("trees").get<int>();
    imputer.max_depth = doc.at("max_depth").get<int>();
    imputer.min_leaf = doc.at("min_leaf").get<int>();
    imputer.learning_rate = doc.at("learning_rate").get<double>();
    imputer.bootstrap = doc.at("bootstrap").get<bool>();
    if (!doc.at("seed").is_null())
        imputer.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("shift_delta"))
        imputer.shift_delta = vector_from_json(doc.at("shift_delta"));
    if (doc.contains("noise_sd")) imputer.noise_sd = doc.at("noise_sd").get<double>();
    return imputer;
}

}  // namespace

ordered_json simulation_report_to_json(const SimulationReport& report) {
    ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["kind"] = "simulation";

    ordered_json spec;
    {
        ordered_json models = ordered_json::array();
        for (SemModelId m : report.spec.models) models.push_back(to_string(m));
        spec["models"] = std::move(models);
    }
    spec["n_per_env"] = report.spec.n_per_env;
    spec["missing_ratios"] = report.spec.missing_ratios;
    spec["gamma_grid"] = report.spec.gamma_grid;
    {
        ordered_json methods = ordered_json::array();
        for (Method m : report.spec.methods) methods.push_back(to_string(m));
        spec["methods"] = std::move(methods);
        ordered_json variants = ordered_json::array();
        for (PenaltyVariant v : report.spec.variants) variants.push_back(to_string(v));
        spec["variants"] = std::move(variants);
    }
    spec["replications"] = report.spec.replications;
    spec["master_seed"] = report.spec.master_seed;
    spec["train_imputer_on_labeled_subset"] =
        report.spec.train_imputer_on_labeled_subset;
    spec["max_support_dim"] = report.spec.max_support_dim;
    spec["imputer"] = imputer_to_json(report.spec.imputer);
    spec["weights"] = "equal";
    doc["spec"] = std::move(spec);

    ordered_json cells = ordered_json::array();
    for (size_t c = 0; c < report.keys.size(); ++c) {
        const CellKey& key = report.keys[c];
        const CellStats& stats = report.cells[c];
        ordered_json cell;
        cell["model"] = to_string(key.model);
        cell["ratio"] = key.ratio;
        cell["method"] = to_string(key.method);
        cell["variant"] = to_string(key.variant);
        cell["gamma"] = key.gamma;
        cell["replications"] = stats.replications;
        cell["failures"] = stats.failures;
        cell["fdr_mean"] = std::isnan(stats.fdr_mean) ? ordered_json()
                                                      : ordered_json(stats.fdr_mean);
        cell["fdr_sd"] = std::isnan(stats.fdr_sd) ? ordered_json()
                                                  : ordered_json(stats.fdr_sd);
        cell["l2_mean"] = std::isnan(stats.l2_mean) ? ordered_json()
                                                    : ordered_json(stats.l2_mean);
        cell["l2_sd"] = std::isnan(stats.l2_sd) ? ordered_json()
                                                : ordered_json(stats.l2_sd);
        cell["selection_freq"] = stats.selection_freq;
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    return doc;
}

SimulationReport simulation_report_from_json(const ordered_json& doc) {
    if (doc.value("schema", "") != kReportSchema)
        throw SchemaError("unsupported report schema");
    if (doc.value("kind", "") != "simulation")
        throw SchemaError("not a simulation report");

    SimulationReport report;
    const ordered_json& spec = doc.at("spec");
    report.spec.models.clear();
    for (const auto& m : spec.at("models"))
        report.spec.models.push_back(parse_sem_model(m.get<std::string>()));
    report.spec.n_per_env = spec.at("n_per_env").get<int>();
    report.spec.missing_ratios = spec.at("missing_ratios").get<std::vector<double>>();
    report.spec.gamma_grid = spec.at("gamma_grid").get<std::vector<double>>();
    report.spec.methods.clear();
    for (const auto& m : spec.at("methods"))
        report.spec.methods.push_back(parse_method(m.get<std::string>()));
    report.spec.variants.clear();
    for (const auto& v : spec.at("variants"))
        report.spec.variants.push_back(parse_variant(v.get<std::string>()));
    report.spec.replications = spec.at("replications").get<int>();
    report.spec.master_seed = spec.at("master_seed").get<std::uint64_t>();
    report.spec.train_imputer_on_labeled_subset =
        spec.at("train_imputer_on_labeled_subset").get<bool>();
    report.spec.max_support_dim = spec.at("max_support_dim").get<int>();
    report.spec.imputer = imputer_from_json(spec.at("imputer"));

    for (const auto& cell : doc.at("cells")) {
        CellKey key;
        key.model = parse_sem_model(cell.at("model").get<std::string>());
        key.ratio = cell.at("ratio").get<double>();
        key.method = parse_method(cell.at("method").get<std::string>());
        key.variant = parse_variant(cell.at("variant").get<std::string>());
        key.gamma = cell.at("gamma").get<double>();
        report.keys.push_back(key);

        CellStats stats;
        stats.replications = cell.at("replications").get<int>();
        stats.failures = cell.at("failures").get<int>();
        stats.fdr_mean = maybe_null(cell.at("fdr_mean"));
        stats.fdr_sd = maybe_null(cell.at("fdr_sd"));
        stats.l2_mean = maybe_null(cell.at("l2_mean"));
        stats.l2_sd = maybe_null(cell.at("l2_sd"));
        stats.selection_freq = cell.at("selection_freq").get<std::vector<double>>();
        report.cells.push_back(std::move(stats));
    }
    return report;
}

ordered_json cv_result_to_json(const CvResult& result) {
    ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["kind"] = "cv";
    doc["env_column"] = result.env_column;
    doc["mask_rate"] = result.mask_rate;
    doc["seed"] = result.seed;
    doc["imputer"] = result.imputer_description;
    {
        ordered_json methods = ordered_json::array();
        for (Method m : result.methods) methods.push_back(to_string(m));
        doc["methods"] = std::move(methods);
    }
    doc["gamma_grid"] = result.gamma_grid;
    doc["fold_months"] = result.fold_months;
    doc["day_fold_counts"] = result.day_fold_counts;

    ordered_json daily = ordered_json::array();
    for (const auto& per_method : result.daily_mse) {
        ordered_json per_gamma = ordered_json::array();
        for (const auto& days : per_method) per_gamma.push_back(day_array(days));
        daily.push_back(std::move(per_gamma));
    }
    doc["daily_mse"] = std::move(daily);

    ordered_json chosen = ordered_json::array();
    for (const auto& days : result.chosen_gamma) chosen.push_back(day_array(days));
    doc["chosen_gamma"] = std::move(chosen);

    ordered_json best = ordered_json::array();
    for (const auto& days : result.best_daily_mse) best.push_back(day_array(days));
    doc["best_daily_mse"] = std::move(best);

    ordered_json curves = ordered_json::array();
    for (size_t m = 0; m < result.methods.size(); ++m) {
        ordered_json curve = ordered_json::array();
        for (const auto& [rank, mse] : daily_quantile_curve(result, m))
            curve.push_back({rank, mse});
        curves.push_back(std::move(curve));
    }
    doc["quantile_curves"] = std::move(curves);

    ordered_json folds = ordered_json::array();
    for (const CvFoldTrace& trace : result.folds) {
        ordered_json fold;
        fold["month"] = trace.month;
        ordered_json per_method = ordered_json::array();
        for (const auto& gammas : trace.daily_mse) {
            ordered_json per_gamma = ordered_json::array();
            for (const auto& days : gammas) per_gamma.push_back(day_array(days));
            per_method.push_back(std::move(per_gamma));
        }
        fold["daily_mse"] = std::move(per_method);
        folds.push_back(std::move(fold));
    }
    doc["folds"] = std::move(folds);
    return doc;
}

CvResult cv_result_from_json(const ordered_json& doc) {
    if (doc.value("schema", "") != kReportSchema)
        throw SchemaError("unsupported report schema");
    if (doc.value("kind", "") != "cv") throw SchemaError("not a CV report");

    CvResult result;
    result.env_column = doc.at("env_column").get<std::string>();
    result.mask_rate = doc.at("mask_rate").get<double>();
    result.seed = doc.at("seed").get<std::uint64_t>();
    result.imputer_description = doc.at("imputer").get<std::string>();
    for (const auto& m : doc.at("methods"))
        result.methods.push_back(parse_method(m.get<std::string>()));
    result.gamma_grid = doc.at("gamma_grid").get<std::vector<double>>();
    result.fold_months = doc.at("fold_months").get<std::vector<int>>();
    {
        const auto counts = doc.at("day_fold_counts").get<std::vector<int>>();
        for (size_t d = 0; d < 31 && d < counts.size(); ++d)
            result.day_fold_counts[d] = counts[d];
    }
    for (const auto& per_method : doc.at("daily_mse")) {
        std::vector<std::array<double, 31>> gammas;
        for (const auto& days : per_method) gammas.push_back(day_array_from(days));
        result.daily_mse.push_back(std::move(gammas));
    }
    for (const auto& days : doc.at("chosen_gamma"))
        result.chosen_gamma.push_back(day_array_from(days));
    for (const auto& days : doc.at("best_daily_mse"))
        result.best_daily_mse.push_back(day_array_from(days));
    for (const auto& fold : doc.at("folds")) {
        CvFoldTrace trace;
        trace.month = fold.at("month").get<int>();
        for (const auto& per_method : fold.at("daily_mse")) {
            std::vector<std::array<double, 31>> gammas;
            for (const auto& days : per_method)
                gammas.push_back(day_array_from(days));
            trace.daily_mse.push_back(std::move(gammas));
        }
        result.folds.push_back(std::move(trace));
    }
    return result;
}

std::string dump_report(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json parse_report(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid report document: ") + e.what());
    }
}

std::string simulation_report_to_csv(const SimulationReport& report) {
    const size_t p = report.cells.empty() ? 0 : report.cells.front().selection_freq.size();
    std::string out =
        "model,ratio,method,variant,gamma,replications,failures,fdr_mean,fdr_sd,"
        "l2_mean,l2_sd";
    for (size_t j = 1; j <= p; ++j) out += ",sel_x" + std::to_string(j);
    out += "\n";
    for (size_t c = 0; c < report.keys.size(); ++c) {
        const CellKey& key = report.keys[c];
        const CellStats& stats = report.cells[c];
        out += to_string(key.model) + "," + format_double(key.ratio) + "," +
               to_string(key.method) + "," + to_string(key.variant) + "," +
               format_double(key.gamma) + "," + std::to_string(stats.replications) +
               "," + std::to_string(stats.failures) + "," +
               format_double(stats.fdr_mean) + "," + format_double(stats.fdr_sd) +
               "," + format_double(stats.l2_mean) + "," +
               format_double(stats.l2_sd);
        for (double f : stats.selection_freq) out += "," + format_double(f);
        out += "\n";
    }
    return out;
}

std::string fit_report_to_csv(const std::vector<FitResult>& fits) {
    std::string out =
        "method,variant,gamma,objective,loss_part,penalty_part,support,beta\n";
    for (const FitResult& fit : fits) {
        out += to_string(fit.method) + "," + to_string(fit.variant) + "," +
               format_double(fit.gamma) + "," + format_double(fit.objective) + "," +
               format_double(fit.loss_part) + "," + format_double(fit.penalty_part) +
               ",";
        for (size_t k = 0; k < fit.support.indices().size(); ++k) {
            if (k > 0) out += ' ';
            out += std::to_string(fit.support.indices()[k]);
        }
        out += ",";
        for (Index j = 0; j < fit.beta.size(); ++j) {
            if (j > 0) out += ' ';
            out += format_double(fit.beta[j]);
        }
        out += "\n";
    }
    return out;
}

std::string cv_result_to_csv(const CvResult& result) {
    std::string out = "method,day,fold_count,chosen_gamma,mse\n";
    for (size_t m = 0; m < result.methods.size(); ++m) {
        for (int d = 0; d < 31; ++d) {
            out += to_string(result.methods[m]) + "," + std::to_string(d + 1) + "," +
                   std::to_string(result.day_fold_counts[static_cast<size_t>(d)]) +
                   "," + format_double(result.chosen_gamma[m][static_cast<size_t>(d)]) +
                   "," +
                   format_double(result.best_daily_mse[m][static_cast<size_t>(d)]) +
                   "\n";
        }
    }
    return out;
}

void write_simulation_report(const SimulationReport& report, const std::string& path,
                             ReportFormat format) {
    write_text_file(path, format == ReportFormat::Json
                              ? dump_report(simulation_report_to_json(report))
                              : simulation_report_to_csv(report));
}

void write_fit_report(const std::vector<FitResult>& fits, const std::string& path,
                      ReportFormat format) {
    write_text_file(path, format == ReportFormat::Json
                              ? dump_report(fit_report_to_json(fits))
                              : fit_report_to_csv(fits));
}

void write_cv_result(const CvResult& result, const std::string& path,
                     ReportFormat format) {
    write_text_file(path, format == ReportFormat::Json
                              ? dump_report(cv_result_to_json(result))
                              : cv_result_to_csv(result));
}

}  // namespace iaei
