#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iaei/types.hpp"

namespace iaei {

// Shortest round-trip decimal representation.
std::string format_double(double value);

struct TimeStamp {
    int year = 0;
    int month = 0;
    int day = 0;
    int hour = 0;
};

// Flat row view of a CSV file. `env` holds the values of the configured
// environment column; `y` is NaN where the label is missing.
struct Table {
    std::vector<std::string> env;
    Matrix x;
    Vector y;
    std::vector<std::uint8_t> labeled;
    std::vector<double> weight;     // empty when no weight column
    std::vector<TimeStamp> time;    // empty when no timestamp columns
    Index p = 0;

    Index rows() const { return x.rows(); }
    bool has_time() const { return !time.empty(); }
    bool has_weight() const { return !weight.empty(); }
};

struct CsvOptions {
    std::string env_column = "env";
    bool require_timestamps = false;
    bool center = false;  // subtract per-environment covariate/label means
};

// Expected header: env column, y, x1..xp (contiguous from 1); optional
// weight, date (YYYY-MM-DD), hour. Unknown columns are ignored. Empty y
// cells mark missing outcomes; x cells must parse as finite numbers.
Table parse_table(const std::string& content, const CsvOptions& options = {});
Table load_table(const std::string& path, const CsvOptions& options = {});

// Groups rows by the environment column (first-appearance order) and
// validates the result.
MultiEnvDataset table_to_dataset(const Table& table, bool center = false);
MultiEnvDataset load_csv(const std::string& path, const CsvOptions& options = {});

// Per environment: covariate columns lose their all-row means, labeled
// outcomes lose the labeled mean.
void center_dataset(MultiEnvDataset& data);

std::string dataset_to_csv(const MultiEnvDataset& data);
void write_dataset_csv(const MultiEnvDataset& data, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace iaei
