#include "iaei/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "iaei/numeric.hpp"

namespace iaei {

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_cell_double(const std::string& cell, size_t row,
                         const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end)
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                         ": cannot parse '" + cell + "' as a number");
    return value;
}

int parse_cell_int(const std::string& cell, size_t row, const std::string& column) {
    int value = 0;
    const auto result =
        std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (result.ec != std::errc{} || result.ptr != cell.data() + cell.size())
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                         ": cannot parse '" + cell + "' as an integer");
    return value;
}

TimeStamp parse_date(const std::string& cell, size_t row) {
    TimeStamp ts;
    if (cell.size() != 10 || cell[4] != '-' || cell[7] != '-')
        throw ParseError("row " + std::to_string(row) +
                         ", column date: expected YYYY-MM-DD, got '" + cell + "'");
    ts.year = parse_cell_int(cell.substr(0, 4), row, "date");
    ts.month = parse_cell_int(cell.substr(5, 2), row, "date");
    ts.day = parse_cell_int(cell.substr(8, 2), row, "date");
    if (ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > 31)
        throw ParseError("row " + std::to_string(row) +
                         ", column date: out-of-range date '" + cell + "'");
    return ts;
}

}  // namespace

Table parse_table(const std::string& content, const CsvOptions& options) {
    std::vector<std::string> lines;
    {
        std::string line;
        std::istringstream in(content);
        while (std::getline(in, line)) lines.push_back(line);
    }
    if (lines.empty()) throw ParseError("empty CSV input");

    const std::vector<std::string> header = split_line(lines.front());
    std::map<std::string, int> column_of;
    for (size_t i = 0; i < header.size(); ++i) {
        if (column_of.count(header[i]))
            throw SchemaError("duplicate column '" + header[i] + "'");
        column_of[header[i]] = static_cast<int>(i);
    }

    auto find_column = [&](const std::string& name) -> std::optional<int> {
        const auto it = column_of.find(name);
        if (it == column_of.end()) return std::nullopt;
        return it->second;
    };

    const auto env_col = find_column(options.env_column);
    if (!env_col)
        throw SchemaError("missing environment column '" + options.env_column + "'");
    const auto y_col = find_column("y");
    if (!y_col) throw SchemaError("missing column 'y'");

    // x1..xp must be contiguous from 1.
    int p = 0;
    for (const auto& name : header) {
        if (name.size() < 2 || name[0] != 'x') continue;
        bool digits = true;
        for (size_t i = 1; i < name.size(); ++i)
            digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
        if (!digits) continue;
        p = std::max(p, std::stoi(name.substr(1)));
    }
    if (p == 0) throw SchemaError("no covariate columns x1..xp found");
    std::vector<int> x_cols(static_cast<size_t>(p));
    for (int j = 1; j <= p; ++j) {
        const auto col = find_column("x" + std::to_string(j));
        if (!col) throw SchemaError("missing column x" + std::to_string(j));
        x_cols[static_cast<size_t>(j - 1)] = *col;
    }

    const auto weight_col = find_column("weight");
    const auto date_col = find_column("date");
    const auto hour_col = find_column("hour");
    const bool has_time = date_col.has_value() && hour_col.has_value();
    if (options.require_timestamps && !has_time)
        throw SchemaError("timestamp columns 'date' and 'hour' are required");

    const size_t n_rows = lines.size() - 1;
    Table table;
    table.p = p;
    table.env.reserve(n_rows);
    table.x.resize(static_cast<Index>(n_rows), p);
    table.y.resize(static_cast<Index>(n_rows));
    table.labeled.reserve(n_rows);
    if (weight_col) table.weight.reserve(n_rows);
    if (has_time) table.time.reserve(n_rows);

    for (size_t r = 0; r < n_rows; ++r) {
        const size_t row_number = r + 2;  // 1-based, after the header
        const std::vector<std::string> fields = split_line(lines[r + 1]);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));

        table.env.push_back(fields[static_cast<size_t>(*env_col)]);
        const std::string& y_cell = fields[static_cast<size_t>(*y_col)];
        if (y_cell.empty()) {
            table.y[static_cast<Index>(r)] = std::numeric_limits<double>::quiet_NaN();
            table.labeled.push_back(0);
        } else {
            table.y[static_cast<Index>(r)] = parse_cell_double(y_cell, row_number, "y");
            table.labeled.push_back(1);
        }
        for (int j = 0; j < p; ++j)
            table.x(static_cast<Index>(r), j) = parse_cell_double(
                fields[static_cast<size_t>(x_cols[static_cast<size_t>(j)])],
                row_number, "x" + std::to_string(j + 1));
        if (weight_col)
            table.weight.push_back(parse_cell_double(
                fields[static_cast<size_t>(*weight_col)], row_number, "weight"));
        if (has_time) {
            TimeStamp ts = parse_date(fields[static_cast<size_t>(*date_col)], row_number);
            ts.hour = parse_cell_int(fields[static_cast<size_t>(*hour_col)],
                                     row_number, "hour");
            if (ts.hour < 0 || ts.hour > 23)
                throw ParseError("row " + std::to_string(row_number) +
                                 ", column hour: out of range");
            table.time.push_back(ts);
        }
    }
    return table;
}

Table load_table(const std::string& path, const CsvOptions& options) {
    return parse_table(read_text_file(path), options);
}

MultiEnvDataset table_to_dataset(const Table& table, bool center) {
    std::vector<std::string> env_order;
    std::map<std::string, std::vector<Index>> groups;
    for (Index i = 0; i < table.rows(); ++i) {
        const std::string& id = table.env[static_cast<size_t>(i)];
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) env_order.push_back(id);
        it->second.push_back(i);
    }

    std::vector<EnvironmentData> envs;
    envs.reserve(env_order.size());
    for (const std::string& id : env_order) {
        const std::vector<Index>& rows = groups[id];
        Matrix x(static_cast<Index>(rows.size()), table.p);
        Vector y(static_cast<Index>(rows.size()));
        std::vector<std::uint8_t> mask(rows.size());
        double weight = 1.0;
        for (size_t k = 0; k < rows.size(); ++k) {
            x.row(static_cast<Index>(k)) = table.x.row(rows[k]);
            mask[k] = table.labeled[static_cast<size_t>(rows[k])];
            y[static_cast<Index>(k)] = mask[k] ? table.y[rows[k]] : 0.0;
            if (table.has_weight()) {
                const double w = table.weight[static_cast<size_t>(rows[k])];
                if (k == 0)
                    weight = w;
                else if (w != weight)
                    throw ValidationError("environment '" + id +
                                          "' has conflicting weight values");
            }
        }
        envs.emplace_back(id, std::move(x), std::move(y), std::move(mask), weight);
    }
    MultiEnvDataset data = make_dataset(std::move(envs));
    if (center) {
        center_dataset(data);
        data = validate_dataset(std::move(data));
    }
    return data;
}

MultiEnvDataset load_csv(const std::string& path, const CsvOptions& options) {
    return table_to_dataset(load_table(path, options), options.center);
}

void center_dataset(MultiEnvDataset& data) {
    for (auto& env : data.environments) {
        const Vector col_means = env.covariates.colwise().mean();
        env.covariates.rowwise() -= col_means.transpose();
        KahanSum sum;
        for (Index i = 0; i < env.rows(); ++i)
            if (env.labeled(i)) sum.add(env.outcomes[i]);
        const double y_mean = sum.value() / static_cast<double>(env.labeled_count());
        for (Index i = 0; i < env.rows(); ++i)
            if (env.labeled(i)) env.outcomes[i] -= y_mean;
    }
}

std::string dataset_to_csv(const MultiEnvDataset& data) {
    std::string out = "env,y";
    for (Index j = 1; j <= data.p; ++j) out += ",x" + std::to_string(j);
    out += "\n";
    for (const auto& env : data.environments) {
        for (Index i = 0; i < env.rows(); ++i) {
            out += env.env_id;
            out += ',';
            if (env.labeled(i)) out += format_double(env.outcomes[i]);
            for (Index j = 0; j < data.p; ++j) {
                out += ',';
                out += format_double(env.covariates(i, j));
            }
            out += '\n';
        }
    }
    return out;
}

void write_dataset_csv(const MultiEnvDataset& data, const std::string& path) {
    write_text_file(path, dataset_to_csv(data));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace iaei
