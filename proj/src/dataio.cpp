#include "eqpart/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eqpart {

namespace {

struct CsvRecord {
    std::vector<std::string> fields;
    std::int64_t line = 0;   // 1-based physical line where the record starts
};

// RFC-style tokenizer: quoted fields may contain delimiters, doubled
// quotes and newlines; records end at an unquoted newline.
std::vector<CsvRecord> tokenize_csv(const std::string& text, char delimiter,
                                    const std::string& path) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::int64_t line = 1;
    current.line = 1;

    const auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_record = [&] {
        end_field();
        // A completely blank line is not a record.
        if (current.fields.size() > 1 || !current.fields[0].empty()) {
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
        current.line = line;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delimiter) {
            end_field();
        } else if (c == '\n') {
            ++line;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw ParseError(path + ": unterminated quoted field at end of file");
    }
    if (!field.empty() || !current.fields.empty()) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        end_record();
    }
    return records;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, const std::string& path, std::int64_t line,
                  size_t column) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ": line %lld, column %zu: ",
                      static_cast<long long>(line), column + 1);
        throw ParseError(path + buf + "'" + raw + "' is not numeric");
    }
    return value;
}

size_t resolve_column(const std::string& wanted, const std::vector<std::string>& names,
                      bool header, size_t width, const std::string& path) {
    if (header) {
        for (size_t i = 0; i < names.size(); ++i) {
            if (names[i] == wanted) return i;
        }
        throw DomainError(path + ": no column named '" + wanted + "'");
    }
    size_t index = 0;
    const auto [ptr, ec] =
        std::from_chars(wanted.data(), wanted.data() + wanted.size(), index);
    if (ec != std::errc() || ptr != wanted.data() + wanted.size()) {
        throw DomainError(path + ": column '" + wanted +
                          "' must be a 0-based index when the file has no header");
    }
    if (index >= width) {
        throw DomainError(path + ": column index " + wanted + " out of range");
    }
    return index;
}

double json_number(const nlohmann::ordered_json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParseError(std::string("expected numeric field '") + key + "'");
    }
    return j[key].get<double>();
}

Eigen::MatrixXd matrix_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<size_t>(i)].size()) != cols) {
            throw ParseError("matrix rows have inconsistent lengths");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            m(i, k) = j[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
        }
    }
    return m;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void format_double(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out += buf;
}

} // namespace

SampleBlock load_dataset(const DatasetSpec& spec) {
    std::ifstream file(spec.path, std::ios::binary);
    if (!file) throw IoError(spec.path + ": cannot open for reading");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad()) throw IoError(spec.path + ": read failure");

    auto records = tokenize_csv(buffer.str(), spec.delimiter, spec.path);
    std::vector<std::string> names;
    size_t first_data = 0;
    if (spec.header) {
        if (records.empty()) throw DomainError(spec.path + ": empty dataset");
        names = records[0].fields;
        first_data = 1;
    }
    if (records.size() <= first_data) throw DomainError(spec.path + ": empty dataset");

    const size_t width = records[first_data].fields.size();
    if (spec.header && names.size() != width) {
        char buf[96];
        std::snprintf(buf, sizeof buf, ": line %lld: %zu fields, header has %zu",
                      static_cast<long long>(records[first_data].line), width, names.size());
        throw ParseError(spec.path + buf);
    }

    const size_t bench = resolve_column(spec.benchmark_column, names, spec.header, width,
                                        spec.path);
    std::vector<size_t> selected;
    selected.push_back(bench);
    if (spec.feature_columns.empty()) {
        for (size_t i = 0; i < width; ++i) {
            if (i != bench) selected.push_back(i);
        }
    } else {
        for (const auto& want : spec.feature_columns) {
            const size_t idx = resolve_column(want, names, spec.header, width, spec.path);
            if (idx == bench) {
                throw DomainError(spec.path + ": benchmark column listed among features");
            }
            selected.push_back(idx);
        }
    }
    if (selected.size() < 2) {
        throw DomainError(spec.path + ": need at least one feature column");
    }

    const auto count = static_cast<Eigen::Index>(records.size() - first_data);
    Eigen::MatrixXd data(static_cast<Eigen::Index>(selected.size()), count);
    for (size_t rec = first_data; rec < records.size(); ++rec) {
        const auto& record = records[rec];
        if (record.fields.size() != width) {
            char buf[96];
            std::snprintf(buf, sizeof buf, ": line %lld: expected %zu fields, got %zu",
                          static_cast<long long>(record.line), width, record.fields.size());
            throw ParseError(spec.path + buf);
        }
        for (size_t s = 0; s < selected.size(); ++s) {
            data(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(rec - first_data)) =
                parse_cell(record.fields[selected[s]], spec.path, record.line, selected[s]);
        }
    }

    SampleBlock block;
    block.data = std::move(data);
    block.model_desc = "dataset(" + spec.path + ")";
    return block;
}

nlohmann::ordered_json to_json(const TruncatedMoments& moments) {
    return {{"mean", moments.mean}, {"variance", moments.variance}};
}

nlohmann::ordered_json to_json(const ConditionalMatrix& matrix) {
    return {{"kind", to_string(matrix.kind)},
            {"q1", matrix.interval.q1},
            {"q2", matrix.interval.q2},
            {"matrix", matrix_to_json(matrix.matrix)}};
}

nlohmann::ordered_json to_json(const EquilibriumReport& report) {
    nlohmann::ordered_json j;
    j["splits"] = report.splits;
    j["root_x"] = report.root_x;
    j["residual"] = report.residual;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& [interval, moments] : report.groups) {
        nlohmann::ordered_json g;
        g["q1"] = interval.q1;
        g["q2"] = interval.q2;
        g["mean"] = moments.mean;
        g["variance"] = moments.variance;
        groups.push_back(std::move(g));
    }
    j["groups"] = std::move(groups);
    if (!report.conditional_matrices.empty()) {
        nlohmann::ordered_json mats = nlohmann::ordered_json::array();
        for (const auto& m : report.conditional_matrices) mats.push_back(to_json(m));
        j["conditional_matrices"] = std::move(mats);
    }
    return j;
}

EquilibriumReport equilibrium_report_from_json(const nlohmann::ordered_json& j) {
    EquilibriumReport report;
    report.splits = j.at("splits").get<std::vector<double>>();
    report.root_x = json_number(j, "root_x");
    report.residual = json_number(j, "residual");
    for (const auto& g : j.at("groups")) {
        report.groups.emplace_back(
            QuantileInterval(json_number(g, "q1"), json_number(g, "q2")),
            TruncatedMoments{json_number(g, "mean"), json_number(g, "variance")});
    }
    if (j.contains("conditional_matrices")) {
        for (const auto& m : j["conditional_matrices"]) {
            report.conditional_matrices.push_back(
                ConditionalMatrix{matrix_kind_from_string(m.at("kind").get<std::string>()),
                                  QuantileInterval(json_number(m, "q1"), json_number(m, "q2")),
                                  matrix_from_json(m.at("matrix"))});
        }
    }
    return report;
}

nlohmann::ordered_json to_json(const QuasiEquilibriumResult& result) {
    nlohmann::ordered_json j;
    j["q_hat"] = result.q_hat;
    j["objective_value"] = result.objective_value;
    j["kind"] = to_string(result.kind);
    j["degenerate"] = result.degenerate;
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const auto& [q, d] : result.curve) {
        curve.push_back(nlohmann::ordered_json::array({q, d}));
    }
    j["curve"] = std::move(curve);
    return j;
}

nlohmann::ordered_json to_json(const McEstimate& estimate) {
    return {{"value", estimate.value},
            {"std_error", estimate.std_error},
            {"count", estimate.count}};
}

Table curve_table(const std::vector<ConcordanceCurvePoint>& points) {
    Table t;
    t.columns = {"q", "r", "delta_rho", "delta_tau"};
    for (const auto& p : points) t.rows.push_back({p.q, p.r, p.delta_rho, p.delta_tau});
    return t;
}

Table sweep_table(const std::vector<StudentSweepRow>& rows) {
    Table t;
    t.columns = {"nu", "q10", "q50", "q90"};
    for (const auto& r : rows) {
        t.rows.push_back({static_cast<double>(r.nu), r.q10, r.q50, r.q90});
    }
    return t;
}

Table distance_curve_table(const QuasiEquilibriumResult& result) {
    Table t;
    t.columns = {"q", "distance"};
    for (const auto& [q, d] : result.curve) t.rows.push_back({q, d});
    return t;
}

Table groups_table(const EquilibriumReport& report) {
    Table t;
    t.columns = {"group", "q1", "q2", "mean", "variance"};
    for (size_t g = 0; g < report.groups.size(); ++g) {
        const auto& [interval, moments] = report.groups[g];
        t.rows.push_back({static_cast<double>(g), interval.q1, interval.q2, moments.mean,
                          moments.variance});
    }
    return t;
}

std::string csv_to_string(const Table& table) {
    std::string out;
    for (size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            throw DomainError("csv_to_string: row width differs from header");
        }
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            format_double(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

Table csv_table_from_string(const std::string& text) {
    const auto records = tokenize_csv(text, ',', "<string>");
    if (records.empty()) throw ParseError("csv table: empty input");
    Table t;
    t.columns = records[0].fields;
    for (size_t i = 1; i < records.size(); ++i) {
        std::vector<double> row;
        row.reserve(records[i].fields.size());
        for (size_t c = 0; c < records[i].fields.size(); ++c) {
            row.push_back(parse_cell(records[i].fields[c], "<string>", records[i].line, c));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError(path + ": cannot open for writing");
    file << j.dump(2) << '\n';
    if (!file.good()) throw IoError(path + ": write failure");
}

void write_csv_file(const Table& table, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError(path + ": cannot open for writing");
    file << csv_to_string(table);
    if (!file.good()) throw IoError(path + ": write failure");
}

void write_results(const EquilibriumReport& report, const std::string& path,
                   OutputFormat format) {
    if (format == OutputFormat::json) {
        write_json_file(to_json(report), path);
    } else {
        write_csv_file(groups_table(report), path);
    }
}

void write_results(const QuasiEquilibriumResult& result, const std::string& path,
                   OutputFormat format) {
    if (format == OutputFormat::json) {
        write_json_file(to_json(result), path);
    } else {
        write_csv_file(distance_curve_table(result), path);
    }
}

void write_results(const std::vector<StudentSweepRow>& rows, const std::string& path,
                   OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            j.push_back({{"nu", r.nu}, {"q10", r.q10}, {"q50", r.q50}, {"q90", r.q90}});
        }
        write_json_file(j, path);
    } else {
        write_csv_file(sweep_table(rows), path);
    }
}

void write_results(const std::vector<ConcordanceCurvePoint>& points, const std::string& path,
                   OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& p : points) {
            j.push_back({{"q", p.q}, {"r", p.r}, {"delta_rho", p.delta_rho},
                         {"delta_tau", p.delta_tau}});
        }
        write_json_file(j, path);
    } else {
        write_csv_file(curve_table(points), path);
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError(path + ": cannot open for reading");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    RunConfig config;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") {
            config.seed = value.get<std::uint64_t>();
        } else if (key == "count") {
            config.count = value.get<std::int64_t>();
        } else if (key == "dimension") {
            config.dimension = value.get<int>();
        } else if (key == "kind") {
            config.kind = matrix_kind_from_string(value.get<std::string>());
        } else if (key == "radial") {
            const std::string type = value.at("type").get<std::string>();
            if (type != "normal" && type != "student") {
                throw ParseError(path + ": radial.type must be 'normal' or 'student'");
            }
            config.radial_type = type;
            if (value.contains("nu")) config.student_nu = value["nu"].get<int>();
        } else if (key == "grid") {
            if (value.contains("lo")) config.grid.lo = value["lo"].get<double>();
            if (value.contains("hi")) config.grid.hi = value["hi"].get<double>();
            if (value.contains("step")) config.grid.step = value["step"].get<double>();
            if (value.contains("refine_tol")) {
                config.grid.refine_tol = value["refine_tol"].get<double>();
            }
        } else if (key == "constraint") {
            if (value.contains("min_abs_corr")) {
                config.constraint.min_abs_corr = value["min_abs_corr"].get<double>();
            }
            if (value.contains("max_abs_corr")) {
                config.constraint.max_abs_corr = value["max_abs_corr"].get<double>();
            }
        } else if (key == "matrices") {
            config.matrices = value.get<int>();
        } else if (key == "nus") {
            config.nus = value.get<std::vector<int>>();
        } else if (key == "output") {
            config.output_path = value.get<std::string>();
        } else if (key == "curve_output") {
            config.curve_path = value.get<std::string>();
        } else if (key == "threads") {
            config.threads = value.get<int>();
        } else {
            throw ParseError(path + ": unknown configuration key '" + key + "'");
        }
    }
    return config;
}

GaussianModel load_model(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError(path + ": cannot open for reading");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.contains("mu") || !j.contains("sigma")) {
        throw ParseError(path + ": model file needs 'mu' and 'sigma'");
    }
    const auto mu_vec = j["mu"].get<std::vector<double>>();
    Eigen::VectorXd mu(static_cast<Eigen::Index>(mu_vec.size()));
    for (size_t i = 0; i < mu_vec.size(); ++i) mu(static_cast<Eigen::Index>(i)) = mu_vec[i];
    return GaussianModel(mu, matrix_from_json(j["sigma"]));
}

} // namespace eqpart
