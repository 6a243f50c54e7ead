#pragma once

// Dataset ingestion (CSV), run configuration, and result serialization.
// JSON output uses ordered keys and shortest-round-trip doubles; CSV
// output prints doubles with 17 significant digits.  Both re-read to the
// exact values written.

#include "eqpart/concordance.hpp"
#include "eqpart/elliptic_mc.hpp"
#include "eqpart/equilibrium.hpp"
#include "eqpart/sample_block.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace eqpart {

// How to read a delimited text file into a SampleBlock.  Columns are
// addressed by header name when header == true, otherwise by 0-based
// index.  An empty feature list selects every non-benchmark column in
// file order.
struct DatasetSpec {
    std::string path;
    std::string benchmark_column;
    std::vector<std::string> feature_columns;
    char delimiter = ',';
    bool header = true;
};

// Parameters of a Monte Carlo run; defaults reproduce the desk-scale
// experiments.  The file schema (all keys optional) is documented in the
// README; on-disk values are overridden by CLI flags.
struct RunConfig {
    std::uint64_t seed = 1;
    std::int64_t count = 100000;
    int dimension = 4;
    MatrixKind kind = MatrixKind::correlation;
    std::string radial_type = "normal";   // "normal" or "student"
    int student_nu = 5;
    QGridSpec grid;
    ScaleMatrixConstraint constraint;
    int matrices = 20;                    // replicates for the split histogram
    std::vector<int> nus;                 // degrees-of-freedom sweep (student mode)
    std::string output_path;              // JSON summary ("" = stdout)
    std::string curve_path;               // CSV curve/table ("" = skip)
    int threads = 1;
};

// Parses a delimited file (RFC-style quoting: fields may be wrapped in
// double quotes, with "" as an escaped quote and embedded delimiters or
// newlines allowed inside quotes) and returns the selected columns with
// the benchmark as row 0.  Throws ParseError (naming line and column) for
// malformed or non-numeric content, DomainError for a missing column or
// an empty dataset, IoError if the file cannot be read.
SampleBlock load_dataset(const DatasetSpec& spec);

// Plain numeric table with named columns; the CSV materialization of
// every tabular result.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

enum class OutputFormat { csv, json };

// --- JSON forms (ordered keys, lossless doubles) ---------------------
nlohmann::ordered_json to_json(const TruncatedMoments& moments);
nlohmann::ordered_json to_json(const ConditionalMatrix& matrix);
nlohmann::ordered_json to_json(const EquilibriumReport& report);
nlohmann::ordered_json to_json(const QuasiEquilibriumResult& result);
nlohmann::ordered_json to_json(const McEstimate& estimate);

// Inverse of to_json(EquilibriumReport); used by round-trip checks and
// by consumers of previously written reports.
EquilibriumReport equilibrium_report_from_json(const nlohmann::ordered_json& j);

// --- Tabular forms ----------------------------------------------------
Table curve_table(const std::vector<ConcordanceCurvePoint>& points);   // q,r,delta_rho,delta_tau
Table sweep_table(const std::vector<StudentSweepRow>& rows);           // nu,q10,q50,q90
Table distance_curve_table(const QuasiEquilibriumResult& result);      // q,distance
Table groups_table(const EquilibriumReport& report);                   // group,q1,q2,mean,variance

std::string csv_to_string(const Table& table);
Table csv_table_from_string(const std::string& text);

// --- Files -------------------------------------------------------------
void write_json_file(const nlohmann::ordered_json& j, const std::string& path);
void write_csv_file(const Table& table, const std::string& path);

// Serializes a result to `path` in the requested format.  JSON carries
// the full structure; CSV carries the natural table (groups for reports,
// the distance curve for split fits).
void write_results(const EquilibriumReport& report, const std::string& path,
                   OutputFormat format);
void write_results(const QuasiEquilibriumResult& result, const std::string& path,
                   OutputFormat format);
void write_results(const std::vector<StudentSweepRow>& rows, const std::string& path,
                   OutputFormat format);
void write_results(const std::vector<ConcordanceCurvePoint>& points, const std::string& path,
                   OutputFormat format);

// Reads a RunConfig JSON file; unknown keys are rejected so typos fail
// loudly rather than silently falling back to defaults.
RunConfig load_run_config(const std::string& path);

// Model file: {"mu": [...], "sigma": [[...], ...]}.
GaussianModel load_model(const std::string& path);

} // namespace eqpart
