// eqpart: reproducible command-line surface over the equilibrium-partition
// toolkit.  Four subcommands: solve (closed-form k-group splits), curves
// (tail/center concordance gaps and the balancing-split curve), mc (elliptic
// Monte Carlo experiments) and normtest (distance-from-normality diagnostic
// for datasets).  Machine output goes to stdout or --output as valid JSON or
// CSV; a short human summary goes to stderr.  Exit codes: 0 success, 1
// domain/data error, 2 usage error.

#include <CLI11.hpp>

#include "eqpart/concordance.hpp"
#include "eqpart/dataio.hpp"
#include "eqpart/elliptic_mc.hpp"
#include "eqpart/equilibrium.hpp"
#include "eqpart/errors.hpp"
#include "eqpart/rng.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace eqpart;

// Relative output paths land in $EQPART_OUT when it is set.
std::string resolve_out(const std::string& path) {
    if (path.empty()) return path;
    if (std::filesystem::path(path).is_absolute()) return path;
    const char* base = std::getenv("EQPART_OUT");
    if (base == nullptr || *base == '\0') return path;
    return (std::filesystem::path(base) / path).string();
}

void emit_json(const nlohmann::ordered_json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(j, resolve_out(path));
    }
}

void emit_csv(const Table& table, const std::string& path) {
    if (path.empty()) {
        std::cout << csv_to_string(table);
    } else {
        write_csv_file(table, resolve_out(path));
    }
}

long long parse_ll(const std::string& text) {
    long long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("'" + text + "' is not an integer");
    }
    return value;
}

// "2", "2..6" and comma-combinations of both, e.g. "2..4,10".
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t comma = text.find(',', start);
        const std::string part =
            text.substr(start, comma == std::string::npos ? comma : comma - start);
        const size_t dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<int>(parse_ll(part)));
        } else {
            const long long lo = parse_ll(part.substr(0, dots));
            const long long hi = parse_ll(part.substr(dots + 2));
            if (hi < lo) throw ParseError("empty range '" + part + "'");
            for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// "lo:step:hi" inclusive of hi up to round-off.
std::vector<double> parse_q_grid(const std::string& text) {
    double lo = 0.0, step = 0.0, hi = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3) {
        throw ParseError("grid must look like LO:STEP:HI, got '" + text + "'");
    }
    if (!(lo > 0.0 && step > 0.0 && hi < 0.5 && lo <= hi)) {
        throw ParseError("grid needs 0 < LO <= HI < 0.5 and STEP > 0");
    }
    std::vector<double> qs;
    for (double q = lo; q <= hi + 0.25 * step; q += step) qs.push_back(std::min(q, hi));
    return qs;
}

std::string format_g(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
    int k = 3;
    std::string model_path;
    std::string output;
    std::string format = "json";
};

void run_solve(const SolveArgs& args) {
    EquilibriumReport report = solve_equilibrium_k(args.k);
    if (!args.model_path.empty()) {
        report = balance_report(load_model(args.model_path), report.splits);
    }
    if (args.format == "json") {
        emit_json(to_json(report), args.output);
    } else {
        emit_csv(groups_table(report), args.output);
    }
    std::string cuts;
    for (double s : report.splits) {
        if (!cuts.empty()) cuts += ", ";
        cuts += format_g(s);
    }
    std::cerr << args.k << "-group equilibrium: cuts at q = {" << cuts
              << "}, residual " << format_g(report.residual) << "\n";
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
    std::vector<double> r_values;
    std::string q_grid = "0.05:0.05:0.45";
    bool qstar = false;
    std::string a_kind;   // "", "rho" or "tau"
    std::string output;
    std::string format;   // default depends on mode
};

void run_curves(const CurvesArgs& args) {
    const std::string format =
        !args.format.empty() ? args.format : (args.qstar ? "json" : "csv");

    if (args.qstar) {
        const double qstar = solve_qstar();
        if (format == "json") {
            emit_json({{"q_star", qstar}}, args.output);
        } else {
            emit_csv(Table{{"q_star"}, {{qstar}}}, args.output);
        }
        std::cerr << "limit balancing split q* = " << format_g(qstar) << "\n";
        return;
    }

    std::vector<double> rs = args.r_values;
    if (rs.empty()) rs.push_back(0.5);

    if (!args.a_kind.empty()) {
        const MatrixKind kind =
            args.a_kind == "rho" ? MatrixKind::spearman : MatrixKind::kendall;
        Table table;
        table.columns = {"r", "A_" + args.a_kind};
        for (double r : rs) {
            table.rows.push_back({r, equilibrium_curve_A(r, kind)});
        }
        if (format == "json") {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& row : table.rows) {
                rows.push_back({{"r", row[0]}, {table.columns[1], row[1]}});
            }
            emit_json(rows, args.output);
        } else {
            emit_csv(table, args.output);
        }
        for (const auto& row : table.rows) {
            std::cerr << "balancing split at r = " << format_g(row[0]) << ": "
                      << format_g(row[1]) << "\n";
        }
        return;
    }

    const std::vector<double> qs = parse_q_grid(args.q_grid);
    std::vector<ConcordanceCurvePoint> points;
    for (double r : rs) {
        for (double q : qs) points.push_back(delta_curves(q, r));
    }
    if (format == "json") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& p : points) {
            rows.push_back({{"q", p.q}, {"r", p.r}, {"delta_rho", p.delta_rho},
                            {"delta_tau", p.delta_tau}});
        }
        emit_json(rows, args.output);
    } else {
        emit_csv(curve_table(points), args.output);
    }
    std::cerr << "tail/center concordance gaps: " << points.size() << " rows ("
              << rs.size() << " correlation(s) x " << qs.size() << " splits)\n";
}

// ---------------------------------------------------------------------------
// mc

struct McArgs {
    std::string config_path;
    // Raw override slots; "set" mirrors CLI11's count() per flag.
    RunConfig config;
    std::string nu_text;
    bool student = false;
};

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void run_mc(const RunConfig& config) {
    if (!config.nus.empty()) {
        // Degrees-of-freedom sweep: the Student-t experiment.
        const std::vector<StudentSweepRow> rows =
            student_sweep(config.dimension, config.nus, config.matrices, config.count,
                          config.seed, config.threads);
        nlohmann::ordered_json j;
        j["mode"] = "student_sweep";
        j["seed"] = config.seed;
        j["count"] = config.count;
        j["dimension"] = config.dimension;
        j["matrices"] = config.matrices;
        j["nus"] = config.nus;
        j["generator"] = kGeneratorId;
        nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            out_rows.push_back({{"nu", row.nu}, {"q10", row.q10}, {"q50", row.q50},
                                {"q90", row.q90}});
        }
        j["rows"] = std::move(out_rows);
        emit_json(j, config.output_path);
        if (!config.curve_path.empty()) emit_csv(sweep_table(rows), config.curve_path);
        for (const auto& row : rows) {
            std::cerr << "nu = " << row.nu << ": split quantiles " << format_g(row.q10)
                      << " / " << format_g(row.q50) << " / " << format_g(row.q90)
                      << "\n";
        }
        return;
    }

    // Single quasi-equilibrium fit on one random scale matrix.
    const RadialDistribution radial =
        config.radial_type == "student"
            ? RadialDistribution::f_scaled_for_student(config.dimension,
                                                       config.student_nu)
            : RadialDistribution::chi_for_normal(config.dimension);
    const Eigen::MatrixXd scale = random_scale_matrix(
        config.dimension, config.constraint, derive_seed(config.seed, 101));
    const SampleBlock block =
        sample_elliptic(Eigen::VectorXd::Zero(config.dimension), scale, radial,
                        config.count, derive_seed(config.seed, 202));
    const QuasiEquilibriumResult fit = quasi_equilibrium(block, config.kind, config.grid);

    nlohmann::ordered_json j;
    j["mode"] = "quasi_equilibrium";
    j["seed"] = config.seed;
    j["count"] = config.count;
    j["dimension"] = config.dimension;
    j["kind"] = to_string(config.kind);
    j["radial"] = radial.id();
    j["generator"] = block.generator_id;
    j["scale_matrix"] = matrix_json(scale);
    j["result"] = to_json(fit);
    emit_json(j, config.output_path);
    if (!config.curve_path.empty()) {
        emit_csv(distance_curve_table(fit), config.curve_path);
    }
    std::cerr << "fitted balancing split q_hat = " << format_g(fit.q_hat)
              << " (distance " << format_g(fit.objective_value) << ", "
              << to_string(fit.kind) << (fit.degenerate ? ", degenerate curve)" : ")")
              << "\n";
}

// ---------------------------------------------------------------------------
// normtest

struct NormtestArgs {
    DatasetSpec dataset;
    std::string delimiter = ",";
    bool no_header = false;
    double q = 0.198089616;
    int reference = 0;
    std::uint64_t seed = kDefaultMcSeed;
    std::string output;
    std::string format = "json";
};

void run_normtest(const NormtestArgs& args) {
    DatasetSpec spec = args.dataset;
    spec.delimiter = args.delimiter[0];
    spec.header = !args.no_header;
    const SampleBlock block = load_dataset(spec);
    const double distance = normality_distance(block, args.q);

    nlohmann::ordered_json j;
    j["distance"] = distance;
    j["q"] = args.q;
    j["count"] = block.count();
    j["dimension"] = block.dim();

    double percentile = -1.0;
    if (args.reference > 0) {
        // Reference distribution: the same statistic on Gaussian replicates
        // drawn at the dataset's fitted mean and covariance.
        const Eigen::VectorXd mean = block.data.rowwise().mean();
        const Eigen::MatrixXd centered = block.data.colwise() - mean;
        const Eigen::MatrixXd cov =
            centered * centered.transpose() / static_cast<double>(block.count() - 1);
        const RadialDistribution radial = RadialDistribution::chi_for_normal(block.dim());
        int at_or_below = 0;
        for (int i = 0; i < args.reference; ++i) {
            const SampleBlock sim =
                sample_elliptic(mean, cov, radial, block.count(),
                                derive_seed(args.seed, static_cast<std::uint64_t>(i)));
            if (normality_distance(sim, args.q) <= distance) ++at_or_below;
        }
        percentile = 100.0 * at_or_below / args.reference;
        j["reference"] = {{"replicates", args.reference},
                          {"seed", args.seed},
                          {"percentile", percentile}};
    }

    if (args.format == "json") {
        emit_json(j, args.output);
    } else {
        Table table;
        table.columns = {"distance", "q", "count", "dimension"};
        table.rows = {{distance, args.q, static_cast<double>(block.count()),
                       static_cast<double>(block.dim())}};
        if (percentile >= 0.0) {
            table.columns.push_back("percentile");
            table.rows[0].push_back(percentile);
        }
        emit_csv(table, args.output);
    }
    std::cerr << "tail/center covariance distance at q = " << format_g(args.q) << ": "
              << format_g(distance);
    if (percentile >= 0.0) {
        std::cerr << " (percentile " << format_g(percentile) << " of " << args.reference
                  << " Gaussian replicates)";
    }
    std::cerr << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced quantile partitions of correlated populations: "
                 "closed-form group splits, tail/center concordance curves, "
                 "elliptic Monte Carlo experiments and a normality diagnostic. "
                 "Machine output (JSON/CSV) on stdout or --output; summaries on "
                 "stderr.  Relative --output paths land in $EQPART_OUT when set."};
    app.require_subcommand(1);

    const auto odd_k = [](const std::string& text) -> std::string {
        long long k = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            return "k must be an integer";
        }
        if (k < 3 || k % 2 == 0) return "k must be an odd integer >= 3";
        return "";
    };
    const auto int_list = [](const std::string& text) -> std::string {
        try {
            parse_int_list(text);
        } catch (const ParseError& e) {
            return e.what();
        }
        return "";
    };
    const auto q_grid_ok = [](const std::string& text) -> std::string {
        try {
            parse_q_grid(text);
        } catch (const ParseError& e) {
            return e.what();
        }
        return "";
    };

    // solve ------------------------------------------------------------
    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand(
        "solve", "Equal-dependence quantile split into k groups (unit-variance "
                 "benchmark scale).  Output: JSON report {splits, root_x, residual, "
                 "groups[...]} or CSV group table.");
    solve->add_option("--k", solve_args.k, "number of groups (odd, >= 3)")
        ->default_val(3)
        ->check(CLI::Validator(odd_k, "ODD_K"));
    solve->add_option("--model", solve_args.model_path,
                      "model JSON file {mu: [...], sigma: [[...]]}; adds per-group "
                      "conditional matrices in model units");
    solve->add_option("--output", solve_args.output, "write machine output here");
    solve->add_option("--format", solve_args.format, "json (default) or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // curves -----------------------------------------------------------
    CurvesArgs curves_args;
    CLI::App* curves = app.add_subcommand(
        "curves", "Tail-minus-center concordance gaps on a split grid (CSV "
                  "q,r,delta_rho,delta_tau), the balancing split per correlation "
                  "(--A rho|tau), or the r -> 0 limit split (--qstar).");
    curves->add_option("--r", curves_args.r_values,
                       "correlation values in (-1,1); default 0.5")
        ->delimiter(',');
    curves->add_option("--q", curves_args.q_grid,
                       "split grid LO:STEP:HI inside (0, 0.5); default "
                       "0.05:0.05:0.45")
        ->check(CLI::Validator(q_grid_ok, "QGRID"));
    CLI::Option* qstar_opt =
        curves->add_flag("--qstar", curves_args.qstar, "print the limit split only");
    curves->add_option("--A", curves_args.a_kind,
                       "balancing split per --r value; rho = rank correlation, "
                       "tau = concordance")
        ->check(CLI::IsMember({"rho", "tau"}))
        ->excludes(qstar_opt);
    curves->add_option("--output", curves_args.output, "write machine output here");
    curves->add_option("--format", curves_args.format, "csv (default) or json")
        ->check(CLI::IsMember({"json", "csv"}));

    // mc ----------------------------------------------------------------
    McArgs mc_args;
    CLI::App* mc = app.add_subcommand(
        "mc", "Monte Carlo experiments on elliptic samples.  Without --nus: one "
              "quasi-equilibrium fit on a random constrained scale matrix (JSON "
              "summary, optional --curve CSV of the distance curve).  With --nus "
              "(or a ranged --nu like 2..20): Student-t degrees-of-freedom sweep "
              "(JSON summary, --curve CSV of nu,q10,q50,q90).");
    mc->add_option("--config", mc_args.config_path, "RunConfig JSON file; flags override");
    mc->add_option("--seed", mc_args.config.seed, "base seed (default 1)");
    mc->add_option("--count", mc_args.config.count,
                   "observations per sample (default 100000)");
    mc->add_option("--dimension", mc_args.config.dimension,
                   "coordinates per observation (default 4)")
        ->check(CLI::Range(2, 1000));
    mc->add_option("--kind", mc_args.config.kind,
                   "dependence matrix: covariance|correlation|spearman|kendall")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, MatrixKind>{{"covariance", MatrixKind::covariance},
                                              {"correlation", MatrixKind::correlation},
                                              {"spearman", MatrixKind::spearman},
                                              {"kendall", MatrixKind::kendall}}));
    mc->add_option("--radial", mc_args.config.radial_type,
                   "radial law: normal (default) or student")
        ->check(CLI::IsMember({"normal", "student"}));
    CLI::Option* student_flag =
        mc->add_flag("--student", mc_args.student, "shorthand for --radial student");
    mc->add_option("--nu", mc_args.nu_text,
                   "Student degrees of freedom; a single integer, or a list/range "
                   "(2..20 or 2,5,10) which runs the sweep")
        ->check(CLI::Validator(int_list, "NU"));
    mc->add_option("--nus", mc_args.nu_text, "explicit sweep list, same syntax as --nu")
        ->check(CLI::Validator(int_list, "NUS"));
    mc->add_option("--matrices", mc_args.config.matrices,
                   "scale matrices per nu in the sweep (default 20)")
        ->check(CLI::PositiveNumber);
    mc->add_option("--grid-lo", mc_args.config.grid.lo, "first split (default 0.010)");
    mc->add_option("--grid-hi", mc_args.config.grid.hi, "last split (default 0.490)");
    mc->add_option("--grid-step", mc_args.config.grid.step, "grid step (default 0.005)");
    mc->add_option("--min-corr", mc_args.config.constraint.min_abs_corr,
                   "scale-matrix |correlation| lower bound (default 0.2)");
    mc->add_option("--max-corr", mc_args.config.constraint.max_abs_corr,
                   "scale-matrix |correlation| upper bound (default 0.8)");
    mc->add_option("--threads", mc_args.config.threads,
                   "worker cap for the sweep; never changes results (default 1)")
        ->check(CLI::PositiveNumber);
    mc->add_option("--output", mc_args.config.output_path, "JSON summary path");
    mc->add_option("--curve", mc_args.config.curve_path, "CSV curve/table path");

    // normtest -----------------------------------------------------------
    NormtestArgs nt_args;
    CLI::App* normtest = app.add_subcommand(
        "normtest", "Distance-from-normality statistic for a CSV dataset: the "
                    "Frobenius gap between the tail-band and center-band covariance "
                    "of the benchmark column's quantile split.  --reference M "
                    "compares against M Gaussian replicates at the fitted "
                    "mean/covariance and reports the statistic's percentile.");
    normtest->add_option("--data", nt_args.dataset.path, "CSV file")->required();
    normtest->add_option("--benchmark", nt_args.dataset.benchmark_column,
                         "benchmark column (header name, or 0-based index with "
                         "--no-header)")
        ->required();
    normtest->add_option("--features", nt_args.dataset.feature_columns,
                         "feature columns (repeatable; default: all others)");
    normtest->add_option("--delimiter", nt_args.delimiter, "field delimiter (default ,)")
        ->check(CLI::Validator(
            [](const std::string& s) -> std::string {
                return s.size() == 1 ? "" : "delimiter must be one character";
            },
            "CHAR"));
    normtest->add_flag("--no-header", nt_args.no_header,
                       "file has no header row; address columns by index");
    normtest->add_option("--q", nt_args.q,
                         "tail split in (0, 0.5); default 0.198089616")
        ->check(CLI::Range(1e-9, 0.4999999));
    normtest->add_option("--reference", nt_args.reference,
                         "number of Gaussian replicates (default 0 = skip)")
        ->check(CLI::NonNegativeNumber);
    normtest->add_option("--seed", nt_args.seed, "seed for the replicates");
    normtest->add_option("--output", nt_args.output, "write machine output here");
    normtest->add_option("--format", nt_args.format, "json (default) or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(solve)) {
            run_solve(solve_args);
        } else if (app.got_subcommand(curves)) {
            run_curves(curves_args);
        } else if (app.got_subcommand(mc)) {
            RunConfig config;
            if (!mc_args.config_path.empty()) {
                config = load_run_config(mc_args.config_path);
            }
            // Flags override file values.
            if (mc->count("--seed")) config.seed = mc_args.config.seed;
            if (mc->count("--count")) config.count = mc_args.config.count;
            if (mc->count("--dimension")) config.dimension = mc_args.config.dimension;
            if (mc->count("--kind")) config.kind = mc_args.config.kind;
            if (mc->count("--radial")) config.radial_type = mc_args.config.radial_type;
            if (mc_args.student) config.radial_type = "student";
            (void)student_flag;
            if (mc->count("--matrices")) config.matrices = mc_args.config.matrices;
            if (mc->count("--grid-lo")) config.grid.lo = mc_args.config.grid.lo;
            if (mc->count("--grid-hi")) config.grid.hi = mc_args.config.grid.hi;
            if (mc->count("--grid-step")) config.grid.step = mc_args.config.grid.step;
            if (mc->count("--min-corr")) {
                config.constraint.min_abs_corr = mc_args.config.constraint.min_abs_corr;
            }
            if (mc->count("--max-corr")) {
                config.constraint.max_abs_corr = mc_args.config.constraint.max_abs_corr;
            }
            if (mc->count("--threads")) config.threads = mc_args.config.threads;
            if (mc->count("--output")) config.output_path = mc_args.config.output_path;
            if (mc->count("--curve")) config.curve_path = mc_args.config.curve_path;
            if (!mc_args.nu_text.empty()) {
                const std::vector<int> nus = parse_int_list(mc_args.nu_text);
                if (nus.size() == 1 && mc_args.nu_text.find_first_of(".,") ==
                                           std::string::npos) {
                    config.student_nu = nus.front();
                    if (mc->count("--nus")) config.nus = nus;
                } else {
                    config.nus = nus;
                }
            }
            run_mc(config);
        } else if (app.got_subcommand(normtest)) {
            run_normtest(nt_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
