// pwlarsen command-line tool: knot tables, covariance tests and null-distribution
// simulations for the elastic net. Run `pwlarsen --help` for the subcommands.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <pwlarsen/pwlarsen.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pwlarsen;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Shared option state

struct InputOpts
{
    std::string input; // empty: bundled prostate training data
    std::vector<double> alphas;
    std::string alpha_grid; // "MIN:STEP"
    std::size_t K = 0;      // 0: number of predictors
    std::string format;
    std::string out;
};

struct Loaded
{
    Dataset data;
    std::vector<std::string> names;
    std::string source;
};

Loaded load_input(const std::string& input)
{
    if (input.empty())
        return {standardize(io::load_prostate()), io::prostate_predictor_names(), "prostate (training rows)"};
    io::LabelledDataset ld = io::read_dataset_csv(fs::path(input));
    return {standardize(ld.data), ld.predictor_names, input};
}

std::string alpha_label(double a)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

/// Grid reaching every requested alpha. --alpha-grid sets its floor and step;
/// without an explicit alpha list all grid values are reported.
struct GridChoice
{
    AlphaGrid grid;
    std::vector<double> report;
};

GridChoice choose_grid(const InputOpts& o, std::vector<double> default_alphas)
{
    double step = AlphaGrid::default_step;
    std::optional<double> floor;
    if (!o.alpha_grid.empty()) {
        const auto colon = o.alpha_grid.find(':');
        if (colon == std::string::npos) throw UsageError("--alpha-grid expects MIN:STEP");
        try {
            floor = std::stod(o.alpha_grid.substr(0, colon));
            step = std::stod(o.alpha_grid.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("--alpha-grid expects two numbers, got '" + o.alpha_grid + "'");
        }
        if (!(*floor > 0.0 && *floor <= 1.0) || !(step > 0.0 && step < 1.0))
            throw UsageError("--alpha-grid needs 0 < MIN <= 1 and 0 < STEP < 1");
    }
    std::vector<double> report = o.alphas.empty() ? std::move(default_alphas) : o.alphas;
    for (double a : report)
        if (!(a > 0.0 && a <= 1.0)) throw UsageError("alpha values must lie in (0, 1], got " + alpha_label(a));
    double amin = floor.value_or(1.0);
    for (double a : report) amin = std::min(amin, a);

    AlphaGrid base = AlphaGrid::uniform(amin, step);
    std::vector<double> v = base.values();
    for (double a : report)
        if (!base.find(a)) v.push_back(a);
    std::sort(v.begin(), v.end(), std::greater<>());
    v.erase(std::unique(v.begin(), v.end(), [](double x, double y) { return std::abs(x - y) <= 1e-9; }), v.end());
    AlphaGrid grid(std::move(v), step);
    if (floor && o.alphas.empty()) report = grid.values();
    return {std::move(grid), std::move(report)};
}

std::ostream& open_out(std::ofstream& file, const fs::path& p)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file.open(p);
    if (!file) throw Error(ErrorKind::DataFileMissing, "cannot write " + p.string());
    return file;
}

void report_warnings(const PathGrid& pg)
{
    for (const auto& w : pg.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& p : pg.paths)
        for (const auto& w : p.warnings) std::cerr << "warning: alpha " << alpha_label(p.alpha) << ": " << w << '\n';
}

json knots_json(const std::vector<io::KnotRow>& rows, double alpha)
{
    json knots = json::array();
    for (const auto& r : rows)
        knots.push_back({{"k", r.k}, {"lambda", r.lambda}, {"event", r.event}, {"predictor", r.predictor},
                         {"beta", r.beta}});
    return {{"alpha", alpha}, {"knots", knots}};
}

// ---------------------------------------------------------------------------
// path / knots

int cmd_knots(const InputOpts& o, bool dense, std::size_t points, bool check_roundtrip)
{
    const Loaded in = load_input(o.input);
    const Dataset& d = in.data;
    const auto [grid, report] = choose_grid(o, {1.0, 0.9, 0.5});
    const std::size_t K = o.K ? o.K : static_cast<std::size_t>(d.p());
    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, grid, K, opt);
    report_warnings(pg);

    const bool as_json = o.format == "json";
    json all = json::array();
    bool roundtrip_ok = true;
    for (double a : report) {
        const KnotPath& path = pg.at(a);
        const auto rows = io::knot_rows(d, path);
        if (as_json) {
            all.push_back(knots_json(rows, a));
        } else if (o.out.empty()) {
            io::write_knot_rows_csv(std::cout, rows, static_cast<std::size_t>(d.p()));
        }
        if (o.out.empty()) continue;

        const fs::path dir(o.out);
        const fs::path knot_file = dir / ("knots_alpha" + alpha_label(a) + ".csv");
        {
            std::ofstream f;
            io::write_knot_rows_csv(open_out(f, knot_file), rows, static_cast<std::size_t>(d.p()));
        }
        if (check_roundtrip) {
            std::ifstream back(knot_file);
            const bool same = io::read_knot_rows_csv(back) == rows;
            std::cout << "round trip " << knot_file.string() << ": " << (same ? "identical" : "MISMATCH") << '\n';
            roundtrip_ok = roundtrip_ok && same;
        }
        if (!dense) continue;
        std::ofstream f;
        std::ostream& out = open_out(f, dir / ("path_alpha" + alpha_label(a) + ".csv"));
        out << "alpha,lambda";
        for (Index j = 0; j < d.p(); ++j) out << ",beta_" << j + 1;
        out << '\n' << std::setprecision(17);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            for (std::size_t s = 0; s < points; ++s) {
                const double t = static_cast<double>(s) / static_cast<double>(points);
                const double lam = (1.0 - t) * path.knots[i] + t * path.knots[i + 1];
                const VectorXd b = to_original_scale(
                    d, a == 1.0 ? coefficients_at(path, lam) : en_coefficients_at(d, path, lam));
                out << a << ',' << lam;
                for (Index j = 0; j < b.size(); ++j) out << ',' << b[j];
                out << '\n';
            }
        }
        const VectorXd last = to_original_scale(d, path.betas.back());
        out << a << ',' << path.knots.back();
        for (Index j = 0; j < last.size(); ++j) out << ',' << last[j];
        out << '\n';
    }
    if (as_json) {
        if (o.out.empty()) {
            std::cout << all.dump(2) << '\n';
        } else {
            std::ofstream f;
            open_out(f, fs::path(o.out) / "knots.json") << all.dump(2) << '\n';
        }
    }
    if (!o.out.empty()) std::cout << "wrote knot tables for " << report.size() << " alpha value(s) to " << o.out << '\n';
    return roundtrip_ok ? kOk : kNumerical;
}

// ---------------------------------------------------------------------------
// covtest

std::string cell(const CovTestResult& r)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f (%ld)", r.p_value, static_cast<long>(r.entering_predictor + 1));
    return buf;
}

void print_step_table(std::ostream& out, const std::vector<double>& alphas,
                      const std::vector<std::vector<CovTestResult>>& cols)
{
    out << "Step";
    for (double a : alphas) out << "  " << std::setw(12) << ("alpha=" + alpha_label(a));
    out << '\n';
    std::size_t rows = 0;
    for (const auto& c : cols) rows = std::max(rows, c.size());
    for (std::size_t k = 0; k < rows; ++k) {
        out << std::setw(4) << k + 1;
        for (const auto& c : cols) out << "  " << std::setw(12) << (k < c.size() ? cell(c[k]) : "");
        out << '\n';
    }
}

int covtest_report(const InputOpts& o, std::vector<double> default_alphas, std::optional<double> sigma2)
{
    const Loaded in = load_input(o.input);
    const Dataset& d = in.data;
    const auto [grid, report] = choose_grid(o, std::move(default_alphas));
    const std::size_t K = o.K ? o.K : static_cast<std::size_t>(d.p());
    const PathGrid pg = pw_lars_en(d, grid, K);
    report_warnings(pg);

    std::vector<std::vector<CovTestResult>> cols;
    for (double a : report) cols.push_back(covtest_sequence(d, pg, a, K, sigma2));

    std::ofstream file;
    std::ostream& out = o.out.empty() ? std::cout : open_out(file, o.out);
    if (o.format == "csv") {
        out << "alpha,k,predictor,statistic,p_value,p_rounded,reference\n";
        for (const auto& c : cols)
            for (const auto& r : c) {
                char rounded[16];
                std::snprintf(rounded, sizeof rounded, "%.3f", r.p_value);
                out << alpha_label(r.alpha) << ',' << r.step << ',' << r.entering_predictor + 1 << ','
                    << std::setprecision(17) << r.statistic << ',' << r.p_value << ',' << rounded << ','
                    << r.reference.label() << '\n';
            }
    } else if (o.format == "json") {
        json all = json::array();
        for (const auto& c : cols) {
            json steps = json::array();
            for (const auto& r : c)
                steps.push_back({{"k", r.step},
                                 {"predictor", r.entering_predictor + 1},
                                 {"name", r.entering_predictor >= 0 &&
                                                  static_cast<std::size_t>(r.entering_predictor) < in.names.size()
                                              ? in.names[static_cast<std::size_t>(r.entering_predictor)]
                                              : ""},
                                 {"statistic", r.statistic},
                                 {"p_value", r.p_value},
                                 {"reference", r.reference.label()}});
            all.push_back({{"alpha", c.empty() ? 0.0 : c.front().alpha}, {"steps", steps}});
        }
        out << all.dump(2) << '\n';
    } else {
        out << "Covariance test on " << in.source << " (n = " << d.n() << ", p = " << d.p() << "); ";
        if (sigma2)
            out << "sigma^2 = " << *sigma2 << ", reference Exp(1)\n";
        else
            out << "sigma^2 estimated (" << sigma_hat(d) << "), reference F(2," << d.n() - d.p() << ")\n";
        out << "p-values with the entering predictor in brackets\n\n";
        print_step_table(out, report, cols);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate / qq

struct SimOpts
{
    std::string preset;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    std::string format = "csv";
    // custom experiment
    Index n = 100;
    Index p = 10;
    std::string cov = "identity";
    double rho = 0.25;
    Index signals = 0;
    std::size_t k_test = 0;
    std::string design = "gaussian";
    std::vector<double> alphas;
    bool estimate_sigma = false;
};

sim::NullSimConfig custom_config(const SimOpts& s)
{
    sim::NullSimConfig c;
    c.n = s.n;
    c.p = s.p;
    const sim::Structure st = s.cov == "cs" ? sim::Structure::CS
                              : s.cov == "ar1" ? sim::Structure::AR1
                                               : sim::Structure::Identity;
    c.cov = sim::CovSpec(1.0, st == sim::Structure::Identity ? 0.0 : s.rho, st, s.p);
    c.design = s.design == "orthonormal" ? sim::Design::Orthonormal : sim::Design::Gaussian;
    c.beta_star = sim::signal_vector(s.p, s.signals);
    c.k_test = s.k_test;
    c.reps = s.reps;
    c.seed = s.seed;
    c.sigma2_known = !s.estimate_sigma;
    if (!s.alphas.empty()) c.alpha_list = s.alphas;
    c.label = "custom_" + sim::to_string(st) + "_p" + std::to_string(s.p) + "_k" + std::to_string(s.k_test);
    return c;
}

void write_qq(const fs::path& file, const std::vector<double>& samples, const Reference& ref)
{
    std::ofstream f;
    std::ostream& out = open_out(f, file);
    out << "theoretical,empirical\n" << std::setprecision(17);
    for (const auto& [t, e] : sim::qq_data(samples, ref)) out << t << ',' << e << '\n';
}

void print_table1(const std::vector<sim::NullSimSummary>& sums)
{
    // rows Sigma x {mean, var, q95}; columns p = 10 then p = 50, each alpha 1.0 / 0.9 / 0.5
    std::printf("%-8s %-5s %6s |", "", "", "Exp(1)");
    for (int block = 0; block < 2; ++block)
        for (const auto& a : sums[static_cast<std::size_t>(block)].per_alpha)
            std::printf(" %s%-5s", block == 0 ? "p10:" : "p50:", alpha_label(a.alpha).c_str());
    std::printf("\n");
    const char* stat_names[] = {"Mean", "Var", "q95"};
    const double ref[] = {1.0, 1.0, 3.0};
    for (std::size_t s = 0; s + 1 < sums.size(); s += 2) {
        for (int st = 0; st < 3; ++st) {
            std::printf("%-8s %-5s %6.1f |", st == 0 ? ("Sigma" + std::to_string(s / 2 + 1)).c_str() : "",
                        stat_names[st], ref[st]);
            for (std::size_t b = 0; b < 2; ++b)
                for (const auto& a : sums[s + b].per_alpha) {
                    const double v = st == 0 ? a.stats.mean : st == 1 ? a.stats.variance : a.stats.q95;
                    std::printf(" %9.3f", v);
                }
            std::printf("\n");
        }
    }
}

int cmd_simulate(const SimOpts& s)
{
    if (s.preset == "prostate") {
        InputOpts o;
        o.format = "table";
        return covtest_report(o, {1.0, 0.9, 0.5, 0.1}, std::nullopt);
    }
    std::vector<sim::NullSimConfig> cfgs;
    if (s.preset == "table1")
        cfgs = sim::preset_table1(s.seed, s.reps);
    else if (s.preset == "fig2")
        cfgs = sim::preset_fig2(s.seed, s.reps);
    else if (s.preset == "fig3")
        cfgs.push_back(sim::preset_fig3(s.seed, s.reps));
    else
        cfgs.push_back(custom_config(s));

    std::vector<sim::NullSimSummary> sums;
    json summary = json::array();
    for (auto& c : cfgs) {
        c.threads = s.threads;
        std::cerr << "running " << c.label << " (" << c.reps << " replicates)\n";
        sim::NullSimSummary r = sim::mc_null_experiment(c);
        for (const auto& m : r.failure_messages) std::cerr << "skipped " << m << '\n';
        json per = json::array();
        for (const auto& a : r.per_alpha)
            per.push_back({{"alpha", a.alpha}, {"k", a.k}, {"mean", a.stats.mean}, {"variance", a.stats.variance},
                           {"q95", a.stats.q95}, {"ks", a.ks}, {"samples", a.samples.size()}});
        summary.push_back({{"label", r.label}, {"reference", r.reference.label()}, {"seed", c.seed},
                           {"reps", r.reps}, {"failures", r.failures}, {"per_alpha", per}});

        if (!s.out.empty()) {
            const fs::path dir(s.out);
            std::ofstream f;
            std::ostream& out = open_out(f, dir / ("samples_" + r.label + ".csv"));
            out << "rep,alpha,k,T,p_value\n" << std::setprecision(17);
            for (const auto& a : r.per_alpha)
                for (std::size_t i = 0; i < a.samples.size(); ++i)
                    out << a.replicate[i] << ',' << alpha_label(a.alpha) << ',' << a.k << ',' << a.samples[i] << ','
                        << a.p_values[i] << '\n';
            for (const auto& a : r.per_alpha)
                write_qq(dir / ("qq_" + r.label + "_alpha" + alpha_label(a.alpha) + "_k" + std::to_string(a.k) +
                                ".csv"),
                         a.samples, r.reference);
        }
        sums.push_back(std::move(r));
    }

    if (s.format == "json") {
        std::cout << summary.dump(2) << '\n';
    } else if (s.preset == "table1") {
        print_table1(sums);
    } else {
        std::printf("%-24s %-8s %5s %3s %8s %8s %8s %8s\n", "label", "ref", "alpha", "k", "mean", "var", "q95", "KS");
        for (const auto& r : sums)
            for (const auto& a : r.per_alpha)
                std::printf("%-24s %-8s %5s %3zu %8.3f %8.3f %8.3f %8.4f\n", r.label.c_str(),
                            r.reference.label().c_str(), alpha_label(a.alpha).c_str(), a.k, a.stats.mean,
                            a.stats.variance, a.stats.q95, a.ks);
    }
    if (!s.out.empty()) {
        std::ofstream f;
        open_out(f, fs::path(s.out) / "summary.json") << summary.dump(2) << '\n';
        std::cerr << "wrote samples, QQ pairs and summary.json to " << s.out << '\n';
    }
    return kOk;
}

Reference parse_reference(const std::string& spec)
{
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    double v = 1.0;
    if (colon != std::string::npos) {
        try {
            v = std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad reference '" + spec + "'");
        }
    }
    if (kind == "exp") return Reference::exp(v);
    if (kind == "f" && colon != std::string::npos) return Reference::f(v);
    throw UsageError("reference must be exp[:RATE] or f:DF2, got '" + spec + "'");
}

int cmd_qq(const std::string& samples_file, const std::string& column, const std::string& ref_spec,
           const std::string& out_file, std::optional<double> alpha)
{
    const Reference ref = parse_reference(ref_spec);
    std::ifstream in(samples_file);
    if (!in) throw Error(ErrorKind::DataFileMissing, "cannot open " + samples_file);
    // samples files carry a string alpha label, so read the requested column by hand
    std::string line;
    std::size_t lineno = 0;
    std::ptrdiff_t col = -1;
    std::ptrdiff_t alpha_col = -1;
    std::vector<double> xs;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
        if (col < 0) {
            const auto it = std::find(f.begin(), f.end(), column);
            if (it == f.end()) throw ParseError(lineno, "no column named '" + column + "'");
            col = it - f.begin();
            if (alpha) {
                const auto at = std::find(f.begin(), f.end(), "alpha");
                if (at == f.end()) throw ParseError(lineno, "--alpha given but the file has no alpha column");
                alpha_col = at - f.begin();
            }
            continue;
        }
        if (static_cast<std::size_t>(std::max(col, alpha_col)) >= f.size()) throw ParseError(lineno, "row too short");
        if (alpha_col >= 0) {
            double a = 0.0;
            try {
                a = std::stod(f[static_cast<std::size_t>(alpha_col)]);
            } catch (const std::exception&) {
                throw ParseError(lineno, "not a number: '" + f[static_cast<std::size_t>(alpha_col)] + "'");
            }
            if (std::abs(a - *alpha) > 1e-9) continue;
        }
        try {
            xs.push_back(std::stod(f[static_cast<std::size_t>(col)]));
        } catch (const std::exception&) {
            throw ParseError(lineno, "not a number: '" + f[static_cast<std::size_t>(col)] + "'");
        }
    }
    if (xs.empty()) throw UsageError("no samples selected from " + samples_file);
    if (out_file.empty()) {
        std::cout << "theoretical,empirical\n" << std::setprecision(17);
        for (const auto& [t, e] : sim::qq_data(xs, ref)) std::cout << t << ',' << e << '\n';
    } else {
        write_qq(out_file, xs, ref);
    }
    std::cerr << xs.size() << " samples, KS distance to " << ref.label() << ": " << ks_distance(xs, ref) << '\n';
    return kOk;
}

int exit_code_for(ErrorKind k)
{
    switch (k) {
        case ErrorKind::ParseError:
        case ErrorKind::DataFileMissing:
        case ErrorKind::ChecksumMismatch:
        case ErrorKind::ZeroVarianceColumn:
        case ErrorKind::StandardizationError:
        case ErrorKind::NonFiniteInput:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::Underdetermined:
        case ErrorKind::RankDeficient: return kData;
        case ErrorKind::InvalidArgument:
        case ErrorKind::AlphaOutOfRange:
        case ErrorKind::AlphaNotInGrid:
        case ErrorKind::InvalidReference:
        case ErrorKind::NotPositiveDefinite: return kUsage;
        default: return kNumerical;
    }
}

void add_input_options(CLI::App* cmd, InputOpts& o, const std::string& default_format,
                       std::vector<std::string> formats)
{
    o.format = default_format;
    cmd->add_option("--input", o.input, "CSV file: header row, response first, predictors after (default: bundled prostate data)");
    cmd->add_option("--alpha", o.alphas, "alpha values to report, comma separated")->delimiter(',');
    cmd->add_option("--alpha-grid", o.alpha_grid, "grid floor and spacing as MIN:STEP (default spacing 0.01)");
    cmd->add_option("--K", o.K, "number of knots / steps (default: p)");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember(std::move(formats)));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pathwise LARS-EN knots and elastic net covariance tests"};
    app.require_subcommand(1);

    InputOpts path_o, knots_o, cov_o;
    std::size_t points = 20;
    bool roundtrip = false;
    auto* path_cmd = app.add_subcommand("path", "knot tables plus dense coefficient paths for plotting");
    add_input_options(path_cmd, path_o, "csv", {"csv", "json"});
    path_cmd->add_option("--out", path_o.out, "output directory");
    path_cmd->add_option("--points", points, "samples per knot interval in the dense path")->check(CLI::PositiveNumber);
    path_cmd->add_flag("--check-roundtrip", roundtrip, "re-read the written knot tables and compare");

    auto* knots_cmd = app.add_subcommand("knots", "knot tables only");
    add_input_options(knots_cmd, knots_o, "csv", {"csv", "json"});
    knots_cmd->add_option("--out", knots_o.out, "output directory (default: standard output)");

    double sigma2 = 0.0;
    bool estimate = false;
    auto* cov_cmd = app.add_subcommand("covtest", "covariance test p-values per step and alpha");
    add_input_options(cov_cmd, cov_o, "table", {"table", "csv", "json"});
    cov_cmd->add_option("--out", cov_o.out, "output file (default: standard output)");
    auto* sig_opt = cov_cmd->add_option("--sigma2", sigma2, "known noise variance (reference Exp(1))")
                        ->check(CLI::PositiveNumber);
    auto* est_opt = cov_cmd->add_flag("--estimate-sigma", estimate, "estimate sigma^2 from the full LS fit (reference F(2, n-p)); the default");
    sig_opt->excludes(est_opt);

    SimOpts sim_o;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo null distribution of the covariance statistic");
    sim_cmd->add_option("--preset", sim_o.preset, "predefined experiment")
        ->check(CLI::IsMember({"table1", "fig2", "fig3", "prostate"}));
    sim_cmd->add_option("--reps", sim_o.reps, "replicates per configuration")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_o.seed, "random seed");
    sim_cmd->add_option("--threads", sim_o.threads, "worker threads (0: all cores)");
    sim_cmd->add_option("--out", sim_o.out, "output directory for samples, QQ pairs and summary.json");
    sim_cmd->add_option("--format", sim_o.format, "summary format on standard output")
        ->check(CLI::IsMember({"csv", "json"}));
    sim_cmd->add_option("--n", sim_o.n, "custom: observations");
    sim_cmd->add_option("--p", sim_o.p, "custom: predictors");
    sim_cmd->add_option("--cov", sim_o.cov, "custom: predictor covariance")
        ->check(CLI::IsMember({"identity", "cs", "ar1"}));
    sim_cmd->add_option("--rho", sim_o.rho, "custom: correlation parameter");
    sim_cmd->add_option("--signals", sim_o.signals, "custom: number of coefficients equal to 3");
    sim_cmd->add_option("--k", sim_o.k_test, "custom: step k of the statistic T_k");
    sim_cmd->add_option("--design", sim_o.design, "custom: design type")
        ->check(CLI::IsMember({"gaussian", "orthonormal"}));
    sim_cmd->add_option("--alpha", sim_o.alphas, "custom: alpha values")->delimiter(',');
    sim_cmd->add_flag("--estimate-sigma", sim_o.estimate_sigma, "custom: estimate sigma^2 per replicate");

    std::string qq_in, qq_col = "T", qq_ref = "exp:1", qq_out;
    auto* qq_cmd = app.add_subcommand("qq", "QQ pairs of a sample column against a reference distribution");
    qq_cmd->add_option("--samples", qq_in, "CSV file with a header row")->required();
    qq_cmd->add_option("--column", qq_col, "column holding the samples");
    qq_cmd->add_option("--reference", qq_ref, "exp[:RATE] or f:DF2");
    qq_cmd->add_option("--out", qq_out, "output file (default: standard output)");
    std::optional<double> qq_alpha;
    qq_cmd->add_option("--alpha", qq_alpha, "keep only rows with this alpha (simulation samples files)");

    auto* demo_cmd = app.add_subcommand("demo-prostate", "covariance test table for the prostate data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*path_cmd) return cmd_knots(path_o, true, points, roundtrip);
        if (*knots_cmd) return cmd_knots(knots_o, false, 0, false);
        if (*cov_cmd) {
            std::optional<double> s2;
            if (*sig_opt) s2 = sigma2;
            return covtest_report(cov_o, {1.0}, s2);
        }
        if (*sim_cmd) return cmd_simulate(sim_o);
        if (*qq_cmd) return cmd_qq(qq_in, qq_col, qq_ref, qq_out, qq_alpha);
        if (*demo_cmd) {
            InputOpts o;
            o.format = "table";
            return covtest_report(o, {1.0, 0.9, 0.5, 0.1}, std::nullopt);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
