#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdabc/baselines.hpp"
#include "hdabc/checks.hpp"
#include "hdabc/frontier.hpp"
#include "hdabc/mcsim.hpp"
#include "hdabc/mismatch.hpp"
#include "hdabc/model.hpp"
#include "hdabc/ratedist.hpp"
#include "hdabc/schemes.hpp"

namespace hdabc::io {

// ---------------------------------------------------------------------------
// Formatting and parsing
// ---------------------------------------------------------------------------

/// Locale-independent float rendering with 12 significant digits.
inline std::string format_double(double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, r.ptr);
}

/// "x dB" (any case, optional space) -> 10^(x/10); a plain number parses as
/// itself. Used for powers and noise ratios; variances are always linear.
inline double parse_linear_or_db(const std::string& text) {
    std::string t = text;
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    t.erase(t.begin(), std::find_if(t.begin(), t.end(), not_space));
    t.erase(std::find_if(t.rbegin(), t.rend(), not_space).base(), t.end());
    bool db = false;
    if (t.size() >= 2) {
        const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(t[t.size() - 2])));
        const char b = static_cast<char>(std::tolower(static_cast<unsigned char>(t[t.size() - 1])));
        if (a == 'd' && b == 'b') {
            db = true;
            t.erase(t.size() - 2);
            t.erase(std::find_if(t.rbegin(), t.rend(), not_space).base(), t.end());
        }
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &used);
    } catch (const std::exception&) {
        throw SpecError("cannot parse numeric value: '" + text + "'");
    }
    if (used != t.size()) throw SpecError("trailing characters in numeric value: '" + text + "'");
    return db ? std::pow(10.0, value / 10.0) : value;
}

inline double json_linear(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_string()) return parse_linear_or_db(v.get<std::string>());
    return v.get<double>();
}

inline nlohmann::json load_json(const std::string& path) {
    if (path == "-") return nlohmann::json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open " + path);
    return nlohmann::json::parse(in);
}

/// {"variances":[...], "subchannels":M, "power":P, "noise_strong":N_s,
/// "noise_weak":N_w}; power/noise values may carry a dB suffix as strings.
inline ProblemSpec parse_problem_spec(const nlohmann::json& j) {
    ProblemSpec spec;
    for (const auto& v : j.at("variances")) spec.variances.push_back(v.get<double>());
    spec.subchannels = j.at("subchannels").get<int>();
    spec.power = json_linear(j, "power");
    spec.noise_strong = json_linear(j, "noise_strong");
    spec.noise_weak = json_linear(j, "noise_weak");
    return validate(std::move(spec));
}

inline nlohmann::json layered_params_to_json(const LayeredParams& q) {
    return nlohmann::json{{"L", q.L},
                          {"K_prime", q.K_prime},
                          {"channel_power", q.channel_power},
                          {"private_power", q.private_power},
                          {"strong_code_power", q.strong_code_power},
                          {"strong_distortion", q.strong_distortion},
                          {"coarse_head", q.coarse_head},
                          {"coarse_tail", q.coarse_tail},
                          {"side_info", q.side_info}};
}

inline LayeredParams layered_params_from_json(const nlohmann::json& j) {
    LayeredParams q;
    q.L = j.at("L").get<int>();
    q.K_prime = j.at("K_prime").get<int>();
    q.channel_power = j.at("channel_power").get<std::vector<double>>();
    q.private_power = j.at("private_power").get<std::vector<double>>();
    q.strong_code_power = j.at("strong_code_power").get<std::vector<double>>();
    q.strong_distortion = j.at("strong_distortion").get<std::vector<double>>();
    q.coarse_head = j.at("coarse_head").get<std::vector<double>>();
    q.coarse_tail = j.at("coarse_tail").get<std::vector<double>>();
    q.side_info = j.at("side_info").get<std::vector<double>>();
    return q;
}

// ---------------------------------------------------------------------------
// Curve emission
// ---------------------------------------------------------------------------

enum class CurveFormat { csv, json };

/// Writes points as CSV with columns exactly
/// `scheme,lambda,gamma,D_s,D_w,feasible` (blank where inapplicable) or as
/// a JSON array mirroring the field names. 12 significant digits.
inline void emit_curve(const std::vector<SchemePoint>& points, CurveFormat format,
                       std::ostream& out) {
    if (points.empty()) throw std::invalid_argument("emit_curve: empty point list");
    auto mismatch_of = [](const SchemePoint& p) -> const MismatchParams* {
        return std::get_if<MismatchParams>(&p.params);
    };
    if (format == CurveFormat::csv) {
        out << "scheme,lambda,gamma,D_s,D_w,feasible\n";
        for (const auto& p : points) {
            const MismatchParams* mm = mismatch_of(p);
            out << scheme_name(p.scheme) << ',' << (mm ? format_double(mm->lambda) : "") << ','
                << (mm ? format_double(mm->gamma) : "") << ',' << format_double(p.d_s) << ','
                << format_double(p.d_w) << ',' << (p.scheme == Scheme::general ? "1" : "")
                << '\n';
        }
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : points) {
            const MismatchParams* mm = mismatch_of(p);
            nlohmann::json row{{"scheme", scheme_name(p.scheme)},
                               {"lambda", mm ? nlohmann::json(mm->lambda) : nlohmann::json()},
                               {"gamma", mm ? nlohmann::json(mm->gamma) : nlohmann::json()},
                               {"D_s", p.d_s},
                               {"D_w", p.d_w},
                               {"feasible", p.scheme == Scheme::general ? nlohmann::json(true)
                                                                         : nlohmann::json()}};
            arr.push_back(std::move(row));
        }
        out << arr.dump(2) << '\n';
    }
    out.flush();
    if (!out) throw SinkWriteError("emit_curve: sink write failed");
}

/// Row of a parsed curve CSV; empty optionals where the field was blank.
struct CurveRow {
    std::string scheme;
    std::optional<double> lambda, gamma;
    double d_s = 0.0, d_w = 0.0;
    std::optional<bool> feasible;
};

inline std::vector<CurveRow> parse_curve_csv(std::istream& in) {
    std::vector<CurveRow> rows;
    std::string line;
    if (!std::getline(in, line) || line != "scheme,lambda,gamma,D_s,D_w,feasible")
        throw SpecError("parse_curve_csv: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        fields.resize(6);
        CurveRow row;
        row.scheme = fields[0];
        if (!fields[1].empty()) row.lambda = std::stod(fields[1]);
        if (!fields[2].empty()) row.gamma = std::stod(fields[2]);
        row.d_s = std::stod(fields[3]);
        row.d_w = std::stod(fields[4]);
        if (!fields[5].empty()) row.feasible = fields[5] == "1" || fields[5] == "true";
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json mc_report_to_json(const McReport& r) {
    return nlohmann::json{{"scheme", scheme_name(r.scheme)},
                          {"n", r.n},
                          {"empirical_ds", r.empirical_ds},
                          {"empirical_dw", r.empirical_dw},
                          {"stderr_ds", r.stderr_ds},
                          {"stderr_dw", r.stderr_dw},
                          {"closedform_ds", r.closedform_ds},
                          {"closedform_dw", r.closedform_dw},
                          {"seed", r.seed},
                          {"pass", r.pass},
                          {"component_ds", r.component_ds},
                          {"component_dw", r.component_dw},
                          {"component_ds_ref", r.component_ds_ref},
                          {"component_dw_ref", r.component_dw_ref},
                          {"side_info_mse", r.side_info_mse},
                          {"side_info_ref", r.side_info_ref}};
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

namespace detail {

struct OutSink {
    std::ofstream file;
    std::ostream* stream = &std::cout;
    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw SinkWriteError("cannot open output file " + path);
        stream = &file;
    }
    std::ostream& get() { return *stream; }
};

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Distortion trade-offs for hybrid digital-analog broadcasting of parallel "
                 "Gaussian sources over two-user Gaussian channels"};
    app.require_subcommand(1);

    std::string spec_path, out_path, which = "weak", format = "csv";
    std::string snr_s, snr_w, suite = "all", scheme, params_path, from, noise_sel = "weak";
    std::string allocation = "optimal";
    double rate = -1.0, weight = 0.5, alpha = 0.0, lambda = 0.5, gamma = 0.5, sigma2 = 1.0;
    double beta = -1.0, budget = 4e6;
    int grid_mismatch = 201, grid_tradeoff = 33, grid_frontier = 201;
    int tradeoff_grid = 0, sweep = 0, workers = 1;
    std::uint64_t samples = 1000000, seed = 1, batch = 65536;
    bool hull = false;

    auto add_spec = [&](CLI::App* cmd) {
        cmd->add_option("spec", spec_path, "problem spec JSON (path or '-' for stdin)")->required();
        cmd->add_option("--out", out_path, "write output to a file instead of stdout");
    };

    CLI::App* c_waterfill = app.add_subcommand("waterfill", "reverse water-filling solution");
    add_spec(c_waterfill);
    c_waterfill->add_option("--which", which, "weak|strong")->check(CLI::IsMember({"weak", "strong"}));
    c_waterfill->add_option("--rate", rate, "explicit total rate in nats per source vector");

    CLI::App* c_extreme = app.add_subcommand("extreme", "weak- or strong-user-optimal point");
    add_spec(c_extreme);
    c_extreme->add_option("--which", which, "weak|strong")
        ->required()
        ->check(CLI::IsMember({"weak", "strong"}));

    CLI::App* c_tradeoff = app.add_subcommand("tradeoff", "layered-scheme frontier search");
    add_spec(c_tradeoff);
    c_tradeoff->add_option("--weight", weight, "objective weight on D_s in [0,1]");
    c_tradeoff->add_option("--grid", grid_tradeoff, "grid points per axis")->capture_default_str();
    c_tradeoff->add_option("--budget", budget, "max grid points per (L,K') block");
    c_tradeoff->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* c_mismatch =
        app.add_subcommand("mismatch", "closed-form white-source frontier at bandwidth ratio alpha");
    c_mismatch->add_option("--alpha", alpha, "bandwidth ratio M/K (> 0, != 1)")->required();
    c_mismatch->add_option("--snr-s", snr_s, "P/N_s, linear or dB")->required();
    c_mismatch->add_option("--snr-w", snr_w, "P/N_w, linear or dB")->required();
    c_mismatch->add_option("--sigma2", sigma2, "source variance");
    c_mismatch->add_option("--grid", grid_mismatch, "grid points per axis")->capture_default_str();
    c_mismatch->add_option("--out", out_path, "write output to a file instead of stdout");
    c_mismatch->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* c_frontier = app.add_subcommand("frontier", "achievable points of every scheme");
    add_spec(c_frontier);
    c_frontier->add_option("--grid", grid_frontier, "separation sweep resolution")->capture_default_str();
    c_frontier->add_option("--tradeoff-grid", tradeoff_grid,
                           "include the layered search at this per-axis resolution (0 = off)");
    c_frontier->add_flag("--hull", hull, "emit the time-sharing hull of everything");
    c_frontier->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* c_baseline = app.add_subcommand("baseline", "separation or uncoded baseline");
    add_spec(c_baseline);
    c_baseline->add_option("--which", which, "separation|analog")
        ->required()
        ->check(CLI::IsMember({"separation", "analog"}));
    c_baseline->add_option("--beta", beta, "refinement power share (default: canonical)");
    c_baseline->add_option("--sweep", sweep, "sweep beta over this many points");
    c_baseline->add_option("--allocation", allocation, "optimal|flat")
        ->check(CLI::IsMember({"optimal", "flat"}));
    c_baseline->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* c_simulate = app.add_subcommand("simulate", "signal-level Monte-Carlo validation");
    add_spec(c_simulate);
    c_simulate->add_option("--scheme", scheme, "uncoded|weak_opt|strong_opt|general")
        ->required()
        ->check(CLI::IsMember({"uncoded", "weak_opt", "strong_opt", "general"}));
    c_simulate->add_option("--samples", samples, "sample count")->capture_default_str();
    c_simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
    c_simulate->add_option("--workers", workers, "worker threads")->capture_default_str();
    c_simulate->add_option("--batch", batch, "samples per batch")->capture_default_str();
    c_simulate->add_option("--noise", noise_sel, "uncoded: which user's noise (weak|strong)")
        ->check(CLI::IsMember({"weak", "strong"}));
    c_simulate->add_option("--params", params_path, "general: layered parameter JSON file");
    c_simulate->add_option("--from", from, "general: derive parameters (weak|strong|bc|be)")
        ->check(CLI::IsMember({"weak", "strong", "bc", "be"}));
    c_simulate->add_option("--lambda", lambda, "bc/be substitution lambda");
    c_simulate->add_option("--gamma", gamma, "bc/be substitution gamma");

    CLI::App* c_check = app.add_subcommand("check", "run the verification suites");
    c_check->add_option("--suite", suite, "analytic|mc|all")
        ->check(CLI::IsMember({"analytic", "mc", "all"}));
    c_check->add_option("--workers", workers, "worker threads for the mc suite");
    c_check->add_option("--out", out_path, "write output to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        detail::OutSink sink;
        sink.open(out_path);
        std::ostream& out = sink.get();

        if (c_waterfill->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            const WaterfillResult wf =
                rate >= 0.0 ? reverse_waterfill(spec.variances, rate)
                            : point_to_point_optimum(
                                  spec, which == "strong" ? User::strong : User::weak);
            const nlohmann::json j{{"mu", wf.mu},
                                   {"distortions", wf.distortions},
                                   {"total_distortion", wf.total_distortion},
                                   {"total_rate_nats", wf.total_rate},
                                   {"total_rate_bits", wf.total_rate / std::log(2.0)}};
            out << j.dump(2) << '\n';
        } else if (c_extreme->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            const SchemePoint pt =
                which == "strong" ? strong_user_optimal(spec) : weak_user_optimal(spec);
            out << "scheme,D_s,D_w\n"
                << scheme_name(pt.scheme) << ',' << format_double(pt.d_s) << ','
                << format_double(pt.d_w) << '\n';
        } else if (c_tradeoff->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            GridSpec gs;
            gs.points_per_axis = grid_tradeoff;
            gs.max_points_per_block = budget;
            const auto points = layered_optimize(spec, weight, gs, &std::cerr);
            emit_curve(points, format == "json" ? CurveFormat::json : CurveFormat::csv, out);
        } else if (c_mismatch->parsed()) {
            const double rs = parse_linear_or_db(snr_s), rw = parse_linear_or_db(snr_w);
            if (!(rs > 0.0) || !(rw > 0.0)) throw SpecError("mismatch: SNRs must be positive");
            const double p = 1.0;
            const auto points = mismatch_frontier(sigma2, p, p / rs, p / rw, alpha, grid_mismatch);
            if (format == "json") {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& pt : points) {
                    const auto& mm = std::get<MismatchParams>(pt.params);
                    arr.push_back(nlohmann::json{{"lambda", mm.lambda},
                                                 {"gamma", mm.gamma},
                                                 {"D_s", pt.d_s},
                                                 {"D_w", pt.d_w}});
                }
                out << arr.dump(2) << '\n';
            } else {
                out << "lambda,gamma,D_s,D_w\n";
                for (const auto& pt : points) {
                    const auto& mm = std::get<MismatchParams>(pt.params);
                    out << format_double(mm.lambda) << ',' << format_double(mm.gamma) << ','
                        << format_double(pt.d_s) << ',' << format_double(pt.d_w) << '\n';
                }
            }
        } else if (c_frontier->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            std::vector<SchemePoint> pts{weak_user_optimal(spec), strong_user_optimal(spec)};
            std::vector<SchemePoint> sep;
            const int nsweep = std::max(2, grid_frontier);
            for (int i = 0; i < nsweep; ++i)
                sep.push_back(separation_point(
                    spec, SeparationParams{static_cast<double>(i) / (nsweep - 1)}));
            for (auto& p : pareto_filter(std::move(sep))) pts.push_back(std::move(p));
            if (spec.source_components() == spec.subchannels) pts.push_back(analog_point(spec));
            if (tradeoff_grid >= 2) {
                GridSpec gs;
                gs.points_per_axis = tradeoff_grid;
                for (auto& p : layered_optimize(spec, 0.5, gs, &std::cerr))
                    pts.push_back(std::move(p));
            }
            if (hull) pts = hull_with_timesharing(pts);
            emit_curve(pts, format == "json" ? CurveFormat::json : CurveFormat::csv, out);
        } else if (c_baseline->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            std::vector<SchemePoint> pts;
            if (which == "separation") {
                if (sweep >= 2) {
                    for (int i = 0; i < sweep; ++i)
                        pts.push_back(separation_point(
                            spec, SeparationParams{static_cast<double>(i) / (sweep - 1)}));
                } else {
                    const double b = beta >= 0.0 ? beta : beta_bar(spec);
                    pts.push_back(separation_point(spec, SeparationParams{b}));
                }
            } else {
                if (allocation == "flat") {
                    pts.push_back(analog_point(
                        spec, std::vector<double>(spec.variances.size(), spec.power)));
                } else {
                    pts.push_back(analog_point(spec));
                }
            }
            emit_curve(pts, format == "json" ? CurveFormat::json : CurveFormat::csv, out);
        } else if (c_simulate->parsed()) {
            const ProblemSpec spec = parse_problem_spec(load_json(spec_path));
            McConfig cfg;
            cfg.workers = workers;
            cfg.batch_size = batch;
            McReport rep;
            if (scheme == "uncoded") {
                const double noise =
                    noise_sel == "strong" ? spec.noise_strong : spec.noise_weak;
                rep = simulate_uncoded(spec.variances.front(), spec.power, noise, samples, seed,
                                       cfg);
            } else if (scheme == "weak_opt") {
                rep = simulate_weak_opt_chain(spec, samples, seed, cfg);
            } else if (scheme == "strong_opt") {
                rep = simulate_strong_opt_chain(spec, samples, seed, cfg);
            } else {
                LayeredParams q;
                if (!params_path.empty()) {
                    q = layered_params_from_json(load_json(params_path));
                } else if (from == "weak") {
                    q = weak_optimal_params(spec);
                } else if (from == "strong") {
                    q = strong_optimal_params(spec);
                } else if (from == "bc" || from == "be") {
                    const int K = spec.source_components(), M = spec.subchannels;
                    MismatchParams p{spec.variances.front(),
                                     static_cast<double>(M) / static_cast<double>(K), lambda,
                                     gamma};
                    q = from == "bc" ? bc_substitution(p, spec.power, spec.noise_strong,
                                                       spec.noise_weak, K, M)
                                     : be_substitution(p, spec.power, spec.noise_strong,
                                                       spec.noise_weak, K, M);
                } else {
                    throw SpecError("simulate general: need --params or --from");
                }
                rep = simulate_general_chain(spec, q, samples, seed, cfg);
            }
            out << mc_report_to_json(rep).dump(2) << '\n';
        } else if (c_check->parsed()) {
            std::vector<checks::CheckResult> results;
            if (suite == "analytic")
                results = checks::run_analytic_checks();
            else if (suite == "mc")
                results = checks::run_mc_checks(workers);
            else
                results = checks::run_all_checks(workers);
            bool all_pass = true;
            for (const auto& r : results) {
                all_pass = all_pass && r.pass;
                out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ") ["
                    << format_double(r.seconds) << "s]\n";
            }
            out.flush();
            if (!all_pass) return 4;
        }
        return 0;
    } catch (const InfeasibleParams& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {  // SpecError and friends
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

/// Test-friendly wrapper: args without the program name.
inline int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("hdabc");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(storage.size());
    for (const auto& s : storage) argv.push_back(s.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hdabc::io
