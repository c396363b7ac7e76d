#pragma once

// The `red` command-line front end. run_cli() is the whole program; the
// executable in tools/ only forwards argv to it, so tests drive it in-process.

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "red/defaults.hpp"
#include "red/error.hpp"
#include "red/fitting.hpp"
#include "red/ingest.hpp"
#include "red/manifest.hpp"
#include "red/metrics.hpp"
#include "red/projection.hpp"
#include "red/surface_io.hpp"
#include "red/svg.hpp"
#include "red/text.hpp"

namespace red::cli {

enum ExitCode : int {
    ok = 0,
    io_failure = 1,
    usage = 2,
    parse = 3,
    numerical = 4,
    domain = 5,
    unstable = 6,
    invalid_input = 7,
};

inline constexpr const char* kExitCodeHelp =
    "Exit status: 0 success, 1 I/O failure, 2 usage error, 3 parse error,\n"
    "4 numerical error (rank deficiency, no convergence), 5 domain error\n"
    "(out of hull, encoder/sequence mismatch, no overlapping domain),\n"
    "6 stability failure with --strict, 7 input violates a fit or metric precondition.";

namespace detail {

struct OriginFlags {
    std::vector<std::string> presets;
    std::vector<int> qualities;

    OriginRule rule() const {
        OriginRule r;
        if (presets.empty() && qualities.empty()) return r;
        if (presets.empty() || qualities.empty())
            throw InvalidArgument("--supporting-presets and --supporting-qualities must be given together");
        r.mode = OriginRule::Mode::grid;
        r.presets.insert(presets.begin(), presets.end());
        r.qualities.insert(qualities.begin(), qualities.end());
        return r;
    }

    void snapshot(nlohmann::ordered_json& j) const {
        if (presets.empty()) {
            j["origin_rule"] = "column";
        } else {
            j["origin_rule"] = "grid";
            j["supporting_presets"] = presets;
            j["supporting_qualities"] = qualities;
        }
    }
};

inline void add_origin_flags(CLI::App* cmd, OriginFlags& f) {
    cmd->add_option("--supporting-presets", f.presets, "Presets of the supporting grid (instead of an origin column)")
        ->delimiter(',');
    cmd->add_option("--supporting-qualities", f.qualities, "Quality values of the supporting grid")->delimiter(',');
}

inline std::vector<MeasurementRecord> load_records(const std::string& path, const std::string& content, char delim) {
    Schema schema;
    schema.delimiter = delim;
    std::istringstream in(content);
    try {
        return parse_measurements(in, schema);
    } catch (const ParseError& ex) {
        throw ParseError(path + ": " + ex.what());
    }
}

struct LoadedModel {
    std::string path;
    std::string content;
    Surface surface;
};

inline std::vector<LoadedModel> load_models(const std::vector<std::string>& paths) {
    std::vector<LoadedModel> out;
    for (const auto& p : paths) {
        std::string content = read_file(p);
        try {
            Surface s = parse_surface(content);
            out.push_back({p, std::move(content), std::move(s)});
        } catch (const ParseError& ex) {
            throw ParseError(p + ": " + ex.what());
        }
    }
    return out;
}

inline const PointSet& find_pointset(const std::vector<PointSet>& sets, const std::string& encoder,
                                     const std::string& sequence) {
    bool encoder_seen = false;
    for (const auto& ps : sets) {
        if (ps.encoder != encoder) continue;
        encoder_seen = true;
        if (ps.sequence == sequence) return ps;
    }
    if (!encoder_seen) throw OutOfDomain("encoder mismatch: data has no encoder '" + encoder + "'");
    throw OutOfDomain("sequence mismatch: data has no sequence '" + sequence + "' for encoder '" + encoder + "'");
}

/// Emits `content` to `path` (atomically, with a manifest sidecar) or to `out`.
struct Emitter {
    RunManifest manifest;
    std::vector<std::pair<std::string, std::string>> files;

    void add(const std::string& path, std::string content) {
        manifest.outputs.push_back(path);
        files.emplace_back(path, std::move(content));
    }

    void flush() {
        for (const auto& [path, content] : files) write_file_atomic(path, content);
        if (!files.empty())
            write_file_atomic(manifest_path_for(files.front().first), manifest.to_json().dump(2) + "\n");
    }
};

inline RunManifest start_manifest(const std::string& command, const std::vector<std::string>& argv,
                                  const std::vector<std::pair<std::string, const std::string*>>& inputs) {
    RunManifest m;
    m.command = command;
    m.argv = argv;
    std::vector<std::string> contents;
    for (const auto& [path, content] : inputs) {
        m.inputs.push_back(path);
        contents.push_back(*content);
    }
    m.input_digest = content_digest(contents);
    m.parameters["log_base"] = defaults::log_base;
    return m;
}

inline std::pair<int, int> parse_grid(const std::string& value) {
    const auto x = value.find_first_of("xX");
    if (x == std::string::npos) throw CLI::ValidationError("--grid", "expected WxH, got '" + value + "'");
    const auto w = text::parse_int(value.substr(0, x));
    const auto h = text::parse_int(value.substr(x + 1));
    if (!w || !h || *w < 2 || *h < 2 || *w > 100000 || *h > 100000)
        throw CLI::ValidationError("--grid", "expected WxH with both at least 2, got '" + value + "'");
    return {static_cast<int>(*w), static_cast<int>(*h)};
}

inline std::string num(double v) { return text::format_double(v, 12); }

}  // namespace detail

struct EnergyArgs {
    std::string input;
    std::string output;
    std::string stability_report;
    double alpha = defaults::alpha;
    double beta = defaults::beta;
    bool strict = false;
    char delimiter = ',';
    detail::OriginFlags origin;
};

inline int cmd_energy(const EnergyArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                      std::ostream& err) {
    const std::string content = read_file(a.input);
    const auto records = detail::load_records(a.input, content, a.delimiter);
    const auto summaries = summarize_configurations(records, a.origin.rule());

    std::ostringstream derived;
    derived << "sequence,encoder,preset,quality,origin,repeats,rate_kbps,psnr_db,energy_enc_mean_j\n";
    std::ostringstream stability;
    stability << "sequence,encoder,preset,quality,samples,mean_energy_j,ci_half_width_j,relative_half_width,alpha,"
                 "beta,passed\n";
    std::vector<std::string> failing;
    std::size_t checked = 0;
    for (const auto& s : summaries) {
        const std::string id = text::quote_if_needed(s.sequence, ',') + "," + text::quote_if_needed(s.encoder, ',') +
                               "," + text::quote_if_needed(s.config.preset, ',') + "," +
                               std::to_string(s.config.quality);
        derived << id << ',' << to_string(s.origin) << ',' << s.encoding_energies_j.size() << ','
                << text::format_double(s.rate_kbps) << ',' << text::format_double(s.psnr_db) << ','
                << text::format_double(s.mean_encoding_energy_j) << '\n';
        const std::string name = s.sequence + "/" + s.encoder + " " + s.config.preset + " q" +
                                 std::to_string(s.config.quality);
        if (s.encoding_energies_j.size() < 2) {
            stability << id << ',' << s.encoding_energies_j.size() << ',' << detail::num(s.mean_encoding_energy_j)
                      << ",-,-," << detail::num(a.alpha) << ',' << detail::num(a.beta) << ",skipped\n";
            continue;
        }
        ++checked;
        try {
            const auto v = validate_stability(s.encoding_energies_j, a.alpha, a.beta);
            stability << id << ',' << v.sample_count << ',' << detail::num(v.mean_energy) << ','
                      << detail::num(v.ci_half_width) << ',' << detail::num(v.relative_half_width) << ','
                      << detail::num(v.alpha) << ',' << detail::num(v.beta) << ',' << (v.passed ? "yes" : "no")
                      << '\n';
            if (!v.passed) failing.push_back(name + " (relative half-width " + detail::num(v.relative_half_width) + ")");
        } catch (const InvalidArgument& ex) {
            stability << id << ',' << s.encoding_energies_j.size() << ",-,-,-," << detail::num(a.alpha) << ','
                      << detail::num(a.beta) << ",invalid\n";
            failing.push_back(name + " (" + ex.what() + ")");
        }
    }

    auto manifest = detail::start_manifest("energy", argv, {{a.input, &content}});
    manifest.parameters["alpha"] = a.alpha;
    manifest.parameters["beta"] = a.beta;
    manifest.parameters["strict"] = a.strict;
    a.origin.snapshot(manifest.parameters);
    detail::Emitter emit{manifest, {}};
    std::string stability_path = a.stability_report;
    if (stability_path.empty() && !a.output.empty()) stability_path = a.output + ".stability.csv";
    if (a.output.empty()) out << derived.str();
    else emit.add(a.output, derived.str());
    if (stability_path.empty()) out << '\n' << stability.str();
    else emit.add(stability_path, stability.str());
    emit.flush();

    err << "energy: " << summaries.size() << " configurations, " << checked << " checked for stability, "
        << failing.size() << " unstable\n";
    for (const auto& f : failing) err << "  unstable: " << f << '\n';
    if (a.strict && !failing.empty()) return unstable;
    return ok;
}

struct FitArgs {
    std::string input;
    std::string encoder;
    std::string sequence;
    std::string method;
    std::string output;
    std::string extrapolation = "reject";
    char delimiter = ',';
    detail::OriginFlags origin;
};

inline int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv, std::ostream&, std::ostream& err) {
    const auto method = method_from_string(a.method);
    if (!method) throw InvalidArgument("unknown method '" + a.method + "'");
    const std::string content = read_file(a.input);
    const auto records = detail::load_records(a.input, content, a.delimiter);
    const auto sets = to_red_points(records, a.origin.rule());

    std::vector<const PointSet*> matches;
    std::set<std::string> sequences;
    for (const auto& ps : sets) {
        if (ps.encoder != a.encoder) continue;
        if (!a.sequence.empty() && ps.sequence != a.sequence) continue;
        matches.push_back(&ps);
        sequences.insert(ps.sequence);
    }
    if (matches.empty())
        throw OutOfDomain("no data for encoder '" + a.encoder + "'" +
                          (a.sequence.empty() ? std::string() : " and sequence '" + a.sequence + "'"));
    if (matches.size() > 1) {
        std::string list;
        for (const auto& s : sequences) list += (list.empty() ? "" : ", ") + s;
        throw InvalidArgument("encoder '" + a.encoder + "' has several sequences (" + list + "); pick one with --sequence");
    }
    const auto mode = a.extrapolation == "nearest" ? Extrapolation::nearest_simplex : Extrapolation::reject;
    const Surface surface = fit(*matches.front(), *method, mode);

    auto manifest = detail::start_manifest("fit", argv, {{a.input, &content}});
    manifest.parameters["encoder"] = a.encoder;
    manifest.parameters["sequence"] = surface.sequence;
    manifest.parameters["method"] = to_string(*method);
    manifest.parameters["extrapolation"] = a.extrapolation;
    a.origin.snapshot(manifest.parameters);
    detail::Emitter emit{manifest, {}};
    emit.add(a.output, serialize_surface(surface));
    emit.flush();
    err << "fit: " << a.encoder << "/" << surface.sequence << " " << to_string(*method) << " on "
        << matches.front()->supporting().size() << " supporting points -> " << a.output << '\n';
    return ok;
}

struct EvalArgs {
    std::string input;
    std::vector<std::string> models;
    std::string classes = "both";
    std::string output;
    char delimiter = ',';
    detail::OriginFlags origin;
};

inline int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream&) {
    const std::string content = read_file(a.input);
    const auto records = detail::load_records(a.input, content, a.delimiter);
    const auto sets = to_red_points(records, a.origin.rule());
    const auto models = detail::load_models(a.models);
    const PointClasses classes = a.classes == "s"    ? PointClasses::supporting
                                 : a.classes == "ns" ? PointClasses::non_supporting
                                                     : PointClasses::both;

    std::vector<std::pair<std::string, Method>> order;
    std::map<std::pair<std::string, Method>, std::vector<FitMetrics>> rows;
    for (const auto& m : models) {
        const auto& ps = detail::find_pointset(sets, m.surface.encoder, m.surface.sequence);
        const auto key = std::pair{m.surface.encoder, m.surface.method()};
        if (!rows.contains(key)) order.push_back(key);
        try {
            rows[key].push_back(score(m.surface, ps, classes != PointClasses::supporting));
        } catch (const Error& ex) {
            throw Error(ex.kind(), m.path + ": " + ex.what());
        }
    }
    std::vector<FitMetrics> report;
    for (const auto& key : order) report.push_back(average(rows[key]));
    std::ostringstream text_out;
    write_report(text_out, report, classes);

    std::vector<std::pair<std::string, const std::string*>> inputs{{a.input, &content}};
    for (const auto& m : models) inputs.emplace_back(m.path, &m.content);
    auto manifest = detail::start_manifest("eval", argv, inputs);
    manifest.parameters["classes"] = a.classes;
    a.origin.snapshot(manifest.parameters);
    detail::Emitter emit{manifest, {}};
    if (a.output.empty()) out << text_out.str();
    else emit.add(a.output, text_out.str());
    emit.flush();
    return ok;
}

struct ProjectArgs {
    std::vector<std::string> models;
    std::string plane = "re";
    std::string grid = "200x200";
    std::optional<double> x_min, x_max, y_min, y_max, r_min, r_max;
    double tie_tol = defaults::tie_tolerance;
    double inversion_tol = defaults::inversion_tolerance;
    std::string svg;
    std::string output;
};

inline int cmd_project(const ProjectArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                       std::ostream& err) {
    const auto [w, h] = detail::parse_grid(a.grid);
    const auto models = detail::load_models(a.models);
    std::vector<Surface> surfaces;
    for (const auto& m : models) surfaces.push_back(m.surface);
    const Plane plane = a.plane == "ed" ? Plane::ED : Plane::RE;

    AxisSpec x{0, 1, w}, y{0, 1, h};
    const bool x_given = a.x_min && a.x_max, y_given = a.y_min && a.y_max;
    if (!x_given || !y_given) {
        const Domain shared = shared_domain(surfaces);
        if (plane == Plane::RE) {
            x = {shared.r_min, shared.r_max, w};
            y = {shared.e_min, shared.e_max, h};
        } else {
            const auto [d_lo, d_hi] = distortion_range(surfaces);
            x = {shared.e_min, shared.e_max, w};
            y = {d_lo, d_hi, h};
        }
    }
    if (a.x_min) x.min = *a.x_min;
    if (a.x_max) x.max = *a.x_max;
    if (a.y_min) y.min = *a.y_min;
    if (a.y_max) y.max = *a.y_max;
    std::optional<std::pair<double, double>> r_bracket;
    if (a.r_min || a.r_max) {
        if (!(a.r_min && a.r_max)) throw InvalidArgument("--r-min and --r-max must be given together");
        r_bracket = std::pair{*a.r_min, *a.r_max};
    }

    const DominanceGrid grid = plane == Plane::RE ? sample_re_grid(surfaces, x, y, a.tie_tol)
                                                  : sample_ed_grid(surfaces, x, y, r_bracket, a.tie_tol,
                                                                   a.inversion_tol);
    std::ostringstream grid_text;
    write_grid(grid_text, grid);

    std::vector<std::pair<std::string, const std::string*>> inputs;
    for (const auto& m : models) inputs.emplace_back(m.path, &m.content);
    auto manifest = detail::start_manifest("project", argv, inputs);
    manifest.parameters["plane"] = to_string(plane);
    manifest.parameters["grid"] = {{"x", {{"min", x.min}, {"max", x.max}, {"cells", x.cells}}},
                                   {"y", {{"min", y.min}, {"max", y.max}, {"cells", y.cells}}}};
    manifest.parameters["tie_tolerance"] = a.tie_tol;
    if (plane == Plane::ED) {
        manifest.parameters["inversion_tolerance"] = a.inversion_tol;
        manifest.parameters["monotone_samples"] = defaults::monotone_samples;
        if (r_bracket) manifest.parameters["r_bracket"] = {r_bracket->first, r_bracket->second};
    }
    detail::Emitter emit{manifest, {}};
    if (a.output.empty()) out << grid_text.str();
    else emit.add(a.output, grid_text.str());
    if (!a.svg.empty()) {
        std::ostringstream svg;
        write_svg(svg, grid);
        emit.add(a.svg, svg.str());
    }
    emit.flush();

    std::map<std::string, std::size_t> counts;
    for (const auto& c : grid.cells) ++counts[grid.label(c)];
    err << "project (" << to_string(plane) << ", " << w << "x" << h << "):";
    for (const auto& [label, n] : counts) err << ' ' << label << '=' << n;
    err << '\n';
    return ok;
}

struct RecommendArgs {
    std::vector<std::string> models;
    std::string input;
    std::string plane = "re";
    double margin = defaults::margin_threshold;
    std::optional<double> r_min, r_max;
    double inversion_tol = defaults::inversion_tolerance;
    std::string output;
    char delimiter = ',';
    detail::OriginFlags origin;
};

inline int cmd_recommend(const RecommendArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                         std::ostream& err) {
    const std::string content = read_file(a.input);
    const auto records = detail::load_records(a.input, content, a.delimiter);
    const auto sets = to_red_points(records, a.origin.rule());
    const auto models = detail::load_models(a.models);

    std::set<std::string> encoders;
    std::vector<EncoderModel> pairs;
    for (const auto& m : models) {
        if (!encoders.insert(m.surface.encoder).second)
            throw InvalidArgument("more than one model for encoder '" + m.surface.encoder + "'");
        pairs.push_back({detail::find_pointset(sets, m.surface.encoder, m.surface.sequence), m.surface});
    }
    if (encoders.size() < 2) throw InvalidArgument("recommend needs models for at least 2 encoders");
    for (const auto& p : pairs)
        if (p.surface.sequence != pairs.front().surface.sequence)
            throw OutOfDomain("models span several sequences ('" + pairs.front().surface.sequence + "', '" +
                              p.surface.sequence + "'); recommend compares encoders on one sequence");

    OcclusionOptions opts;
    opts.margin_threshold = a.margin;
    opts.inversion_tol = a.inversion_tol;
    if (a.r_min || a.r_max) {
        if (!(a.r_min && a.r_max)) throw InvalidArgument("--r-min and --r-max must be given together");
        opts.r_bracket = std::pair{*a.r_min, *a.r_max};
    }
    const Plane plane = a.plane == "ed" ? Plane::ED : Plane::RE;
    const auto report = occluded_configs(pairs, plane, opts);
    std::ostringstream text_out;
    write_occlusion_report(text_out, report);

    std::vector<std::pair<std::string, const std::string*>> inputs{{a.input, &content}};
    for (const auto& m : models) inputs.emplace_back(m.path, &m.content);
    auto manifest = detail::start_manifest("recommend", argv, inputs);
    manifest.parameters["plane"] = to_string(plane);
    manifest.parameters["margin_threshold"] = a.margin;
    if (plane == Plane::ED) manifest.parameters["inversion_tolerance"] = a.inversion_tol;
    a.origin.snapshot(manifest.parameters);
    detail::Emitter emit{manifest, {}};
    if (a.output.empty()) out << text_out.str();
    else emit.add(a.output, text_out.str());
    emit.flush();

    std::map<std::string, std::size_t> per_encoder;
    for (const auto& e : report.entries) ++per_encoder[e.encoder];
    err << "recommend (" << to_string(plane) << "): " << report.entries.size() << " occluded configurations";
    for (const auto& [enc, n] : per_encoder) err << "; avoid " << n << " of " << enc;
    err << '\n';
    return ok;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr);

inline int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(manifest_path + ": not valid JSON: " + ex.what());
    }
    const auto m = RunManifest::from_json(j);
    if (!m.argv.empty() && m.argv.front() == "replay") throw InvalidArgument("a replay manifest cannot be replayed");
    return run_cli(m.argv, out, err);
}

/// Parses `args` (without the program name) and runs one command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rate-energy-distortion surface fitting and encoder dominance analysis", "red"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    const std::vector<std::string> methods{"linear", "poly-custom", "poly-mixed"};
    const std::vector<std::string> planes{"re", "ed"};

    EnergyArgs energy;
    auto* c_energy = app.add_subcommand("energy", "Derive encoding energy per configuration and check repeat stability");
    c_energy->add_option("--input,-i", energy.input, "Measurement CSV")->required()->check(CLI::ExistingFile);
    c_energy->add_option("--output,-o", energy.output, "Derived-energy CSV (default stdout)");
    c_energy->add_option("--stability-report", energy.stability_report,
                         "Stability CSV (default <output>.stability.csv)");
    c_energy->add_option("--alpha", energy.alpha, "Significance level of the confidence interval")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    c_energy->add_option("--beta", energy.beta, "Maximum relative half-width")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    c_energy->add_flag("--strict", energy.strict, "Exit with status 6 when any configuration is unstable");
    c_energy->add_option("--delimiter", energy.delimiter, "Input field delimiter");
    detail::add_origin_flags(c_energy, energy.origin);

    FitArgs fit_args;
    auto* c_fit = app.add_subcommand("fit", "Fit one encoder's R-E-D surface and write a model file");
    c_fit->add_option("--method,-m", fit_args.method, "linear | poly-custom | poly-mixed")
        ->required()
        ->check(CLI::IsMember(methods));
    c_fit->add_option("--input,-i", fit_args.input, "Measurement CSV")->required()->check(CLI::ExistingFile);
    c_fit->add_option("--encoder,-e", fit_args.encoder, "Encoder id")->required();
    c_fit->add_option("--sequence,-s", fit_args.sequence, "Sequence name (required when the data has several)");
    c_fit->add_option("--output,-o", fit_args.output, "Model file (JSON)")->required();
    c_fit->add_option("--extrapolation", fit_args.extrapolation, "Linear surfaces outside the hull: reject | nearest")
        ->check(CLI::IsMember({"reject", "nearest"}));
    c_fit->add_option("--delimiter", fit_args.delimiter, "Input field delimiter");
    detail::add_origin_flags(c_fit, fit_args.origin);

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Score models against measurement data (MAPE, SSE, R-square)");
    c_eval->add_option("--models", eval.models, "Model files")->required()->delimiter(',')->check(CLI::ExistingFile);
    c_eval->add_option("--input,-i", eval.input, "Measurement CSV")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--classes", eval.classes, "Point classes for MAPE: s | ns | both")
        ->check(CLI::IsMember({"s", "ns", "both"}));
    c_eval->add_option("--output,-o", eval.output, "Report CSV (default stdout)");
    c_eval->add_option("--delimiter", eval.delimiter, "Input field delimiter");
    detail::add_origin_flags(c_eval, eval.origin);

    ProjectArgs project;
    auto* c_project = app.add_subcommand("project", "Rasterize an R-E or E-D dominance grid");
    c_project->add_option("--models", project.models, "Model files")->required()->delimiter(',')->check(
        CLI::ExistingFile);
    c_project->add_option("--plane", project.plane, "re | ed")->check(CLI::IsMember(planes));
    c_project->add_option("--grid", project.grid, "Cells as WxH (default 200x200)");
    c_project->add_option("--x-min", project.x_min, "Lower bound of the horizontal axis (r for re, e for ed)");
    c_project->add_option("--x-max", project.x_max, "Upper bound of the horizontal axis");
    c_project->add_option("--y-min", project.y_min, "Lower bound of the vertical axis (e for re, d for ed)");
    c_project->add_option("--y-max", project.y_max, "Upper bound of the vertical axis");
    c_project->add_option("--r-min", project.r_min, "Lower log-rate bound for ed inversions");
    c_project->add_option("--r-max", project.r_max, "Upper log-rate bound for ed inversions");
    c_project->add_option("--tie-tol", project.tie_tol, "Tie tolerance (dB for re, log-rate for ed)")
        ->check(CLI::NonNegativeNumber);
    c_project->add_option("--inversion-tol", project.inversion_tol, "Inversion tolerance in dB")
        ->check(CLI::PositiveNumber);
    c_project->add_option("--svg", project.svg, "Also write an SVG heatmap");
    c_project->add_option("--output,-o", project.output, "Grid CSV (default stdout)");

    RecommendArgs rec;
    auto* c_rec = app.add_subcommand("recommend", "List occluded (dominated) encoder configurations");
    c_rec->add_option("--models", rec.models, "Model files, one per encoder")->required()->delimiter(',')->check(
        CLI::ExistingFile);
    c_rec->add_option("--input,-i", rec.input, "Measurement CSV with the supporting points")
        ->required()
        ->check(CLI::ExistingFile);
    c_rec->add_option("--plane", rec.plane, "re | ed")->check(CLI::IsMember(planes));
    c_rec->add_option("--margin", rec.margin, "Minimum dominance margin (dB for re, log-rate for ed)")
        ->check(CLI::NonNegativeNumber);
    c_rec->add_option("--r-min", rec.r_min, "Lower log-rate bound for ed inversions");
    c_rec->add_option("--r-max", rec.r_max, "Upper log-rate bound for ed inversions");
    c_rec->add_option("--inversion-tol", rec.inversion_tol, "Inversion tolerance in dB")->check(CLI::PositiveNumber);
    c_rec->add_option("--output,-o", rec.output, "Report CSV (default stdout)");
    c_rec->add_option("--delimiter", rec.delimiter, "Input field delimiter");
    detail::add_origin_flags(c_rec, rec.origin);

    std::string manifest_path;
    auto* c_replay = app.add_subcommand("replay", "Re-run the command recorded in a run manifest");
    c_replay->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage;
    }

    try {
        if (*c_energy) return cmd_energy(energy, args, out, err);
        if (*c_fit) return cmd_fit(fit_args, args, out, err);
        if (*c_eval) return cmd_eval(eval, args, out, err);
        if (*c_project) return cmd_project(project, args, out, err);
        if (*c_rec) return cmd_recommend(rec, args, out, err);
        if (*c_replay) return cmd_replay(manifest_path, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "red: " << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        err << "red: " << e.what() << '\n';
        switch (e.kind()) {
            case ErrorKind::parse: return parse;
            case ErrorKind::numerical: return numerical;
            case ErrorKind::domain: return domain;
            case ErrorKind::invalid_argument: return invalid_input;
        }
    } catch (const std::exception& e) {
        err << "red: " << e.what() << '\n';
        return io_failure;
    }
    return usage;
}

}  // namespace red::cli
