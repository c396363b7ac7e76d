// Acceptance runner: one PASS/FAIL line per criterion, with wall time
// against the criterion's budget. Usage: red_acceptance <path to red binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "red/manifest.hpp"
#include "red/red.hpp"
#include "synthetic.hpp"

using namespace red;
namespace fs = std::filesystem;

namespace {

std::string g_red_binary;

// Collects the first few failure messages of a criterion.
struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (notes.size() < 5) notes.push_back(what);
    }
};

std::string fmt(double v) { return text::format_double(v, 6); }

// --- 1 ---------------------------------------------------------------------
Check linear_exactness() {
    Check c;
    std::ifstream in(std::string(RED_DATA_DIR) + "/sample_red.csv");
    const auto sets = to_red_points(parse_measurements(in), OriginRule{});
    c.expect(sets.size() == 2, "bundled sample should hold 2 point sets");
    for (const auto& ps : sets) {
        const auto s = ps.supporting();
        c.expect(s.size() == 20, ps.encoder + ": expected 20 supporting points");
        const double m = mape(fit_linear(s), s);
        c.expect(m <= 1e-7, ps.encoder + ": supporting MAPE " + fmt(m));
    }
    std::mt19937_64 rng(101);
    for (int i = 0; i < 100; ++i) {
        const auto ps = synthetic::noisy_set(rng);
        const double m = mape(fit_linear(ps.points), ps.points);
        c.expect(m <= 1e-7, "random set " + std::to_string(i) + ": MAPE " + fmt(m));
    }
    return c;
}

// --- 2 ---------------------------------------------------------------------
Check model_nesting() {
    Check c;
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> r(6.0, 10.0), e(2.0, 7.0), d(25.0, 45.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<RedPoint> pts(20);
        for (auto& p : pts) p = RedPoint{r(rng), e(rng), d(rng)};
        const double custom = sse(fit_poly_custom(pts), pts);
        const double mixed = sse(fit_poly_mixed(pts), pts);
        c.expect(mixed <= custom * (1 + 1e-9),
                 "set " + std::to_string(i) + ": mixed " + fmt(mixed) + " > custom " + fmt(custom));
    }
    return c;
}

// --- 3 ---------------------------------------------------------------------
Check coefficient_recovery() {
    Check c;
    std::mt19937_64 rng(303);
    const std::vector<std::vector<double>> truths{
        {12.0, 0.05, -0.9, 6.0, -0.15, 1.8},
        {5.0, 2.0, 1.5, -0.2, 0.3, -0.25, 0.01, -0.02, 0.015},
    };
    for (const auto& q : truths) {
        const auto ps = synthetic::make_set(synthetic::grid_locations(rng),
                                            [&](double r, double e) { return oracle::poly_value(q, r, e); });
        const auto s = q.size() == 6 ? fit_poly_custom(ps.points) : fit_poly_mixed(ps.points);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double rel = std::abs(s.coefficients()[i] - q[i]) / std::abs(q[i]);
            c.expect(rel <= 1e-6, std::to_string(q.size()) + "-term p" + std::to_string(i) + " relative error " +
                                      fmt(rel));
        }
        const double m = mape(s, ps.points);
        c.expect(m <= 1e-6, std::to_string(q.size()) + "-term MAPE " + fmt(m));
    }
    return c;
}

// --- 4 ---------------------------------------------------------------------
Check mape_oracle() {
    Check c;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), r(6.0, 10.0), e(2.0, 7.0);
    std::uniform_int_distribution<int> count(1, 40);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> p(i % 2 ? 9 : 6);
        for (auto& v : p) v = coef(rng) * 0.05;
        p[0] = 35.0;
        const PolySurface s(i % 2 ? Basis::mixed9 : Basis::custom6, p, Domain{6, 10, 2, 7});
        std::vector<RedPoint> pts(count(rng));
        std::vector<double> fitted, actual;
        for (auto& pt : pts) {
            pt.r = r(rng);
            pt.e = e(rng);
            pt.d = 30.0 + 10.0 * coef(rng);
            fitted.push_back(oracle::poly_value(p, pt.r, pt.e));
            actual.push_back(pt.d);
        }
        const double ours = mape(s, pts);
        const double naive = oracle::naive_mape(fitted, actual);
        c.expect(std::abs(ours - naive) <= 1e-12 * std::abs(naive),
                 "combination " + std::to_string(i) + ": " + fmt(ours) + " vs " + fmt(naive));
    }
    return c;
}

// --- 5 ---------------------------------------------------------------------
Check affine_exactness() {
    Check c;
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> coef(-5.0, 5.0), r(6.0, 10.0), e(2.0, 7.0);
    const double a = coef(rng), b = coef(rng), k = 100.0 + coef(rng);  // keeps d positive
    auto plane = [&](double x, double y) { return a * x + b * y + k; };
    const auto ps = synthetic::make_set(synthetic::grid_locations(rng), plane);
    const auto s = fit_linear(ps.points);
    int queries = 0;
    while (queries < 1000) {
        const double x = r(rng), y = e(rng);
        if (!s.in_hull(x, y)) continue;
        ++queries;
        const double want = plane(x, y);
        const double err = std::abs(eval_surface(s, x, y) - want);
        c.expect(err <= 1e-9 * std::max(1.0, std::abs(want)), "query (" + fmt(x) + ", " + fmt(y) + ") error " + fmt(err));
    }
    return c;
}

// --- 6 ---------------------------------------------------------------------
Check inversion_soundness() {
    Check c;
    const Domain dom{0, 10, 0, 5};
    const auto cube = fixtures::poly("cube", Basis::mixed9, {0, 0, 0, 0, 0, 0, 1, 0, 0}, dom);
    const double root = invert_rate(cube, 1.0, 8.0, 0.0, 3.0);
    c.expect(std::abs(root - 2.0) <= 1e-8, "cube root returned " + text::format_double(root));

    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        // d = c0 + a r + b e + k r^3 + m r e^2 with a, k, m >= 0 rises in r for r >= 0.
        const std::vector<double> p{20 + 10 * u(rng), 0.5 + u(rng), u(rng), 0, 0, 0, 0.02 * u(rng), 0, 0.05 * u(rng)};
        const auto s = fixtures::poly("m", Basis::mixed9, p, dom);
        const double e = 5.0 * u(rng);
        const double lo = eval_surface(s, 0.0, e), hi = eval_surface(s, 10.0, e);
        const double target = lo + (hi - lo) * u(rng);
        try {
            const double r = invert_rate(s, e, target, 0.0, 10.0);
            const double resid = std::abs(eval_surface(s, r, e) - target);
            c.expect(resid <= 1e-8, "case " + std::to_string(i) + ": residual " + fmt(resid));
        } catch (const Error& ex) {
            c.expect(false, "case " + std::to_string(i) + ": " + ex.what());
        }
    }
    return c;
}

// --- 7 ---------------------------------------------------------------------
Check dominance_grid() {
    Check c;
    const Domain unit{0, 1, 0, 1};
    const std::vector<Surface> s{fixtures::plane("by_rate", 0, 1, 0, unit), fixtures::plane("by_energy", 0, 0, 1, unit)};
    const double tol = defaults::tie_tolerance;
    const AxisSpec axis{0, 1, 200};
    const auto g = sample_re_grid(s, axis, axis, tol);
    for (int iy = 0; iy < 200; ++iy)
        for (int ix = 0; ix < 200; ++ix) {
            const Cell& cell = g.at(ix, iy);
            const double r = axis.center(ix), e = axis.center(iy);
            const std::string where = "cell (" + std::to_string(ix) + ", " + std::to_string(iy) + ")";
            if (std::abs(r - e) > axis.width()) {
                c.expect(cell.outcome == CellOutcome::winner && cell.winner == (r > e ? 0 : 1),
                         where + " has the wrong winner");
            }
            if (cell.outcome == CellOutcome::winner) {
                const double mine = eval_surface(s[cell.winner], r, e);
                const double other = eval_surface(s[1 - cell.winner], r, e);
                c.expect(mine == cell.value && mine - other > tol, where + " winner not confirmed");
            } else {
                c.expect(cell.outcome == CellOutcome::tie && std::abs(r - e) <= tol, where + " unexpected tie");
            }
        }
    return c;
}

// --- 8 ---------------------------------------------------------------------
Check occlusion_fidelity() {
    Check c;
    const auto models = fixtures::three_encoders();
    const auto report = occluded_configs(models, Plane::RE);

    // Brute force: every supporting config against every other encoder.
    std::map<std::pair<std::string, Config>, std::pair<std::string, double>> expected;
    for (const auto& x : models)
        for (const auto& p : x.points.supporting())
            for (const auto& y : models) {
                if (&x == &y || !covers(y.surface, p.r, p.e)) continue;
                const double margin = eval_surface(y.surface, p.r, p.e) - p.d;
                auto key = std::pair{x.points.encoder, p.config};
                if (margin > 0 && (!expected.contains(key) || margin > expected[key].second))
                    expected[key] = {y.surface.encoder, margin};
            }
    const std::set<std::pair<std::string, Config>> constructed{{"x264", Config{"veryslow", 23}},
                                                               {"x264", Config{"veryslow", 18}}};
    std::set<std::pair<std::string, Config>> brute_keys, reported_keys;
    for (const auto& [k, v] : expected) brute_keys.insert(k);
    c.expect(brute_keys == constructed, "brute force does not match the constructed configs");
    c.expect(report.entries.size() == constructed.size(),
             "report has " + std::to_string(report.entries.size()) + " entries");
    for (const auto& entry : report.entries) {
        const auto key = std::pair{entry.encoder, entry.config};
        reported_keys.insert(key);
        const auto it = expected.find(key);
        c.expect(it != expected.end(), "unexpected entry " + entry.encoder + " " + entry.config.preset);
        if (it == expected.end()) continue;
        c.expect(entry.occluding_encoder == it->second.first, "wrong occluder for " + entry.config.preset);
        c.expect(entry.margin == it->second.second, "margin " + fmt(entry.margin) + " vs " + fmt(it->second.second));
        c.expect(std::abs(entry.margin - 1.0) <= 1e-9, "margin " + fmt(entry.margin) + " should be 1 dB");
    }
    c.expect(reported_keys == constructed, "reported configs differ from the constructed ones");
    return c;
}

// --- 9 ---------------------------------------------------------------------
int run_red(const std::vector<std::string>& args, const fs::path& log) {
    std::string cmd = "\"" + g_red_binary + "\"";
    for (const auto& a : args) cmd += " \"" + a + "\"";
    cmd += " >>\"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(text::split_line(line, ','));
    return rows;
}

bool header_is(const std::string& text, const std::string& header) {
    return text.substr(0, text.find('\n')) == header;
}

Check end_to_end_cli() {
    Check c;
    if (g_red_binary.empty() || !fs::exists(g_red_binary)) {
        c.expect(false, "red binary not found; pass its path as the first argument");
        return c;
    }
    const fs::path dir = fs::temp_directory_path() / "red_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "log.txt";
    const std::string sample = std::string(RED_DATA_DIR) + "/sample_red.csv";
    auto at = [&](const std::string& name) { return (dir / name).string(); };

    const std::vector<std::vector<std::string>> steps{
        {"energy", "-i", sample, "-o", at("derived.csv")},
        {"fit", "-i", sample, "-e", "x264", "-m", "linear", "-o", at("x264_linear.json")},
        {"fit", "-i", sample, "-e", "x265", "-m", "linear", "-o", at("x265_linear.json")},
        {"fit", "-i", sample, "-e", "x264", "-m", "poly-custom", "-o", at("x264_custom.json")},
        {"fit", "-i", sample, "-e", "x265", "-m", "poly-custom", "-o", at("x265_custom.json")},
        {"fit", "-i", sample, "-e", "x264", "-m", "poly-mixed", "-o", at("x264_mixed.json")},
        {"fit", "-i", sample, "-e", "x265", "-m", "poly-mixed", "-o", at("x265_mixed.json")},
        {"eval", "-i", sample, "-o", at("eval.csv"), "--models",
         at("x264_linear.json") + "," + at("x264_custom.json") + "," + at("x264_mixed.json") + "," +
             at("x265_linear.json") + "," + at("x265_custom.json") + "," + at("x265_mixed.json")},
        {"project", "--models", at("x264_linear.json") + "," + at("x265_linear.json"), "--plane", "re", "-o",
         at("grid_re.csv"), "--svg", at("grid_re.svg")},
        {"project", "--models", at("x264_linear.json") + "," + at("x265_linear.json"), "--plane", "ed", "-o",
         at("grid_ed.csv")},
        {"recommend", "-i", sample, "--models", at("x264_linear.json") + "," + at("x265_linear.json"), "-o",
         at("recommend.csv")},
    };

    std::map<std::string, std::string> first;
    for (int round = 0; round < 2; ++round) {
        for (const auto& step : steps) {
            const int code = run_red(step, log);
            c.expect(code == 0, "round " + std::to_string(round + 1) + ": '" + step[0] + "' exited " +
                                    std::to_string(code) + " (see " + log.string() + ")");
        }
        std::map<std::string, std::string> outputs;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().filename() != "log.txt")
                outputs[entry.path().filename().string()] = read_file(entry.path().string());
        if (round == 0) {
            first = outputs;
            continue;
        }
        c.expect(outputs.size() == first.size(), "second run produced a different file set");
        for (const auto& [name, bytes] : outputs)
            c.expect(first.count(name) && first[name] == bytes, name + " differs between runs");
    }
    if (!c.ok) return c;

    // Schemas.
    c.expect(header_is(first["derived.csv"],
                       "sequence,encoder,preset,quality,origin,repeats,rate_kbps,psnr_db,energy_enc_mean_j"),
             "derived.csv header");
    c.expect(csv_rows(first["derived.csv"]).size() == 89, "derived.csv should have 88 configurations");
    c.expect(header_is(first["derived.csv.stability.csv"],
                       "sequence,encoder,preset,quality,samples,mean_energy_j,ci_half_width_j,relative_half_width,"
                       "alpha,beta,passed"),
             "stability header");
    for (const std::string enc : {"x264", "x265"}) {
        const auto lin = nlohmann::json::parse(first[enc + "_linear.json"]);
        c.expect(lin["format_version"] == 1 && lin["kind"] == "linear" && lin["vertices"].size() == 20 &&
                     lin["vertex_distortions"].size() == 20 && lin.contains("fit_domain"),
                 enc + " linear model schema");
        std::vector<numerics::Point2> pts;
        for (const auto& v : lin["vertices"]) pts.push_back({v[0].get<double>(), v[1].get<double>()});
        const std::size_t hull = delaunay_triangulate(pts).hull().size();
        c.expect(lin["triangles"].size() == 2 * 20 - 2 - hull, enc + " triangle count breaks the Euler relation");
        c.expect(nlohmann::json::parse(first[enc + "_custom.json"])["coefficients"].size() == 6, enc + " custom6");
        c.expect(nlohmann::json::parse(first[enc + "_mixed.json"])["coefficients"].size() == 9, enc + " mixed9");
        c.expect(first.count(enc + "_mixed.json.manifest.json") == 1, enc + " manifest missing");
    }
    const auto eval = csv_rows(first["eval.csv"]);
    c.expect(header_is(first["eval.csv"],
                       "encoder,method,mape_supporting_pct,mape_non_supporting_pct,sse,r_square,n_s,n_ns"),
             "eval header");
    c.expect(eval.size() == 7, "eval should have 6 rows");
    for (std::size_t i = 1; i < eval.size(); ++i) {
        if (eval[i][1] == "linear") c.expect(eval[i][2] == "0", "linear supporting MAPE not 0");
        if (eval[i][1] == "poly_mixed")
            c.expect(std::stod(eval[i][4]) <= std::stod(eval[i - 1][4]) * (1 + 1e-9), "mixed sse above custom");
    }
    for (const std::string g : {"grid_re.csv", "grid_ed.csv"}) {
        c.expect(header_is(first[g], "x_center,y_center,outcome,winning_value"), g + " header");
        const auto rows = csv_rows(first[g]);
        c.expect(rows.size() == 1 + 200 * 200, g + " should have 200x200 cells");
        for (std::size_t i = 1; i < rows.size() && c.ok; ++i)
            c.expect(rows[i].size() == 4 && (rows[i][2] == "x264" || rows[i][2] == "x265" || rows[i][2] == "tie" ||
                                             rows[i][2] == "out_of_domain"),
                     g + " bad row " + std::to_string(i));
    }
    c.expect(first["grid_re.svg"].find("</svg>") != std::string::npos, "svg incomplete");
    c.expect(header_is(first["recommend.csv"], "encoder,preset,quality,occluding_encoder,margin_db"),
             "recommend header");
    fs::remove_all(dir);
    return c;
}

// --- 10 --------------------------------------------------------------------
Check stability() {
    Check c;
    const std::vector<double> same(5, 123.456);
    c.expect(validate_stability(same).passed, "identical repeats should pass");
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> mean(10.0, 500.0), spread(0.0, 0.05), log_scale(-6.0, 6.0);
    std::uniform_int_distribution<int> n(2, 12);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double m = mean(rng), s = spread(rng);
        std::vector<double> x(n(rng)), y;
        for (auto& v : x) v = m * (1.0 + s * noise(rng));
        const double k = std::pow(10.0, log_scale(rng));
        for (double v : x) y.push_back(k * v);
        const auto a = validate_stability(x), b = validate_stability(y);
        c.expect(a.passed == b.passed, "set " + std::to_string(i) + ": verdict changed under scaling");
        c.expect(std::abs(a.relative_half_width - b.relative_half_width) <= 1e-12 * std::max(1.0, a.relative_half_width),
                 "set " + std::to_string(i) + ": relative half-width " + fmt(a.relative_half_width) + " vs " +
                     fmt(b.relative_half_width));
    }
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_red_binary = argv[1];
    const std::vector<Criterion> criteria{
        {1, "linear surfaces reproduce their supporting points", 1.0, linear_exactness},
        {2, "mixed basis never fits worse than custom basis", 5.0, model_nesting},
        {3, "known polynomial coefficients are recovered", 1.0, coefficient_recovery},
        {4, "MAPE matches naive accumulation", 5.0, mape_oracle},
        {5, "linear surfaces reproduce planes", 1.0, affine_exactness},
        {6, "rate inversion meets its tolerance", 1.0, inversion_soundness},
        {7, "dominance grid boundary and winners", 5.0, dominance_grid},
        {8, "occlusion report matches brute force", 1.0, occlusion_fidelity},
        {9, "end-to-end CLI pipeline is deterministic", 10.0, end_to_end_cli},
        {10, "stability verdict is scale invariant", 1.0, stability},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check result;
        try {
            result = cr.run();
        } catch (const std::exception& ex) {
            result.expect(false, std::string("exception: ") + ex.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budget_s) result.expect(false, "took " + fmt(secs) + " s, budget " + fmt(cr.budget_s) + " s");
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.3f s / %.0f s", secs, cr.budget_s);
        std::cout << (result.ok ? "PASS" : "FAIL") << " [" << cr.id << "] " << cr.name << " (" << timing << ")\n";
        for (const auto& note : result.notes) std::cout << "       " << note << '\n';
        if (!result.ok) ++failed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
