#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "red/cli/commands.hpp"

using namespace red;
namespace fs = std::filesystem;

namespace {

const std::string kSample = std::string(RED_DATA_DIR) + "/sample_red.csv";
const std::string kRepeats = std::string(RED_DATA_DIR) + "/sample_repeats.csv";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("red_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream(dir / name, std::ios::binary) << content;
    }

    std::string fit_model(const std::string& encoder, const std::string& method, const std::string& input = kSample) {
        const std::string out = path(encoder + "_" + method + ".json");
        const auto r = run({"fit", "-i", input, "-e", encoder, "-m", method, "-o", out});
        EXPECT_EQ(r.code, 0) << r.err;
        return out;
    }

    fs::path dir;
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(text::split_line(line, ','));
    return rows;
}

}  // namespace

TEST_F(Cli, EnergyDerivesEncodingEnergy) {
    write("one.csv",
          "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,psnr_db\n"
          "S,x264,fast,23,1000,100,40,38\n");
    const auto r = run({"energy", "-i", path("one.csv"), "-o", path("derived.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(slurp(path("derived.csv")));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].back(), "energy_enc_mean_j");
    EXPECT_EQ(rows[1].back(), "60");
    const auto stab = csv_rows(slurp(path("derived.csv.stability.csv")));
    EXPECT_EQ(stab[1].back(), "skipped");
    EXPECT_TRUE(fs::exists(path("derived.csv.manifest.json")));
}

TEST_F(Cli, EnergyIdenticalRepeatsPass) {
    std::string csv = "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,psnr_db,repeat\n";
    for (int k = 0; k < 4; ++k) csv += "S,x264,fast,23,1000,100,40,38," + std::to_string(k) + "\n";
    write("same.csv", csv);
    const auto r = run({"energy", "-i", path("same.csv"), "-o", path("d.csv"), "--strict"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_rows(slurp(path("d.csv.stability.csv")))[1].back(), "yes");
}

TEST_F(Cli, EnergyStrictNamesUnstableConfig) {
    const auto lax = run({"energy", "-i", kRepeats, "-o", path("d.csv")});
    EXPECT_EQ(lax.code, 0);
    const auto strict = run({"energy", "-i", kRepeats, "-o", path("d.csv"), "--strict"});
    EXPECT_EQ(strict.code, cli::unstable);
    EXPECT_NE(strict.err.find("slow q28"), std::string::npos) << strict.err;
}

TEST_F(Cli, ParseErrorHasOwnExitCode) {
    write("bad.csv", "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,psnr_db\n"
                     "S,x264,fast,23,-5,100,40,38\n");
    const auto r = run({"energy", "-i", path("bad.csv")});
    EXPECT_EQ(r.code, cli::parse);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Cli, FitLinearModelShape) {
    const auto model = fit_model("x264", "linear");
    const auto j = nlohmann::json::parse(slurp(model));
    EXPECT_EQ(j["format_version"], 1);
    EXPECT_EQ(j["kind"], "linear");
    EXPECT_EQ(j["vertices"].size(), 20u);
    // Triangle count from the Euler relation: 2n - 2 - h.
    std::vector<numerics::Point2> pts;
    for (const auto& v : j["vertices"]) pts.push_back({v[0].get<double>(), v[1].get<double>()});
    std::size_t hull = delaunay_triangulate(pts).hull().size();
    EXPECT_EQ(j["triangles"].size(), 2 * 20 - 2 - hull);
    EXPECT_TRUE(fs::exists(model + ".manifest.json"));
}

TEST_F(Cli, FitPolyMixedHasNineCoefficients) {
    const auto j = nlohmann::json::parse(slurp(fit_model("x265", "poly-mixed")));
    EXPECT_EQ(j["kind"], "poly_mixed");
    EXPECT_EQ(j["coefficients"].size(), 9u);
}

TEST_F(Cli, UnknownMethodIsUsageErrorBeforeInput) {
    const auto r = run({"fit", "-i", path("does_not_exist.csv"), "-e", "x264", "-m", "spline", "-o", path("m.json")});
    EXPECT_EQ(r.code, cli::usage);
    EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(Cli, FitUnknownEncoderIsDomainError) {
    const auto r = run({"fit", "-i", kSample, "-e", "vvenc", "-m", "linear", "-o", path("m.json")});
    EXPECT_EQ(r.code, cli::domain);
}

TEST_F(Cli, FitIsDeterministic) {
    const auto a = slurp(fit_model("x264", "poly-custom"));
    const auto b = slurp(fit_model("x264", "poly-custom"));
    EXPECT_EQ(a, b);
}

TEST_F(Cli, EvalLinearSupportingIsZero) {
    const auto m = fit_model("x264", "linear");
    const auto r = run({"eval", "-i", kSample, "--models", m, "--classes", "s"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][2], "mape_supporting_pct");
    EXPECT_EQ(rows[1][2], "0");
    EXPECT_EQ(rows[1][3], "-");
}

TEST_F(Cli, EvalWithoutNonSupportingRowsPrintsDash) {
    std::istringstream in(slurp(kSample));
    std::string line, only_s;
    std::getline(in, line);
    only_s = line + "\n";
    while (std::getline(in, line))
        if (line.find(",ns") == std::string::npos) only_s += line + "\n";
    write("s_only.csv", only_s);
    const auto m = fit_model("x264", "linear", path("s_only.csv"));
    const auto r = run({"eval", "-i", path("s_only.csv"), "--models", m, "--classes", "both"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_rows(r.out)[1][3], "-");
}

TEST_F(Cli, EvalNestingAndMismatch) {
    const auto custom = fit_model("x264", "poly-custom");
    const auto mixed = fit_model("x264", "poly-mixed");
    const auto r = run({"eval", "-i", kSample, "--models", custom + "," + mixed});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][1], "poly_custom");
    EXPECT_LE(std::stod(rows[2][4]), std::stod(rows[1][4]) * (1 + 1e-9));

    write("other.csv", "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,psnr_db\n"
                       "S,x264,fast,23,1000,100,40,38\n");
    EXPECT_EQ(run({"eval", "-i", path("other.csv"), "--models", custom}).code, cli::domain);
}

TEST_F(Cli, ProjectSingleModelAndSvg) {
    const auto m = fit_model("x264", "linear");
    const auto r = run({"project", "--models", m, "--plane", "re", "--grid", "12x9", "-o", path("g.csv"), "--svg",
                        path("g.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(slurp(path("g.csv")));
    ASSERT_EQ(rows.size(), 1u + 12 * 9);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x_center", "y_center", "outcome", "winning_value"}));
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_TRUE(rows[i][2] == "x264" || rows[i][2] == "out_of_domain") << rows[i][2];
    const std::string svg = slurp(path("g.svg"));
    EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
    EXPECT_NE(svg.find("x264"), std::string::npos);
}

TEST_F(Cli, ProjectRefinementPreservesCoarseCenters) {
    const auto a = fit_model("x264", "poly-mixed");
    const auto b = fit_model("x265", "poly-mixed");
    const auto bounds = std::vector<std::string>{"--x-min", "7", "--x-max", "9", "--y-min", "4", "--y-max", "7"};
    auto args = std::vector<std::string>{"project", "--models", a + "," + b, "--grid", "10x10", "-o", path("c.csv")};
    args.insert(args.end(), bounds.begin(), bounds.end());
    ASSERT_EQ(run(args).code, 0);
    args[4] = "30x30";
    args[6] = path("f.csv");
    ASSERT_EQ(run(args).code, 0);
    const auto coarse = csv_rows(slurp(path("c.csv")));
    const auto fine = csv_rows(slurp(path("f.csv")));
    for (int iy = 0; iy < 10; ++iy)
        for (int ix = 0; ix < 10; ++ix)
            EXPECT_EQ(coarse[1 + iy * 10 + ix][2], fine[1 + (3 * iy + 1) * 30 + 3 * ix + 1][2]);
}

TEST_F(Cli, ProjectDisjointDomainsNeedBounds) {
    write("a.csv", "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,psnr_db\n"
                   "S,a,p1,1,10,12,1,30\nS,a,p1,2,20,12,1,31\nS,a,p2,1,10,23,1,32\n"
                   "S,b,p1,1,1000,1200,1,30\nS,b,p1,2,2000,1200,1,31\nS,b,p2,1,1000,2300,1,32\n");
    const auto a = fit_model("a", "linear", path("a.csv"));
    const auto b = fit_model("b", "linear", path("a.csv"));
    const auto r = run({"project", "--models", a + "," + b, "--grid", "4x4"});
    EXPECT_EQ(r.code, cli::domain);
    EXPECT_NE(r.err.find("explicit axis bounds"), std::string::npos) << r.err;
    const auto rec = run({"recommend", "-i", path("a.csv"), "--models", a + "," + b});
    ASSERT_EQ(rec.code, 0) << rec.err;
    EXPECT_EQ(rec.out, "encoder,preset,quality,occluding_encoder,margin_db\n");
}

TEST_F(Cli, RecommendNeedsTwoEncoders) {
    const auto a = fit_model("x264", "linear");
    EXPECT_EQ(run({"recommend", "-i", kSample, "--models", a}).code, cli::invalid_input);
}

TEST_F(Cli, RecommendFindsSlowX264Configs) {
    const auto a = fit_model("x264", "linear");
    const auto b = fit_model("x265", "linear");
    const auto r = run({"recommend", "-i", kSample, "--models", a + "," + b, "-o", path("rec.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(slurp(path("rec.csv")));
    ASSERT_GT(rows.size(), 1u);
    double prev = 1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][0], "x264");
        EXPECT_EQ(rows[i][3], "x265");
        const double margin = std::stod(rows[i][4]);
        EXPECT_GT(margin, 0.0);
        EXPECT_LE(margin, prev);
        prev = margin;
    }
}

TEST_F(Cli, ManifestReplayReproducesOutput) {
    const auto a = fit_model("x264", "poly-mixed");
    const auto b = fit_model("x265", "poly-mixed");
    ASSERT_EQ(run({"project", "--models", a + "," + b, "--plane", "ed", "--grid", "16x16", "-o", path("ed.csv")}).code,
              0);
    const std::string first = slurp(path("ed.csv"));
    const auto manifest = nlohmann::json::parse(slurp(path("ed.csv.manifest.json")));
    EXPECT_EQ(manifest["command"], "project");
    EXPECT_EQ(manifest["tool_version"], kToolVersion);
    EXPECT_EQ(manifest["parameters"]["plane"], "ed");
    EXPECT_EQ(manifest["inputs"].size(), 2u);
    EXPECT_EQ(manifest["input_digest"].get<std::string>().rfind("fnv1a64:", 0), 0u);
    fs::remove(path("ed.csv"));
    const auto r = run({"replay", path("ed.csv.manifest.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("ed.csv")), first);
}

TEST_F(Cli, HelpListsExitCodes) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("6 stability failure"), std::string::npos);
    EXPECT_EQ(run({}).code, cli::usage);
    EXPECT_EQ(run({"project", "--models", kSample, "--plane", "xy"}).code, cli::usage);
}
