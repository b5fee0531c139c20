#include <sys/wait.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path workspace(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ebr_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const std::string cmd = std::string("\"") + EBR_CLI_PATH + "\" " + args + " > " +
                            out.string() + " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(out);
    return r;
}

void write_scene(const fs::path& path) {
    std::ofstream f(path);
    f << R"({
  "width": 32, "height": 32,
  "pattern": {"type": "checkerboard", "size": 8},
  "levels": {"dark": 20, "bright": 220},
  "trajectory": {"type": "linear", "vx": 100.0, "vy": 0.0},
  "duration": 0.1, "exposure": 0.02, "seed": 3
})";
}

std::size_t count_frames(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".pgm") ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate, threshold, binarize, metrics and video round trip") {
    const fs::path dir = workspace("pipeline");
    write_scene(dir / "scene.json");
    const std::string sim_dir = (dir / "sim").string();

    CliResult sim = run_cli("simulate --spec " + (dir / "scene.json").string() +
                                " --out " + sim_dir,
                            dir);
    REQUIRE(sim.code == 0);
    REQUIRE(fs::exists(dir / "sim" / "events.csv"));
    REQUIRE(fs::exists(dir / "sim" / "blurry.pgm"));
    REQUIRE(fs::exists(dir / "sim" / "gt_000000.pgm"));
    REQUIRE(fs::exists(dir / "sim" / "spec-echo.json"));

    const std::string io_args = " --events " + sim_dir + "/events.csv --frame " + sim_dir +
                                "/blurry.pgm --t-start 40000 --exposure-us 20000";

    CliResult th = run_cli("threshold" + io_args, dir);
    REQUIRE(th.code == 0);
    const json th_json = json::parse(th.out);
    CHECK(th_json.at("c").get<double>() == 0.35);
    CHECK(th_json.at("theta_e").get<double>() > 0.0);
    const int theta_star = th_json.at("theta_star").get<int>();
    CHECK(theta_star >= 1);
    CHECK(theta_star <= 255);

    CliResult bin = run_cli("binarize" + io_args + " --out " + (dir / "B.pgm").string(), dir);
    REQUIRE(bin.code == 0);
    REQUIRE(fs::exists(dir / "B.pgm"));

    CliResult m = run_cli("metrics --pred " + (dir / "B.pgm").string() + " --gt " + sim_dir +
                              "/gt_000000.pgm",
                          dir);
    REQUIRE(m.code == 0);
    const json m_json = json::parse(m.out);
    CHECK(m_json.at("mcc").get<double>() >= 0.9);

    const std::string video_dir = (dir / "video").string();
    CliResult vid = run_cli("video" + io_args + " --fps 2000 --out " + video_dir +
                                " --updates " + (dir / "updates.csv").string(),
                            dir);
    REQUIRE(vid.code == 0);
    REQUIRE(fs::exists(dir / "video" / "manifest.json"));
    const json manifest = json::parse(slurp(dir / "video" / "manifest.json"));
    CHECK(manifest.at("fps").get<double>() == 2000.0);
    CHECK(manifest.at("t0").get<std::uint64_t>() == 40000);
    CHECK(manifest.at("count").get<std::size_t>() == count_frames(dir / "video"));
    CHECK(manifest.at("count").get<std::size_t>() >= 2);
    REQUIRE(fs::exists(dir / "updates.csv"));
    std::ifstream uf(dir / "updates.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(uf, line)) {
        unsigned long long t;
        unsigned x, y, bit;
        REQUIRE(std::sscanf(line.c_str(), "%llu,%u,%u,%u", &t, &x, &y, &bit) == 4);
        CHECK(bit <= 1);
        ++lines;
    }
    CHECK(lines > 0);

    // A directory compared against itself is a perfect batch.
    CliResult self = run_cli("metrics --pred-dir " + video_dir + " --gt-dir " + video_dir, dir);
    REQUIRE(self.code == 0);
    const json self_json = json::parse(self.out);
    CHECK(self_json.at("mcc").get<double>() == doctest::Approx(1.0));
    CHECK(self_json.at("psnr").is_string());
    CHECK(self_json.at("psnr").get<std::string>() == "inf");
}

TEST_CASE("bad inputs exit with code two") {
    const fs::path dir = workspace("errors");
    CHECK(run_cli("threshold --events " + (dir / "missing.csv").string() + " --frame " +
                      (dir / "missing.pgm").string(),
                  dir)
              .code == 2);

    {
        std::ofstream bad(dir / "bad.csv");
        bad << "32,32\n100,zz,0,1\n";
    }
    CHECK(run_cli("threshold --events " + (dir / "bad.csv").string() + " --frame " +
                      (dir / "missing.pgm").string(),
                  dir)
              .code == 2);

    CHECK(run_cli("threshold --no-such-flag", dir).code == 2);
    CHECK(run_cli("", dir).code == 2);  // a subcommand is required
    CHECK(run_cli("metrics --pred a.pgm --pred-dir d", dir).code == 2);
    CHECK(run_cli("metrics --pred a.pgm", dir).code == 2);
}

TEST_CASE("help exits cleanly") {
    const fs::path dir = workspace("help");
    CHECK(run_cli("--help", dir).code == 0);
    CHECK(run_cli("simulate --help", dir).code == 0);
}

}  // TEST_SUITE
