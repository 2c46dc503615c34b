#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifndef LLDM_CLI_PATH
#error "LLDM_CLI_PATH must be defined"
#endif

namespace {

namespace fs = std::filesystem;

const fs::path g_work = fs::temp_directory_path() / "lldm_cli_work";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LLDM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

std::string q(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("cli pipeline") {
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const auto graph = g_work / "g.edges";
  const auto ds = g_work / "ds";
  const auto model = g_work / "model";
  const auto evaldir = g_work / "eval";

  SUBCASE("full run") {
    REQUIRE(run_cli("gen-graph nws --nodes 120 --neighbors 6 --shortcut-p 0.4 --seed 7 -o " +
                    q(graph)) == 0);
    CHECK(fs::exists(graph));
    CHECK(fs::exists(g_work / "g.edges.stats.json"));
    CHECK(fs::exists(g_work / "g.edges.config.json"));

    REQUIRE(run_cli("gen-data --graph " + q(graph) +
                    " --dynamics fca --k 6 --count 80 --t-horizon 40 --t-observed 10 --seed 1 -o " +
                    q(ds)) == 0);
    for (const char* f : {"manifest.json", "cats.f32", "labels.u8", "config.json"})
      CHECK(fs::exists(ds / f));

    REQUIRE(run_cli("train --data " + q(ds) + " --method smf --rank 2 --iters 25 --seed 2 -o " +
                    q(model)) == 0);
    CHECK(fs::exists(model / "manifest.json"));
    CHECK(fs::exists(model / "filters.f32"));

    REQUIRE(run_cli("eval --model " + q(model) + " --data " + q(ds) +
                    " --with-baseline --seed 3 -o " + q(evaldir)) == 0);
    CHECK(fs::exists(evaldir / "metrics.json"));
    CHECK(fs::exists(evaldir / "residuals.csv"));
    CHECK(fs::exists(evaldir / "baseline_metrics.json"));

    const auto local_out = g_work / "local.json";
    REQUIRE(run_cli("predict local --model " + q(model) + " --data " + q(ds) + " -o " +
                    q(local_out)) == 0);
    CHECK(fs::exists(local_out));

    const auto global_out = g_work / "global.json";
    REQUIRE(run_cli("predict global --model " + q(model) + " --graph " + q(graph) +
                    " --samples 10 --seed 4 --t-horizon 40 -o " + q(global_out)) == 0);
    const auto text = slurp(global_out);
    CHECK(std::string(text.begin(), text.end()).find("trace") != std::string::npos);

    const auto filters = g_work / "filters";
    REQUIRE(run_cli("export-filters --model " + q(model) + " -o " + q(filters)) == 0);
    CHECK(fs::exists(filters / "beta.json"));
    CHECK(fs::exists(filters / "filter_00" / "t000.csv"));
    CHECK(fs::exists(filters / "filter_01" / "t009.csv"));

    SUBCASE("global mode with generated parents and balance") {
      const auto gds = g_work / "gds";
      REQUIRE(run_cli("gen-data --gen-parents 4 --nodes 80 --neighbors 6 --shortcut-p 0.4"
                      " --dynamics fca --mode global --balance --k 6 --paths-per-graph 5"
                      " --t-horizon 40 --t-observed 10 --seed 2 -o " +
                      q(gds)) == 0);
      CHECK(fs::exists(gds / "manifest.json"));
      std::ifstream in(gds / "manifest.json");
      std::string manifest((std::istreambuf_iterator<char>(in)), {});
      CHECK(manifest.find("restrict-parent") != std::string::npos);
      CHECK(manifest.find("\"count\": 20") != std::string::npos);
      CHECK(manifest.find("\"labels_positive\": 10") != std::string::npos);
    }

    SUBCASE("identical flags reproduce byte-identical outputs") {
      const auto ds2 = g_work / "ds2";
      REQUIRE(run_cli("gen-data --graph " + q(graph) +
                      " --dynamics fca --k 6 --count 80 --t-horizon 40 --t-observed 10 --seed 1 -o " +
                      q(ds2)) == 0);
      CHECK(slurp(ds / "cats.f32") == slurp(ds2 / "cats.f32"));
      CHECK(slurp(ds / "labels.u8") == slurp(ds2 / "labels.u8"));
    }

    SUBCASE("run-config reproduces outputs from the echo") {
      // rewrite the echoed argv to a fresh output location, then replay
      std::ifstream in(ds / "config.json");
      std::string text((std::istreambuf_iterator<char>(in)), {});
      const std::string from = q(ds);
      const auto ds3 = g_work / "ds3";
      std::string patched;
      std::size_t pos = 0;
      while (true) {
        const std::size_t hit = text.find(from, pos);
        if (hit == std::string::npos) {
          patched += text.substr(pos);
          break;
        }
        patched += text.substr(pos, hit - pos) + q(ds3);
        pos = hit + from.size();
      }
      const auto cfg = g_work / "replay.json";
      std::ofstream out(cfg, std::ios::binary);
      out << patched;
      out.close();
      REQUIRE(run_cli("run-config " + q(cfg)) == 0);
      CHECK(slurp(ds / "cats.f32") == slurp(ds3 / "cats.f32"));
      CHECK(slurp(ds / "labels.u8") == slurp(ds3 / "labels.u8"));
      CHECK(slurp(ds / "manifest.json") == slurp(ds3 / "manifest.json"));
    }
  }
}

TEST_CASE("cli exit codes") {
  fs::create_directories(g_work);
  SUBCASE("usage errors exit 1") {
    CHECK(run_cli("definitely-not-a-command") == 1);
    CHECK(run_cli("train") == 1);  // missing required flags
  }
  SUBCASE("validation errors exit 2") {
    const auto out = g_work / "bad.edges";
    CHECK(run_cli("gen-graph nws --nodes 300 --neighbors 301 --seed 1 -o " + q(out)) == 2);
    CHECK(run_cli("gen-data --graph /nonexistent.edges --dynamics fca --count 5 -o " +
                  q(g_work / "nope")) == 2);
    CHECK(run_cli("gen-data --dynamics fca --count 0 --graph /nonexistent.edges -o " +
                  q(g_work / "nope2")) == 2);
  }
}
