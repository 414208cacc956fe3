// End-to-end checks of the cprlab executable: files produced, determinism,
// and the documented exit-code table. The binary path comes in via CPRLAB_BIN.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cprlab/session.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path work_root() {
  static const fs::path root =
      fs::temp_directory_path() /
      ("cprlab_cli_" + std::to_string(::getpid()));
  fs::create_directories(root);
  return root;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = work_root() / name;
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(CPRLAB_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("generate writes session CSVs plus a manifest") {
  const fs::path out = fresh_dir("gen_a");
  CHECK(run_cli("generate --patients 2 --seed 5 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "p000.csv"));
  CHECK(fs::exists(out / "p001.csv"));
  CHECK(fs::exists(out / "manifest.json"));

  const std::string csv = slurp(out / "p000.csv");
  CHECK(line_count(csv) == 6001);  // header + 100 cycles at 100 Hz / 100 cpm
  CHECK(csv.rfind("t,compression,pressure,velocity,force,pmouth\n", 0) == 0);

  const cprlab::SignalSession s =
      cprlab::read_session_csv((out / "p000.csv").string());
  CHECK(s.length() == 6000);
  CHECK(s.sample_rate == 100.0);
  CHECK_FALSE(s.has_non_finite());

  const std::string mf = slurp(out / "manifest.json");
  CHECK(mf.find("\"command\": \"generate\"") != std::string::npos);
  CHECK(mf.find("p000.csv") != std::string::npos);
}

TEST_CASE("generate reruns are byte-identical") {
  const fs::path a = fresh_dir("gen_b1");
  const fs::path b = fresh_dir("gen_b2");
  CHECK(run_cli("generate --patients 1 --seed 9 --out " + a.string()) == 0);
  CHECK(run_cli("generate --patients 1 --seed 9 --out " + b.string()) == 0);
  CHECK(slurp(a / "p000.csv") == slurp(b / "p000.csv"));
}

TEST_CASE("generate argument validation") {
  const fs::path out = fresh_dir("gen_bad");
  CHECK(run_cli("generate --patients 0 --out " + out.string()) == 1);
  CHECK(run_cli("generate --patients 151 --out " + out.string()) == 1);
  CHECK(run_cli("generate --patients 1") == 1);        // --out is required
  CHECK(run_cli("generate --patients 1 --bogus x --out " + out.string()) == 1);
  CHECK(run_cli("") == 1);  // a subcommand is required
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("generate into a path blocked by a file fails cleanly") {
  const fs::path blocker = work_root() / "blocker";
  write_text(blocker, "occupied\n");
  CHECK(run_cli("generate --patients 1 --out " + blocker.string()) == 2);
  CHECK(fs::is_regular_file(blocker));  // untouched, no partial outputs
  CHECK(slurp(blocker) == "occupied\n");
}

TEST_CASE("corrupt is deterministic and seed-sensitive") {
  const fs::path gen = fresh_dir("cor_gen");
  REQUIRE(run_cli("generate --patients 2 --seed 1 --out " + gen.string()) == 0);
  const std::string inputs =
      (gen / "p000.csv").string() + " " + (gen / "p001.csv").string();

  const fs::path c1 = fresh_dir("cor_1");
  const fs::path c2 = fresh_dir("cor_2");
  const fs::path c3 = fresh_dir("cor_3");
  CHECK(run_cli("corrupt --seed 7 --out " + c1.string() + " " + inputs) == 0);
  CHECK(run_cli("corrupt --seed 7 --out " + c2.string() + " " + inputs) == 0);
  CHECK(run_cli("corrupt --seed 8 --out " + c3.string() + " " + inputs) == 0);

  CHECK(slurp(c1 / "p000.csv") == slurp(c2 / "p000.csv"));
  CHECK(slurp(c1 / "p001.csv") == slurp(c2 / "p001.csv"));
  CHECK(slurp(c1 / "p000.csv") != slurp(c3 / "p000.csv"));
  CHECK(slurp(c1 / "p000.csv") != slurp(gen / "p000.csv"));
  // Different input files draw from independent seed streams.
  CHECK(slurp(c1 / "p000.csv") != slurp(c1 / "p001.csv"));

  // Inputs must not be mutated.
  const fs::path gen2 = fresh_dir("cor_gen2");
  REQUIRE(run_cli("generate --patients 2 --seed 1 --out " + gen2.string()) ==
          0);
  CHECK(slurp(gen / "p000.csv") == slurp(gen2 / "p000.csv"));

  const cprlab::SignalSession noisy =
      cprlab::read_session_csv((c1 / "p000.csv").string());
  CHECK(noisy.length() == 6000);
}

TEST_CASE("evaluate emits inf tokens when the estimate equals the reference") {
  const fs::path gen = fresh_dir("ev_gen");
  REQUIRE(run_cli("generate --patients 1 --seed 2 --out " + gen.string()) == 0);
  const fs::path cor = fresh_dir("ev_cor");
  REQUIRE(run_cli("corrupt --seed 3 --out " + cor.string() + " " +
                  (gen / "p000.csv").string()) == 0);

  const fs::path out = fresh_dir("ev_out");
  const std::string clean = (gen / "p000.csv").string();
  const std::string noisy = (cor / "p000.csv").string();
  CHECK(run_cli("evaluate --clean " + clean + " --noisy " + noisy +
                " --denoised " + clean + " --method oracle --out " +
                out.string()) == 0);

  const std::string report = slurp(out / "report.json");
  CHECK(report.find("\"inf\"") != std::string::npos);
  CHECK(report.find("\"method\": \"oracle\"") != std::string::npos);
  CHECK(fs::exists(out / "scores.csv"));
  CHECK(fs::exists(out / "correlations.csv"));
  const std::string scores = slurp(out / "scores.csv");
  CHECK(scores.rfind("method,channel,snr_db,psnr_db\n", 0) == 0);
  CHECK(scores.find("oracle,aggregate,inf,inf") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure classes") {
  const fs::path out = fresh_dir("codes");
  fs::create_directories(out);

  // Missing input file -> I/O error.
  CHECK(run_cli("corrupt --out " + (out / "c").string() + " " +
                (out / "nope.csv").string()) == 2);

  // Malformed CSV header -> schema error.
  write_text(out / "garbage.csv", "wat,is,this\n1,2,3\n");
  CHECK(run_cli("corrupt --out " + (out / "c").string() + " " +
                (out / "garbage.csv").string()) == 3);

  // Header missing channels -> missing-channel error.
  write_text(out / "partial.csv", "t,compression\n0.000000,42\n");
  CHECK(run_cli("corrupt --out " + (out / "c").string() + " " +
                (out / "partial.csv").string()) == 4);

  // Unsupported checkpoint version -> version error.
  write_text(out / "old.ckpt",
             "{\"format\":\"cprlab-checkpoint\",\"version\":999}\n");
  write_text(out / "x.csv", "t,compression\n");  // never reached
  CHECK(run_cli("denoise --model " + (out / "old.ckpt").string() + " --out " +
                (out / "d").string() + " " + (out / "x.csv").string()) == 5);

  // Not a checkpoint at all -> schema error.
  write_text(out / "noise.ckpt", "{\"hello\":1}\n");
  CHECK(run_cli("denoise --model " + (out / "noise.ckpt").string() +
                " --out " + (out / "d").string() + " " +
                (out / "x.csv").string()) == 3);

  // Unknown compare method -> usage error, detected before any file I/O.
  CHECK(run_cli("compare --model m.ckpt --clean a.csv --noisy b.csv "
                "--methods quantum --out " +
                (out / "q").string()) == 1);
}

TEST_CASE("corrupt config file is honored and the CLI seed wins") {
  const fs::path gen = fresh_dir("cfg_gen");
  REQUIRE(run_cli("generate --patients 1 --seed 4 --out " + gen.string()) == 0);

  // Config pins seed 11; runs with and without --seed 11 must agree, and an
  // explicit different --seed must override the file.
  const fs::path cfg = work_root() / "corrupt_cfg.json";
  write_text(cfg, "{\"seed\": 11}\n");

  const fs::path a = fresh_dir("cfg_a");
  const fs::path b = fresh_dir("cfg_b");
  const fs::path c = fresh_dir("cfg_c");
  const std::string input = (gen / "p000.csv").string();
  CHECK(run_cli("corrupt --config " + cfg.string() + " --out " + a.string() +
                " " + input) == 0);
  CHECK(run_cli("corrupt --seed 11 --out " + b.string() + " " + input) == 0);
  CHECK(run_cli("corrupt --config " + cfg.string() + " --seed 12 --out " +
                c.string() + " " + input) == 0);
  CHECK(slurp(a / "p000.csv") == slurp(b / "p000.csv"));
  CHECK(slurp(a / "p000.csv") != slurp(c / "p000.csv"));

  // An unreadable config is an I/O error; malformed JSON is a schema error.
  CHECK(run_cli("corrupt --config " + (work_root() / "no.json").string() +
                " --out " + a.string() + " " + input) == 2);
  const fs::path bad = work_root() / "bad.json";
  write_text(bad, "{nope");
  CHECK(run_cli("corrupt --config " + bad.string() + " --out " + a.string() +
                " " + input) == 3);
}

TEST_CASE("generate honors a protocol config override") {
  const fs::path cfg = work_root() / "gen_cfg.json";
  write_text(cfg, "{\"protocol\": {\"n_cycles\": 5}}\n");
  const fs::path out = fresh_dir("gen_cfg_out");
  CHECK(run_cli("generate --patients 1 --config " + cfg.string() + " --out " +
                out.string()) == 0);
  const cprlab::SignalSession s =
      cprlab::read_session_csv((out / "p000.csv").string());
  CHECK(s.length() == 300);  // 5 cycles at 100 cpm, 100 Hz
}
