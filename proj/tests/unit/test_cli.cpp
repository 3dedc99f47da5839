#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "sass/bench.hpp"
#include "sass/binary_io.hpp"
#include "sass/data.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd =
      std::string(SASS_CLI_PATH) + " " + args + " > " + log.string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("sass_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  fs::path d = fresh_dir("usage");
  CHECK(run_cli("no-such-command", d).code == 2);
  CHECK(run_cli("train", d).code == 2);
  CHECK(run_cli("train --config " + (d / "missing.cfg").string(), d).code == 2);
  write_text(d / "bad.cfg", "epochs = 1\nnot_a_key = 3\n");
  CHECK(run_cli("train --config " + (d / "bad.cfg").string(), d).code == 2);
  CHECK(run_cli("bench --paths warp --Ls 64,128 --out " + (d / "b.csv").string(), d).code == 2);
}

TEST_CASE("train, gen-data and eval") {
  fs::path d = fresh_dir("train");
  write_text(d / "run.cfg",
             "samples_per_class = 5\nlength = 32\nembed_dim = 4\nstate_dim = 4\n"
             "gate_dim = 4\nepochs = 2\nbatch_size = 4\n");
  Run t = run_cli("train --config " + (d / "run.cfg").string() + " --out " + d.string() +
                      " --set seed=3",
                  d);
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("epoch,split,loss,accuracy\n", 0) == 0);
  std::ifstream metrics(d / "metrics.csv");
  std::stringstream ms;
  ms << metrics.rdbuf();
  CHECK(ms.str() == t.out);
  CHECK(fs::exists(d / "checkpoint.bin"));

  Run g = run_cli("gen-data --config " + (d / "run.cfg").string() + " --out " +
                      (d / "ds.bin").string(),
                  d);
  REQUIRE(g.code == 0);
  sass::data::Dataset ds = sass::data::read_dataset(d / "ds.bin");
  CHECK(ds.size() == 15);
  CHECK(ds.length == 32);

  Run e = run_cli("eval --checkpoint " + (d / "checkpoint.bin").string() + " --dataset " +
                      (d / "ds.bin").string(),
                  d);
  CHECK(e.code == 0);
  CHECK(e.out.find("accuracy") != std::string::npos);
  CHECK(e.out.find("true_class") != std::string::npos);

  auto bytes = sass::io::read_file(d / "checkpoint.bin");
  bytes[bytes.size() / 2] ^= 0x40;
  sass::io::write_file(d / "broken.bin", bytes);
  CHECK(run_cli("eval --checkpoint " + (d / "broken.bin").string() + " --dataset " +
                    (d / "ds.bin").string(),
                d)
            .code == 2);
}

TEST_CASE("gradcheck, oracle-style and kernel-fit subcommands") {
  fs::path d = fresh_dir("checks");
  Run g = run_cli("gradcheck --seeds 2 --filter pulse_gate", d);
  CHECK(g.code == 0);
  CHECK(g.out.find("PASS") != std::string::npos);
  Run k = run_cli("kernel-fit --L 32 --steps 500", d);
  CHECK(k.code == 0);
  Run kf = run_cli("kernel-fit --L 32 --steps 1 --tol 1e-12", d);
  CHECK(kf.code == 1);
}

TEST_CASE("bench writes a parseable csv") {
  fs::path d = fresh_dir("bench");
  Run b = run_cli("bench --paths spectral,direct_conv --Ls 64,128 --repeats 5 --out " +
                      (d / "b.csv").string(),
                  d);
  REQUIRE(b.code == 0);
  std::ifstream in(d / "b.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  auto records = sass::bench::parse_csv(ss.str());
  CHECK(records.size() == 4);
  CHECK(b.out.find("slope,spectral,") != std::string::npos);
}
