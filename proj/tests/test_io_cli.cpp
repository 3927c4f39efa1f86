#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stratsurv/cli.hpp"
#include "stratsurv/inference.hpp"
#include "stratsurv/io.hpp"
#include "stratsurv/simulation.hpp"

using namespace stratsurv;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("stratsurv_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"stratsurv"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("io_cli");

TEST_CASE("dataset round-trip is lossless") {
  Rng rng(1);
  auto gen = generate(dgp_preset("D2", 30), rng);
  auto data = apply_censoring(gen.data, 0.2, rng);

  const auto dir = temp_dir("roundtrip");
  write_dataset(dir / "d.csv", data);
  const auto back = read_dataset(dir / "d.csv");
  CHECK(back.n == data.n);
  CHECK(back.p == data.p);
  CHECK(back.delta == data.delta);
  CHECK(back.time == data.time);  // recorded times survive exactly
  CHECK(back.x == data.x);

  // parse -> serialize -> parse is the identity, byte for byte
  write_dataset(dir / "d2.csv", back);
  CHECK(slurp(dir / "d.csv") == slurp(dir / "d2.csv"));
  const auto back2 = read_dataset(dir / "d2.csv");
  CHECK(back2.y == back.y);
  CHECK(back2.time == back.time);
  CHECK(back2.x == back.x);
  CHECK(back2.delta == back.delta);
}

TEST_CASE("ingestion reports exactly the malformed rows") {
  const auto dir = temp_dir("malformed");
  std::ofstream out(dir / "bad.csv");
  out << "time,status,x1\n"
      << "1.5,1,0.2\n"       // line 2 ok
      << "oops,1,0.2\n"      // line 3 bad time
      << "2.5,1,0.3\n"       // line 4 ok
      << "-1.0,1,0.1\n"      // line 5 non-positive time
      << "3.5,2,0.4\n"       // line 6 bad status
      << "4.5,1\n";          // line 7 short row
  out.close();
  try {
    read_dataset(dir / "bad.csv");
    FAIL("expected a rejection");
  } catch (const std::runtime_error& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find(" 3") != std::string::npos);
    CHECK(msg.find(" 5") != std::string::npos);
    CHECK(msg.find(" 6") != std::string::npos);
    CHECK(msg.find(" 7") != std::string::npos);
    CHECK(msg.find(" 2") == std::string::npos);
    CHECK(msg.find(" 4") == std::string::npos);
  }

  std::ofstream hdr(dir / "hdr.csv");
  hdr << "t,status\n1.0,1\n";
  hdr.close();
  CHECK_THROWS_AS(read_dataset(dir / "hdr.csv"), std::runtime_error);
}

TEST_CASE("chain artifacts round-trip with identical partitions") {
  Rng rng(3);
  const auto gen = generate(dgp_preset("D1", 24), rng);

  SamplerConfig config;
  config.iters = 80;
  config.burnin = 50;
  config.base.mu0 = {2.0, 0.0};
  config.base.tau0sq = {4.0, 20.0};
  config.seed = 91;
  const auto chain = run(gen.data, ModelVariant::M1,
                         KernelFamily::Logistic, MixingMeasure::nig(1.0, 1.0),
                         config);

  const auto dir = temp_dir("chain");
  write_chain(dir, chain);
  const auto back = read_chain(dir);
  CHECK(back.variant == chain.variant);
  CHECK(back.family == chain.family);
  CHECK(back.n == chain.n);
  CHECK(back.p == chain.p);
  REQUIRE(back.draws.size() == chain.draws.size());
  for (std::size_t m = 0; m < chain.draws.size(); ++m) {
    CHECK(back.draws[m].alloc == chain.draws[m].alloc);
    CHECK(back.draws[m].u == chain.draws[m].u);
    CHECK(back.draws[m].tau == chain.draws[m].tau);
    CHECK(back.draws[m].theta_common == chain.draws[m].theta_common);
    CHECK(back.draws[m].loglik == chain.draws[m].loglik);
    REQUIRE(back.draws[m].clusters.size() == chain.draws[m].clusters.size());
    for (std::size_t j = 0; j < chain.draws[m].clusters.size(); ++j) {
      CHECK(back.draws[m].clusters[j].mu == chain.draws[m].clusters[j].mu);
      CHECK(back.draws[m].clusters[j].zeta == chain.draws[m].clusters[j].zeta);
    }
  }
}

TEST_CASE("partition file round-trip") {
  Partition p;
  p.labels = {0, 1, 0, 2, 1};
  p.k = 3;
  const auto dir = temp_dir("partition");
  write_partition(dir / "p.csv", p);
  const auto back = read_partition(dir / "p.csv");
  CHECK(back == p);
}

TEST_CASE("cli pipeline end to end with byte-identical reruns") {
  const auto dir = temp_dir("pipeline");
  const auto data_csv = (dir / "data.csv").string();
  REQUIRE(run_cli({"simulate", "--dgp", "D0", "--n", "60", "--seed", "5",
                   "--out", data_csv,
                   "--truth-out", (dir / "truth.csv").string()}) == 0);

  const auto out_a = (dir / "run_a").string();
  const auto out_b = (dir / "run_b").string();
  for (const auto& out : {out_a, out_b}) {
    REQUIRE(run_cli({"fit", "--data", data_csv, "--outdir", out, "--variant",
                     "M0", "--iters", "300", "--burnin", "200", "--seed",
                     "17"}) == 0);
    REQUIRE(run_cli({"stratify", "--outdir", out}) == 0);
    REQUIRE(run_cli({"refit", "--outdir", out}) == 0);
    REQUIRE(run_cli({"curves", "--outdir", out, "--points", "20"}) == 0);
    REQUIRE(run_cli({"diag", "--outdir", out}) == 0);
  }

  // idempotence: identical config and seed give byte-identical artifacts
  // (config.echo records the differing outdir; it is compared scrubbed below)
  for (const auto rel :
       {"chain/chain.csv", "chain/loglik.csv",
        "chain/params.json", "partition/partition.csv",
        "partition/summary.csv", "refit/summaries.csv",
        "report/km_overall.csv", "report/acf.csv",
        "report/coefficients.csv"}) {
    CAPTURE(rel);
    const auto a = slurp(fs::path(out_a) / rel);
    CHECK(a == slurp(fs::path(out_b) / rel));
    CHECK(!a.empty());
  }
  // config echo differs only in the outdir field
  {
    auto a = slurp(fs::path(out_a) / "config.echo");
    auto b = slurp(fs::path(out_b) / "config.echo");
    const auto scrub = [](std::string s, const std::string& what) {
      const auto pos = s.find(what);
      return pos == std::string::npos ? s : s.erase(pos, what.size());
    };
    CHECK(scrub(a, "run_a") == scrub(b, "run_b"));
  }

  // the chain reingests to the very partitions that were sampled
  const auto chain = read_chain(fs::path(out_a) / "chain");
  const auto partitions = chain.partitions();
  CHECK(partitions.size() == 100);

  // D0 fixture: three strata of about 20 each
  const auto opt = read_partition(fs::path(out_a) / "partition" / "partition.csv");
  int big_blocks = 0;
  for (int c : opt.block_sizes()) big_blocks += c >= 15;
  CHECK(big_blocks == 3);

  // summary counts add up to n and the censored total (here zero)
  {
    std::ifstream in(fs::path(out_a) / "partition" / "summary.csv");
    std::string line;
    std::getline(in, line);
    int total = 0, censored = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      int lab, tot, ex, cen, single;
      std::sscanf(line.c_str(), "%d,%d,%d,%d,%d", &lab, &tot, &ex, &cen,
                  &single);
      total += tot;
      censored += cen;
      CHECK(tot >= 1);
      CHECK(ex + cen == tot);
    }
    CHECK(total == 60);
    CHECK(censored == 0);
  }
}

TEST_CASE("coefficient table carries the excludes-zero convention") {
  const auto dir = temp_dir("coeff");
  // synthetic refit summaries covering both flag outcomes
  fs::create_directories(dir / "refit");
  fs::create_directories(dir / "partition");
  fs::create_directories(dir / "chain");
  {
    std::ofstream out(dir / "refit" / "summaries.csv");
    out << "stratum,size,param,median,lo,hi\n";
    out << "0,10,mu,1.0,0.8,1.2\n";
    out << "0,10,zeta,0.1,0.05,0.2\n";
    out << "0,10,theta_1,-0.4,-0.572,-0.250\n";
    out << "1,12,mu,2.0,1.9,2.2\n";
    out << "1,12,zeta,0.2,0.1,0.3\n";
    out << "1,12,theta_1,0.004,-0.045,0.057\n";
  }
  // minimal surrounding artifacts for cmd_curves
  const auto data_csv = (dir / "data.csv").string();
  REQUIRE(run_cli({"simulate", "--dgp", "D0", "--n", "30", "--seed", "9",
                   "--out", data_csv}) == 0);
  {
    std::ofstream out(dir / "config.echo");
    out << "{\"variant\":\"M2\",\"family\":\"type1min\",\"data\":\""
        << data_csv << "\",\"outdir\":\"" << dir.string() << "\",\"seed\":1}";
  }
  {
    std::ofstream out(dir / "partition" / "partition.csv");
    out << "obs_id,stratum_label\n";
    for (int i = 0; i < 30; ++i) out << i << "," << (i < 15 ? 0 : 1) << "\n";
  }
  REQUIRE(run_cli({"curves", "--outdir", dir.string(), "--points", "5"}) == 0);

  const auto table = slurp(dir / "report" / "coefficients.csv");
  CHECK(table.find("0,theta_1,-0.4,-0.572,-0.250,1") != std::string::npos);
  CHECK(table.find("1,theta_1,0.004,-0.045,0.057,0") != std::string::npos);
  CHECK(table.find("zeta") == std::string::npos);

  // missing refit chains are reported as gaps, not failures
  const auto gaps = slurp(dir / "report" / "gaps.txt");
  CHECK(gaps.find("stratum") != std::string::npos);
}

TEST_CASE("compare emits the scores table") {
  const auto dir = temp_dir("compare");
  const auto data_csv = (dir / "data.csv").string();
  REQUIRE(run_cli({"simulate", "--dgp", "D0", "--n", "40", "--censor", "0.2",
                   "--seed", "21", "--out", data_csv}) == 0);
  REQUIRE(run_cli({"compare", "--data", data_csv, "--outdir", dir.string(),
                   "--variant", "M0", "--iters", "200", "--burnin", "150",
                   "--seed", "33"}) == 0);
  const auto scores = slurp(dir / "report" / "scores.csv");
  CHECK(scores.find("kernel,lpml,waic") != std::string::npos);
  CHECK(scores.find("type1min,") != std::string::npos);
  CHECK(scores.find("logistic,") != std::string::npos);
  CHECK(scores.find("normal,") != std::string::npos);
}

TEST_CASE("study command produces the tidy results table") {
  const auto dir = temp_dir("study");
  {
    std::ofstream out(dir / "study.json");
    out << R"({"dgps":["D0"],"variants":["M0"],"kernels":["type1min"],)"
        << R"("sizes":[30],"censor_levels":[0.0],"replicates":2,)"
        << R"("iters":150,"burnin":100,"seed":77,"workers":2})";
  }
  const auto out_csv = (dir / "results.csv").string();
  REQUIRE(run_cli({"study", "--config", (dir / "study.json").string(), "--out",
                   out_csv}) == 0);
  const auto table = slurp(out_csv);
  CHECK(table.find("dgp,variant,kernel,n,censor_level,replicate,rand_index,"
                   "k_hat,runtime_s,seed") != std::string::npos);
  int lines = 0;
  for (char c : table) lines += c == '\n';
  CHECK(lines == 3);  // header + 2 replicates
}

TEST_CASE("malformed cli input fails cleanly") {
  CHECK(run_cli({"fit", "--outdir", "/tmp/nowhere_x"}) != 0);
  CHECK(run_cli({"stratify", "--outdir", "/tmp/definitely_missing_dir_xyz"}) != 0);
  CHECK(run_cli({"nonsense"}) != 0);
}

TEST_SUITE_END();
