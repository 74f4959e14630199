#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqe/cli.hpp"

using namespace cqe;
using cqe::cli::Json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cqe_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json invoke_json(const std::vector<std::string>& args) {
  const auto o = invoke(args);
  EXPECT_EQ(o.code, 0) << o.err;
  return Json::parse(o.out);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cqe_cli_test_" + name);
}

}  // namespace

TEST(Cli, Bb84MatchesLibrary) {
  const Json j = invoke_json({"bb84", "--n", "1e6", "--k", "1e5", "--ez", "0.02", "--ex", "0.02", "--leak", "0"});
  Bb84Params p;
  p.n = 1000000;
  p.k = 100000;
  p.e_x = p.e_z = 0.02;
  p.leak_ec = 0.0;
  p.budget = FailureBudget::from_eps_sec(1e-9, 1e-15);
  const auto r = bb84_key_length(p);
  EXPECT_EQ(j["result"]["ell"].get<std::int64_t>(), r.ell);
  EXPECT_DOUBLE_EQ(j["result"]["e_hat"].get<double>(), r.e_hat);
  EXPECT_EQ(j["config"]["command"], "bb84");
  EXPECT_EQ(j["config"]["params"]["n"].get<std::int64_t>(), 1000000);
  for (const char* key : {"e_hat", "hmin_smooth", "ell", "delta_sec", "raw_bits", "rate", "terms"})
    EXPECT_TRUE(j["result"].contains(key)) << key;
}

TEST(Cli, AutoLeakUsesEfficiencyModel) {
  const Json j = invoke_json({"bb84", "--ex", "0.05"});
  EXPECT_NEAR(j["result"]["terms"]["leak_ec"].get<double>(), 1.16 * 1e6 * binary_entropy(0.05), 1e-6);
}

TEST(Cli, DiqkdAndQrng) {
  const Json d = invoke_json({"diqkd", "--omega", "0.85", "--leak", "0"});
  EXPECT_NEAR(d["result"]["terms"]["omega_hat"].get<double>(), 0.83969, 1e-5);
  EXPECT_EQ(d["result"]["raw_bits"].get<std::int64_t>(), 4000000);

  const Json q = invoke_json({"qrng", "--asymptotic"});
  EXPECT_NEAR(q["result"]["rate"].get<double>(), 0.41504, 1e-5);
  EXPECT_TRUE(q["result"]["asymptotic"].get<bool>());
  const Json f = invoke_json({"qrng", "--Q", "0.005"});
  EXPECT_LT(f["result"]["rate"].get<double>(), 0.41504);
}

TEST(Cli, Mineval) {
  const Json j = invoke_json({"mineval", "--lambdas", "0.7,0.3"});
  EXPECT_NEAR(j["result"]["pguess"].get<double>(), 0.958257569, 1e-9);
  EXPECT_NEAR(j["result"]["hmin"].get<double>(), 0.061514606, 1e-9);
  EXPECT_EQ(invoke({"mineval", "--lambdas", "0.7,0.4"}).code, cli::kExitInvalid);
}

TEST(Cli, InvalidInputsExitWithTwo) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"bb84", "--n", "0"}, {"bb84", "--n", "12.5"}, {"bb84", "--ez", "abc"},
        {"bb84", "--bogus", "1"}, {"qrng", "--Q", "1.5"}, {"diqkd", "--omega", "-0.1"}, {"--out", "xml", "bb84"},
        {"--seed", "-4", "bb84"}, {"--sweep", "n=1:2", "bb84"}, {"--sweep", "nope=1:2:3", "bb84"},
        {"--config", "/nonexistent/cfg.json", "bb84"}, {}}) {
    const auto o = invoke(args);
    EXPECT_EQ(o.code, cli::kExitInvalid) << (args.empty() ? "" : args.back());
    EXPECT_TRUE(o.out.empty() || o.code != 0);
  }
  const auto o = invoke({"bb84", "--n", "0"});
  EXPECT_NE(o.err.find("error:"), std::string::npos);
}

TEST(Cli, ConfigRoundTrip) {
  const auto first = invoke({"--seed", "11", "bb84", "--n", "5e5", "--ez", "0.03", "--ex", "0.025"});
  ASSERT_EQ(first.code, 0) << first.err;
  const auto path = temp_file("roundtrip.json");
  {
    std::ofstream f(path);
    f << Json::parse(first.out)["config"].dump(2);
  }
  const auto second = invoke({"--config", path.string(), "bb84"});
  EXPECT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
  // Flags override the file.
  const Json third = invoke_json({"--config", path.string(), "bb84", "--ez", "0.01"});
  EXPECT_EQ(third["config"]["params"]["ez"].get<double>(), 0.01);
  std::filesystem::remove(path);
}

TEST(Cli, FlatConfigAndBadFiles) {
  const auto path = temp_file("flat.json");
  {
    std::ofstream f(path);
    f << R"({"command": "qrng", "Q": 0.01, "n": 200000})";
  }
  const Json j = invoke_json({"--config", path.string(), "qrng"});
  EXPECT_EQ(j["config"]["params"]["n"].get<std::int64_t>(), 200000);
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  EXPECT_EQ(invoke({"--config", path.string(), "qrng"}).code, cli::kExitInvalid);
  {
    std::ofstream f(path);
    f << R"({"command": "bb84"})";
  }
  EXPECT_EQ(invoke({"--config", path.string(), "qrng"}).code, cli::kExitInvalid);
  std::filesystem::remove(path);
}

TEST(Cli, SimulationIsDeterministicPerSeed) {
  const auto a = invoke({"--seed", "42", "simulate", "bb84", "--rounds", "20000", "--depol", "0.1"});
  const auto b = invoke({"--seed", "42", "simulate", "bb84", "--rounds", "20000", "--depol", "0.1"});
  const auto c = invoke({"--seed", "43", "simulate", "bb84", "--rounds", "20000", "--depol", "0.1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(Json::parse(a.out)["result"], Json::parse(c.out)["result"]);
  const Json r = Json::parse(a.out)["result"];
  EXPECT_GT(r["n"].get<std::int64_t>(), 0);
  EXPECT_NEAR(r["e_z"].get<double>(), 0.05, 0.015);

  const Json chsh = invoke_json({"--seed", "3", "simulate", "chsh", "--rounds", "50000"});
  EXPECT_NEAR(chsh["result"]["omega"].get<double>(), kTsirelsonWinProb, 0.01);
}

TEST(Cli, QrngSimulationEmitsBits) {
  const auto path = temp_file("bits.bin");
  const Json j = invoke_json({"--seed", "5", "simulate", "qrng", "--rounds", "1000", "--emit-bits", path.string()});
  EXPECT_EQ(j["result"]["generation_rounds"].get<std::int64_t>(), 1000);
  EXPECT_EQ(std::filesystem::file_size(path), 250u);
  std::filesystem::remove(path);
}

TEST(Cli, CsvOutput) {
  const auto o = invoke({"--out", "csv", "bb84"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("\r\n"), std::string::npos);
  EXPECT_EQ(o.out.rfind("e_hat,hmin_smooth,ell", 0), 0u);
  EXPECT_NE(o.out.find("terms.leak_ec"), std::string::npos);
  EXPECT_EQ(cli::detail::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(cli::detail::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(cli::detail::csv_field("plain"), "plain");
}

TEST(Cli, SweepProducesOneRecordPerPoint) {
  const Json j = invoke_json({"--sweep", "ez=0:0.1:5", "bb84"});
  ASSERT_EQ(j["records"].size(), 5u);
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (const auto& rec : j["records"]) {
    const auto ell = rec["result"]["ell"].get<std::int64_t>();
    EXPECT_LE(ell, prev);
    prev = ell;
  }
  EXPECT_DOUBLE_EQ(j["records"][4]["ez"].get<double>(), 0.1);
  const auto csv = invoke({"--out", "csv", "--sweep", "n=1e5:1e6:3", "bb84"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  std::size_t lines = 0;
  for (char c : csv.out) lines += c == '\n';
  EXPECT_EQ(lines, 4u);
}

TEST(Cli, TextOutput) {
  const auto o = invoke({"--out", "text", "diqkd"});
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("ell"), std::string::npos);
  EXPECT_NE(o.out.find("omega_hat"), std::string::npos);
}
