#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace tilefreq;
using namespace tilefreq::test;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(TILEFREQ_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sys(const std::string& name) { return "--system " + data_path("systems/" + name + ".json"); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1)) ++n;
  return n;
}

std::filesystem::path temp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tilefreq_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Cli, Validate) {
  auto r = cli("validate " + sys("fibonacci"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("[[1,1],[1,0]]"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("validate").code, 2);
  EXPECT_EQ(cli("supertile " + sys("fibonacci") + " -k -1").code, 2);
  EXPECT_EQ(cli("validate --system /nonexistent.json").code, 1);
}

TEST(Cli, BudgetExitCode) { EXPECT_EQ(cli("supertile " + sys("chair") + " -k 12").code, 3); }

TEST(Cli, ChairSvg) {
  auto path = temp("chair.svg");
  auto r = cli("supertile " + sys("chair") + " -k 4 --svg " + path.string());
  ASSERT_EQ(r.code, 0);
  std::string svg = slurp(path);
  EXPECT_EQ(count(svg, "<polygon"), 256u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, Cobham) {
  auto r = cli("cobham " + sys("thue_morse") + " --system2 " + data_path("systems/oct8.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Dependent(3,1)"), std::string::npos) << r.out;
  r = cli("cobham " + sys("thue_morse") + " --system2 " + data_path("systems/fibonacci.json"));
  EXPECT_NE(r.out.find("IndependentUpTo(16)"), std::string::npos) << r.out;
}

TEST(Cli, JsonRoundTrip) {
  for (const char* name : {"fibonacci", "chair"}) {
    auto path = temp(std::string(name) + ".json");
    ASSERT_EQ(cli("validate " + sys(name) + " --json " + path.string()).code, 0);
    auto back = io::load_system(path.string());
    const auto& orig = corpus(name);
    ASSERT_EQ(back.size(), orig.size());
    EXPECT_EQ(back.protos.fingerprint(), orig.protos.fingerprint());
    for (std::size_t p = 0; p < orig.size(); ++p)
      EXPECT_EQ(patch_key(back.protos, supertile(back, static_cast<int>(p), 1)),
                patch_key(orig.protos, supertile(orig, static_cast<int>(p), 1)));
    std::filesystem::remove(path);
  }
}

TEST(Cli, FactorSpectrum) {
  auto r = cli("factor-spectrum " + sys("thue_morse") + " --derivation " + data_path("derivations/tm_to_pd.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("2/3"), std::string::npos) << r.out;
}
