#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include "common.hpp"

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  std::string cmd = std::string(CONFLUENCE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& name) {
  return std::string(CONFLUENCE_TEST_DATA) + "/" + name;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Cli, Verdicts) {
  Result a = run("prove " + data("cops62.trs"));
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, "YES\n");
  EXPECT_EQ(run("prove " + data("empty.trs")).out, "YES\n");
  EXPECT_EQ(run("prove " + data("almost_closed.trs") + " --criteria huet").out, "MAYBE\n");
  EXPECT_EQ(run("prove " + data("nat_arith.trs") + " --no-reduce --criteria reduce").out, "MAYBE\n");
}

TEST(Cli, ProofOutput) {
  Result r = run("prove " + data("nat_arith.trs") + " --proof");
  EXPECT_EQ(first_line(r.out), "YES");
  EXPECT_NE(r.out.find("reduction"), std::string::npos) << r.out;
  Result m = run("prove " + data("almost_closed.trs") + " --criteria huet --proof");
  EXPECT_EQ(first_line(m.out), "MAYBE");
  EXPECT_GT(m.out.size(), std::string("MAYBE\n").size());
}

TEST(Cli, ReadsStdin) {
  EXPECT_EQ(run("prove < " + data("cops62.trs")).out, "YES\n");
  EXPECT_EQ(run("prove - < " + data("almost_closed.trs")).out, "YES\n");
}

TEST(Cli, Errors) {
  std::string bad = (std::filesystem::temp_directory_path() / "confluence_bad.trs").string();
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("(VAR x)\n(RULES x -> a)\n", f);
    std::fclose(f);
  }
  Result r = run("prove " + bad);
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(run("prove " + data("missing.trs")).status, 0);
  EXPECT_NE(run("prove " + data("almost_closed.trs") + " --no-such-flag").status, 0);
  EXPECT_NE(run("prove " + data("almost_closed.trs") + " --criteria bogus").status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST(Cli, OutputIsDeterministic) {
  for (const char* f : {"int_plus.trs", "cops62.trs", "nat_arith.trs"}) {
    std::string args = "prove " + data(f) + " --proof";
    EXPECT_EQ(run(args).out, run(args).out) << f;
  }
}

TEST(Cli, EmitDimacs) {
  auto dir = std::filesystem::temp_directory_path() / "confluence_dimacs_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  EXPECT_EQ(run("prove " + data("nat_arith.trs") + " --emit-dimacs " + dir.string()).out, "YES\n");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
    std::string text = testing_util::read_file(e.path().string());
    EXPECT_EQ(text.rfind("p cnf ", 0), 0u) << e.path();
  }
  EXPECT_GE(files, 2u);
  std::filesystem::remove_all(dir);
}

TEST(Cli, TimeoutIsRespected) {
  auto t0 = std::chrono::steady_clock::now();
  Result r = run("prove " + data("assoc_succ.trs") + " --timeout 1 --join-bound 40 --conversion-budget 60");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out == "YES\n" || r.out == "MAYBE\n") << r.out;
  EXPECT_LT(secs, 2.0);
}
