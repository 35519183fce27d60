// Copyright 2026 The kxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "kxfer/image_io.hpp"
#include "kxfer/kxfer.hpp"
#include "test_util.hpp"

#ifndef KXFER_CLI
#error "KXFER_CLI must name the kxfer executable"
#endif

namespace kxfer {
namespace {

struct CliRun {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  Cli() : dir_("cli") {
    save_map(testing::procedural_image(24, 20, 1), p("style1.png"));
    save_map(testing::procedural_image(18, 26, 2), p("style2.ppm"));
    save_map(testing::procedural_image(15, 17, 3), p("src.png"));
  }

  std::string p(const std::string& name) const { return dir_ / name; }

  CliRun run(const std::string& args, const std::string& env = "") const {
    const std::string log = p("log.txt");
    const std::string cmd = env + " " + std::string(KXFER_CLI) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  std::string bytes(const std::string& name) const { return io::read_file(p(name)); }

  testing::TempDir dir_;
};

TEST_F(Cli, BuildLibraryReportsCountsAndIsDeterministic) {
  CliRun r = run("build-library --out " + p("s.gpkl") + " --tau 0.97 " + p("style1.png") + " " + p("style2.ppm"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex(R"((\d+) records \((\d+) merged\))"))) << r.out;
  EXPECT_EQ(std::stoul(m[1]) + std::stoul(m[2]), 120u + 117u);
  EXPECT_NE(r.out.find("elapsed"), std::string::npos);
  const std::string first = bytes("s.gpkl");
  ASSERT_EQ(run("build-library --out " + p("s.gpkl") + " --tau 0.97 " + p("style1.png") + " " + p("style2.ppm")).code, 0);
  EXPECT_EQ(bytes("s.gpkl"), first);
  const auto manifest = nlohmann::json::parse(bytes("s.gpkl.manifest.json"));
  EXPECT_EQ(manifest["command"], "build-library");
  EXPECT_EQ(manifest["inputs"].size(), 2u);

  r = run("build-library --out " + p("all.gpkl") + " --tau 1.5 " + p("style1.png"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("120 records (0 merged)"), std::string::npos) << r.out;
  EXPECT_EQ(load_library(p("all.gpkl")).name(), "all");
}

TEST_F(Cli, BuildLibraryInputErrors) {
  EXPECT_EQ(run("build-library --out " + p("x.gpkl") + " " + p("missing.png")).code, 2);
  io::write_file(p("junk.png"), "not a png");
  EXPECT_EQ(run("build-library --out " + p("x.gpkl") + " " + p("junk.png")).code, 3);
  EXPECT_EQ(run("build-library --out " + p("x.gpkl")).code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, BuildIndexValidationAndSeeds) {
  ASSERT_EQ(run("build-library --out " + p("s.gpkl") + " " + p("style1.png") + " " + p("style2.ppm")).code, 0);
  EXPECT_EQ(run("build-index " + p("s.gpkl") + " --k 0,16").code, 1);
  EXPECT_EQ(run("build-index " + p("s.gpkl") + " --levels 2 --k 16").code, 1);
  EXPECT_EQ(run("build-index " + p("s.gpkl") + " --probes 17").code, 1);
  EXPECT_EQ(run("build-index " + p("s.gpkl") + " --bands 5").code, 1);
  ASSERT_EQ(run("build-index " + p("s.gpkl") + " --levels 2 --k 4,4 --bands 2 --seed 7").code, 0);
  const std::string a = bytes("s.bhkm");
  ASSERT_EQ(run("build-index " + p("s.gpkl") + " --out " + p("b.bhkm") + " --levels 2 --k 4,4 --bands 2 --seed 7").code, 0);
  EXPECT_EQ(bytes("b.bhkm"), a);
  ASSERT_EQ(run("build-index " + p("s.gpkl") + " --out " + p("c.bhkm") + " --levels 2 --k 4,4 --bands 2 --seed 8").code, 0);
  EXPECT_NE(bytes("c.bhkm"), a);
  std::size_t total = 0;
  for (const auto& leaf : load_index(p("c.bhkm")).leaves()) total += leaf.size();
  EXPECT_EQ(total, load_library(p("s.gpkl")).size());
  EXPECT_EQ(run("build-index " + p("nothere.gpkl")).code, 2);
}

TEST_F(Cli, IdentityTranslation) {
  ASSERT_EQ(run("build-library --out " + p("self.gpkl") + " --tau 1.5 --stride 1 " + p("src.png")).code, 0);
  ASSERT_EQ(run("build-index " + p("self.gpkl") + " --k 8,8 --bands 4").code, 0);
  for (const std::string ext : {".png", ".kft"}) {
    const CliRun r = run("translate --library " + p("self.gpkl") + " --probes 8 --out " + p("id" + ext) + " " + p("src.png"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_GE(testing::psnr(load_map(p("id" + ext)), load_map(p("src.png"))), 50.0);
  }
  EXPECT_TRUE(std::filesystem::exists(p("id.png.kfm")));
  EXPECT_TRUE(std::filesystem::exists(p("id.png.manifest.json")));
}

TEST_F(Cli, TranslateErrors) {
  ASSERT_EQ(run("build-library --out " + p("s.gpkl") + " " + p("style1.png")).code, 0);
  CliRun r = run("translate --library " + p("s.gpkl") + " --out " + p("o.png") + " " + p("src.png"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find(p("s.bhkm")), std::string::npos) << r.out;

  save_kft(testing::Gen(4).noise_map(2, 6, 6), p("f2.kft"));
  save_kft(testing::Gen(5).noise_map(3, 6, 6), p("f3.kft"));
  ASSERT_EQ(run("build-library --features --out " + p("f.gpkl") + " " + p("f2.kft")).code, 0);
  ASSERT_EQ(run("build-index " + p("f.gpkl") + " --k 2,2").code, 0);
  r = run("translate --features --library " + p("f.gpkl") + " --out " + p("o.kft") + " " + p("f3.kft"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("C = 3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("C = 2"), std::string::npos) << r.out;
  EXPECT_EQ(run("translate --library " + p("f.gpkl") + " --out " + p("o.kft") + " " + p("f2.kft")).code, 1);

  ASSERT_EQ(run("build-index " + p("s.gpkl")).code, 0);
  EXPECT_EQ(run("translate --library " + p("s.gpkl") + " --index " + p("f.bhkm") + " --out " + p("o.png") + " " + p("src.png")).code, 3);
  EXPECT_EQ(run("translate --library " + p("s.gpkl") + " --mode fancy --out " + p("o.png") + " " + p("src.png")).code, 1);
  const std::string lib = bytes("s.gpkl");
  io::write_file(p("s.gpkl"), lib.substr(0, lib.size() / 2));
  EXPECT_EQ(run("translate --library " + p("s.gpkl") + " --out " + p("o.png") + " " + p("src.png")).code, 3);
}

TEST_F(Cli, ThreadsDoNotChangeFiles) {
  ASSERT_EQ(run("build-library --out " + p("s.gpkl") + " " + p("style1.png") + " " + p("style2.ppm")).code, 0);
  ASSERT_EQ(run("build-index " + p("s.gpkl") + " --k 4,4").code, 0);
  const std::string common = "translate --mode statistics --library " + p("s.gpkl") + " " + p("src.png");
  ASSERT_EQ(run(common + " --threads 1 --out " + p("t1.kft")).code, 0);
  ASSERT_EQ(run(common + " --threads 8 --out " + p("t8.kft")).code, 0);
  ASSERT_EQ(run(common + " --out " + p("te.kft"), "KF_THREADS=3").code, 0);
  EXPECT_EQ(bytes("t1.kft"), bytes("t8.kft"));
  EXPECT_EQ(bytes("t1.kft"), bytes("te.kft"));
  EXPECT_EQ(bytes("t1.kft.kfm"), bytes("t8.kft.kfm"));
  EXPECT_EQ(nlohmann::json::parse(bytes("te.kft.manifest.json"))["parameters"]["threads"], 3);
}

TEST_F(Cli, BacktrackJsonAndOverlay) {
  ASSERT_EQ(run("build-library --out " + p("s.gpkl") + " " + p("style1.png") + " " + p("style2.ppm")).code, 0);
  ASSERT_EQ(run("build-index " + p("s.gpkl") + " --k 4,4").code, 0);
  ASSERT_EQ(run("translate --library " + p("s.gpkl") + " --out " + p("o.png") + " --matches " + p("o.kfm") + " " + p("src.png")).code, 0);
  CliRun r = run("backtrack --library " + p("s.gpkl") + " --matches " + p("o.kfm") + " --out " + p("o.jsonl") +
              " --overlay " + p("ov.png") + " --source " + p("o.png") + " --image-root /");
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string jsonl = bytes("o.jsonl");
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 14 * 16);
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  EXPECT_EQ(first["q"], 0);
  EXPECT_TRUE(first["img"] == p("style1.png") || first["img"] == p("style2.ppm"));
  EXPECT_EQ(load_map(p("ov.png")).height(), 24u + 4 + 18 + 4);

  r = run("backtrack --library " + p("s.gpkl") + " --matches " + p("o.kfm"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, jsonl);

  ASSERT_EQ(run("build-library --out " + p("other.gpkl") + " " + p("style1.png")).code, 0);
  EXPECT_EQ(run("backtrack --library " + p("other.gpkl") + " --matches " + p("o.kfm")).code, 3);
}

TEST_F(Cli, BenchCsv) {
  const CliRun r = run("bench --synthetic 400 --queries 10 --repeats 1 --k 4,4 --pq-codewords 16 --out " + p("b.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = bytes("b.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,time_per_patch_s,time_per_image_s,recall_at_1");
  EXPECT_NE(csv.find("\ntraverse,"), std::string::npos);
  EXPECT_NE(csv.find("\npq,"), std::string::npos);
  EXPECT_EQ(run("bench --queries 10").code, 1);
}

}  // namespace
}  // namespace kxfer
