// Copyright 2026 the tpc authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tpc/image_io.hpp"
#include "tpc/serialize.hpp"
#include "test_util.hpp"

using namespace tpc;
using test::TempDir;

namespace {

int run(const std::string& args, const std::filesystem::path& stdout_to = {}) {
  std::string cmd = std::string(TPC_CLI_PATH) + " " + args;
  if (!stdout_to.empty()) cmd += " > " + stdout_to.string();
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string train_flags(const std::string& in, const std::string& out) {
  return "train --in " + in + " --out " + out +
         " --steps 30 --resolution 16 --channels 4 --hidden 24 --batch 50 --threads 2 "
         "--deterministic --seed 3";
}

}  // namespace

TEST_CASE("the full pipeline runs through the command line") {
  TempDir tmp("cli_pipe");
  const auto cloud = tmp.path("cloud.tcga").string();
  const auto ckpt = tmp.path("ckpt.tcst").string();
  const auto scene = tmp.path("scene.tcgs").string();
  const auto decoded = tmp.path("decoded.tcga").string();

  CHECK(run("synth --out " + cloud + " --n 120 --seed 7 --corr-len 0.5") == 0);
  CHECK(run(train_flags(cloud, ckpt)) == 0);
  CHECK(std::filesystem::exists(ckpt));
  CHECK(run("encode --in " + cloud + " --checkpoint " + ckpt + " --out " + scene +
            " --threads 2") == 0);
  CHECK(run("decode --in " + scene + " --out " + decoded + " --threads 2") == 0);
  CHECK(run("verify --original " + cloud + " --decoded " + decoded) == 0);
  CHECK(run("stats --in " + scene) == 0);

  // CSV output: one row per section.
  const auto csv = tmp.path("stats.csv").string();
  CHECK(run("stats --in " + scene + " --csv " + csv) == 0);
  std::ifstream csv_in(csv);
  int rows = 0;
  for (std::string line; std::getline(csv_in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 7);
}

TEST_CASE("missing inputs and bad flags exit with the usage code") {
  TempDir tmp("cli_usage");
  CHECK(run("train --in " + tmp.path("absent.tcga").string() + " --out " +
            tmp.path("x.tcst").string()) == 2);
  CHECK(run("decode --in " + tmp.path("absent.tcgs").string() + " --out " +
            tmp.path("y.tcga").string()) == 2);
  CHECK(run("synth --out " + tmp.path("c.tcga").string() + " --unknown-flag 3") == 2);
  CHECK(run("") == 2);

  // Zero steps is a validation error.
  const auto cloud = tmp.path("cloud.tcga").string();
  REQUIRE(run("synth --out " + cloud + " --n 20 --seed 1 --corr-len 0.5") == 0);
  CHECK(run("train --in " + cloud + " --out " + tmp.path("z.tcst").string() +
            " --steps 0") == 2);
}

TEST_CASE("decoding truncated or corrupted scenes exits with the corruption code") {
  TempDir tmp("cli_corrupt");
  const auto cloud = tmp.path("cloud.tcga").string();
  const auto ckpt = tmp.path("ckpt.tcst").string();
  const auto scene = tmp.path("scene.tcgs").string();
  REQUIRE(run("synth --out " + cloud + " --n 60 --seed 2 --corr-len 0.5") == 0);
  REQUIRE(run(train_flags(cloud, ckpt)) == 0);
  REQUIRE(run("encode --in " + cloud + " --checkpoint " + ckpt + " --out " + scene) == 0);

  auto bytes = read_file_bytes(scene);
  bytes.resize(bytes.size() / 2);
  write_file_bytes(tmp.path("trunc.tcgs"), {bytes.data(), bytes.size()});
  CHECK(run("decode --in " + tmp.path("trunc.tcgs").string() + " --out " +
            tmp.path("out.tcga").string()) == 3);

  bytes = read_file_bytes(scene);
  bytes[bytes.size() - 5] ^= 0x80;
  write_file_bytes(tmp.path("flip.tcgs"), {bytes.data(), bytes.size()});
  CHECK(run("decode --in " + tmp.path("flip.tcgs").string() + " --out " +
            tmp.path("out2.tcga").string()) == 3);
}

TEST_CASE("verify flags deviations and shape mismatches") {
  TempDir tmp("cli_verify");
  const auto cloud = tmp.path("cloud.tcga").string();
  const auto ckpt = tmp.path("ckpt.tcst").string();
  const auto scene = tmp.path("scene.tcgs").string();
  const auto decoded = tmp.path("decoded.tcga").string();
  REQUIRE(run("synth --out " + cloud + " --n 50 --seed 4 --corr-len 0.5") == 0);
  REQUIRE(run(train_flags(cloud, ckpt)) == 0);
  REQUIRE(run("encode --in " + cloud + " --checkpoint " + ckpt + " --out " + scene) == 0);
  REQUIRE(run("decode --in " + scene + " --out " + decoded) == 0);

  // Perturb one attribute value in the decoded cloud (first feature float of
  // the first record, right after the positions).
  auto bytes = read_file_bytes(decoded);
  const std::size_t at = 24 + 3 * 4;
  bytes[at] ^= 0x01;
  bytes[at + 1] ^= 0x40;
  write_file_bytes(tmp.path("perturbed.tcga"), {bytes.data(), bytes.size()});
  CHECK(run("verify --original " + cloud + " --decoded " +
            tmp.path("perturbed.tcga").string()) == 1);

  // Mismatched anchor counts exit with the usage code.
  const auto small = tmp.path("small.tcga").string();
  REQUIRE(run("synth --out " + small + " --n 49 --seed 4 --corr-len 0.5") == 0);
  CHECK(run("verify --original " + small + " --decoded " + decoded) == 2);
}

TEST_CASE("wavelet command reports the scheduled loss breakdown") {
  TempDir tmp("cli_wavelet");
  Image img(1);
  img[0] = Eigen::MatrixXd::Zero(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) img[0](r, c) = 0.5 + 0.25 * std::sin(r * 0.7 + c);
  save_image_raw(img, tmp.path("a.tcgi"));
  save_image_raw(img, tmp.path("b.tcgi"));

  const auto out = tmp.path("out.txt");
  CHECK(run("wavelet --a " + tmp.path("a.tcgi").string() + " --b " +
                tmp.path("b.tcgi").string(),
            out) == 0);
  std::string text = slurp(out);
  CHECK(text.find("total   0.000000000") != std::string::npos);
  CHECK(text.find("lambda1 1.000000") != std::string::npos);

  // Different image, indivisible dimensions: cropped with a notice.
  Image odd(1);
  odd[0] = Eigen::MatrixXd::Constant(18, 19, 0.25);
  save_image_raw(odd, tmp.path("c.tcgi"));
  Image odd2 = odd;
  odd2[0].array() += 0.25;
  save_image_raw(odd2, tmp.path("d.tcgi"));
  CHECK(run("wavelet --a " + tmp.path("c.tcgi").string() + " --b " +
                tmp.path("d.tcgi").string() + " --step 10 --total-steps 10",
            out) == 0);
  text = slurp(out);
  CHECK(text.find("cropping") != std::string::npos);
  CHECK(text.find("lambda1 0.200000") != std::string::npos);
  CHECK(text.find("lambda2 0.800000") != std::string::npos);
  // A constant offset has no high-frequency content.
  CHECK(text.find("YH term 0.000000000") != std::string::npos);
}

TEST_CASE("show-config output re-fed as a config file reproduces the run") {
  TempDir tmp("cli_config");
  const auto cloud = tmp.path("cloud.tcga").string();
  REQUIRE(run("synth --out " + cloud + " --n 40 --seed 5 --corr-len 0.5") == 0);

  const auto cfg = tmp.path("run.cfg");
  CHECK(run("--show-config " + train_flags(cloud, tmp.path("a.tcst").string()), cfg) == 0);
  CHECK(slurp(cfg).find("steps=30") != std::string::npos);

  REQUIRE(run(train_flags(cloud, tmp.path("a.tcst").string())) == 0);
  REQUIRE(run("train --config " + cfg.string() + " --out " + tmp.path("b.tcst").string()) ==
          0);
  CHECK(read_file_bytes(tmp.path("a.tcst")) == read_file_bytes(tmp.path("b.tcst")));
}

TEST_CASE("deterministic reruns produce bit-identical scenes") {
  TempDir tmp("cli_det");
  const auto cloud = tmp.path("cloud.tcga").string();
  REQUIRE(run("synth --out " + cloud + " --n 80 --seed 6 --corr-len 0.5") == 0);
  for (const char* tag : {"1", "2"}) {
    REQUIRE(run(train_flags(cloud, tmp.path(std::string("ck") + tag + ".tcst").string())) ==
            0);
    REQUIRE(run("encode --in " + cloud + " --checkpoint " +
                tmp.path(std::string("ck") + tag + ".tcst").string() + " --out " +
                tmp.path(std::string("scene") + tag + ".tcgs").string() +
                " --threads 2 --deterministic") == 0);
  }
  CHECK(read_file_bytes(tmp.path("ck1.tcst")) == read_file_bytes(tmp.path("ck2.tcst")));
  CHECK(read_file_bytes(tmp.path("scene1.tcgs")) == read_file_bytes(tmp.path("scene2.tcgs")));
}
