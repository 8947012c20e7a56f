#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "doctest.h"

#include "hsns/checkpoint.hpp"

using namespace hsns;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "hsns_unit_checkpoint";
  fs::create_directories(d);
  return d / name;
}

SpectralField random_field(int K = 2) {
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(40.0, 64, 0.05));
  SpectralField w(g, K, true);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int a = -K; a <= K; ++a) {
    for (auto& v : w.mode(a)) v = cd(N(rng), N(rng));
  }
  return w;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}
}  // namespace

TEST_CASE("roundtrip is bit exact") {
  const auto w = random_field();
  const auto p = scratch("rt.hsns");
  save_checkpoint(p, w, 1e-3, 0.5, "abc");
  const auto c = load_checkpoint(p);
  CHECK(c.K == 2);
  CHECK(c.nu == 1e-3);
  CHECK(c.t == 0.5);
  CHECK(c.field.grid().nodes == w.grid().nodes);
  for (int a = -2; a <= 2; ++a) CHECK(std::memcmp(c.field.mode(a).data(), w.mode(a).data(), w.n_nodes() * sizeof(cd)) == 0);
  CHECK(fs::exists(checkpoint_sidecar(p)));
  CHECK(fs::file_size(p) == kCheckpointHeaderBytes + 5 * 64 * 16);
}

TEST_CASE("damaged files are rejected explicitly") {
  const auto p = scratch("ok.hsns");
  save_checkpoint(p, random_field(), 1e-3, 0.0);
  const auto good = read(p);
  const auto bad = scratch("bad.hsns");

  write(bad, good.substr(0, good.size() - 10));
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("truncated"), CheckpointError);

  auto v = good;
  v[4] = 2;
  write(bad, v);
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("version"), CheckpointError);

  v = good;
  v[0] = 'X';
  write(bad, v);
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("magic"), CheckpointError);

  v = good;
  v[kCheckpointHeaderBytes + 17] ^= 0x01;
  write(bad, v);
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("checksum"), CheckpointError);

  write(bad, good + "xx");
  CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("trailing"), CheckpointError);

  CHECK_THROWS_AS(load_checkpoint(scratch("missing.hsns")), CheckpointError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64(std::string()) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64(std::string("a")) == 0xaf63dc4c8601ec8cull);
}
