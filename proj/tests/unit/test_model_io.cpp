#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tapfe/io.hpp"
#include "tapfe/model.hpp"

using namespace tapfe;
namespace fs = std::filesystem;

namespace {

// Brute-force Gibbs average in long double over all 2^n configurations.
struct Oracle {
  std::vector<long double> X;
  long double log_z;
};

Oracle brute_force(const Matrix& Y, double beta) {
  const std::size_t n = Y.rows();
  std::vector<long double> X(n * n, 0.0L);
  std::vector<long double> energies;
  long double emax = -1e300L;
  for (std::size_t s = 0; s < (std::size_t(1) << n); ++s) {
    long double e = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const int si = (s >> i) & 1 ? 1 : -1, sj = (s >> j) & 1 ? 1 : -1;
        e += 0.5L * beta * Y(i, j) * si * sj;
      }
    energies.push_back(e);
    emax = std::max(emax, e);
  }
  long double z = 0.0L;
  for (std::size_t s = 0; s < energies.size(); ++s) {
    const long double w = std::exp(energies[s] - emax);
    z += w;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const int si = (s >> i) & 1 ? 1 : -1, sj = (s >> j) & 1 ? 1 : -1;
        X[i * n + j] += w * si * sj;
      }
  }
  for (auto& v : X) v /= z;
  return {X, emax + std::log(z)};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tapfe_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("instances are deterministic in (seed, stream)") {
    numerics::RngStream a(42, 3), b(42, 3);
    const Instance i1 = generate(30, 1.7, a), i2 = generate(30, 1.7, b);
    CHECK(i1.x == i2.x);
    CHECK(i1.Y == i2.Y);
    for (double v : i1.x) CHECK(std::abs(v) == 1.0);
    CHECK(i1.Y(2, 5) == doctest::Approx(1.7 / 30 * i1.x[2] * i1.x[5] + i1.W(2, 5)));
  }

  TEST_CASE("exact posterior matches a long-double brute force") {
    for (std::size_t n : {1, 2, 5, 9}) {
      numerics::RngStream rng(7, n);
      const Instance inst = generate(n, 2.5, rng);
      const PosteriorSummary post = exact_posterior(inst);
      const Oracle o = brute_force(inst.Y, inst.lambda);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          CHECK(post.X_bayes(i, j) == doctest::Approx(double(o.X[i * n + j])).epsilon(1e-12));
      CHECK(post.log_partition == doctest::Approx(double(o.log_z)).epsilon(1e-12));
    }
  }

  TEST_CASE("enumeration cap") {
    CHECK_THROWS_AS(exact_gibbs(Matrix::square(23), 1.0), CapacityError);
  }

  TEST_CASE("MSE identities") {
    numerics::RngStream rng(1, 0);
    const Instance inst = generate(8, 3.0, rng);
    const PosteriorSummary post = exact_posterior(inst);
    // The rank-one formula agrees with the dense one.
    Matrix mm = Matrix::square(8);
    Vector m(8);
    for (std::size_t i = 0; i < 8; ++i) m[i] = 0.8 * inst.x[i] - 0.05 * double(i);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) mm(i, j) = m[i] * m[j];
    CHECK(matrix_mse_rank1(m, inst) == doctest::Approx(matrix_mse(mm, inst)).epsilon(1e-12));
    CHECK(rank1_distance(inst.x, post.X_bayes) >= 0.0);
    CHECK(conditional_mmse(post) >= 0.0);
    CHECK(conditional_mmse(post) <= 1.0);
    CHECK(mmse_asymptote(0.5) == 1.0);
  }
}

TEST_SUITE("io") {
  TEST_CASE("instance round trip is exact") {
    numerics::RngStream rng(19, 4);
    const Instance inst = generate(37, 1.25, rng);
    const fs::path p = scratch("inst.bin");
    io::write_instance(p, inst);
    const Instance back = io::read_instance(p);
    CHECK(back.n == inst.n);
    CHECK(back.lambda == inst.lambda);
    CHECK(back.seed == inst.seed);
    CHECK(back.stream == inst.stream);
    CHECK(back.x == inst.x);
    CHECK(back.W == inst.W);
    CHECK(back.Y == inst.Y);
    CHECK(fs::file_size(p) == 8 + 8 + 8 + 8 + 8 + (37 + 7) / 8 + 8 * 37 * 38 / 2);
  }

  TEST_CASE("corrupt instance file is rejected") {
    const fs::path p = scratch("bad.bin");
    std::ofstream(p, std::ios::binary) << "NOTMAGIC";
    CHECK_THROWS(io::read_instance(p));
  }

  TEST_CASE("sha256 of a known message") {
    const fs::path p = scratch("abc.txt");
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(io::sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("CSV keeps full precision") {
    const fs::path p = scratch("cols.csv");
    const Vector a{0.1, 1.0 / 3.0, -2.5e-300}, b{1e10, -0.0, 7.0};
    io::write_csv(p, {"a", "b"}, {a, b});
    std::ifstream in(p);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "a,b");
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(std::getline(in, line));
      const auto comma = line.find(',');
      CHECK(std::stod(line.substr(0, comma)) == a[i]);
      CHECK(std::stod(line.substr(comma + 1)) == b[i]);
    }
    CHECK_THROWS(io::write_csv(p, {"a"}, {a, b}));
  }

  TEST_CASE("manifest hashes its outputs") {
    const fs::path dir = fs::temp_directory_path() / "tapfe_unit_manifest";
    fs::create_directories(dir);
    io::write_json(dir / "s.json", io::Json{{"x", 1.5}});
    io::Manifest man{"test", {{"k", 2}}, 99, {dir / "s.json"}};
    const io::Json j = man.finish(dir);
    CHECK(j["outputs"][0]["sha256"] == io::sha256_file(dir / "s.json"));
    CHECK(j["artifact_version"] == io::kArtifactVersion);
    CHECK(fs::exists(dir / "manifest.json"));
  }
}
