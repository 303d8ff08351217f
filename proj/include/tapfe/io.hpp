#pragma once

// Instance files, CSV/JSON writers and experiment manifests.
//
// Instance file layout (little-endian):
//   8 bytes  magic "TAPFEIN1"
//   u64      n
//   f64      lambda
//   u64      seed
//   u64      stream id
//   ceil(n/8) bytes  x as bits, bit i of byte i/8 set when x_i = +1
//   f64 * n(n+1)/2   W lower triangle, row-major (W_00, W_10, W_11, W_20, ...)
// Y is rebuilt on load as (lambda/n) x x^T + W.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tapfe/model.hpp"
#include "tapfe/solvers.hpp"

namespace tapfe::io {

using Json = nlohmann::ordered_json;

void write_instance(const std::filesystem::path& path, const Instance& inst);
Instance read_instance(const std::filesystem::path& path);

/// Columns of equal length written with 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns);
void write_trace(const std::filesystem::path& path, const SolverTrace& trace);
void write_json(const std::filesystem::path& path, const Json& value);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kArtifactVersion = "1.0.0";

struct Manifest {
  std::string command;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> outputs;

  /// Hashes every output and writes manifest.json next to them.
  Json finish(const std::filesystem::path& dir) const;
};

}  // namespace tapfe::io
