#include "tapfe/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "tapfe/error.hpp"

namespace tapfe::io {
namespace {

constexpr char kMagic[8] = {'T', 'A', 'P', 'F', 'E', 'I', 'N', '1'};

static_assert(std::endian::native == std::endian::little, "instance files assume little-endian");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParameterError("instance file is truncated");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_instance(const std::filesystem::path& path, const Instance& inst) {
  std::ofstream out = open_out(path, true);
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, inst.n);
  put<double>(out, inst.lambda);
  put<std::uint64_t>(out, inst.seed);
  put<std::uint64_t>(out, inst.stream);
  std::vector<unsigned char> bits((inst.n + 7) / 8, 0);
  for (std::size_t i = 0; i < inst.n; ++i)
    if (inst.x[i] > 0.0) bits[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(bits.data()), std::streamsize(bits.size()));
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = 0; j <= i; ++j) put<double>(out, inst.W(i, j));
  if (!out) throw ParameterError("failed writing " + path.string());
}

Instance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ParameterError(path.string() + " is not an instance file");
  const auto n = std::size_t(get<std::uint64_t>(in));
  if (n == 0 || n > (1u << 16)) throw ParameterError("instance file has an invalid size");
  const double lambda = get<double>(in);
  const std::uint64_t seed = get<std::uint64_t>(in);
  const std::uint64_t stream = get<std::uint64_t>(in);
  std::vector<unsigned char> bits((n + 7) / 8);
  in.read(reinterpret_cast<char*>(bits.data()), std::streamsize(bits.size()));
  if (!in) throw ParameterError("instance file is truncated");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (bits[i / 8] >> (i % 8)) & 1u ? 1.0 : -1.0;
  Matrix W = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) W(i, j) = W(j, i) = get<double>(in);
  Instance inst = assemble(lambda, std::move(x), std::move(W));
  inst.seed = seed;
  inst.stream = stream;
  return inst;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns) {
  if (header.size() != columns.size()) throw ParameterError("write_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const Vector& c : columns)
    if (c.size() != rows) throw ParameterError("write_csv: ragged columns");
  std::ofstream out = open_out(path, false);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << fmt(columns[k][r]);
    out << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const SolverTrace& trace) {
  Vector it(trace.iteration.begin(), trace.iteration.end());
  write_csv(path, {"iteration", "overlap", "q", "free_energy", "residual"},
            {it, trace.overlap, trace.q, trace.free_energy, trace.residual});
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out = open_out(path, false);
  out << value.dump(2) << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw NumericError("sha256: digest initialisation failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 15]);
  }
  return s;
}

Json Manifest::finish(const std::filesystem::path& dir) const {
  Json j;
  j["command"] = command;
  j["params"] = params;
  j["seed"] = seed;
  j["artifact_version"] = kArtifactVersion;
  Json outs = Json::array();
  for (const auto& p : outputs)
    outs.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}});
  j["outputs"] = outs;
  write_json(dir / "manifest.json", j);
  return j;
}

}  // namespace tapfe::io
