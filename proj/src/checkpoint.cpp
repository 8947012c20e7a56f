#include "hsns/checkpoint.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>
#include <vector>

#include "json.hpp"

namespace hsns {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'N', 'S'};

template <typename U>
void put_uint(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::vector<unsigned char>& b, const std::string& file) : b_(b), file_(file) {}

  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw CheckpointError(file_ + ": truncated checkpoint");
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& b_;
  std::string file_;
  std::size_t pos_ = 0;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta.json";
  return p;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_checkpoint(const std::filesystem::path& path, const SpectralField& w, double nu, double t,
                     const std::string& config_hash) {
  const auto& g = w.grid();
  const int K = w.truncation();
  std::string payload;
  payload.reserve(static_cast<std::size_t>(2 * K + 1) * g.size() * 16);
  for (int a = -K; a <= K; ++a) {
    for (const auto& v : w.mode(a)) {
      put_f64(payload, v.real());
      put_f64(payload, v.imag());
    }
  }
  std::string out(kMagic, 4);
  put_uint<std::uint32_t>(out, kCheckpointVersion);
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(K));
  put_uint<std::uint64_t>(out, g.size());
  put_f64(out, g.z_max);
  put_f64(out, g.delta_ref);
  put_f64(out, nu);
  put_f64(out, t);
  put_uint<std::uint64_t>(out, payload.size());
  put_uint<std::uint64_t>(out, fnv1a64(payload));
  out += payload;
  write_file_atomic(path, out);

  const nlohmann::json meta{{"created", utc_now()},
                            {"config_hash", config_hash},
                            {"format_version", kCheckpointVersion},
                            {"K", K},
                            {"n_nodes", g.size()},
                            {"nu", nu},
                            {"t", t}};
  write_file_atomic(checkpoint_sidecar(path), meta.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + file);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw CheckpointError(file + ": truncated checkpoint");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError(file + ": bad magic, not an HSNS checkpoint");
  Reader r(bytes, file);
  r.uint<std::uint32_t>();
  Checkpoint c;
  c.version = r.uint<std::uint32_t>();
  if (c.version != kCheckpointVersion) {
    throw CheckpointError(file + ": unsupported checkpoint version " + std::to_string(c.version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  c.K = static_cast<int>(r.uint<std::uint32_t>());
  c.n_nodes = r.uint<std::uint64_t>();
  c.z_max = r.f64();
  c.delta_ref = r.f64();
  c.nu = r.f64();
  c.t = r.f64();
  const auto payload_bytes = r.uint<std::uint64_t>();
  const auto checksum = r.uint<std::uint64_t>();
  if (c.K < 0 || c.n_nodes == 0) throw CheckpointError(file + ": corrupt header");
  const std::uint64_t expected = static_cast<std::uint64_t>(2 * c.K + 1) * c.n_nodes * 16;
  if (payload_bytes != expected) throw CheckpointError(file + ": payload length does not match K and n_nodes");
  r.need(payload_bytes);
  const std::size_t start = r.pos();
  if (bytes.size() != start + payload_bytes) {
    throw CheckpointError(file + ": " + std::to_string(bytes.size() - start - payload_bytes) + " trailing bytes");
  }
  if (fnv1a64(std::span<const unsigned char>(bytes.data() + start, payload_bytes)) != checksum) {
    throw CheckpointError(file + ": checksum mismatch");
  }
  auto grid = std::make_shared<const GradedGrid>(build_graded_grid(c.z_max, c.n_nodes, c.delta_ref));
  if (grid->size() != c.n_nodes) throw CheckpointError(file + ": grid parameters do not reproduce n_nodes");
  c.field = SpectralField(grid, c.K, true);
  for (int a = -c.K; a <= c.K; ++a) {
    for (auto& v : c.field.mode(a)) {
      const double re = r.f64();
      const double im = r.f64();
      v = cd(re, im);
    }
  }
  return c;
}

}  // namespace hsns
