#pragma once

// Binary checkpoints of spectral vorticity fields.
//
// Layout (little-endian):
//   "HSNS" | u32 version | i32 K | u64 n_nodes | f64 z_max | f64 delta_ref |
//   f64 nu | f64 t | u64 payload bytes | u64 FNV-1a of payload | payload
// The payload holds modes alpha = -K..K, each n_nodes complex values stored
// as interleaved (re, im) doubles. A JSON sidecar "<file>.meta.json" records
// the creation time and the configuration hash.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "hsns/error.hpp"
#include "hsns/fieldkit.hpp"

namespace hsns {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 4 + 4 + 4 + 8 + 8 * 4 + 8 + 8;

class CheckpointError : public Error {
 public:
  using Error::Error;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  int K = 0;
  std::size_t n_nodes = 0;
  double z_max = 0.0;
  double delta_ref = 0.0;
  double nu = 0.0;
  double t = 0.0;
  SpectralField field;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64(const std::string& s);

/// Writes atomically (temporary file then rename) and emits the sidecar.
void save_checkpoint(const std::filesystem::path& path, const SpectralField& w, double nu, double t,
                     const std::string& config_hash = "");

/// Rebuilds the graded grid from the stored parameters.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& path);

/// Write bytes to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace hsns
