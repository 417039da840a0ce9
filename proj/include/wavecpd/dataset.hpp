#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wavecpd {

inline constexpr int kBlanket = 5;
inline constexpr int kBlanketRadius = kBlanket / 2;
inline constexpr int kPatchSize = kBlanket * kBlanket;
inline constexpr int kPatchCenter = kPatchSize / 2;

struct NodeIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// One d x d snapshot of the recorded observable, row-major.
struct GridFrame {
  std::vector<double> values;
  std::int64_t time_index = 0;

  friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

/// Affine map applied to raw values before training: (x - mean) / scale.
struct Standardization {
  bool applied = false;
  double mean = 0.0;
  double scale = 1.0;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

/// 5x5 conditioning window, row-major; entries outside the grid are zero.
struct NeighborhoodPatch {
  std::array<double, kPatchSize> values{};
  NodeIndex center;
  std::int64_t source_time_index = 0;
};

struct TransitionSample {
  NeighborhoodPatch patch;
  double target = 0.0;
};

struct WaveDataset {
  int d = 0;
  double frame_dt = 0.0;
  std::vector<GridFrame> frames;
  Standardization standardization;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t node_count() const { return static_cast<std::size_t>(d) * d; }
  bool contains(NodeIndex n) const { return n.row >= 0 && n.row < d && n.col >= 0 && n.col < d; }
  double at(std::size_t frame, NodeIndex n) const {
    return frames[frame].values[static_cast<std::size_t>(n.row) * d + n.col];
  }

  /// Throws ErrorKind::invalid_argument when the frame invariants do not hold.
  void validate() const;

  friend bool operator==(const WaveDataset&, const WaveDataset&) = default;
};

NeighborhoodPatch extract_patch(std::span<const double> frame, int d, NodeIndex center,
                                std::int64_t time_index = 0);
NeighborhoodPatch extract_patch(const WaveDataset& ds, std::size_t frame, NodeIndex center);

/// Sample k pairs the patch of frame k with the center value of frame k + 1.
std::vector<TransitionSample> transitions(const WaveDataset& ds, NodeIndex node);

/// Uniform frame, then uniform center; advances `rng`.
NeighborhoodPatch sample_random_patch(const WaveDataset& ds, std::mt19937_64& rng);

/// Mean and population standard deviation over every stored value.
Standardization fit_standardization(const WaveDataset& ds);
/// Applies `s` to a raw dataset. A dataset already carrying `s` is returned unchanged;
/// one carrying different constants is a mismatch.
WaveDataset standardize(const WaveDataset& ds, const Standardization& s);

void save_dataset(const WaveDataset& ds, const std::filesystem::path& path);
WaveDataset load_dataset(const std::filesystem::path& path);
std::string encode_dataset(const WaveDataset& ds);
WaveDataset decode_dataset(const std::string& bytes);

}  // namespace wavecpd
