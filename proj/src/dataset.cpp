#include "wavecpd/dataset.hpp"

#include <cmath>
#include <string_view>

#include "wavecpd/error.hpp"
#include "wavecpd/io.hpp"

namespace wavecpd {

namespace {

constexpr std::string_view kMagic = "WAVEDS01";

std::string node_str(NodeIndex n) {
  return "(" + std::to_string(n.row) + "," + std::to_string(n.col) + ")";
}

}  // namespace

void WaveDataset::validate() const {
  require(d >= 1, "dataset: d must be positive");
  require(!frames.empty(), "dataset: no frames");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    require(f.values.size() == node_count(),
            "dataset: frame " + std::to_string(k) + " has " + std::to_string(f.values.size()) +
                " values, expected " + std::to_string(node_count()));
    if (k > 0)
      require(f.time_index == frames[k - 1].time_index + 1,
              "dataset: time_index not consecutive at frame " + std::to_string(k));
    for (double v : f.values)
      require(std::isfinite(v), "dataset: non-finite value in frame " + std::to_string(k));
  }
}

NeighborhoodPatch extract_patch(std::span<const double> frame, int d, NodeIndex center,
                                std::int64_t time_index) {
  require(center.row >= 0 && center.row < d && center.col >= 0 && center.col < d,
          "extract_patch: center " + node_str(center) + " outside " + std::to_string(d) + "x" +
              std::to_string(d) + " grid");
  NeighborhoodPatch p;
  p.center = center;
  p.source_time_index = time_index;
  for (int dr = -kBlanketRadius; dr <= kBlanketRadius; ++dr) {
    const int r = center.row + dr;
    for (int dc = -kBlanketRadius; dc <= kBlanketRadius; ++dc) {
      const int c = center.col + dc;
      const int k = (dr + kBlanketRadius) * kBlanket + (dc + kBlanketRadius);
      p.values[k] = (r >= 0 && r < d && c >= 0 && c < d) ? frame[static_cast<std::size_t>(r) * d + c] : 0.0;
    }
  }
  return p;
}

NeighborhoodPatch extract_patch(const WaveDataset& ds, std::size_t frame, NodeIndex center) {
  const auto& f = ds.frames.at(frame);
  return extract_patch(f.values, ds.d, center, f.time_index);
}

std::vector<TransitionSample> transitions(const WaveDataset& ds, NodeIndex node) {
  require(ds.frames.size() >= 2, "transitions: need at least 2 frames");
  require(ds.contains(node), "transitions: node " + node_str(node) + " outside grid");
  std::vector<TransitionSample> out;
  out.reserve(ds.frames.size() - 1);
  for (std::size_t k = 0; k + 1 < ds.frames.size(); ++k)
    out.push_back({extract_patch(ds, k, node), ds.at(k + 1, node)});
  return out;
}

NeighborhoodPatch sample_random_patch(const WaveDataset& ds, std::mt19937_64& rng) {
  require(!ds.frames.empty() && ds.d > 0, "sample_random_patch: empty dataset");
  std::uniform_int_distribution<std::size_t> frame_dist(0, ds.frames.size() - 1);
  std::uniform_int_distribution<int> node_dist(0, ds.d - 1);
  const std::size_t k = frame_dist(rng);
  const int r = node_dist(rng);
  const int c = node_dist(rng);
  return extract_patch(ds, k, {r, c});
}

Standardization fit_standardization(const WaveDataset& ds) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : ds.frames)
    for (double v : f.values) {
      sum += v;
      ++n;
    }
  require(n > 0, "fit_standardization: empty dataset");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& f : ds.frames)
    for (double v : f.values) ss += (v - mean) * (v - mean);
  double scale = std::sqrt(ss / static_cast<double>(n));
  // A constant dataset has no spread; keep it centred at zero.
  if (!(scale > 0.0)) scale = 1.0;
  return {true, mean, scale};
}

WaveDataset standardize(const WaveDataset& ds, const Standardization& s) {
  if (ds.standardization.applied) {
    if (ds.standardization == s) return ds;
    fail(ErrorKind::mismatch, "dataset already standardized with different constants");
  }
  require(s.scale > 0.0 && std::isfinite(s.mean), "standardize: invalid constants");
  WaveDataset out = ds;
  for (auto& f : out.frames)
    for (double& v : f.values) v = (v - s.mean) / s.scale;
  out.standardization = s;
  out.standardization.applied = true;
  return out;
}

std::string encode_dataset(const WaveDataset& ds) {
  ds.validate();
  nlohmann::json meta = {
      {"d", ds.d},
      {"n_frames", ds.frames.size()},
      {"frame_dt", ds.frame_dt},
      {"first_time_index", ds.frames.front().time_index},
      {"standardization",
       {{"applied", ds.standardization.applied},
        {"mean", ds.standardization.mean},
        {"scale", ds.standardization.scale}}},
      {"provenance", ds.provenance},
  };
  const std::string header = meta.dump();
  std::string out;
  out.reserve(kMagic.size() + 4 + header.size() + ds.frames.size() * ds.node_count() * 8);
  out.append(kMagic);
  io::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.append(header);
  for (const auto& f : ds.frames)
    for (double v : f.values) io::put_f64(out, v);
  return out;
}

WaveDataset decode_dataset(const std::string& bytes) {
  if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic)
    fail(ErrorKind::format, "dataset: bad magic (expected WAVEDS01)");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t pos = kMagic.size();
  if (bytes.size() < pos + 4)
    fail(ErrorKind::truncated, "dataset: truncated payload: expected at least " +
                                   std::to_string(pos + 4) + " bytes, got " + std::to_string(bytes.size()));
  const std::size_t header_len = io::get_u32(raw + pos);
  pos += 4;
  if (bytes.size() < pos + header_len)
    fail(ErrorKind::truncated, "dataset: truncated payload: expected at least " +
                                   std::to_string(pos + header_len) + " bytes, got " +
                                   std::to_string(bytes.size()));
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("dataset: metadata is not valid JSON: ") + e.what());
  }
  pos += header_len;

  WaveDataset ds;
  std::size_t n_frames = 0;
  std::int64_t first = 0;
  try {
    ds.d = meta.at("d").get<int>();
    n_frames = meta.at("n_frames").get<std::size_t>();
    ds.frame_dt = meta.at("frame_dt").get<double>();
    first = meta.value("first_time_index", std::int64_t{0});
    const auto& s = meta.at("standardization");
    ds.standardization = {s.at("applied").get<bool>(), s.at("mean").get<double>(),
                          s.at("scale").get<double>()};
    ds.provenance = meta.value("provenance", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("dataset: metadata field error: ") + e.what());
  }
  if (ds.d < 1 || n_frames < 1)
    fail(ErrorKind::mismatch, "dataset: metadata declares d=" + std::to_string(ds.d) +
                                  ", n_frames=" + std::to_string(n_frames));

  const std::size_t per_frame = ds.node_count();
  const std::size_t expected = pos + n_frames * per_frame * 8;
  if (bytes.size() < expected)
    fail(ErrorKind::truncated, "dataset: truncated payload: expected " + std::to_string(expected) +
                                   " bytes, got " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    fail(ErrorKind::mismatch, "dataset: metadata/frame-count mismatch: " +
                                  std::to_string(bytes.size() - expected) + " trailing bytes");

  ds.frames.resize(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    auto& f = ds.frames[k];
    f.time_index = first + static_cast<std::int64_t>(k);
    f.values.resize(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i, pos += 8) f.values[i] = io::get_f64(raw + pos);
  }
  return ds;
}

void save_dataset(const WaveDataset& ds, const std::filesystem::path& path) {
  io::write_atomic(path, encode_dataset(ds));
}

WaveDataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(io::read_file(path));
}

}  // namespace wavecpd
