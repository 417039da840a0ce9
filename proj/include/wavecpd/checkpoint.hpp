#pragma once

#include <filesystem>
#include <string>

#include "wavecpd/dataset.hpp"
#include "wavecpd/training.hpp"

namespace wavecpd {

/// A trained model plus what is needed to evaluate it on raw datasets.
struct Checkpoint {
  ModelParams model;
  TrainConfig config;
  Standardization standardization;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Layout: 7-byte magic "WCPDM01", u32 LE header length, JSON header, then
/// every parameter block of ModelParams::blocks() as binary64 LE:
///   free / regularized: per node (row-major) mean net then sigma net, each
///     W1 (25 x h, input-major), b1, W2, b2;
///   shared: the single node, same order;
///   mtl: mean trunk W (d^2 x H, input-major), trunk b, head W (d^2 x H),
///     head b, then the same four for the sigma net.
std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wavecpd
