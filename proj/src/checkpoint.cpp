#include "wavecpd/checkpoint.hpp"

#include <string_view>

#include <nlohmann/json.hpp>

#include "wavecpd/error.hpp"
#include "wavecpd/io.hpp"

namespace wavecpd {

namespace {

constexpr std::string_view kMagic = "WCPDM01";

nlohmann::json header_for(const Checkpoint& ck) {
  const auto& m = ck.model;
  const auto& c = ck.config;
  nlohmann::json training = {
      {"epochs", c.epochs},
      {"lr", c.lr},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},
      {"test_eval_stride", c.test_eval_stride},
  };
  if (m.kind.tag == ModelTag::regularized) {
    training["lambda"] = c.lambda;
    training["parent"] = m.kind.parent.tag == ParentStrategy::Tag::local ? "local" : "random";
    training["patches_per_term"] = m.kind.parent.patches_per_term;
  }
  nlohmann::json h = {
      {"model", m.kind.name()},
      {"d", m.d},
      {"seed", c.seed},
      {"training", training},
      {"standardization",
       {{"applied", ck.standardization.applied},
        {"mean", ck.standardization.mean},
        {"scale", ck.standardization.scale}}},
      {"n_params", m.parameter_count()},
  };
  if (m.kind.tag == ModelTag::mtl)
    h["trunk_width"] = m.mtl.mean.width;
  else
    h["h"] = m.hidden;
  return h;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const std::string header = header_for(ck).dump();
  std::string out(kMagic);
  io::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (auto block : ck.model.blocks())
    for (double v : block) io::put_f64(out, v);
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic)
    fail(ErrorKind::format, "checkpoint: bad magic (expected WCPDM01)");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t pos = kMagic.size();
  if (bytes.size() < pos + 4) fail(ErrorKind::truncated, "checkpoint: truncated header");
  const std::size_t len = io::get_u32(raw + pos);
  pos += 4;
  if (bytes.size() < pos + len) fail(ErrorKind::truncated, "checkpoint: truncated header");

  Checkpoint ck;
  try {
    const auto h = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    const auto& t = h.at("training");
    ParentStrategy parent;
    if (t.contains("parent")) {
      const auto p = t.at("parent").get<std::string>();
      if (p != "local" && p != "random") fail(ErrorKind::format, "checkpoint: unknown parent strategy " + p);
      parent.tag = p == "random" ? ParentStrategy::Tag::random : ParentStrategy::Tag::local;
      parent.patches_per_term = t.at("patches_per_term").get<int>();
    }
    const ModelKind kind = ModelKind::parse(h.at("model").get<std::string>(), parent);
    TrainConfig& c = ck.config;
    c.epochs = t.at("epochs").get<int>();
    c.lr = t.at("lr").get<double>();
    c.adam_beta1 = t.at("adam_beta1").get<double>();
    c.adam_beta2 = t.at("adam_beta2").get<double>();
    c.adam_eps = t.at("adam_eps").get<double>();
    c.test_eval_stride = t.at("test_eval_stride").get<int>();
    c.lambda = t.value("lambda", 0.0);
    c.seed = h.at("seed").get<std::uint64_t>();
    if (kind.tag == ModelTag::mtl)
      c.trunk_width = h.at("trunk_width").get<int>();
    else
      c.hidden = h.at("h").get<int>();
    const auto& s = h.at("standardization");
    ck.standardization = {s.at("applied").get<bool>(), s.at("mean").get<double>(), s.at("scale").get<double>()};
    const int d = h.at("d").get<int>();
    if (d < 1) fail(ErrorKind::format, "checkpoint: invalid d");
    // Size check before allocating anything the header asks for.
    const auto n_params = h.at("n_params").get<std::size_t>();
    const std::size_t payload = bytes.size() - pos - len;
    if (payload / 8 < n_params)
      fail(ErrorKind::truncated, "checkpoint: truncated payload: expected " + std::to_string(n_params * 8) +
                                     " parameter bytes, got " + std::to_string(payload));
    // Zero-valued skeleton of the right shape; the payload fills it.
    ck.model = init_model(kind, d, c).zeros_like();
    if (ck.model.parameter_count() != n_params)
      fail(ErrorKind::mismatch, "checkpoint: n_params does not match the declared architecture");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("checkpoint: header error: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_argument) throw;
    fail(ErrorKind::format, std::string("checkpoint: invalid header value: ") + e.what());
  }
  pos += len;

  const std::size_t expected = pos + ck.model.parameter_count() * 8;
  if (bytes.size() < expected)
    fail(ErrorKind::truncated, "checkpoint: truncated payload: expected " + std::to_string(expected) +
                                   " bytes, got " + std::to_string(bytes.size()));
  if (bytes.size() > expected) fail(ErrorKind::mismatch, "checkpoint: trailing bytes after parameters");
  for (auto block : ck.model.blocks())
    for (double& v : block) {
      v = io::get_f64(raw + pos);
      pos += 8;
    }
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  io::write_atomic(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace wavecpd
