#include "emot/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace emot::nn {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void magic() {
    need(4);
    if (std::memcmp(bytes_.data(), "EMOT", 4) != 0) throw std::runtime_error("checkpoint: bad magic");
    pos_ += 4;
  }
  [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint: truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const GaussianPolicy& policy, const VectorCritic& critic) {
  Writer w;
  w.out.insert(w.out.end(), {'E', 'M', 'O', 'T'});
  w.u32(kCheckpointVersion);
  const Mlp* nets[] = {&policy.mean_net(), &policy.std_net(), &critic.net()};
  w.u32(3);
  for (const Mlp* net : nets) {
    w.u32(static_cast<std::uint32_t>(net->spec().widths.size()));
    for (const std::size_t width : net->spec().widths) w.u32(static_cast<std::uint32_t>(width));
  }
  for (const Mlp* net : nets) {
    for (const double p : net->params()) w.f64(p);
  }
  for (const double s : policy.global_std()) w.f64(s);
  w.f64(policy.phi());
  return std::move(w.out);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  if (count != 3) throw std::runtime_error("checkpoint: expected 3 networks");
  std::vector<MlpSpec> specs(count);
  for (MlpSpec& spec : specs) {
    const std::uint32_t layers = r.u32();
    if (layers > 64) throw std::runtime_error("checkpoint: implausible layer count");
    for (std::uint32_t l = 0; l < layers; ++l) spec.widths.push_back(r.u32());
    spec.validate();
  }
  std::vector<Mlp> nets;
  for (const MlpSpec& spec : specs) {
    ParamVector p(spec.param_count());
    for (double& v : p) v = r.f64();
    nets.emplace_back(spec, std::move(p));
  }
  std::vector<double> sigma(specs[0].output_dim());
  for (double& s : sigma) s = r.f64();
  const double phi = r.f64();
  if (!r.at_end()) throw std::runtime_error("checkpoint: trailing bytes");
  return {GaussianPolicy(std::move(nets[0]), std::move(nets[1]), std::move(sigma), phi), VectorCritic(std::move(nets[2]))};
}

void save_checkpoint(const std::filesystem::path& path, const GaussianPolicy& policy, const VectorCritic& critic) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(policy, critic);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace emot::nn
