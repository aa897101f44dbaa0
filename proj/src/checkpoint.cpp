#include "seisint/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include "seisint/error.hpp"
#include "seisint/io.hpp"

namespace seisint {

namespace {

constexpr char kMagic[4] = {'S', 'I', 'N', 'T'};

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out{};
    for (std::size_t i = 0; i < sizeof(U); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
    return out;
  }
  return v;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename U>
  void integer(U v) {
    v = to_little(v);
    bytes(&v, sizeof v);
  }
  void f32(float v) { integer(std::bit_cast<std::uint32_t>(v)); }
  std::size_t size() const { return buf_.size(); }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::span<const std::uint8_t> bytes(std::size_t n) {
    if (n > b_.size() - pos_) throw ChecksumError("checkpoint truncated");
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U integer() {
    U v;
    std::memcpy(&v, bytes(sizeof v).data(), sizeof v);
    return to_little(v);
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) {
    if (p > b_.size()) throw ChecksumError("checkpoint offset past end of file");
    pos_ = p;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

template <typename TensorT>
struct NamedTensor {
  std::string name;
  TensorT* tensor;
};

template <typename C, typename R, typename TensorT = std::conditional_t<std::is_const_v<C>, const nn::Tensor, nn::Tensor>>
std::vector<NamedTensor<TensorT>> tensor_list(C& c, R& r) {
  return {{"classifier.dense.weight", &c.dense.weights}, {"classifier.dense.bias", &c.dense.bias},
          {"regressor.conv.weight", &r.conv.weights},     {"regressor.conv.bias", &r.conv.bias},
          {"regressor.dense.weight", &r.dense.weights},   {"regressor.dense.bias", &r.dense.bias}};
}

nlohmann::json config_block(const Checkpoint& ckpt) {
  auto j = to_json(ckpt.config);
  j["metadata"] = {{"train_events", ckpt.metadata.train_events},
                   {"test_events", ckpt.metadata.test_events},
                   {"classifier_losses", ckpt.metadata.classifier_losses},
                   {"regressor_losses", ckpt.metadata.regressor_losses}};
  return j;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  const auto tensors = tensor_list(ckpt.classifier, ckpt.regressor);
  const std::string config = config_block(ckpt).dump();

  std::size_t directory_size = 4;
  std::size_t payload_size = 0;
  for (const auto& t : tensors) {
    directory_size += 4 + t.name.size() + 4 + 8 * t.tensor->rank() + 8;
    payload_size += 4 * t.tensor->size();
  }

  Writer w;
  w.buffer().reserve(4 + 4 + 8 + config.size() + directory_size + payload_size + 8);
  w.bytes(kMagic, 4);
  w.integer<std::uint32_t>(kCheckpointVersion);
  w.integer<std::uint64_t>(config.size());
  w.bytes(config.data(), config.size());
  w.integer<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  std::uint64_t offset = w.size() + directory_size - 4;
  for (const auto& t : tensors) {
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(t.tensor->rank()));
    for (auto e : t.tensor->shape()) w.integer<std::uint64_t>(e);
    w.integer<std::uint64_t>(offset);
    offset += 4 * t.tensor->size();
  }
  for (const auto& t : tensors) {
    if constexpr (std::endian::native == std::endian::little) {
      w.bytes(t.tensor->data(), 4 * t.tensor->size());
    } else {
      for (float v : t.tensor->values()) w.f32(v);
    }
  }
  w.integer<std::uint64_t>(fnv1a64(w.buffer()));
  return std::move(w.buffer());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ChecksumError("not a checkpoint file (bad magic)");
  }
  Reader r(bytes);
  r.bytes(4);
  const auto version = r.integer<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < 16) throw ChecksumError("checkpoint truncated");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (to_little(stored) != fnv1a64(bytes.first(body))) {
    throw ChecksumError("checkpoint checksum mismatch (corrupt or truncated file)");
  }

  Checkpoint ckpt;
  const auto cfg_len = r.integer<std::uint64_t>();
  const auto cfg_bytes = r.bytes(cfg_len);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(cfg_bytes.begin(), cfg_bytes.end());
    auto meta = j.at("metadata");
    j.erase("metadata");
    ckpt.config = run_config_from_json(j);
    ckpt.metadata.train_events = meta.at("train_events").get<std::size_t>();
    ckpt.metadata.test_events = meta.at("test_events").get<std::size_t>();
    ckpt.metadata.classifier_losses = meta.at("classifier_losses").get<std::vector<double>>();
    ckpt.metadata.regressor_losses = meta.at("regressor_losses").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint config block: ") + e.what());
  }

  ckpt.classifier.dense.name = "classifier.dense";
  ckpt.regressor.conv.name = "regressor.conv";
  ckpt.regressor.dense.name = "regressor.dense";
  const auto tensors = tensor_list(ckpt.classifier, ckpt.regressor);
  const auto count = r.integer<std::uint32_t>();
  if (count != tensors.size()) throw ValidationError("checkpoint: unexpected tensor count");

  struct Entry {
    nn::Shape shape;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  for (const auto& t : tensors) {
    const auto name_len = r.integer<std::uint32_t>();
    const auto name = r.bytes(name_len);
    if (std::string(name.begin(), name.end()) != t.name) {
      throw ValidationError("checkpoint: expected tensor '" + t.name + "'");
    }
    const auto rank = r.integer<std::uint32_t>();
    if (rank > 8) throw ValidationError("checkpoint: implausible tensor rank");
    nn::Shape shape(rank);
    for (auto& e : shape) e = r.integer<std::uint64_t>();
    entries.push_back({std::move(shape), r.integer<std::uint64_t>()});
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& e = entries[i];
    const std::size_t n = nn::shape_size(e.shape);
    if (e.offset > body || n > (body - e.offset) / 4) throw ChecksumError("checkpoint: payload out of range");
    r.seek(e.offset);
    const auto payload = r.bytes(4 * n);
    std::vector<float> values(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t u;
      std::memcpy(&u, payload.data() + 4 * k, 4);
      values[k] = std::bit_cast<float>(to_little(u));
    }
    *tensors[i].tensor = nn::Tensor(e.shape, std::move(values));
  }

  // Shapes must agree with the recorded configuration.
  const auto& c = ckpt.config;
  const std::size_t cells = c.grid.cell_count();
  const std::size_t f = c.model.conv_filters, k = c.model.conv_kernel;
  nn::require_shape(ckpt.classifier.dense.weights, {cells, c.features.classifier_orders.size() * cells}, "checkpoint classifier.dense.weight");
  nn::require_shape(ckpt.classifier.dense.bias, {cells}, "checkpoint classifier.dense.bias");
  nn::require_shape(ckpt.regressor.conv.weights, {f, c.features.regressor_orders.size(), k, k}, "checkpoint regressor.conv.weight");
  nn::require_shape(ckpt.regressor.conv.bias, {f}, "checkpoint regressor.conv.bias");
  nn::require_shape(ckpt.regressor.dense.weights, {cells, f * cells}, "checkpoint regressor.dense.weight");
  nn::require_shape(ckpt.regressor.dense.bias, {cells}, "checkpoint regressor.dense.bias");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  atomic_write(path, std::span<const char>(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw ValidationError("cannot read checkpoint " + path.string());
  }
  return deserialize_checkpoint(bytes);
}

}  // namespace seisint
