// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/model/checkpoint.hpp"

#include <cstring>

#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"

namespace msnet::model {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'N', 'E', 'T', 'C', 'K', 'P'};
constexpr std::size_t kDigestSize = 64;
constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 8 + kDigestSize;

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_ += s;
  }
  void doubles(std::span<const double> v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& data, std::size_t pos, std::string source)
      : data_(data), pos_(pos), source_(std::move(source)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles(std::size_t n) {
    if (n > (data_.size() - pos_) / sizeof(double)) fail("payload ends early");
    std::vector<double> v(n);
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  bool at_end() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(errc::kCorrupt, source_ + ": corrupt checkpoint: " + what);
  }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) fail("payload ends early");
  }
  const std::string& data_;
  std::size_t pos_;
  std::string source_;
};

void write_vocab(Writer& w, const features::Vocabulary& v) {
  w.pod<std::uint64_t>(v.size());
  for (std::int64_t x : v.values()) w.pod<std::int64_t>(x);
}

features::Vocabulary read_vocab(Reader& r) {
  const auto n = r.pod<std::uint64_t>();
  std::vector<std::int64_t> values;
  for (std::uint64_t i = 0; i < n; ++i) values.push_back(r.pod<std::int64_t>());
  return features::Vocabulary::from_values(values);
}

}  // namespace

std::string serialize_checkpoint(const CtrModel& model, const OptimizerState& state, std::size_t epochs_completed,
                                 const std::string& dataset_hash) {
  Writer w;
  w.str(model.config().to_json().dump());
  w.str(model.config().hash());
  w.str(dataset_hash);
  w.pod<std::uint64_t>(epochs_completed);
  write_vocab(w, model.vocabs().items);
  write_vocab(w, model.vocabs().categories);
  const auto& params = model.params();
  w.pod<std::uint64_t>(params.size());
  for (const auto& name : params.names()) {
    const ad::Parameter& p = params.get(name);
    w.str(name);
    w.pod<std::uint8_t>(p.sparse ? 1 : 0);
    w.pod<std::uint64_t>(p.value.rank());
    for (std::size_t d : p.value.shape()) w.pod<std::uint64_t>(d);
    w.doubles(p.value.values());
  }
  w.pod<std::uint64_t>(state.steps);
  w.pod<std::uint64_t>(state.acc.size());
  for (const auto& [name, acc] : state.acc) {
    w.str(name);
    w.pod<std::uint64_t>(acc.size());
    w.doubles(acc);
  }
  const std::string payload = std::move(w.bytes());
  Writer h;
  h.bytes().append(kMagic, sizeof(kMagic));
  h.pod<std::uint32_t>(kCheckpointVersion);
  h.pod<std::uint64_t>(payload.size());
  h.bytes() += sha256_hex(payload);
  h.bytes() += payload;
  return std::move(h.bytes());
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& source) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(errc::kCorrupt, source + ": not a checkpoint file (bad magic or truncated header)");
  }
  Reader hr(bytes, sizeof(kMagic), source);
  const auto version = hr.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(errc::kVersion, source + ": checkpoint version " + std::to_string(version) +
                                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto size = hr.pod<std::uint64_t>();
  if (bytes.size() - kHeaderSize != size) {
    throw Error(errc::kCorrupt, source + ": checkpoint payload is " + std::to_string(bytes.size() - kHeaderSize) +
                                    " bytes, header says " + std::to_string(size) + " (truncated?)");
  }
  const std::string digest = bytes.substr(kHeaderSize - kDigestSize, kDigestSize);
  const std::string payload = bytes.substr(kHeaderSize);
  if (sha256_hex(payload) != digest) {
    throw Error(errc::kCorrupt, source + ": checkpoint digest mismatch");
  }

  Reader r(payload, 0, source);
  Checkpoint c;
  const std::string config_json = r.str();
  c.config_hash = r.str();
  c.dataset_hash = r.str();
  c.epochs_completed = r.pod<std::uint64_t>();
  try {
    c.config = ModelConfig::from_json(nlohmann::json::parse(config_json));
  } catch (const std::exception& e) {
    r.fail(std::string("config: ") + e.what());
  }
  if (c.config.hash() != c.config_hash) r.fail("stored config hash does not match its config");
  c.vocabs.items = read_vocab(r);
  c.vocabs.categories = read_vocab(r);
  const auto n_params = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    const bool sparse = r.pod<std::uint8_t>() != 0;
    const auto rank = r.pod<std::uint64_t>();
    if (rank > 8) r.fail("parameter '" + name + "' has rank " + std::to_string(rank));
    ad::Shape shape;
    for (std::uint64_t k = 0; k < rank; ++k) shape.push_back(r.pod<std::uint64_t>());
    c.params.add(name, ad::Tensor(shape, r.doubles(ad::shape_size(shape))), sparse);
  }
  c.optimizer.steps = r.pod<std::uint64_t>();
  const auto n_acc = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_acc; ++i) {
    const std::string name = r.str();
    c.optimizer.acc[name] = r.doubles(r.pod<std::uint64_t>());
  }
  if (!r.at_end()) r.fail("trailing bytes after payload");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const CtrModel& model, const OptimizerState& state,
                     std::size_t epochs_completed, const std::string& dataset_hash) {
  write_file_atomic(path, serialize_checkpoint(model, state, epochs_completed, dataset_hash));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  if (!std::filesystem::exists(path)) {
    throw Error(errc::kIo, "checkpoint '" + path.string() + "' does not exist");
  }
  Checkpoint c = deserialize_checkpoint(read_file(path), path.string());
  if (expected && expected->hash() != c.config_hash) {
    throw Error(errc::kConfigMismatch, path.string() + ": checkpoint config hash " + c.config_hash +
                                           " does not match expected " + expected->hash() + " (checkpoint config " +
                                           c.config.to_json().dump() + ")");
  }
  return c;
}

CtrModel model_from(Checkpoint& checkpoint) {
  return CtrModel(checkpoint.config, checkpoint.vocabs, std::move(checkpoint.params));
}

}  // namespace msnet::model
