#include "clap/nn.hpp"

#include <cstring>
#include <fstream>

namespace clap {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

constexpr std::uint8_t kKindMlp = 0;
constexpr std::uint8_t kKindVector = 1;
constexpr std::uint8_t kKindScalar = 2;
constexpr std::uint8_t kKindU64 = 3;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void put_bytes(std::vector<std::uint8_t>& out, const void* src, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(src);
  out.insert(out.end(), p, p + n);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  put_bytes(out, &v, sizeof(T));
}

void put_double_array(std::vector<std::uint8_t>& out, const double* data, std::size_t n) {
  put_bytes(out, data, n * sizeof(double));
}

class ByteCursor {
 public:
  ByteCursor(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T take() {
    T v;
    take_bytes(&v, sizeof(T));
    return v;
  }

  void take_bytes(void* dst, std::size_t n) {
    if (pos_ + n > size_) throw CheckpointError("checkpoint truncated");
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return size_ - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> encode_mlp(const MlpD& mlp) {
  std::vector<std::uint8_t> out;
  const auto sizes = mlp.layer_sizes();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mlp.layer_count()));
  for (int s : sizes) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (Activation a : mlp.activations) put<std::uint8_t>(out, static_cast<std::uint8_t>(a));
  for (int l = 0; l < mlp.layer_count(); ++l) {
    put_double_array(out, mlp.weights[static_cast<std::size_t>(l)].data(),
                     static_cast<std::size_t>(mlp.weights[static_cast<std::size_t>(l)].size()));
    put_double_array(out, mlp.biases[static_cast<std::size_t>(l)].data(),
                     static_cast<std::size_t>(mlp.biases[static_cast<std::size_t>(l)].size()));
  }
  return out;
}

MlpD decode_mlp(const std::vector<std::uint8_t>& payload) {
  ByteCursor cur(payload.data(), payload.size());
  const auto layers = cur.take<std::uint32_t>();
  std::vector<int> sizes(layers + 1);
  for (auto& s : sizes) s = static_cast<int>(cur.take<std::uint32_t>());
  MlpD mlp;
  mlp.activations.resize(layers);
  for (auto& a : mlp.activations) {
    const auto raw = cur.take<std::uint8_t>();
    if (raw > 3) throw CheckpointError("checkpoint: unknown activation code");
    a = static_cast<Activation>(raw);
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    cur.take_bytes(w.data(), static_cast<std::size_t>(w.size()) * sizeof(double));
    Eigen::VectorXd b(sizes[l + 1]);
    cur.take_bytes(b.data(), static_cast<std::size_t>(b.size()) * sizeof(double));
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(std::move(b));
  }
  return mlp;
}

}  // namespace

void CheckpointWriter::add_mlp(const std::string& name, const MlpD& mlp) {
  sections_.push_back({name, kKindMlp, encode_mlp(mlp)});
}

void CheckpointWriter::add_vector(const std::string& name, const Eigen::VectorXd& v) {
  std::vector<std::uint8_t> payload;
  put<std::uint64_t>(payload, static_cast<std::uint64_t>(v.size()));
  put_double_array(payload, v.data(), static_cast<std::size_t>(v.size()));
  sections_.push_back({name, kKindVector, std::move(payload)});
}

void CheckpointWriter::add_scalar(const std::string& name, double v) {
  std::vector<std::uint8_t> payload;
  put<double>(payload, v);
  sections_.push_back({name, kKindScalar, std::move(payload)});
}

void CheckpointWriter::add_u64(const std::string& name, std::uint64_t v) {
  std::vector<std::uint8_t> payload;
  put<std::uint64_t>(payload, v);
  sections_.push_back({name, kKindU64, std::move(payload)});
}

std::vector<std::uint8_t> CheckpointWriter::bytes() const {
  std::vector<std::uint8_t> body;
  put<std::uint32_t>(body, kVersion);
  put<std::uint32_t>(body, static_cast<std::uint32_t>(sections_.size()));
  for (const auto& s : sections_) {
    put<std::uint32_t>(body, static_cast<std::uint32_t>(s.name.size()));
    put_bytes(body, s.name.data(), s.name.size());
    put<std::uint8_t>(body, s.kind);
    put<std::uint64_t>(body, static_cast<std::uint64_t>(s.payload.size()));
    put_bytes(body, s.payload.data(), s.payload.size());
  }
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, sizeof(kMagic));
  out.insert(out.end(), body.begin(), body.end());
  put<std::uint64_t>(out, fnv1a(body.data(), body.size()));
  return out;
}

void CheckpointWriter::write(const std::filesystem::path& path) const {
  const auto data = bytes();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw CheckpointError("checkpoint write failed: " + path.string());
}

CheckpointReader::CheckpointReader(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  parse(data);
}

CheckpointReader::CheckpointReader(const std::vector<std::uint8_t>& bytes) { parse(bytes); }

void CheckpointReader::parse(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t))
    throw CheckpointError("checkpoint too small");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint: bad magic");

  const std::size_t body_size = bytes.size() - sizeof(kMagic) - sizeof(std::uint64_t);
  const std::uint8_t* body = bytes.data() + sizeof(kMagic);
  std::uint64_t stored_sum = 0;
  std::memcpy(&stored_sum, bytes.data() + bytes.size() - sizeof(std::uint64_t), sizeof(std::uint64_t));
  if (fnv1a(body, body_size) != stored_sum) throw CheckpointError("checkpoint: checksum mismatch");

  ByteCursor cur(body, body_size);
  const auto version = cur.take<std::uint32_t>();
  if (version != kVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = cur.take<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = cur.take<std::uint32_t>();
    std::string name(name_len, '\0');
    cur.take_bytes(name.data(), name_len);
    Section s;
    s.kind = cur.take<std::uint8_t>();
    const auto payload_len = cur.take<std::uint64_t>();
    s.payload.resize(payload_len);
    cur.take_bytes(s.payload.data(), payload_len);
    sections_.emplace(std::move(name), std::move(s));
  }
}

bool CheckpointReader::has(const std::string& name) const { return sections_.count(name) > 0; }

MlpD CheckpointReader::mlp(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.kind != kKindMlp)
    throw CheckpointError("checkpoint: missing mlp section '" + name + "'");
  return decode_mlp(it->second.payload);
}

Eigen::VectorXd CheckpointReader::vector(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.kind != kKindVector)
    throw CheckpointError("checkpoint: missing vector section '" + name + "'");
  ByteCursor cur(it->second.payload.data(), it->second.payload.size());
  const auto n = cur.take<std::uint64_t>();
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  cur.take_bytes(v.data(), n * sizeof(double));
  return v;
}

double CheckpointReader::scalar(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.kind != kKindScalar)
    throw CheckpointError("checkpoint: missing scalar section '" + name + "'");
  ByteCursor cur(it->second.payload.data(), it->second.payload.size());
  return cur.take<double>();
}

std::uint64_t CheckpointReader::u64(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.kind != kKindU64)
    throw CheckpointError("checkpoint: missing u64 section '" + name + "'");
  ByteCursor cur(it->second.payload.data(), it->second.payload.size());
  return cur.take<std::uint64_t>();
}

void save_params(const MlpD& mlp, const std::filesystem::path& path) {
  CheckpointWriter w;
  w.add_mlp("params", mlp);
  w.write(path);
}

MlpD load_params(const std::filesystem::path& path) {
  CheckpointReader r(path);
  return r.mlp("params");
}

bool same_params(const MlpD& a, const MlpD& b) {
  if (a.layer_count() != b.layer_count()) return false;
  if (a.activations != b.activations) return false;
  for (int l = 0; l < a.layer_count(); ++l) {
    const auto& wa = a.weights[static_cast<std::size_t>(l)];
    const auto& wb = b.weights[static_cast<std::size_t>(l)];
    if (wa.rows() != wb.rows() || wa.cols() != wb.cols()) return false;
    if (std::memcmp(wa.data(), wb.data(), sizeof(double) * static_cast<std::size_t>(wa.size())) != 0)
      return false;
    const auto& ba = a.biases[static_cast<std::size_t>(l)];
    const auto& bb = b.biases[static_cast<std::size_t>(l)];
    if (ba.size() != bb.size()) return false;
    if (std::memcmp(ba.data(), bb.data(), sizeof(double) * static_cast<std::size_t>(ba.size())) != 0)
      return false;
  }
  return true;
}

}  // namespace clap
