#include "sakf/persistence.hpp"

#include <array>
#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace sakf {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'S', 'A', 'K', 'F'};

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

struct Writer {
  std::vector<std::uint8_t> buf;

  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct Reader {
  const std::uint8_t* data;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > len) throw DataError("corrupt model file: truncated field");
  }
  std::uint8_t u8() {
    need(1);
    return data[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(data[pos++]) << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
};

void write_dictionary(Writer& w, const VisualDictionary& dict) {
  w.u32(static_cast<std::uint32_t>(dict.words.rows()));
  w.u32(static_cast<std::uint32_t>(dict.words.cols()));
  for (Eigen::Index r = 0; r < dict.words.rows(); ++r)
    for (Eigen::Index c = 0; c < dict.words.cols(); ++c)
      w.f32(static_cast<float>(dict.words(r, c)));
}

VisualDictionary read_dictionary(Reader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (rows < 1 || cols != kDescriptorDim)
    throw DataError("corrupt model file: dictionary must be k x 128");
  VisualDictionary dict;
  dict.words.resize(rows, cols);
  // Stored single precision; distances downstream are computed in double.
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      dict.words(i, j) = static_cast<double>(r.f32());
  return dict;
}

std::vector<std::uint8_t> serialize(const TrainedModel& m) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u16(kModelFormatVersion);

  const PipelineConfig& c = m.config;
  w.u32(static_cast<std::uint32_t>(c.step));
  w.u32(static_cast<std::uint32_t>(c.patch_size));
  w.u32(static_cast<std::uint32_t>(c.k_fg));
  w.u32(static_cast<std::uint32_t>(c.k_bg));
  w.f64(c.sigma);
  w.u32(static_cast<std::uint32_t>(c.working_width));
  w.f64(c.svm_c);
  w.u64(c.seed);
  w.f64(c.train_ratio);
  w.u32(static_cast<std::uint32_t>(c.runs));
  w.u8(static_cast<std::uint8_t>(c.encode_dict));
  w.u8(1);  // histogram normalization: 1 = L1
  w.u32(static_cast<std::uint32_t>(c.kmeans_max_iters));
  w.f64(c.kmeans_tol);

  w.u64(static_cast<std::uint64_t>(m.fallbacks.images));
  w.u64(static_cast<std::uint64_t>(m.fallbacks.filter_empty));
  w.u64(static_cast<std::uint64_t>(m.fallbacks.fg_empty));

  w.u32(static_cast<std::uint32_t>(m.classes.size()));
  for (const auto& label : m.classes) w.str(label);

  write_dictionary(w, m.dicts.fg);
  write_dictionary(w, m.dicts.bg);

  w.u32(static_cast<std::uint32_t>(m.svm.weights.rows()));
  w.u32(static_cast<std::uint32_t>(m.svm.weights.cols()));
  for (Eigen::Index r = 0; r < m.svm.weights.rows(); ++r)
    for (Eigen::Index cc = 0; cc < m.svm.weights.cols(); ++cc) w.f64(m.svm.weights(r, cc));

  w.u32(crc32(w.buf.data(), w.buf.size()));
  return std::move(w.buf);
}

}  // namespace

void save_model(const TrainedModel& model, const fs::path& path) {
  const std::vector<std::uint8_t> bytes = serialize(model);

  const fs::path tmp = path.string() + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw DataError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  const std::size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
  const bool flush_ok = std::fclose(f) == 0;
  if (written != bytes.size() || !flush_ok) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw DataError("cannot move model into place at " + path.string() + ": " + ec.message());
  }
}

TrainedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a SAKF model: " + path.string());

  Reader r{bytes.data(), bytes.size()};
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kModelFormatVersion)
    throw DataError("unsupported model version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kModelFormatVersion) +
                    "): " + path.string());

  if (bytes.size() < 10) throw DataError("corrupt model file: truncated: " + path.string());
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (crc32(bytes.data(), bytes.size() - 4) != stored)
    throw DataError("corrupt model file (checksum mismatch): " + path.string());
  r.len = bytes.size() - 4;

  TrainedModel m;
  PipelineConfig& c = m.config;
  c.step = static_cast<int>(r.u32());
  c.patch_size = static_cast<int>(r.u32());
  c.k_fg = static_cast<int>(r.u32());
  c.k_bg = static_cast<int>(r.u32());
  c.sigma = r.f64();
  c.working_width = static_cast<int>(r.u32());
  c.svm_c = r.f64();
  c.seed = r.u64();
  c.train_ratio = r.f64();
  c.runs = static_cast<int>(r.u32());
  const std::uint8_t enc = r.u8();
  if (enc > 1) throw DataError("corrupt model file: unknown encode dictionary tag");
  c.encode_dict = static_cast<EncodeDict>(enc);
  if (r.u8() != 1) throw DataError("corrupt model file: unknown histogram normalization");
  c.kmeans_max_iters = static_cast<int>(r.u32());
  c.kmeans_tol = r.f64();

  m.fallbacks.images = static_cast<std::int64_t>(r.u64());
  m.fallbacks.filter_empty = static_cast<std::int64_t>(r.u64());
  m.fallbacks.fg_empty = static_cast<std::int64_t>(r.u64());

  const std::uint32_t n_classes = r.u32();
  if (n_classes < 2) throw DataError("corrupt model file: fewer than 2 classes");
  for (std::uint32_t i = 0; i < n_classes; ++i) m.classes.push_back(r.str());

  m.dicts.fg = read_dictionary(r);
  m.dicts.bg = read_dictionary(r);

  const std::uint32_t svm_rows = r.u32();
  const std::uint32_t svm_cols = r.u32();
  if (svm_rows != n_classes)
    throw DataError("corrupt model file: SVM class count does not match label table");
  const int expected_dim =
      (c.encode_dict == EncodeDict::fg ? m.dicts.fg.k() : m.dicts.fg.k() + m.dicts.bg.k()) + 1;
  if (static_cast<int>(svm_cols) != expected_dim)
    throw DataError("corrupt model file: SVM weight dimension does not match dictionaries");
  m.svm.weights.resize(svm_rows, svm_cols);
  for (std::uint32_t i = 0; i < svm_rows; ++i)
    for (std::uint32_t j = 0; j < svm_cols; ++j) m.svm.weights(i, j) = r.f64();
  m.svm.c = c.svm_c;

  if (r.pos != r.len)
    throw DataError("corrupt model file: trailing bytes: " + path.string());

  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw DataError("corrupt model file: invalid configuration (" + std::string(e.what()) +
                    "): " + path.string());
  }
  return m;
}

}  // namespace sakf
