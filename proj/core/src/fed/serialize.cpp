#include "edgerl/fed/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace edgerl::fed {

namespace {

constexpr std::uint32_t kMagic = 0x47445245;  // "ERDG"
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_layer(std::vector<std::uint8_t>& out, const nn::LayerParams& p) {
  put_u32(out, static_cast<std::uint32_t>(p.out_dim()));
  put_u32(out, static_cast<std::uint32_t>(p.in_dim()));
  for (double w : p.weights.data) put_f64(out, w);
  for (double b : p.bias) put_f64(out, b);
}

struct Reader {
  std::vector<std::uint8_t> buf;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) throw std::runtime_error("global blob truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
    return v;
  }
  double f64() {
    if (pos + 8 > buf.size()) throw std::runtime_error("global blob truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string string() {
    const std::uint32_t n = u32();
    if (pos + n > buf.size()) throw std::runtime_error("global blob truncated");
    std::string s(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                  buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return s;
  }
  nn::LayerParams layer() {
    const std::uint32_t out_dim = u32();
    const std::uint32_t in_dim = u32();
    nn::LayerParams p(out_dim, in_dim);
    for (double& w : p.weights.data) w = f64();
    for (double& b : p.bias) b = f64();
    return p;
  }
};

}  // namespace

void save_global(const std::filesystem::path& path, const GlobalModel& model) {
  std::vector<std::uint8_t> out;
  put_u32(out, kMagic);
  put_u32(out, kVersion);
  put_layer(out, model.layer1);
  put_layer(out, model.layer2);
  put_layer(out, model.value);
  put_u32(out, static_cast<std::uint32_t>(model.banks.size()));
  for (const auto& [key, head] : model.banks) {
    put_string(out, key.role);
    put_u32(out, static_cast<std::uint32_t>(key.in_dim));
    put_u32(out, static_cast<std::uint32_t>(key.out_dim));
    put_layer(out, head);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
}

GlobalModel load_global(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read " + path.string());
  Reader r;
  r.buf.assign((std::istreambuf_iterator<char>(file)),
               std::istreambuf_iterator<char>());
  if (r.u32() != kMagic) throw std::runtime_error("not a global model blob");
  if (r.u32() != kVersion) throw std::runtime_error("unsupported global version");
  GlobalModel model;
  model.layer1 = r.layer();
  model.layer2 = r.layer();
  model.value = r.layer();
  const std::uint32_t banks = r.u32();
  for (std::uint32_t i = 0; i < banks; ++i) {
    HeadKey key;
    key.role = r.string();
    key.in_dim = r.u32();
    key.out_dim = r.u32();
    model.banks.emplace(std::move(key), r.layer());
  }
  return model;
}

}  // namespace edgerl::fed
