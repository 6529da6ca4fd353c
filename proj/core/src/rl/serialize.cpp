#include "edgerl/rl/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace edgerl::rl {

namespace {

constexpr std::uint32_t kMagic = 0x41445245;  // "ERDA"
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

void put_layer(std::vector<std::uint8_t>& out, const std::string& name,
               const nn::LayerParams& p) {
  put_string(out, name);
  put_u32(out, static_cast<std::uint32_t>(p.out_dim()));
  put_u32(out, static_cast<std::uint32_t>(p.in_dim()));
  for (double w : p.weights.data) put_f64(out, w);
  for (double b : p.bias) put_f64(out, b);
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) throw std::runtime_error("network blob truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
    return v;
  }
  double f64() {
    if (pos + 8 > buf.size()) throw std::runtime_error("network blob truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string string() {
    const std::uint32_t n = u32();
    if (pos + n > buf.size()) throw std::runtime_error("network blob truncated");
    std::string s(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                  buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return s;
  }
  nn::LayerParams layer(std::string* name) {
    *name = string();
    const std::uint32_t out_dim = u32();
    const std::uint32_t in_dim = u32();
    nn::LayerParams p(out_dim, in_dim);
    for (double& w : p.weights.data) w = f64();
    for (double& b : p.bias) b = f64();
    return p;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_network(const AgentNetwork& net) {
  std::vector<std::uint8_t> out;
  put_u32(out, kMagic);
  put_u32(out, kVersion);
  put_u32(out, net.layout == HeadLayout::kCascade ? 0u : 1u);
  put_u32(out, static_cast<std::uint32_t>(net.n_res));
  put_u32(out, static_cast<std::uint32_t>(net.n_bs));
  put_u32(out, static_cast<std::uint32_t>(net.n_mt));
  if (net.layout == HeadLayout::kCascade) {
    put_u32(out, 6);
    put_layer(out, "layer1", net.layer1);
    put_layer(out, "layer2", net.layer2);
    put_layer(out, "value", net.value);
    put_layer(out, "head_res", net.head_res);
    put_layer(out, "head_bs", net.head_bs);
    put_layer(out, "head_mt", net.head_mt);
  } else {
    put_u32(out, 4);
    put_layer(out, "layer1", net.layer1);
    put_layer(out, "layer2", net.layer2);
    put_layer(out, "value", net.value);
    put_layer(out, "head_joint", net.head_joint);
  }
  return out;
}

AgentNetwork deserialize_network(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  if (r.u32() != kMagic) throw std::runtime_error("not a network blob");
  if (r.u32() != kVersion) throw std::runtime_error("unsupported network version");
  AgentNetwork net;
  net.layout = r.u32() == 0 ? HeadLayout::kCascade : HeadLayout::kSingleHead;
  net.n_res = r.u32();
  net.n_bs = r.u32();
  net.n_mt = r.u32();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name;
    nn::LayerParams p = r.layer(&name);
    if (name == "layer1") net.layer1 = std::move(p);
    else if (name == "layer2") net.layer2 = std::move(p);
    else if (name == "value") net.value = std::move(p);
    else if (name == "head_res") net.head_res = std::move(p);
    else if (name == "head_bs") net.head_bs = std::move(p);
    else if (name == "head_mt") net.head_mt = std::move(p);
    else if (name == "head_joint") net.head_joint = std::move(p);
    else throw std::runtime_error("unknown layer key: " + name);
  }
  return net;
}

void save_network(const std::filesystem::path& path, const AgentNetwork& net) {
  const auto bytes = serialize_network(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

AgentNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_network(bytes);
}

}  // namespace edgerl::rl
