#include "tsc/weights_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "tsc/errors.hpp"
#include "tsc/neural.hpp"

namespace tsc {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'S', 'C', 'W'};
constexpr std::uint32_t kMaxNameLength = 1u << 16;
constexpr std::uint64_t kMaxElements = 1ull << 28;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("weight file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

std::string get_string(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  if (n > kMaxNameLength) throw IoError("weight file string too long");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("weight file truncated");
  return s;
}

}  // namespace

const Tensor& WeightFile::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw IoError("weight file has no tensor '" + name + "'");
}

bool WeightFile::contains(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

void write_weights(std::ostream& out, const WeightFile& file) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kWeightFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(file.kind));
  put_u64(out, file.seed);
  put_string(out, file.tag);
  put_u32(out, static_cast<std::uint32_t>(file.tensors.size()));
  for (const auto& t : file.tensors) {
    std::uint64_t n = 1;
    for (auto d : t.dims) n *= d;
    if (n != t.data.size()) {
      throw ContractViolation("tensor '" + t.name + "' dims do not match data");
    }
    put_string(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw IoError("failed writing weight file");
}

WeightFile read_weights(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a TSCW weight file");
  const std::uint32_t version = get_u32(in);
  if (version != kWeightFormatVersion) {
    throw IoError("unsupported weight file version " + std::to_string(version));
  }
  WeightFile file;
  file.kind = static_cast<WeightKind>(get_u32(in));
  file.seed = get_u64(in);
  file.tag = get_string(in);
  const std::uint32_t count = get_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    t.name = get_string(in);
    const std::uint32_t ndim = get_u32(in);
    if (ndim > 8) throw IoError("tensor rank too large");
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.dims.push_back(get_u32(in));
      n *= t.dims.back();
      if (n > kMaxElements) throw IoError("tensor too large");
    }
    t.data.resize(n);
    for (auto& f : t.data) f = std::bit_cast<float>(get_u32(in));
    file.tensors.push_back(std::move(t));
  }
  return file;
}

void save_weights(const std::filesystem::path& path, const WeightFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_weights(out, file);
}

WeightFile load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file " + path.string());
  return read_weights(in);
}

std::string tag_value(const std::string& tag, const std::string& key) {
  std::size_t start = 0;
  while (start <= tag.size()) {
    std::size_t end = tag.find(';', start);
    if (end == std::string::npos) end = tag.size();
    const std::string item = tag.substr(start, end - start);
    const auto eq = item.find('=');
    if (eq != std::string::npos && item.substr(0, eq) == key) {
      return item.substr(eq + 1);
    }
    start = end + 1;
  }
  return {};
}

void append_mlp(WeightFile& file, const std::string& prefix, const Mlp& net) {
  file.tensors.push_back(
      {prefix + ".activation", {1},
       {static_cast<float>(static_cast<int>(net.hidden_activation()))}});
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.bias(l);
    Tensor tw{prefix + "." + std::to_string(l) + ".weight",
              {static_cast<std::uint32_t>(net.sizes()[l + 1]),
               static_cast<std::uint32_t>(net.sizes()[l])},
              {}};
    tw.data.assign(w.begin(), w.end());
    Tensor tb{prefix + "." + std::to_string(l) + ".bias",
              {static_cast<std::uint32_t>(net.sizes()[l + 1])},
              {}};
    tb.data.assign(b.begin(), b.end());
    file.tensors.push_back(std::move(tw));
    file.tensors.push_back(std::move(tb));
  }
}

Mlp extract_mlp(const WeightFile& file, const std::string& prefix) {
  const auto& act = file.find(prefix + ".activation");
  if (act.data.size() != 1) throw IoError("bad activation tensor");
  const int code = static_cast<int>(act.data[0]);
  if (code < 0 || code > 2) throw IoError("unknown activation code");
  std::vector<int> sizes;
  int layers = 0;
  while (file.contains(prefix + "." + std::to_string(layers) + ".weight")) {
    const auto& w = file.find(prefix + "." + std::to_string(layers) + ".weight");
    if (w.dims.size() != 2) throw IoError("weight tensor must be 2-D");
    if (sizes.empty()) {
      sizes.push_back(static_cast<int>(w.dims[1]));
    } else if (sizes.back() != static_cast<int>(w.dims[1])) {
      throw IoError("layer dimensions do not chain in '" + prefix + "'");
    }
    sizes.push_back(static_cast<int>(w.dims[0]));
    ++layers;
  }
  if (layers == 0) throw IoError("no layers for '" + prefix + "'");
  Mlp net(sizes, static_cast<Activation>(code), 0);
  for (int l = 0; l < layers; ++l) {
    const auto& w = file.find(prefix + "." + std::to_string(l) + ".weight");
    const auto& b = file.find(prefix + "." + std::to_string(l) + ".bias");
    auto dw = net.weights(l);
    auto db = net.bias(l);
    if (b.data.size() != db.size()) throw IoError("bias size mismatch");
    std::copy(w.data.begin(), w.data.end(), dw.begin());
    std::copy(b.data.begin(), b.data.end(), db.begin());
  }
  return net;
}

}  // namespace tsc
