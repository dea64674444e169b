#ifndef TSC_WEIGHTS_IO_HPP_
#define TSC_WEIGHTS_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsc {

class Mlp;

// Flat little-endian weight file.
//
//   magic    4 bytes  "TSCW"
//   version  u32      kWeightFormatVersion
//   kind     u32      WeightKind
//   seed     u64      seed the contents were generated/trained with
//   tag      u32 length + UTF-8 bytes (free-form "key=value;..." metadata)
//   count    u32      number of tensors
//   then per tensor:
//     name   u32 length + bytes
//     ndim   u32, dims u32[ndim]
//     data   f32[prod(dims)], row-major
inline constexpr std::uint32_t kWeightFormatVersion = 1;

enum class WeightKind : std::uint32_t {
  kMlp = 1,
  kKPlanes = 2,
  kPolicyBundle = 3,
  kAutoencoder = 4,
  kQNetwork = 5,
};

struct Tensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  bool operator==(const Tensor&) const = default;
};

struct WeightFile {
  WeightKind kind = WeightKind::kMlp;
  std::uint64_t seed = 0;
  std::string tag;
  std::vector<Tensor> tensors;

  const Tensor& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  bool operator==(const WeightFile&) const = default;
};

void write_weights(std::ostream& out, const WeightFile& file);
WeightFile read_weights(std::istream& in);
void save_weights(const std::filesystem::path& path, const WeightFile& file);
WeightFile load_weights(const std::filesystem::path& path);

// Value of `key` in a "k=v;k=v" tag, or "" when absent.
std::string tag_value(const std::string& tag, const std::string& key);

// Stores layer tensors "<prefix>.<l>.weight", "<prefix>.<l>.bias" and a
// one-element "<prefix>.activation" code.
void append_mlp(WeightFile& file, const std::string& prefix, const Mlp& net);
Mlp extract_mlp(const WeightFile& file, const std::string& prefix);

}  // namespace tsc

#endif  // TSC_WEIGHTS_IO_HPP_
