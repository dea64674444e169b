#ifndef TSC_KPLANES_HPP_
#define TSC_KPLANES_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tsc {

struct ExpandedState19;
struct WeightFile;

// R x R grid of F-dimensional feature vectors. Node (i, j) sits at
// coordinates (i / (R-1), j / (R-1)); the first sample coordinate indexes i.
struct FeaturePlane {
  int resolution = 0;
  int feature_dim = 0;
  std::vector<double> values;  // [(i * R + j) * F + f]

  double at(int i, int j, int f) const {
    return values[(static_cast<std::size_t>(i) * resolution + j) * feature_dim + f];
  }

  bool operator==(const FeaturePlane&) const = default;
};

// Bilinear interpolation of the four nodes around (u, v); coordinates are
// clamped to [0, 1] first.
std::vector<double> bilinear_sample(const FeaturePlane& plane, double u,
                                    double v);

// A continuous group of the 19-D state: which components it holds and
// one plane per unordered pair of them.
struct PlaneGroup {
  std::vector<int> state_indices;
  std::vector<std::array<int, 2>> pairs;  // indices into state_indices
  std::vector<FeaturePlane> planes;       // planes[k] serves pairs[k]

  bool operator==(const PlaneGroup&) const = default;
};

// Fixed, randomly initialized factorized-plane feature transform. Groups
// are time (T_c, t_p, N_cycles), queue, queue change, and green.
class KPlanesParams {
 public:
  static constexpr int kDefaultResolution = 8;
  static constexpr int kDefaultFeatureDim = 16;

  // Grids filled from uniform(0.5, 1.5) with the given seed.
  explicit KPlanesParams(std::uint64_t seed,
                         int resolution = kDefaultResolution,
                         int feature_dim = kDefaultFeatureDim);

  int resolution() const { return resolution_; }
  int feature_dim() const { return feature_dim_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<PlaneGroup>& groups() const { return groups_; }
  int num_planes() const;
  // 4 * F + 4.
  int output_size() const;

  // Test hook: overwrite every grid value.
  void fill(double value);

  WeightFile to_weights() const;
  static KPlanesParams from_weights(const WeightFile& file);

  bool operator==(const KPlanesParams&) const = default;

 private:
  KPlanesParams() = default;

  std::uint64_t seed_ = 0;
  int resolution_ = 0;
  int feature_dim_ = 0;
  std::vector<PlaneGroup> groups_;
};

// Samples every pair plane of each group, multiplies the samples
// element-wise within the group, and concatenates the group features with
// the one-hot phase. Queue changes are mapped from [-1, 1] to [0, 1].
std::vector<double> kplanes_transform(const KPlanesParams& params,
                                      const ExpandedState19& s);

}  // namespace tsc

#endif  // TSC_KPLANES_HPP_
