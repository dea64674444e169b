#include "tsc/kplanes.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/errors.hpp"
#include "tsc/random.hpp"
#include "tsc/state_repr.hpp"
#include "tsc/weights_io.hpp"

namespace tsc {

namespace {

struct GroupLayout {
  const char* name;
  std::vector<int> indices;
};

const std::vector<GroupLayout>& group_layouts() {
  using S = ExpandedState19;
  static const std::vector<GroupLayout> kLayouts{
      {"time", {S::kCycleTime, S::kPhaseTime, S::kCycles}},
      {"queue", {S::kQueue, S::kQueue + 1, S::kQueue + 2, S::kQueue + 3}},
      {"dqueue",
       {S::kQueueChange, S::kQueueChange + 1, S::kQueueChange + 2,
        S::kQueueChange + 3}},
      {"green", {S::kGreen, S::kGreen + 1, S::kGreen + 2, S::kGreen + 3}},
  };
  return kLayouts;
}

std::vector<std::array<int, 2>> all_pairs(int d) {
  std::vector<std::array<int, 2>> pairs;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) pairs.push_back({i, j});
  }
  return pairs;
}

}  // namespace

std::vector<double> bilinear_sample(const FeaturePlane& plane, double u,
                                    double v) {
  const int r = plane.resolution;
  if (r < 2) throw ContractViolation("plane resolution must be >= 2");
  u = std::clamp(std::isnan(u) ? 0.0 : u, 0.0, 1.0);
  v = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
  const double x = u * (r - 1);
  const double y = v * (r - 1);
  const int i0 = std::min(static_cast<int>(std::floor(x)), r - 2);
  const int j0 = std::min(static_cast<int>(std::floor(y)), r - 2);
  const double fx = x - i0;
  const double fy = y - j0;
  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  std::vector<double> out(plane.feature_dim);
  for (int f = 0; f < plane.feature_dim; ++f) {
    out[f] = w00 * plane.at(i0, j0, f) + w10 * plane.at(i0 + 1, j0, f) +
             w01 * plane.at(i0, j0 + 1, f) + w11 * plane.at(i0 + 1, j0 + 1, f);
  }
  return out;
}

KPlanesParams::KPlanesParams(std::uint64_t seed, int resolution,
                             int feature_dim)
    : seed_(seed), resolution_(resolution), feature_dim_(feature_dim) {
  if (resolution < 2) throw ConfigError("K-Planes resolution must be >= 2");
  if (feature_dim < 1) throw ConfigError("K-Planes feature_dim must be >= 1");
  Rng rng(seed);
  for (const auto& layout : group_layouts()) {
    PlaneGroup g;
    g.state_indices = layout.indices;
    g.pairs = all_pairs(static_cast<int>(layout.indices.size()));
    for (std::size_t k = 0; k < g.pairs.size(); ++k) {
      FeaturePlane plane;
      plane.resolution = resolution;
      plane.feature_dim = feature_dim;
      plane.values.resize(static_cast<std::size_t>(resolution) * resolution *
                          feature_dim);
      for (double& x : plane.values) x = rng.uniform(0.5, 1.5);
      g.planes.push_back(std::move(plane));
    }
    groups_.push_back(std::move(g));
  }
}

int KPlanesParams::num_planes() const {
  int n = 0;
  for (const auto& g : groups_) n += static_cast<int>(g.planes.size());
  return n;
}

int KPlanesParams::output_size() const {
  return static_cast<int>(groups_.size()) * feature_dim_ + kNumPhases;
}

void KPlanesParams::fill(double value) {
  for (auto& g : groups_) {
    for (auto& p : g.planes) std::fill(p.values.begin(), p.values.end(), value);
  }
}

WeightFile KPlanesParams::to_weights() const {
  WeightFile file;
  file.kind = WeightKind::kKPlanes;
  file.seed = seed_;
  file.tag = "resolution=" + std::to_string(resolution_) +
             ";features=" + std::to_string(feature_dim_);
  const auto& layouts = group_layouts();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (std::size_t k = 0; k < groups_[g].planes.size(); ++k) {
      const auto& plane = groups_[g].planes[k];
      Tensor t{std::string(layouts[g].name) + "." + std::to_string(k),
               {static_cast<std::uint32_t>(resolution_),
                static_cast<std::uint32_t>(resolution_),
                static_cast<std::uint32_t>(feature_dim_)},
               {}};
      t.data.assign(plane.values.begin(), plane.values.end());
      file.tensors.push_back(std::move(t));
    }
  }
  return file;
}

KPlanesParams KPlanesParams::from_weights(const WeightFile& file) {
  if (file.kind != WeightKind::kKPlanes) {
    throw IoError("weight file does not hold K-Planes grids");
  }
  KPlanesParams p;
  p.seed_ = file.seed;
  for (const auto& layout : group_layouts()) {
    PlaneGroup g;
    g.state_indices = layout.indices;
    g.pairs = all_pairs(static_cast<int>(layout.indices.size()));
    for (std::size_t k = 0; k < g.pairs.size(); ++k) {
      const auto& t = file.find(std::string(layout.name) + "." + std::to_string(k));
      if (t.dims.size() != 3 || t.dims[0] != t.dims[1]) {
        throw IoError("K-Planes tensor must be R x R x F");
      }
      FeaturePlane plane;
      plane.resolution = static_cast<int>(t.dims[0]);
      plane.feature_dim = static_cast<int>(t.dims[2]);
      if (p.resolution_ == 0) {
        p.resolution_ = plane.resolution;
        p.feature_dim_ = plane.feature_dim;
      } else if (p.resolution_ != plane.resolution ||
                 p.feature_dim_ != plane.feature_dim) {
        throw IoError("inconsistent K-Planes tensor shapes");
      }
      plane.values.assign(t.data.begin(), t.data.end());
      g.planes.push_back(std::move(plane));
    }
    p.groups_.push_back(std::move(g));
  }
  return p;
}

std::vector<double> kplanes_transform(const KPlanesParams& params,
                                      const ExpandedState19& s) {
  std::vector<double> out;
  out.reserve(params.output_size());
  for (const auto& group : params.groups()) {
    std::vector<double> acc(params.feature_dim(), 1.0);
    for (std::size_t k = 0; k < group.pairs.size(); ++k) {
      auto coord = [&](int local) {
        const int idx = group.state_indices[local];
        const double x = s[idx];
        if (idx >= ExpandedState19::kQueueChange &&
            idx < ExpandedState19::kQueueChange + 4) {
          return (x + 1.0) / 2.0;
        }
        return x;
      };
      const auto f = bilinear_sample(group.planes[k], coord(group.pairs[k][0]),
                                     coord(group.pairs[k][1]));
      for (int i = 0; i < params.feature_dim(); ++i) acc[i] *= f[i];
    }
    out.insert(out.end(), acc.begin(), acc.end());
  }
  for (int p = 0; p < kNumPhases; ++p) {
    out.push_back(s[ExpandedState19::kPhase + p]);
  }
  return out;
}

}  // namespace tsc
