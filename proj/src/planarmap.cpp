#include "lielio/planarmap.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace lielio {

VoxelKey voxel_key(const Vec3& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

PlaneFeature fit_plane(const Vec3& mean, const Mat3& scatter, std::size_t n) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (scatter + scatter.transpose()));
  const Vec3 ev = es.eigenvalues();  // ascending
  const Mat3 V = es.eigenvectors();

  Vec3 normal = V.col(0);
  if (ev(1) - ev(0) <= 1e-12 * std::max(std::abs(ev(2)), 1e-300)) {
    const Eigen::Matrix<double, 3, 2> basis = V.leftCols<2>();
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3 proj = basis * (basis.transpose() * Vec3::Unit(axis));
      if (proj.norm() > 1e-6) {
        normal = proj;
        break;
      }
    }
  }
  normal.normalize();
  int j = 0;
  normal.cwiseAbs().maxCoeff(&j);
  if (normal(j) < 0) normal = -normal;

  PlaneFeature pl;
  pl.normal = normal;
  pl.centroid = mean;
  // Rayleigh quotient: tighter than the eigenvalue itself for flat scatters.
  pl.mse = std::max(normal.dot(scatter * normal), 0.0);
  pl.spread = std::max(ev(1), 0.0);
  pl.n_points = n;
  return pl;
}

void PlanarMap::insert_points(std::span<const Vec3> pts) {
  std::vector<VoxelKey> touched;
  for (const Vec3& p : pts) {
    const VoxelKey k = voxel_key(p, cfg_.voxel_size);
    auto [it, inserted] = voxels_.try_emplace(k);
    Voxel& v = it->second;
    if (inserted) {
      v.anchor = Vec3(static_cast<double>(k.ix), static_cast<double>(k.iy),
                      static_cast<double>(k.iz)) * cfg_.voxel_size;
    }
    const Vec3 d = p - v.anchor;
    v.n += 1;
    const Vec3 before = d - v.mean;
    v.mean += before / static_cast<double>(v.n);
    v.m2 += before * (d - v.mean).transpose();
    touched.push_back(k);
  }
  for (const VoxelKey& k : touched) {
    Voxel& v = voxels_.at(k);
    if (v.n < cfg_.min_points) {
      v.plane.reset();
      continue;
    }
    const Mat3 scatter = v.m2 / static_cast<double>(v.n);
    v.plane = fit_plane(v.anchor + v.mean, scatter, v.n);
  }
}

bool PlanarMap::serves(const PlaneFeature& pl) const {
  return pl.n_points >= cfg_.min_points && pl.mse < cfg_.max_plane_mse &&
         pl.spread >= cfg_.min_plane_spread;
}

std::optional<PlaneFeature> PlanarMap::plane_at(const VoxelKey& k) const {
  const auto it = voxels_.find(k);
  if (it == voxels_.end()) return std::nullopt;
  return it->second.plane;
}

std::size_t PlanarMap::num_planes() const {
  std::size_t n = 0;
  for (const auto& [k, v] : voxels_) n += (v.plane && serves(*v.plane)) ? 1 : 0;
  return n;
}

std::optional<PlaneFeature> PlanarMap::match_plane(const Vec3& p_world,
                                                   const Vec3& viewpoint) const {
  const VoxelKey k = voxel_key(p_world, cfg_.voxel_size);
  auto passing = [&](const VoxelKey& key) -> std::optional<PlaneFeature> {
    auto pl = plane_at(key);
    if (!pl || !serves(*pl)) return std::nullopt;
    if (std::abs(pl->signed_distance(p_world)) >= cfg_.max_match_distance) return std::nullopt;
    return pl;
  };

  std::optional<PlaneFeature> best = passing(k);
  // A well-populated voxel that fails the planarity gate holds more than one
  // surface; its neighbours would only supply a wrong plane.
  const auto own = plane_at(k);
  const bool own_nonplanar = own && own->n_points >= cfg_.min_points &&
                             own->spread >= cfg_.min_plane_spread &&
                             !(own->mse < cfg_.max_plane_mse);
  if (!best && !own_nonplanar) {
    static constexpr std::array<std::array<int, 3>, 6> kFaces = {
        {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};
    double best_dist = 0.0;
    for (const auto& f : kFaces) {
      auto pl = passing({k.ix + f[0], k.iy + f[1], k.iz + f[2]});
      if (!pl) continue;
      const double d = std::abs(pl->signed_distance(p_world));
      if (!best || d < best_dist) {
        best = pl;
        best_dist = d;
      }
    }
  }
  if (best && best->normal.dot(viewpoint - best->centroid) < 0) best->normal = -best->normal;
  return best;
}

}  // namespace lielio
