#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>

#include "lielio/liegroup.hpp"

namespace lielio {

struct VoxelKey {
  std::int64_t ix = 0, iy = 0, iz = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    // Large primes from the Teschner spatial-hash scheme.
    return static_cast<std::size_t>(k.ix * 73856093) ^ static_cast<std::size_t>(k.iy * 19349669) ^
           static_cast<std::size_t>(k.iz * 83492791);
  }
};

/// floor(coordinate / voxel_size) per axis.
VoxelKey voxel_key(const Vec3& p, double voxel_size);

struct PlaneFeature {
  Vec3 normal = Vec3::UnitZ();
  Vec3 centroid = Vec3::Zero();
  double mse = 0.0;  // mean squared point-to-plane distance
  double spread = 0.0;  // middle scatter eigenvalue, m^2; near zero for collinear points
  std::size_t n_points = 0;

  double signed_distance(const Vec3& p) const { return normal.dot(p - centroid); }
};

struct PlanarMapConfig {
  double voxel_size = 0.5;
  std::size_t min_points = 6;
  double max_plane_mse = 0.05 * 0.05;
  /// A single scan ring crossing a voxel is a line with an arbitrary normal.
  double min_plane_spread = 0.05 * 0.05;
  double max_match_distance = 0.3;
};

/// Least-squares plane through a scatter: centroid plus the eigenvector of the
/// smallest scatter eigenvalue. Degenerate smallest eigenvalues pick the
/// eigenspace direction closest to x, then y, then z.
PlaneFeature fit_plane(const Vec3& mean, const Mat3& scatter, std::size_t n);

class PlanarMap {
 public:
  explicit PlanarMap(PlanarMapConfig cfg = {}) : cfg_(cfg) {}

  const PlanarMapConfig& config() const { return cfg_; }

  /// Bins world-frame points and refits every touched voxel.
  void insert_points(std::span<const Vec3> pts);

  /// Plane for a world-frame point: the containing voxel first, then the
  /// nearest passing face neighbour unless the containing voxel is populated
  /// but non-planar. The normal is flipped to face `viewpoint`.
  std::optional<PlaneFeature> match_plane(const Vec3& p_world, const Vec3& viewpoint) const;

  std::optional<PlaneFeature> plane_at(const VoxelKey& k) const;

  std::size_t num_voxels() const { return voxels_.size(); }
  std::size_t num_planes() const;

 private:
  struct Voxel {
    Vec3 anchor = Vec3::Zero();  // moments are kept relative to this corner
    std::size_t n = 0;
    Vec3 mean = Vec3::Zero();
    Mat3 m2 = Mat3::Zero();  // centred sum of outer products (Welford)
    std::optional<PlaneFeature> plane;
  };

  bool serves(const PlaneFeature& pl) const;

  PlanarMapConfig cfg_;
  std::unordered_map<VoxelKey, Voxel, VoxelKeyHash> voxels_;
};

}  // namespace lielio
