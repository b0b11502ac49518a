// Phase-wise constant microstructures: the coated-disk benchmark geometry,
// axis-aligned laminates, and raw phase maps loaded from file.
//
// A StiffnessField couples a per-point phase id with a per-phase isotropic
// stiffness table; geometry is sampled at grid points (one sample per pixel,
// no boundary smoothing), so rerunning a rasterizer is bitwise reproducible.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spechom/grid.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

/// Coated disk centered in the unit cell: core radius r1, coating radius r2,
/// matrix outside. Radii must satisfy 0 < r1 < r2 <= 1/2 so the coated disk
/// stays inside the cell.
struct HashinSpec {
  double r1;
  double r2;
  IsotropicMaterial core;
  IsotropicMaterial coating;
  IsotropicMaterial matrix;

  HashinSpec(double radius1, double radius2, IsotropicMaterial core_mat,
             IsotropicMaterial coating_mat, IsotropicMaterial matrix_mat)
      : r1(radius1), r2(radius2), core(core_mat), coating(coating_mat), matrix(matrix_mat) {
    if (!(0.0 < radius1 && radius1 < radius2 && radius2 <= 0.5))
      throw std::invalid_argument("coated disk radii must satisfy 0 < r1 < r2 <= 1/2");
  }
};

/// Phase of the coated-disk geometry at a point of [-1/2, 1/2)^2:
/// 0 core (|x| < r1), 1 coating (r1 <= |x| < r2), 2 matrix.
inline int hashin_phase_at(const HashinSpec& spec, double x, double y) {
  const double r = std::sqrt(x * x + y * y);
  if (r < spec.r1) return 0;
  if (r < spec.r2) return 1;
  return 2;
}

/// Two-phase laminate normal to one axis; phase_a fills the first
/// volume_fraction * n index planes along that axis.
struct LaminateSpec {
  int normal_axis;
  double volume_fraction;
  IsotropicMaterial phase_a;
  IsotropicMaterial phase_b;

  LaminateSpec(int axis, double fraction, IsotropicMaterial a, IsotropicMaterial b)
      : normal_axis(axis), volume_fraction(fraction), phase_a(a), phase_b(b) {
    if (!(0.0 < fraction && fraction < 1.0))
      throw std::invalid_argument("laminate volume fraction must lie in (0, 1)");
  }
};

/// Per-point stiffness as a phase map over a table of isotropic phases.
class StiffnessField {
 public:
  StiffnessField(const GridSpec& grid, std::vector<std::uint8_t> phase,
                 std::vector<IsotropicMaterial> materials)
      : grid_(grid), phase_(std::move(phase)), materials_(std::move(materials)) {
    if (materials_.empty()) throw std::invalid_argument("material table is empty");
    if (phase_.size() != grid.num_points())
      throw std::invalid_argument("phase map size does not match the grid");
    for (std::uint8_t id : phase_)
      if (id >= materials_.size())
        throw std::invalid_argument("phase map references a missing material");
    table_.reserve(materials_.size());
    for (const auto& m : materials_) {
      Stiffness4 c = m.stiffness(grid.d);
      if (!c.has_symmetries(0.0))
        throw std::invalid_argument("phase stiffness lost its symmetries");
      if (min_quadratic_sample(c, 32, 0x5eedULL) <= 0.0)
        throw std::invalid_argument("phase stiffness is not positive definite");
      table_.push_back(c);
    }
  }

  const GridSpec& grid() const { return grid_; }
  int num_phases() const { return static_cast<int>(materials_.size()); }
  std::uint8_t phase(std::size_t p) const { return phase_[p]; }
  const std::vector<std::uint8_t>& phase_map() const { return phase_; }
  const Stiffness4& stiffness(std::size_t p) const { return table_[phase_[p]]; }
  const Stiffness4& phase_stiffness(int id) const { return table_[id]; }
  const std::vector<IsotropicMaterial>& materials() const { return materials_; }

  double phase_fraction(int id) const {
    std::size_t count = 0;
    for (std::uint8_t v : phase_)
      if (v == id) ++count;
    return static_cast<double>(count) / static_cast<double>(phase_.size());
  }

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> phase_;
  std::vector<IsotropicMaterial> materials_;
  std::vector<Stiffness4> table_;
};

/// Rasterize the coated-disk geometry on a 2D grid (phase ids 0/1/2).
inline StiffnessField rasterize_hashin(const HashinSpec& spec, const GridSpec& grid) {
  if (grid.d != 2)
    throw std::invalid_argument("the coated-disk geometry is two-dimensional");
  std::vector<std::uint8_t> phase(grid.num_points());
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const double x = grid.coordinate(i);
      const double y = grid.coordinate(j);
      phase[static_cast<std::size_t>(i) * grid.n + j] =
          static_cast<std::uint8_t>(hashin_phase_at(spec, x, y));
    }
  return StiffnessField(grid, std::move(phase), {spec.core, spec.coating, spec.matrix});
}

/// Rasterize a laminate (phase ids 0 = phase_a, 1 = phase_b). The requested
/// fraction must land on a whole number of index planes.
inline StiffnessField rasterize_laminate(const LaminateSpec& spec, const GridSpec& grid) {
  if (spec.normal_axis < 0 || spec.normal_axis >= grid.d)
    throw std::invalid_argument("laminate normal axis out of range");
  const double planes_exact = spec.volume_fraction * grid.n;
  const int planes = static_cast<int>(std::lround(planes_exact));
  if (std::abs(planes_exact - planes) > 1e-9 || planes < 1 || planes >= grid.n)
    throw std::invalid_argument(
        "laminate volume fraction is not representable on this grid");
  std::vector<std::uint8_t> phase(grid.num_points());
  const std::size_t total = grid.num_points();
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    int axis_index = 0;
    for (int a = grid.d - 1; a >= 0; --a) {
      const int idx = static_cast<int>(rest % static_cast<std::size_t>(grid.n));
      rest /= static_cast<std::size_t>(grid.n);
      if (a == spec.normal_axis) axis_index = idx;
    }
    phase[p] = axis_index < planes ? 0 : 1;
  }
  return StiffnessField(grid, std::move(phase), {spec.phase_a, spec.phase_b});
}

/// Core/coating pair for a contrast study: the core keeps base_young, the
/// coating gets contrast * base_young; both at Poisson ratio 0.3.
inline std::pair<IsotropicMaterial, IsotropicMaterial> contrast_materials(double base_young,
                                                                          double contrast) {
  if (!(contrast > 0.0) || !std::isfinite(contrast))
    throw std::invalid_argument("contrast must be positive and finite");
  return {IsotropicMaterial(base_young, 0.3), IsotropicMaterial(contrast * base_young, 0.3)};
}

/// Load a raw phase map: one byte per grid point, row-major, ids indexing the
/// material table.
inline StiffnessField load_phase_map(const std::string& path,
                                     const std::vector<IsotropicMaterial>& materials,
                                     const GridSpec& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open phase map file: " + path);
  std::vector<std::uint8_t> phase(grid.num_points());
  in.read(reinterpret_cast<char*>(phase.data()), static_cast<std::streamsize>(phase.size()));
  if (static_cast<std::size_t>(in.gcount()) != phase.size())
    throw std::runtime_error("phase map file is shorter than the grid: " + path);
  in.get();
  if (!in.eof()) throw std::runtime_error("phase map file is longer than the grid: " + path);
  return StiffnessField(grid, std::move(phase), materials);
}

inline void save_phase_map(const StiffnessField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write phase map file: " + path);
  out.write(reinterpret_cast<const char*>(field.phase_map().data()),
            static_cast<std::streamsize>(field.phase_map().size()));
}

/// Content hash over geometry and materials; keys corrector caching.
inline std::uint64_t content_hash(const StiffnessField& field) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix_bytes = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix_bytes(&field.grid().d, sizeof(int));
  mix_bytes(&field.grid().n, sizeof(int));
  mix_bytes(field.phase_map().data(), field.phase_map().size());
  for (const auto& m : field.materials()) {
    const double young = m.young(), poisson = m.poisson();
    mix_bytes(&young, sizeof(double));
    mix_bytes(&poisson, sizeof(double));
  }
  return h;
}

}  // namespace spechom
