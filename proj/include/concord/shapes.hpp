#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "concord/point_cloud.hpp"
#include "concord/rng.hpp"

namespace concord {

enum class ShapeFamily { CuboidShell, Table, Bed, Cylinder, LBracket };

std::string_view family_name(ShapeFamily f);
ShapeFamily parse_family(std::string_view name);

// Dimensions of one concrete solid. Each family reads the fields it needs:
//   cuboid     length width height
//   table      length width thickness (slab) leg_height leg_thickness
//   bed        table fields + board_height (headboard at +x, slab thickness)
//   cylinder   radius height
//   l-bracket  length width height thickness
struct ShapeDims {
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;
  double thickness = 0.1;
  double leg_height = 0.5;
  double leg_thickness = 0.1;
  double board_height = 0.5;
  double radius = 0.5;
};

/// A family plus per-dimension ranges; instances draw each field uniformly
/// from [lo, hi].
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::CuboidShell;
  ShapeDims lo;
  ShapeDims hi;
  std::size_t points = 256;

  void validate() const;
};

// Fields the family actually uses, in the order listed above.
std::vector<std::string_view> used_dimensions(ShapeFamily f);

ShapeDims draw_dims(const ShapeSpec& spec, Rng& rng);

/// Area-uniform surface sample of one solid, in its own (unnormalized) frame.
PointCloud sample_surface(ShapeFamily family, const ShapeDims& dims, std::size_t count, Rng& rng);

// One spec per family with ranges chosen so that tables and beds overlap in
// slab size (the source of ambiguous partial views).
std::vector<ShapeSpec> default_shape_specs(std::size_t points);

/// `count_per_family` normalized clouds per spec, spec-major order. Cloud ids
/// are "<family>-<index>".
std::vector<PointCloud> generate_shape_corpus(const std::vector<ShapeSpec>& specs, std::size_t count_per_family,
                                              std::uint64_t seed);

}  // namespace concord
