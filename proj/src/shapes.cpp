#include "concord/shapes.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "concord/views.hpp"

namespace concord {

namespace {

struct Rect {
  Point3 origin;
  Point3 u;
  Point3 v;
};

struct Disk {
  Point3 center;
  double radius;
};

struct Tube {
  Point3 base;  // center of the bottom circle, axis +z
  double radius;
  double height;
};

struct Surface {
  std::vector<Rect> rects;
  std::vector<Disk> disks;
  std::vector<Tube> tubes;

  // Axis-aligned box [lo, hi] as six faces.
  void add_box(const Point3& lo, const Point3& hi) {
    const double dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
    rects.push_back({lo, {dx, 0, 0}, {0, dy, 0}});
    rects.push_back({{lo[0], lo[1], hi[2]}, {dx, 0, 0}, {0, dy, 0}});
    rects.push_back({lo, {dx, 0, 0}, {0, 0, dz}});
    rects.push_back({{lo[0], hi[1], lo[2]}, {dx, 0, 0}, {0, 0, dz}});
    rects.push_back({lo, {0, dy, 0}, {0, 0, dz}});
    rects.push_back({{hi[0], lo[1], lo[2]}, {0, dy, 0}, {0, 0, dz}});
  }
};

double rect_area(const Rect& r) {
  const Point3 c{r.u[1] * r.v[2] - r.u[2] * r.v[1], r.u[2] * r.v[0] - r.u[0] * r.v[2],
                 r.u[0] * r.v[1] - r.u[1] * r.v[0]};
  return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
}

void add_legs(Surface& s, const ShapeDims& d) {
  const double hx = d.length / 2, hy = d.width / 2, t = d.leg_thickness;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x0 = sx < 0 ? -hx : hx - t;
      const double y0 = sy < 0 ? -hy : hy - t;
      s.add_box({x0, y0, -d.leg_height}, {x0 + t, y0 + t, 0.0});
    }
  }
}

Surface build_surface(ShapeFamily family, const ShapeDims& d) {
  Surface s;
  switch (family) {
    case ShapeFamily::CuboidShell:
      s.add_box({-d.length / 2, -d.width / 2, -d.height / 2}, {d.length / 2, d.width / 2, d.height / 2});
      break;
    case ShapeFamily::Table:
      s.add_box({-d.length / 2, -d.width / 2, 0.0}, {d.length / 2, d.width / 2, d.thickness});
      add_legs(s, d);
      break;
    case ShapeFamily::Bed:
      s.add_box({-d.length / 2, -d.width / 2, 0.0}, {d.length / 2, d.width / 2, d.thickness});
      add_legs(s, d);
      s.add_box({d.length / 2 - d.thickness, -d.width / 2, d.thickness},
                {d.length / 2, d.width / 2, d.thickness + d.board_height});
      break;
    case ShapeFamily::Cylinder:
      s.tubes.push_back({{0, 0, -d.height / 2}, d.radius, d.height});
      s.disks.push_back({{0, 0, -d.height / 2}, d.radius});
      s.disks.push_back({{0, 0, d.height / 2}, d.radius});
      break;
    case ShapeFamily::LBracket:
      s.add_box({0, 0, 0}, {d.length, d.width, d.thickness});
      s.add_box({0, 0, d.thickness}, {d.thickness, d.width, d.height});
      break;
  }
  return s;
}

double field(const ShapeDims& d, std::string_view name) {
  if (name == "length") return d.length;
  if (name == "width") return d.width;
  if (name == "height") return d.height;
  if (name == "thickness") return d.thickness;
  if (name == "leg_height") return d.leg_height;
  if (name == "leg_thickness") return d.leg_thickness;
  if (name == "board_height") return d.board_height;
  return d.radius;
}

void check_dims(ShapeFamily family, const ShapeDims& d) {
  for (auto name : used_dimensions(family)) {
    const double v = field(d, name);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidShape, std::string(family_name(family)) + " " + std::string(name) + " must be > 0");
    }
  }
  const bool has_legs = family == ShapeFamily::Table || family == ShapeFamily::Bed;
  if (has_legs && (2 * d.leg_thickness > d.length || 2 * d.leg_thickness > d.width)) {
    throw Error(ErrorCode::InvalidShape, "legs wider than the slab");
  }
  if (family == ShapeFamily::LBracket && (d.thickness >= d.length || d.thickness >= d.height)) {
    throw Error(ErrorCode::InvalidShape, "bracket plates thicker than they are long");
  }
  if (family == ShapeFamily::Bed && d.thickness >= d.length) {
    throw Error(ErrorCode::InvalidShape, "headboard thicker than the slab is long");
  }
}

}  // namespace

std::string_view family_name(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::CuboidShell: return "cuboid";
    case ShapeFamily::Table: return "table";
    case ShapeFamily::Bed: return "bed";
    case ShapeFamily::Cylinder: return "cylinder";
    case ShapeFamily::LBracket: return "l-bracket";
  }
  return "unknown";
}

ShapeFamily parse_family(std::string_view name) {
  for (auto f : {ShapeFamily::CuboidShell, ShapeFamily::Table, ShapeFamily::Bed, ShapeFamily::Cylinder,
                 ShapeFamily::LBracket}) {
    if (family_name(f) == name) return f;
  }
  throw Error(ErrorCode::InvalidShape, "unknown family '" + std::string(name) + "'");
}

std::vector<std::string_view> used_dimensions(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::CuboidShell: return {"length", "width", "height"};
    case ShapeFamily::Table: return {"length", "width", "thickness", "leg_height", "leg_thickness"};
    case ShapeFamily::Bed: return {"length", "width", "thickness", "leg_height", "leg_thickness", "board_height"};
    case ShapeFamily::Cylinder: return {"radius", "height"};
    case ShapeFamily::LBracket: return {"length", "width", "height", "thickness"};
  }
  return {};
}

void ShapeSpec::validate() const {
  if (points < 1) throw Error(ErrorCode::InvalidShape, "point count must be >= 1");
  check_dims(family, lo);
  check_dims(family, hi);
  for (auto name : used_dimensions(family)) {
    if (field(lo, name) > field(hi, name)) {
      throw Error(ErrorCode::InvalidShape, std::string(name) + " range is inverted");
    }
  }
}

ShapeDims draw_dims(const ShapeSpec& spec, Rng& rng) {
  const auto pick = [&rng](double lo, double hi) { return lo == hi ? lo : rng.uniform(lo, hi); };
  ShapeDims d;
  d.length = pick(spec.lo.length, spec.hi.length);
  d.width = pick(spec.lo.width, spec.hi.width);
  d.height = pick(spec.lo.height, spec.hi.height);
  d.thickness = pick(spec.lo.thickness, spec.hi.thickness);
  d.leg_height = pick(spec.lo.leg_height, spec.hi.leg_height);
  d.leg_thickness = pick(spec.lo.leg_thickness, spec.hi.leg_thickness);
  d.board_height = pick(spec.lo.board_height, spec.hi.board_height);
  d.radius = pick(spec.lo.radius, spec.hi.radius);
  return d;
}

PointCloud sample_surface(ShapeFamily family, const ShapeDims& dims, std::size_t count, Rng& rng) {
  check_dims(family, dims);
  const Surface s = build_surface(family, dims);

  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& r : s.rects) cumulative.push_back(total += rect_area(r));
  for (const auto& d : s.disks) cumulative.push_back(total += std::numbers::pi * d.radius * d.radius);
  for (const auto& t : s.tubes) cumulative.push_back(total += 2.0 * std::numbers::pi * t.radius * t.height);

  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && cumulative[k] <= pick) ++k;
    const double a = rng.uniform();
    const double b = rng.uniform();
    if (k < s.rects.size()) {
      const auto& r = s.rects[k];
      out.points.push_back({r.origin[0] + a * r.u[0] + b * r.v[0], r.origin[1] + a * r.u[1] + b * r.v[1],
                            r.origin[2] + a * r.u[2] + b * r.v[2]});
      continue;
    }
    k -= s.rects.size();
    if (k < s.disks.size()) {
      const auto& d = s.disks[k];
      const double rho = d.radius * std::sqrt(a);
      const double phi = 2.0 * std::numbers::pi * b;
      out.points.push_back({d.center[0] + rho * std::cos(phi), d.center[1] + rho * std::sin(phi), d.center[2]});
      continue;
    }
    k -= s.disks.size();
    const auto& t = s.tubes[k];
    const double phi = 2.0 * std::numbers::pi * a;
    out.points.push_back(
        {t.base[0] + t.radius * std::cos(phi), t.base[1] + t.radius * std::sin(phi), t.base[2] + b * t.height});
  }
  return out;
}

std::vector<ShapeSpec> default_shape_specs(std::size_t points) {
  std::vector<ShapeSpec> specs(5);
  auto& cuboid = specs[0];
  cuboid.family = ShapeFamily::CuboidShell;
  cuboid.lo.length = 0.5, cuboid.hi.length = 2.0;
  cuboid.lo.width = 0.5, cuboid.hi.width = 2.0;
  cuboid.lo.height = 0.5, cuboid.hi.height = 2.0;

  auto& table = specs[1];
  table.family = ShapeFamily::Table;
  table.lo.length = 1.2, table.hi.length = 2.2;
  table.lo.width = 0.8, table.hi.width = 1.6;
  table.lo.thickness = 0.05, table.hi.thickness = 0.2;
  table.lo.leg_height = 0.3, table.hi.leg_height = 0.9;
  table.lo.leg_thickness = 0.06, table.hi.leg_thickness = 0.12;

  auto& bed = specs[2];
  bed = table;
  bed.family = ShapeFamily::Bed;
  bed.lo.leg_height = 0.15, bed.hi.leg_height = 0.6;
  bed.lo.board_height = 0.3, bed.hi.board_height = 0.9;

  auto& cylinder = specs[3];
  cylinder.family = ShapeFamily::Cylinder;
  cylinder.lo.radius = 0.3, cylinder.hi.radius = 1.0;
  cylinder.lo.height = 0.3, cylinder.hi.height = 2.0;

  auto& bracket = specs[4];
  bracket.family = ShapeFamily::LBracket;
  bracket.lo.length = 0.8, bracket.hi.length = 2.0;
  bracket.lo.width = 0.5, bracket.hi.width = 1.5;
  bracket.lo.height = 0.5, bracket.hi.height = 1.5;
  bracket.lo.thickness = 0.05, bracket.hi.thickness = 0.2;

  for (auto& s : specs) s.points = points;
  return specs;
}

std::vector<PointCloud> generate_shape_corpus(const std::vector<ShapeSpec>& specs, std::size_t count_per_family,
                                              std::uint64_t seed) {
  if (count_per_family < 1) throw Error(ErrorCode::InvalidArgument, "count per family must be >= 1");
  for (const auto& s : specs) s.validate();
  std::vector<PointCloud> corpus;
  corpus.reserve(specs.size() * count_per_family);
  std::array<std::size_t, 5> next_index{};
  for (std::size_t si = 0; si < specs.size(); ++si) {
    for (std::size_t c = 0; c < count_per_family; ++c) {
      const std::size_t label_index = next_index[static_cast<std::size_t>(specs[si].family)]++;
      Rng rng(derive_seed(seed, si, c));
      const ShapeDims dims = draw_dims(specs[si], rng);
      PointCloud cloud = normalize_cloud(sample_surface(specs[si].family, dims, specs[si].points, rng));
      char label[64];
      std::snprintf(label, sizeof label, "%.*s-%05zu", static_cast<int>(family_name(specs[si].family).size()),
                    family_name(specs[si].family).data(), label_index);
      cloud.id = label;
      corpus.push_back(std::move(cloud));
    }
  }
  return corpus;
}

}  // namespace concord
