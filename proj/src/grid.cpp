#include "abohm/grid.hpp"

#include <cmath>

namespace abohm::grid {

bool GridSpec::contains(Complex z) const {
  switch (kind) {
    case MaskKind::Disk:
      return std::abs(z - center) < R;
    case MaskKind::Annulus: {
      double d = std::abs(z - center);
      return d > r && d < R;
    }
    case MaskKind::DiskDifference:
      return std::abs(z - center) < R && !(std::abs(z - hole_center) < hole_R);
    case MaskKind::Bitmap: {
      int i = (int)std::floor((z.real() - x0) / h);
      int j = (int)std::floor((z.imag() - y0) / h);
      if (i < 0 || j < 0 || i >= bitmap_nx || j >= bitmap_ny) return false;
      return bitmap[(std::size_t)j * bitmap_nx + i] != 0;
    }
  }
  return false;
}

void GridSpec::validate() const {
  require(h > 0.0, "invalid-params", "grid spacing must be positive");
  require(x1 > x0 && y1 > y0, "invalid-params", "grid box is empty");
  if (kind == MaskKind::Bitmap) {
    require(bitmap_nx > 0 && bitmap_ny > 0 &&
                bitmap.size() == (std::size_t)bitmap_nx * bitmap_ny,
            "invalid-params", "bitmap dimensions do not match payload");
  } else {
    require(R > 0.0, "invalid-params", "mask radius must be positive");
    if (kind == MaskKind::Annulus)
      require(r >= 0.0 && r < R, "invalid-params", "annulus radii out of order");
  }
}

GridSpec GridSpec::disk(Complex c, double R, double h) {
  GridSpec s;
  s.kind = MaskKind::Disk;
  s.center = c;
  s.R = R;
  s.h = h;
  s.x0 = c.real() - R;
  s.x1 = c.real() + R;
  s.y0 = c.imag() - R;
  s.y1 = c.imag() + R;
  return s;
}

GridSpec GridSpec::annulus(Complex c, double r_in, double r_out, double h) {
  GridSpec s = disk(c, r_out, h);
  s.kind = MaskKind::Annulus;
  s.r = r_in;
  return s;
}

Grid build_grid(const GridSpec& spec) {
  spec.validate();
  Grid g;
  g.spec = spec;
  double extra = spec.offset_nodes ? 0.0 : 1.0;
  g.nx = (int)std::floor((spec.x1 - spec.x0) / spec.h + 1e-9) + (int)extra;
  g.ny = (int)std::floor((spec.y1 - spec.y0) / spec.h + 1e-9) + (int)extra;
  require(g.nx > 0 && g.ny > 0, "empty-grid", "grid box holds no nodes");

  g.index.assign((std::size_t)g.nx * g.ny, -1);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      Complex z = g.pos(i, j);
      if (!spec.contains(z)) continue;
      g.index[(std::size_t)j * g.nx + i] = (int)g.nodes.size();
      g.nodes.push_back(z);
      g.node_ij.emplace_back(i, j);
    }
  }
  require(!g.nodes.empty(), "empty-grid", "mask excludes every node");
  return g;
}

}  // namespace abohm::grid
