#pragma once

#include <cstdint>
#include <vector>

#include "abohm/common.hpp"

namespace abohm::grid {

enum class MaskKind { Disk, Annulus, DiskDifference, Bitmap };

// Uniform grid over an axis-aligned box with a domain mask. Nodes sit at the
// cell centers (lo + (i+1/2)h) by default; the half-cell stagger keeps nodes
// and edge midpoints off the lattice points where charges and point fluxes
// live, so potentials singular or sharply peaked at those points are never
// sampled at their worst spot.
struct GridSpec {
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;
  double h = 0.0;
  bool offset_nodes = true;

  MaskKind kind = MaskKind::Disk;
  Complex center{0.0, 0.0};
  double R = 1.0;  // outer radius (disk, annulus, difference minuend)
  double r = 0.0;  // inner radius (annulus)
  Complex hole_center{0.0, 0.0};  // difference-of-disks subtrahend
  double hole_R = 0.0;
  std::vector<std::uint8_t> bitmap;  // row-major, bitmap_nx * bitmap_ny
  int bitmap_nx = 0, bitmap_ny = 0;

  bool contains(Complex z) const;
  void validate() const;

  static GridSpec disk(Complex c, double R, double h);
  static GridSpec annulus(Complex c, double r_in, double r_out, double h);
};

struct Grid {
  GridSpec spec;
  int nx = 0, ny = 0;               // nodes per axis
  std::vector<int> index;           // nx*ny -> interior index or -1
  std::vector<Complex> nodes;       // interior node positions
  std::vector<std::pair<int, int>> node_ij;

  double h() const { return spec.h; }
  std::size_t size() const { return nodes.size(); }

  Complex pos(int i, int j) const {
    double off = spec.offset_nodes ? 0.5 : 0.0;
    return Complex(spec.x0 + (i + off) * spec.h, spec.y0 + (j + off) * spec.h);
  }
  int at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return index[(std::size_t)j * nx + i];
  }
};

// Interior nodes are the nodes satisfying the mask; everything else is
// homogeneous Dirichlet by omission. Enumeration is row-major in (j, i), so
// matrix indices are reproducible.
Grid build_grid(const GridSpec& spec);

}  // namespace abohm::grid
