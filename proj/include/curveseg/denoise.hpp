#pragma once

#include <utility>
#include <vector>

#include "curveseg/image.hpp"
#include "curveseg/regions.hpp"
#include "curveseg/solver.hpp"

namespace curveseg {

// Linear system for smoothing one region on the corner grid. Corners sit
// at integer coordinates (i,j) with 0 <= i <= W, 0 <= j <= H; corner (i,j)
// touches pixels (i-1,j-1), (i,j-1), (i-1,j), (i,j). The matrix is
// L + lambda*diag(area): L is the graph Laplacian whose edge weight is the
// mean region indicator of the two pixels flanking the edge, and area is
// the touching in-region pixel count over four. Corners touching no
// region pixel are excluded, which keeps the system positive definite.
struct CornerSystem {
  int region = 0;
  double lambda = 0.0;
  int cw = 0, ch = 0;                        // corner grid size (W+1, H+1)
  std::vector<int> index;                    // corner -> dense index or -1
  std::vector<std::pair<int, int>> corners;  // dense index -> (i,j)
  std::vector<double> area;
  CsrMatrix matrix;
};

CornerSystem build_corner_system(const LabelMap& labels, int region,
                                 double lambda);

// Corner samples of one pixel channel: the mean over the touching
// in-region pixels. `channel` holds one value per pixel, row-major.
std::vector<double> corner_data(const CornerSystem& sys,
                                const LabelMap& labels,
                                const std::vector<double>& channel);

// Solves (L + lambda*area) u = lambda*area*u0.
std::vector<double> smooth_corners(const CornerSystem& sys,
                                   const std::vector<double>& u0,
                                   double rel_tol = 1e-12,
                                   CgResult* info = nullptr);

// Edge-preserving piecewise smoothing: every labeled region is smoothed
// independently, so nothing bleeds across region boundaries. A pixel's
// output is the mean of its four corner values. Channels are processed
// one at a time on the raw values.
Image denoise_regions(const Image& img, const LabelMap& labels,
                      double lambda);

}  // namespace curveseg
