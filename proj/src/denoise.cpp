#include "curveseg/denoise.hpp"

#include <algorithm>
#include <set>

#include "curveseg/errors.hpp"

namespace curveseg {

namespace {

bool in_region(const LabelMap& labels, int region, int x, int y) {
  return x >= 0 && x < labels.width && y >= 0 && y < labels.height &&
         labels.at(x, y) == region;
}

}  // namespace

CornerSystem build_corner_system(const LabelMap& labels, int region,
                                 double lambda) {
  if (lambda <= 0.0)
    throw InvariantViolation("smoothing weight must be positive");
  CornerSystem sys;
  sys.region = region;
  sys.lambda = lambda;
  sys.cw = labels.width + 1;
  sys.ch = labels.height + 1;
  sys.index.assign(static_cast<size_t>(sys.cw) * sys.ch, -1);

  auto chi = [&](int x, int y) {
    return in_region(labels, region, x, y) ? 1.0 : 0.0;
  };
  for (int j = 0; j < sys.ch; ++j)
    for (int i = 0; i < sys.cw; ++i) {
      const double count =
          chi(i - 1, j - 1) + chi(i, j - 1) + chi(i - 1, j) + chi(i, j);
      if (count == 0.0) continue;
      sys.index[j * sys.cw + i] = static_cast<int>(sys.corners.size());
      sys.corners.emplace_back(i, j);
      sys.area.push_back(0.25 * count);
    }

  CsrBuilder builder(static_cast<int>(sys.corners.size()));
  for (size_t r = 0; r < sys.corners.size(); ++r) {
    const auto [i, j] = sys.corners[r];
    double diag = 0.0;
    // Neighbors in W, E, S, N order; the weight averages the region
    // indicator over the two pixels flanking the corner edge.
    const std::array<std::array<int, 2>, 4> nbr{
        {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
    const std::array<double, 4> weight{
        0.5 * (chi(i - 1, j - 1) + chi(i - 1, j)),
        0.5 * (chi(i, j - 1) + chi(i, j)),
        0.5 * (chi(i - 1, j - 1) + chi(i, j - 1)),
        0.5 * (chi(i - 1, j) + chi(i, j))};
    for (int t = 0; t < 4; ++t) {
      const double w = weight[t];
      if (w == 0.0) continue;
      const int ni = nbr[t][0], nj = nbr[t][1];
      if (ni < 0 || ni >= sys.cw || nj < 0 || nj >= sys.ch) continue;
      const int dense = sys.index[nj * sys.cw + ni];
      if (dense < 0)
        throw InvariantViolation("edge weight reaches an excluded corner");
      diag += w;
      builder.add(static_cast<int>(r), dense, -w);
    }
    builder.add(static_cast<int>(r), static_cast<int>(r),
                diag + lambda * sys.area[r]);
  }
  sys.matrix = builder.build();
  return sys;
}

std::vector<double> corner_data(const CornerSystem& sys,
                                const LabelMap& labels,
                                const std::vector<double>& channel) {
  std::vector<double> u0(sys.corners.size(), 0.0);
  for (size_t r = 0; r < sys.corners.size(); ++r) {
    const auto [i, j] = sys.corners[r];
    double sum = 0.0;
    int count = 0;
    for (const auto& [px, py] : {std::pair{i - 1, j - 1}, std::pair{i, j - 1},
                                 std::pair{i - 1, j}, std::pair{i, j}}) {
      if (!in_region(labels, sys.region, px, py)) continue;
      sum += channel[static_cast<size_t>(py) * labels.width + px];
      ++count;
    }
    u0[r] = sum / count;
  }
  return u0;
}

std::vector<double> smooth_corners(const CornerSystem& sys,
                                   const std::vector<double>& u0,
                                   double rel_tol, CgResult* info) {
  if (u0.size() != sys.corners.size())
    throw InvariantViolation("corner data does not match the system");
  const int n = sys.matrix.n;
  std::vector<double> b(n);
  for (int r = 0; r < n; ++r) b[r] = sys.lambda * sys.area[r] * u0[r];
  const std::vector<double> diag = sys.matrix.diagonal();
  std::vector<double> u;
  const CgResult res = conjugate_gradient<double>(
      [&](const std::vector<double>& x, std::vector<double>& y) {
        sys.matrix.multiply(x, y);
      },
      [&](const std::vector<double>& r, std::vector<double>& z) {
        z.resize(r.size());
        for (size_t t = 0; t < r.size(); ++t) z[t] = r[t] / diag[t];
      },
      b, u, rel_tol, std::max(1000, 40 * n));
  if (!res.converged)
    throw SolveFailure("corner smoothing did not converge (residual " +
                       std::to_string(res.rel_residual) + ")");
  if (info) *info = res;
  return u;
}

Image denoise_regions(const Image& img, const LabelMap& labels,
                      double lambda) {
  if (img.width != labels.width || img.height != labels.height)
    throw InvariantViolation("image and label map sizes differ");
  std::set<int> regions(labels.labels.begin(), labels.labels.end());

  Image out(img.width, img.height, img.channels);
  for (int region : regions) {
    const CornerSystem sys = build_corner_system(labels, region, lambda);
    for (int c = 0; c < img.channels; ++c) {
      std::vector<double> channel(static_cast<size_t>(img.width) * img.height);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          channel[static_cast<size_t>(y) * img.width + x] = img.value(x, y, c);
      const std::vector<double> u0 = corner_data(sys, labels, channel);
      const std::vector<double> u = smooth_corners(sys, u0);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          if (labels.at(x, y) != region) continue;
          const int c00 = sys.index[y * sys.cw + x];
          const int c10 = sys.index[y * sys.cw + x + 1];
          const int c01 = sys.index[(y + 1) * sys.cw + x];
          const int c11 = sys.index[(y + 1) * sys.cw + x + 1];
          if (c00 < 0 || c10 < 0 || c01 < 0 || c11 < 0)
            throw InvariantViolation("region pixel with an excluded corner");
          out.value(x, y, c) = 0.25 * (u[c00] + u[c10] + u[c01] + u[c11]);
        }
    }
  }
  out.quantize8();
  return out;
}

}  // namespace curveseg
