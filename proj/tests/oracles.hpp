#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rigfix/image.hpp"

namespace rigfix::testing {

/// Least squares via an explicit pseudo-inverse: Jacobi eigen-decomposition
/// of A^T A in long double, eigenvalues below rel_tol * max treated as zero.
inline std::vector<double> pinv_solve(const std::vector<std::vector<double>>& a,
                                      const std::vector<double>& b, long double rel_tol = 1e-18L) {
  const std::size_t p = a.front().size();
  std::vector<std::vector<long double>> m(p, std::vector<long double>(p, 0.0L));
  std::vector<long double> atb(p, 0.0L);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      atb[i] += static_cast<long double>(a[r][i]) * b[r];
      for (std::size_t j = 0; j < p; ++j) {
        m[i][j] += static_cast<long double>(a[r][i]) * a[r][j];
      }
    }
  }
  std::vector<std::vector<long double>> v(p, std::vector<long double>(p, 0.0L));
  for (std::size_t i = 0; i < p; ++i) v[i][i] = 1.0L;
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0.0L;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) off += m[i][j] * m[i][j];
    if (off < 1e-60L) break;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        if (m[i][j] == 0.0L) continue;
        const long double theta = (m[j][j] - m[i][i]) / (2.0L * m[i][j]);
        const long double t = (theta >= 0 ? 1.0L : -1.0L) /
                              (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const long double c = 1.0L / std::sqrt(t * t + 1.0L);
        const long double s = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const long double mki = m[k][i];
          const long double mkj = m[k][j];
          m[k][i] = c * mki - s * mkj;
          m[k][j] = s * mki + c * mkj;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const long double mik = m[i][k];
          const long double mjk = m[j][k];
          m[i][k] = c * mik - s * mjk;
          m[j][k] = s * mik + c * mjk;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const long double vki = v[k][i];
          const long double vkj = v[k][j];
          v[k][i] = c * vki - s * vkj;
          v[k][j] = s * vki + c * vkj;
        }
      }
    }
  }
  long double max_eig = 0.0L;
  for (std::size_t i = 0; i < p; ++i) max_eig = std::max(max_eig, std::fabs(m[i][i]));
  std::vector<double> x(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const long double lambda = m[k][k];
    if (std::fabs(lambda) <= rel_tol * max_eig) continue;
    long double proj = 0.0L;
    for (std::size_t i = 0; i < p; ++i) proj += v[i][k] * atb[i];
    for (std::size_t i = 0; i < p; ++i) x[i] += static_cast<double>(v[i][k] * proj / lambda);
  }
  return x;
}

/// Harris response at one pixel, evaluated directly from its definition
/// (Sobel gradients, 5x5 binomial weights as an outer product).
inline double harris_response_direct(const GrayImage& img, int u, int v, double k) {
  static constexpr double w1[5] = {1, 4, 6, 4, 1};
  double sxx = 0, syy = 0, sxy = 0;
  for (int dv = -2; dv <= 2; ++dv) {
    for (int du = -2; du <= 2; ++du) {
      const int x = u + du;
      const int y = v + dv;
      const double gx = img(x + 1, y - 1) + 2 * img(x + 1, y) + img(x + 1, y + 1) -
                        img(x - 1, y - 1) - 2 * img(x - 1, y) - img(x - 1, y + 1);
      const double gy = img(x - 1, y + 1) + 2 * img(x, y + 1) + img(x + 1, y + 1) -
                        img(x - 1, y - 1) - 2 * img(x, y - 1) - img(x + 1, y - 1);
      const double wt = w1[du + 2] * w1[dv + 2] / 256.0;
      sxx += wt * gx * gx;
      syy += wt * gy * gy;
      sxy += wt * gx * gy;
    }
  }
  return sxx * syy - sxy * sxy - k * (sxx + syy) * (sxx + syy);
}

/// Exhaustive integer SSD-of-zero-mean-patches search over a window.
inline std::pair<int, int> brute_force_argmin(const GrayImage& left, const GrayImage& right, int u,
                                              int v, int radius, int range_u, int range_v) {
  auto patch_cost = [&](int ur, int vr) {
    double ml = 0, mr = 0;
    const int n = (2 * radius + 1) * (2 * radius + 1);
    for (int dv = -radius; dv <= radius; ++dv)
      for (int du = -radius; du <= radius; ++du) {
        ml += left(u + du, v + dv);
        mr += right(ur + du, vr + dv);
      }
    ml /= n;
    mr /= n;
    double c = 0;
    for (int dv = -radius; dv <= radius; ++dv)
      for (int du = -radius; du <= radius; ++du) {
        const double d = (left(u + du, v + dv) - ml) - (right(ur + du, vr + dv) - mr);
        c += d * d;
      }
    return c;
  };
  double best = 1e300;
  std::pair<int, int> arg{u, v};
  for (int vr = v - range_v; vr <= v + range_v; ++vr) {
    for (int ur = u - range_u; ur <= u + range_u; ++ur) {
      if (ur - radius < 0 || vr - radius < 0 || ur + radius >= right.width() ||
          vr + radius >= right.height())
        continue;
      const double c = patch_cost(ur, vr);
      if (c < best) {
        best = c;
        arg = {ur, vr};
      }
    }
  }
  return arg;
}

}  // namespace rigfix::testing
