#pragma once

// Slow, dense reference for small grids: assembles the five-point operator
// over all nodes (boundary rows pinned to identity), solves by Gaussian
// elimination with partial pivoting, and differences the result directly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// u on a k x k node grid of [0,1]^2, u = 0 on the boundary,
/// (1/h^2) sum_faces sigma_face (u_nb - u_p) = s_p inside, arithmetic faces.
inline std::vector<double> reference_solve(std::size_t k, const std::vector<double>& sigma,
                                           const std::vector<double>& s) {
  const std::size_t n = k * k;
  const double h = 1.0 / static_cast<double>(k - 1);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t p = j * k + i;
      if (i == 0 || j == 0 || i == k - 1 || j == k - 1) {
        a[p][p] = 1.0;
        continue;
      }
      const std::array<std::size_t, 4> nb{p - 1, p + 1, p - k, p + k};
      for (auto q : nb) {
        const double c = 0.5 * (sigma[p] + sigma[q]) / (h * h);
        a[p][q] += c;
        a[p][p] -= c;
      }
      b[p] = s[p];
    }
  return dense_solve(std::move(a), std::move(b));
}

inline std::vector<double> reference_source(std::size_t k, std::size_t center) {
  std::vector<double> s(k * k);
  const double ci = static_cast<double>(center % k), cj = static_cast<double>(center / k);
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double di = static_cast<double>(p % k) - ci, dj = static_cast<double>(p / k) - cj;
    s[p] = std::exp(-0.1 * (di * di + dj * dj));
  }
  return s;
}

/// Gradient at node p: central differences inside, one-sided at the edges.
inline std::pair<double, double> reference_gradient(std::size_t k, const std::vector<double>& u,
                                                    std::size_t p) {
  const double h = 1.0 / static_cast<double>(k - 1);
  const std::size_t i = p % k, j = p / k;
  auto diff = [&](std::size_t idx, std::size_t stride, std::size_t at) {
    if (at == 0) return (u[idx + stride] - u[idx]) / h;
    if (at == k - 1) return (u[idx] - u[idx - stride]) / h;
    return (u[idx + stride] - u[idx - stride]) / (2 * h);
  };
  return {diff(p, 1, i), diff(p, k, j)};
}

/// Column of phi for pair (a, b), recomputing both solutions from scratch.
inline std::vector<double> reference_phi_column(std::size_t k, const std::vector<double>& sigma,
                                                std::size_t a, std::size_t b) {
  const auto ua = reference_solve(k, sigma, reference_source(k, a));
  const auto ub = reference_solve(k, sigma, reference_source(k, b));
  std::vector<double> col(k * k);
  for (std::size_t p = 0; p < col.size(); ++p) {
    const auto ga = reference_gradient(k, ua, p);
    const auto gb = reference_gradient(k, ub, p);
    col[p] = ga.first * gb.first + ga.second * gb.second;
  }
  return col;
}

/// Shepp-Logan phantom written out ellipse by ellipse, independent of the
/// library table: each entry is (intensity, semi-axis a, semi-axis b, x0, y0, angle deg).
inline double reference_phantom(double x, double y) {
  static const double table[10][6] = {
      {2.0, 0.69, 0.92, 0, 0, 0},          {-0.98, 0.6624, 0.874, 0, -0.0184, 0},
      {-0.02, 0.11, 0.31, 0.22, 0, -18},   {-0.02, 0.16, 0.41, -0.22, 0, 18},
      {0.01, 0.21, 0.25, 0, 0.35, 0},      {0.01, 0.046, 0.046, 0, 0.1, 0},
      {0.01, 0.046, 0.046, 0, -0.1, 0},    {0.01, 0.046, 0.023, -0.08, -0.605, 0},
      {0.01, 0.023, 0.023, 0, -0.606, 0},  {0.01, 0.023, 0.046, 0.06, -0.605, 0}};
  double total = 0;
  for (const auto& e : table) {
    const double th = e[5] * 3.14159265358979323846 / 180;
    const double X = (x - e[3]) * std::cos(th) + (y - e[4]) * std::sin(th);
    const double Y = -(x - e[3]) * std::sin(th) + (y - e[4]) * std::cos(th);
    if (X * X / (e[1] * e[1]) + Y * Y / (e[2] * e[2]) <= 1) total += e[0];
  }
  return total;
}

}  // namespace oracle
