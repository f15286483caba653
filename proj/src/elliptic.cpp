#include "hsketch/elliptic.hpp"

#include "hsketch/ensemble.hpp"
#include "hsketch/error.hpp"
#include "hsketch/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace hsketch::elliptic {

bool Grid2D::on_boundary(std::size_t node) const noexcept {
  const std::size_t i = col(node), j = row(node), last = nodes_per_side - 1;
  return i == 0 || j == 0 || i == last || j == last;
}

void Grid2D::validate() const {
  if (nodes_per_side < 3)
    throw ContractError("Grid2D: nodes_per_side must be >= 3, got " +
                        std::to_string(nodes_per_side));
}

namespace {

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Shepp & Logan (1974), original intensities.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {2.00, 0.6900, 0.920, 0.00, 0.0000, 0.0},
    {-0.98, 0.6624, 0.874, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.310, 0.22, 0.0000, -18.0},
    {-0.02, 0.1600, 0.410, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.250, 0.00, 0.3500, 0.0},
    {0.01, 0.0460, 0.046, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.046, 0.00, -0.1000, 0.0},
    {0.01, 0.0460, 0.023, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.023, 0.00, -0.6060, 0.0},
    {0.01, 0.0230, 0.046, 0.06, -0.6050, 0.0},
}};

}  // namespace

double shepp_logan(double x, double y) {
  double value = 0.0;
  for (const auto& e : kSheppLogan) {
    const double t = e.phi_deg * std::numbers::pi / 180.0;
    const double dx = x - e.x0, dy = y - e.y0;
    const double u = dx * std::cos(t) + dy * std::sin(t);
    const double v = -dx * std::sin(t) + dy * std::cos(t);
    if ((u * u) / (e.a * e.a) + (v * v) / (e.b * e.b) <= 1.0) value += e.intensity;
  }
  return value;
}

MediaField shepp_logan_media(const Grid2D& grid, double floor) {
  grid.validate();
  MediaField media{grid, std::vector<double>(grid.node_count())};
  const double h = grid.h();
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const double x = 2.0 * static_cast<double>(grid.col(node)) * h - 1.0;
    const double y = 2.0 * static_cast<double>(grid.row(node)) * h - 1.0;
    media.sigma[node] = std::max(1.0 + shepp_logan(x, y), floor);
  }
  return media;
}

MediaField constant_media(const Grid2D& grid, double value) {
  grid.validate();
  if (!(value > 0.0)) throw ContractError("constant_media: sigma must be positive");
  return {grid, std::vector<double>(grid.node_count(), value)};
}

std::vector<double> gaussian_source(const Grid2D& grid, std::size_t center_node, double width) {
  grid.validate();
  if (center_node >= grid.node_count())
    throw ContractError("gaussian_source: center node " + std::to_string(center_node) +
                        " is outside the grid");
  const auto ci = static_cast<double>(grid.col(center_node));
  const auto cj = static_cast<double>(grid.row(center_node));
  std::vector<double> s(grid.node_count());
  for (std::size_t node = 0; node < s.size(); ++node) {
    const double di = static_cast<double>(grid.col(node)) - ci;
    const double dj = static_cast<double>(grid.row(node)) - cj;
    s[node] = std::exp(-width * (di * di + dj * dj));
  }
  return s;
}

EllipticSystem assemble_operator(const Grid2D& grid, const MediaField& media,
                                 FaceAveraging averaging) {
  grid.validate();
  if (media.sigma.size() != grid.node_count())
    throw ContractError("assemble_operator: media does not match the grid");
  if (!std::all_of(media.sigma.begin(), media.sigma.end(), [](double s) { return s > 0.0; }))
    throw ContractError("assemble_operator: media must be positive");

  EllipticSystem sys;
  sys.grid = grid;
  sys.media = media;
  sys.averaging = averaging;
  sys.unknown_of.assign(grid.node_count(), -1);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (grid.on_boundary(node)) continue;
    sys.unknown_of[node] = static_cast<std::ptrdiff_t>(sys.node_of.size());
    sys.node_of.push_back(node);
  }

  auto face = [&](std::size_t a, std::size_t b) {
    const double sa = media.sigma[a], sb = media.sigma[b];
    return averaging == FaceAveraging::kArithmetic ? 0.5 * (sa + sb) : 2.0 * sa * sb / (sa + sb);
  };

  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const std::size_t k = grid.nodes_per_side;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(sys.node_of.size() * 5);
  for (std::size_t row = 0; row < sys.node_of.size(); ++row) {
    const std::size_t node = sys.node_of[row];
    const std::array<std::size_t, 4> nbrs{node + 1, node - 1, node + k, node - k};
    double diag = 0.0;
    for (std::size_t nb : nbrs) {
      const double c = face(node, nb) * inv_h2;
      diag -= c;
      if (const auto col = sys.unknown_of[nb]; col >= 0)
        entries.emplace_back(static_cast<int>(row), static_cast<int>(col), c);
    }
    entries.emplace_back(static_cast<int>(row), static_cast<int>(row), diag);
  }
  const auto n = static_cast<Eigen::Index>(sys.node_of.size());
  sys.op.resize(n, n);
  sys.op.setFromTriplets(entries.begin(), entries.end());
  return sys;
}

DirichletSolver::DirichletSolver(const EllipticSystem& system, double rel_tol)
    : system_(&system), rel_tol_(rel_tol) {
  const Eigen::SparseMatrix<double> negated = -system.op;
  negated_.compute(negated);
  if (negated_.info() != Eigen::Success)
    throw SolverError("DirichletSolver: factorization failed (operator not definite?)",
                      std::numeric_limits<double>::quiet_NaN());
}

std::vector<double> DirichletSolver::solve(const std::vector<double>& source) const {
  const EllipticSystem& sys = *system_;
  if (source.size() != sys.grid.node_count())
    throw ContractError("solve: source does not match the grid");
  const auto n = static_cast<Eigen::Index>(sys.node_of.size());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index row = 0; row < n; ++row)
    rhs[row] = source[sys.node_of[static_cast<std::size_t>(row)]];

  std::vector<double> u(sys.grid.node_count(), 0.0);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return u;

  const Eigen::VectorXd x = negated_.solve(-rhs);
  const double residual = (sys.op * x - rhs).norm() / rhs_norm;
  if (!(residual <= rel_tol_))
    throw SolverError("solve: relative residual " + std::to_string(residual) +
                          " above tolerance",
                      residual);
  for (Eigen::Index row = 0; row < n; ++row) u[sys.node_of[static_cast<std::size_t>(row)]] = x[row];
  return u;
}

std::vector<double> solve_dirichlet(const EllipticSystem& system,
                                    const std::vector<double>& source) {
  return DirichletSolver(system).solve(source);
}

GradientField node_gradients(const Grid2D& grid, const std::vector<double>& u) {
  if (u.size() != grid.node_count()) throw ContractError("node_gradients: size mismatch");
  const std::size_t k = grid.nodes_per_side, last = k - 1;
  const double h = grid.h();
  GradientField g{std::vector<double>(u.size()), std::vector<double>(u.size())};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t p = grid.index(i, j);
      if (i == 0)
        g.dx[p] = (u[p + 1] - u[p]) / h;
      else if (i == last)
        g.dx[p] = (u[p] - u[p - 1]) / h;
      else
        g.dx[p] = (u[p + 1] - u[p - 1]) / (2.0 * h);
      if (j == 0)
        g.dy[p] = (u[p + k] - u[p]) / h;
      else if (j == last)
        g.dy[p] = (u[p] - u[p - k]) / h;
      else
        g.dy[p] = (u[p + k] - u[p - k]) / (2.0 * h);
    }
  }
  return g;
}

std::string_view to_string(LayoutDomain d) noexcept {
  switch (d) {
    case LayoutDomain::kD1: return "D1";
    case LayoutDomain::kD2: return "D2";
    case LayoutDomain::kCustom: return "custom";
  }
  return "unknown";
}

LayoutDomain parse_domain(std::string_view text) {
  if (text == "D1" || text == "d1") return LayoutDomain::kD1;
  if (text == "D2" || text == "d2") return LayoutDomain::kD2;
  throw ContractError("unknown layout domain '" + std::string(text) + "'");
}

namespace {

bool in_interval(double x, double lo, double hi, DomainEdges edges) {
  constexpr double eps = 1e-12;
  if (x < lo - eps) return false;
  return edges == DomainEdges::kClosed ? x <= hi + eps : x < hi - eps;
}

}  // namespace

std::vector<std::size_t> domain_nodes(const Grid2D& grid, LayoutDomain domain,
                                      DomainEdges edges) {
  grid.validate();
  const double h = grid.h();
  auto inside = [&](double x, double y) {
    switch (domain) {
      case LayoutDomain::kD1:
        return in_interval(x, 1.0 / 8, 7.0 / 8, edges) && in_interval(y, 1.0 / 8, 7.0 / 8, edges);
      case LayoutDomain::kD2: {
        const bool outer = in_interval(x, 1.0 / 32, 31.0 / 32, edges) &&
                           in_interval(y, 1.0 / 32, 31.0 / 32, edges);
        const bool hole = in_interval(x, 3.0 / 16, 13.0 / 16, edges) &&
                          in_interval(y, 3.0 / 16, 13.0 / 16, edges);
        return outer && !hole;
      }
      case LayoutDomain::kCustom: break;
    }
    throw ContractError("domain_nodes: custom layouts have no implicit node set");
  };
  std::vector<std::size_t> nodes;
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    if (inside(static_cast<double>(grid.col(node)) * h, static_cast<double>(grid.row(node)) * h))
      nodes.push_back(node);
  return nodes;
}

MeasurementLayout build_layout(const Grid2D& grid, const LayoutOptions& options) {
  if (!(options.source_fraction > 0.0 && options.source_fraction <= 1.0))
    throw ContractError("build_layout: source_fraction must lie in (0,1]");
  const auto nodes = domain_nodes(grid, options.domain, options.edges);
  if (nodes.empty()) throw ContractError("build_layout: domain contains no nodes");

  MeasurementLayout layout;
  layout.domain = options.domain;
  layout.options = options;

  // Guard the ceiling against 1/6 * 2304 = 384.00000000000006.
  const auto want = static_cast<std::size_t>(
      std::ceil(options.source_fraction * static_cast<double>(nodes.size()) - 1e-9));
  SplitMix64 rng(options.seed);
  std::vector<std::size_t> pool = nodes;
  for (std::size_t a = 0; a < want; ++a)
    std::swap(pool[a], pool[a + static_cast<std::size_t>(rng.bounded(pool.size() - a))]);
  layout.source_nodes.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  std::sort(layout.source_nodes.begin(), layout.source_nodes.end());

  std::vector<char> member(grid.node_count(), 0);
  for (auto node : nodes) member[node] = 1;

  const auto radius = static_cast<std::ptrdiff_t>(options.detector_radius);
  const auto side = static_cast<std::ptrdiff_t>(grid.nodes_per_side);
  std::vector<std::size_t> box;
  for (std::size_t src : layout.source_nodes) {
    box.clear();
    const auto si = static_cast<std::ptrdiff_t>(grid.col(src));
    const auto sj = static_cast<std::ptrdiff_t>(grid.row(src));
    for (std::ptrdiff_t dj = -radius; dj <= radius; ++dj) {
      for (std::ptrdiff_t di = -radius; di <= radius; ++di) {
        const std::ptrdiff_t i = si + di, j = sj + dj;
        if (i < 0 || j < 0 || i >= side || j >= side) continue;
        const std::size_t det = grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (member[det]) box.push_back(det);
      }
    }
    std::size_t keep = box.size();
    if (options.detectors_per_source > 0 && options.detectors_per_source < box.size()) {
      keep = options.detectors_per_source;
      for (std::size_t a = 0; a < keep; ++a)
        std::swap(box[a], box[a + static_cast<std::size_t>(rng.bounded(box.size() - a))]);
      std::sort(box.begin(), box.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    for (std::size_t a = 0; a < keep; ++a) layout.pairs.emplace_back(src, box[a]);
  }
  return layout;
}

MeasurementLayout custom_layout(const Grid2D& grid,
                                std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  grid.validate();
  MeasurementLayout layout;
  layout.domain = LayoutDomain::kCustom;
  layout.options.domain = LayoutDomain::kCustom;
  for (const auto& [a, b] : pairs) {
    if (a >= grid.node_count() || b >= grid.node_count())
      throw ContractError("custom_layout: pair node outside the grid");
    layout.source_nodes.push_back(a);
  }
  std::sort(layout.source_nodes.begin(), layout.source_nodes.end());
  layout.source_nodes.erase(std::unique(layout.source_nodes.begin(), layout.source_nodes.end()),
                            layout.source_nodes.end());
  layout.pairs = std::move(pairs);
  return layout;
}

std::vector<std::string> layout_preset_names() { return {"paper-D1", "paper-D2"}; }

LayoutPreset layout_preset(std::string_view name) {
  // One detector per source inside the +-5 box on half-open subdomains gives
  // r = ceil(|D|/6): 2304/6 = 384 for D1 and ceil(2000/6) = 334 for D2.
  LayoutPreset p;
  p.name = std::string(name);
  p.layout.source_fraction = 1.0 / 6.0;
  p.layout.detector_radius = 5;
  p.layout.detectors_per_source = 1;
  p.layout.edges = DomainEdges::kHalfOpen;
  if (name == "paper-D1") {
    p.layout.domain = LayoutDomain::kD1;
    p.layout.seed = 1;
  } else if (name == "paper-D2") {
    p.layout.domain = LayoutDomain::kD2;
    p.layout.seed = 2;
  } else {
    throw ContractError("unknown layout preset '" + std::string(name) + "'");
  }
  return p;
}

SensitivityFactor assemble_sensitivity_factor(const EllipticSystem& system,
                                              const MeasurementLayout& layout,
                                              unsigned threads) {
  if (layout.pairs.empty()) throw ContractError("assemble_sensitivity_factor: no pairs");
  const Grid2D& grid = system.grid;

  std::vector<std::size_t> distinct;
  for (const auto& [a, b] : layout.pairs) {
    if (a >= grid.node_count() || b >= grid.node_count())
      throw ContractError("assemble_sensitivity_factor: pair node outside the grid");
    distinct.push_back(a);
    distinct.push_back(b);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const DirichletSolver solver(system);
  std::vector<GradientField> grads(distinct.size());
  detail::parallel_for(distinct.size(), resolve_threads(threads), [&](std::size_t k) {
    grads[k] = node_gradients(grid, solver.solve(gaussian_source(grid, distinct[k])));
  });
  auto slot = [&](std::size_t node) {
    return static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), node) -
                                    distinct.begin());
  };

  DenseMatrix phi(static_cast<Eigen::Index>(grid.node_count()),
                  static_cast<Eigen::Index>(layout.pairs.size()));
  for (std::size_t k = 0; k < layout.pairs.size(); ++k) {
    const GradientField& gu = grads[slot(layout.pairs[k].first)];
    const GradientField& gh = grads[slot(layout.pairs[k].second)];
    for (std::size_t x = 0; x < grid.node_count(); ++x)
      phi(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(k)) =
          gu.dx[x] * gh.dx[x] + gu.dy[x] * gh.dy[x];
  }
  return {GramFactor(std::move(phi)), distinct.size()};
}

RowRestriction drop_insensitive_rows(const GramFactor& f) {
  std::vector<std::size_t> kept, dropped;
  for (std::size_t i = 0; i < f.n(); ++i) (f.diag(i) > 0.0 ? kept : dropped).push_back(i);
  if (kept.size() < f.r())
    throw DegenerateError("drop_insensitive_rows: fewer sensitive rows than columns");
  DenseMatrix phi(static_cast<Eigen::Index>(kept.size()), f.phi().cols());
  for (std::size_t k = 0; k < kept.size(); ++k)
    phi.row(static_cast<Eigen::Index>(k)) = f.phi().row(static_cast<Eigen::Index>(kept[k]));
  return {GramFactor(std::move(phi)), std::move(kept), std::move(dropped)};
}

}  // namespace hsketch::elliptic
