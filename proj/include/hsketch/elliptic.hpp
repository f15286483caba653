#pragma once

#include "hsketch/numkit.hpp"
#include "hsketch/sketch.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hsketch::elliptic {

/// Uniform node grid on [0,1]^2. Node (i, j) sits at (i h, j h) and has flat
/// index j * nodes_per_side + i.
struct Grid2D {
  std::size_t nodes_per_side = 65;

  double h() const noexcept { return 1.0 / static_cast<double>(nodes_per_side - 1); }
  std::size_t node_count() const noexcept { return nodes_per_side * nodes_per_side; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nodes_per_side + i; }
  std::size_t col(std::size_t node) const noexcept { return node % nodes_per_side; }
  std::size_t row(std::size_t node) const noexcept { return node / nodes_per_side; }
  bool on_boundary(std::size_t node) const noexcept;
  void validate() const;
};

inline constexpr double kSigmaFloor = 0.1;

struct MediaField {
  Grid2D grid;
  std::vector<double> sigma;  // per node
};

/// Original 10-ellipse Shepp-Logan phantom at (x, y) in [-1,1]^2.
double shepp_logan(double x, double y);

/// sigma = 1 + phantom on the grid (mapped to [-1,1]^2), clamped below at `floor`.
MediaField shepp_logan_media(const Grid2D& grid, double floor = kSigmaFloor);

MediaField constant_media(const Grid2D& grid, double value);

/// exp(-width * d^2), d the distance to `center_node` in grid-index units.
std::vector<double> gaussian_source(const Grid2D& grid, std::size_t center_node,
                                    double width = 0.1);

enum class FaceAveraging { kArithmetic, kHarmonic };

/// Five-point discretization of div(sigma grad u) on interior nodes with
/// u = 0 eliminated on the boundary. The operator is symmetric negative
/// definite; its (i,j) interior row is
/// (s_e u_E + s_w u_W + s_n u_N + s_s u_S - (s_e+s_w+s_n+s_s) u_P) / h^2.
struct EllipticSystem {
  Grid2D grid;
  MediaField media;
  FaceAveraging averaging = FaceAveraging::kArithmetic;
  Eigen::SparseMatrix<double> op;          // interior x interior
  std::vector<std::ptrdiff_t> unknown_of;  // node -> row in op, -1 on boundary
  std::vector<std::size_t> node_of;        // row in op -> node
};

EllipticSystem assemble_operator(const Grid2D& grid, const MediaField& media,
                                 FaceAveraging averaging = FaceAveraging::kArithmetic);

/// Factorizes the system once and solves for many sources.
class DirichletSolver {
 public:
  explicit DirichletSolver(const EllipticSystem& system, double rel_tol = 1e-10);

  /// Per-node solution with u = 0 on the boundary. Throws SolverError when
  /// the relative residual exceeds the tolerance.
  std::vector<double> solve(const std::vector<double>& source) const;

  const EllipticSystem& system() const noexcept { return *system_; }

 private:
  const EllipticSystem* system_;
  double rel_tol_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> negated_;
};

std::vector<double> solve_dirichlet(const EllipticSystem& system,
                                    const std::vector<double>& source);

/// Node gradients: central differences inside, one-sided on the boundary.
struct GradientField {
  std::vector<double> dx;
  std::vector<double> dy;
};
GradientField node_gradients(const Grid2D& grid, const std::vector<double>& u);

enum class LayoutDomain { kD1, kD2, kCustom };

std::string_view to_string(LayoutDomain d) noexcept;
LayoutDomain parse_domain(std::string_view text);

/// How subdomain edges are treated: closed keeps nodes on the upper edge
/// ([1/8,7/8] has 49 nodes per side on the 65-grid); half-open drops them.
enum class DomainEdges { kClosed, kHalfOpen };

/// Nodes of D1 = [1/8,7/8]^2 or D2 = [1/32,31/32]^2 \ [3/16,13/16]^2.
std::vector<std::size_t> domain_nodes(const Grid2D& grid, LayoutDomain domain,
                                      DomainEdges edges = DomainEdges::kClosed);

struct LayoutOptions {
  LayoutDomain domain = LayoutDomain::kD1;
  double source_fraction = 1.0 / 6.0;
  std::size_t detector_radius = 5;
  /// 0 pairs each source with every detector in its box; k > 0 keeps k of
  /// them, drawn uniformly without replacement.
  std::size_t detectors_per_source = 0;
  DomainEdges edges = DomainEdges::kClosed;
  std::uint64_t seed = 0;
};

struct MeasurementLayout {
  LayoutDomain domain = LayoutDomain::kD1;
  LayoutOptions options;
  std::vector<std::size_t> source_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (source, detector)

  std::size_t r() const noexcept { return pairs.size(); }
};

/// Sources: ceil(fraction * |D|) domain nodes drawn uniformly without
/// replacement (sorted). Detectors: domain nodes within Chebyshev distance
/// `detector_radius` of the source.
MeasurementLayout build_layout(const Grid2D& grid, const LayoutOptions& options);

/// Layout from explicit pairs; every node must lie on the grid.
MeasurementLayout custom_layout(const Grid2D& grid,
                                std::vector<std::pair<std::size_t, std::size_t>> pairs);

struct LayoutPreset {
  std::string name;
  std::size_t nodes_per_side = 65;
  LayoutOptions layout;
  SamplingMode sampling = SamplingMode::kWithoutReplacement;
};

/// "paper-D1" and "paper-D2".
LayoutPreset layout_preset(std::string_view name);
std::vector<std::string> layout_preset_names();

struct SensitivityFactor {
  GramFactor factor;
  std::size_t solves = 0;  // distinct nodes solved for
};

/// phi(x, k) = grad u_{a}(x) . grad u_{b}(x) for pair k = (a, b), where u_a
/// solves the system with a Gaussian source at node a. The operator is
/// self-adjoint, so forward and adjoint solutions share one cache.
SensitivityFactor assemble_sensitivity_factor(const EllipticSystem& system,
                                              const MeasurementLayout& layout,
                                              unsigned threads = 0);

/// Drops zero-norm rows of phi. The four grid corners are always dropped:
/// both one-sided differences there run along zero-Dirichlet edges.
struct RowRestriction {
  GramFactor factor;
  std::vector<std::size_t> kept_nodes;
  std::vector<std::size_t> dropped_nodes;
};
RowRestriction drop_insensitive_rows(const GramFactor& f);

}  // namespace hsketch::elliptic
