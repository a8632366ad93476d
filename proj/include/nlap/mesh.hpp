#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nlap {

enum class DomainShape { UnitSquare, Rectangle, Disc, Cube };

/// Bounded domain to be meshed. All shapes are centered at `center`
/// (origin by default, so that a ball around 0 fits inside the domain).
struct DomainSpec {
  DomainShape shape = DomainShape::UnitSquare;
  double width = 1.0;   // rectangle
  double height = 1.0;  // rectangle
  double radius = 1.0;  // disc
  double side = 1.0;    // cube
  std::array<double, 3> center{0.0, 0.0, 0.0};

  static DomainSpec unit_square();
  static DomainSpec rectangle(double w, double h);
  static DomainSpec disc(double radius);
  static DomainSpec cube(double side);

  /// Parses "unit-square", "rectangle:WxH", "disc:R", "cube:S".
  static DomainSpec parse(const std::string& text);

  int dim() const { return shape == DomainShape::Cube ? 3 : 2; }
  double diameter() const;
  std::string describe() const;
};

/// Extra meshing knobs. `grading > 1` concentrates disc rings toward the
/// center (ring i at R*(i/n)^grading); `snap_radii` forces rings at the
/// given radii so that radial breakpoints align with element boundaries.
struct MeshOptions {
  double grading = 1.0;
  std::vector<double> snap_radii;
};

/// Conforming simplicial mesh with P1 (piecewise linear) elements.
/// Immutable after generate_mesh(); all derived geometry is precomputed.
struct Mesh {
  int dim = 2;
  std::vector<std::array<double, 3>> nodes;  // z = 0 in 2D
  std::vector<int> elements;                 // (dim+1) indices per element
  std::vector<std::uint8_t> boundary;        // 1 on Dirichlet boundary nodes
  double h = 0.0;                            // max element diameter
  double volume = 0.0;                       // |Omega| = sum of measures

  // derived, filled by finalize()
  std::vector<double> elem_measure;
  std::vector<double> elem_grads;  // (dim+1)*dim per element: grad of each P1 basis
  std::vector<double> lumped_mass;
  std::vector<int> interior;        // interior node ids
  std::vector<int> interior_index;  // node id -> interior slot, -1 on boundary

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const {
    return static_cast<int>(elements.size()) / (dim + 1);
  }
  int verts_per_elem() const { return dim + 1; }
  std::span<const int> element(int e) const {
    return {elements.data() + static_cast<std::size_t>(e) * (dim + 1),
            static_cast<std::size_t>(dim + 1)};
  }
  /// Gradient of local basis v in element e (dim components).
  std::span<const double> basis_grad(int e, int v) const {
    const std::size_t stride = static_cast<std::size_t>(dim + 1) * dim;
    return {elem_grads.data() + e * stride + static_cast<std::size_t>(v) * dim,
            static_cast<std::size_t>(dim)};
  }
  int n_interior() const { return static_cast<int>(interior.size()); }

  /// Max diameter among elements intersecting the ball |x - center| <= radius.
  double resolution_near(double radius,
                         std::array<double, 3> center = {0, 0, 0}) const;

  void finalize();  // computes measures, gradients, masses, interior map
};

Mesh generate_mesh(const DomainSpec& spec, double h);
Mesh generate_mesh(const DomainSpec& spec, double h, const MeshOptions& opts);

/// Sum of element measures.
double mesh_volume(const Mesh& mesh);

}  // namespace nlap
