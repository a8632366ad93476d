#include "nlap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace nlap {

DomainSpec DomainSpec::unit_square() { return DomainSpec{}; }

DomainSpec DomainSpec::rectangle(double w, double h) {
  DomainSpec s;
  s.shape = DomainShape::Rectangle;
  s.width = w;
  s.height = h;
  return s;
}

DomainSpec DomainSpec::disc(double radius) {
  DomainSpec s;
  s.shape = DomainShape::Disc;
  s.radius = radius;
  return s;
}

DomainSpec DomainSpec::cube(double side) {
  DomainSpec s;
  s.shape = DomainShape::Cube;
  s.side = side;
  return s;
}

DomainSpec DomainSpec::parse(const std::string& text) {
  auto bad = [&] {
    throw std::invalid_argument("unknown domain spec: '" + text + "'");
  };
  if (text == "unit-square") return unit_square();
  auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "rectangle") {
      auto x = rest.find('x');
      if (x == std::string::npos) bad();
      return rectangle(std::stod(rest.substr(0, x)), std::stod(rest.substr(x + 1)));
    }
    if (kind == "disc") return disc(std::stod(rest));
    if (kind == "cube") return cube(std::stod(rest));
  } catch (const std::logic_error&) {
    bad();
  }
  bad();
  return {};
}

double DomainSpec::diameter() const {
  switch (shape) {
    case DomainShape::UnitSquare: return std::numbers::sqrt2;
    case DomainShape::Rectangle: return std::hypot(width, height);
    case DomainShape::Disc: return 2.0 * radius;
    case DomainShape::Cube: return side * std::sqrt(3.0);
  }
  return 0.0;
}

std::string DomainSpec::describe() const {
  switch (shape) {
    case DomainShape::UnitSquare: return "unit-square";
    case DomainShape::Rectangle:
      return "rectangle:" + std::to_string(width) + "x" + std::to_string(height);
    case DomainShape::Disc: return "disc:" + std::to_string(radius);
    case DomainShape::Cube: return "cube:" + std::to_string(side);
  }
  return "?";
}

namespace {

void validate(const DomainSpec& spec, double h) {
  const bool positive = [&] {
    switch (spec.shape) {
      case DomainShape::UnitSquare: return true;
      case DomainShape::Rectangle: return spec.width > 0 && spec.height > 0;
      case DomainShape::Disc: return spec.radius > 0;
      case DomainShape::Cube: return spec.side > 0;
    }
    return false;
  }();
  if (!positive) throw std::invalid_argument("degenerate domain: non-positive size");
  if (!(h > 0) || h >= spec.diameter())
    throw std::invalid_argument("mesh resolution h must satisfy 0 < h < diameter");
}

int cells_for(double extent, double h) {
  const int n = static_cast<int>(std::ceil(extent / h - 1e-9));
  return std::max(n, 2);  // at least one interior node
}

Mesh grid_2d(double w, double hgt, const std::array<double, 3>& c, double h) {
  Mesh m;
  m.dim = 2;
  const int nx = cells_for(w, h);
  const int ny = cells_for(hgt, h);
  const int npx = nx + 1, npy = ny + 1;
  m.nodes.reserve(static_cast<std::size_t>(npx) * npy);
  m.boundary.assign(static_cast<std::size_t>(npx) * npy, 0);
  for (int j = 0; j < npy; ++j) {
    for (int i = 0; i < npx; ++i) {
      const double x = c[0] + w * (static_cast<double>(i) / nx - 0.5);
      const double y = c[1] + hgt * (static_cast<double>(j) / ny - 0.5);
      m.nodes.push_back({x, y, 0.0});
      if (i == 0 || j == 0 || i == nx || j == ny)
        m.boundary[static_cast<std::size_t>(j) * npx + i] = 1;
    }
  }
  auto id = [&](int i, int j) { return j * npx + i; };
  m.elements.reserve(static_cast<std::size_t>(nx) * ny * 6);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j);
      const int v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      // diagonal v00-v11 everywhere: uniform refinement nests
      m.elements.insert(m.elements.end(), {v00, v10, v11});
      m.elements.insert(m.elements.end(), {v00, v11, v01});
    }
  }
  m.volume = w * hgt;
  return m;
}

Mesh disc_mesh(double R, const std::array<double, 3>& c, double h,
               const MeshOptions& opts) {
  Mesh m;
  m.dim = 2;
  const int n = std::max(2, static_cast<int>(std::ceil(R / h - 1e-9)));
  std::vector<double> radii(n + 1, 0.0);
  for (int i = 0; i <= n; ++i)
    radii[i] = R * std::pow(static_cast<double>(i) / n, opts.grading);
  for (double snap : opts.snap_radii) {
    if (!(snap > 0.0) || snap >= R) continue;
    int best = 1;
    for (int i = 1; i < n; ++i)
      if (std::abs(radii[i] - snap) < std::abs(radii[best] - snap)) best = i;
    radii[best] = snap;
  }
  for (int i = 1; i <= n; ++i)
    if (!(radii[i] > radii[i - 1]))
      throw std::invalid_argument("disc snap radii break ring monotonicity");

  m.nodes.push_back({c[0], c[1], 0.0});
  m.boundary.push_back(0);
  auto ring_start = [&](int i) { return 1 + 3 * i * (i - 1); };
  for (int i = 1; i <= n; ++i) {
    const int count = 6 * i;
    for (int q = 0; q < count; ++q) {
      const double a = 2.0 * std::numbers::pi * q / count;
      m.nodes.push_back({c[0] + radii[i] * std::cos(a),
                         c[1] + radii[i] * std::sin(a), 0.0});
      m.boundary.push_back(i == n ? 1 : 0);
    }
  }
  // ring 1 fan around the center
  for (int q = 0; q < 6; ++q)
    m.elements.insert(m.elements.end(),
                      {0, ring_start(1) + q, ring_start(1) + (q + 1) % 6});
  for (int i = 2; i <= n; ++i) {
    const int inner = ring_start(i - 1), outer = ring_start(i);
    const int ni = 6 * (i - 1), no = 6 * i;
    for (int k = 0; k < 6; ++k) {
      for (int s = 0; s < i; ++s) {
        const int o0 = outer + (k * i + s) % no;
        const int o1 = outer + (k * i + s + 1) % no;
        const int in0 = inner + (k * (i - 1) + s) % ni;
        m.elements.insert(m.elements.end(), {in0, o0, o1});
        if (s + 1 < i) {
          const int in1 = inner + (k * (i - 1) + s + 1) % ni;
          m.elements.insert(m.elements.end(), {in0, o1, in1});
        }
      }
    }
  }
  return m;  // volume filled from element measures in finalize()
}

Mesh cube_mesh(double side, const std::array<double, 3>& c, double h) {
  Mesh m;
  m.dim = 3;
  const int n = cells_for(side, h);
  const int np = n + 1;
  m.nodes.reserve(static_cast<std::size_t>(np) * np * np);
  m.boundary.assign(static_cast<std::size_t>(np) * np * np, 0);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) {
        m.nodes.push_back({c[0] + side * (static_cast<double>(i) / n - 0.5),
                           c[1] + side * (static_cast<double>(j) / n - 0.5),
                           c[2] + side * (static_cast<double>(k) / n - 0.5)});
        if (i == 0 || j == 0 || k == 0 || i == n || j == n || k == n)
          m.boundary[m.nodes.size() - 1] = 1;
      }
  auto id = [&](int i, int j, int k) { return (k * np + j) * np + i; };
  // Kuhn subdivision: six tetrahedra per cell, all sharing the main diagonal
  static const int kTets[6][4][3] = {
      {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}},
      {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 1, 1}},
      {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 1, 1}},
      {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 1, 1}},
      {{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}},
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& tet : kTets)
          for (const auto& v : tet)
            m.elements.push_back(id(i + v[0], j + v[1], k + v[2]));
  m.volume = side * side * side;
  return m;
}

}  // namespace

void Mesh::finalize() {
  const int d = dim;
  const int ne = n_elements();
  elem_measure.assign(ne, 0.0);
  elem_grads.assign(static_cast<std::size_t>(ne) * (d + 1) * d, 0.0);
  lumped_mass.assign(nodes.size(), 0.0);
  h = 0.0;
  double measure_sum = 0.0;

  Eigen::MatrixXd J(d, d), Jinv(d, d);
  for (int e = 0; e < ne; ++e) {
    const auto el = element(e);
    for (int col = 0; col < d; ++col)
      for (int row = 0; row < d; ++row)
        J(row, col) = nodes[el[col + 1]][row] - nodes[el[0]][row];
    const double det = J.determinant();
    if (!(std::abs(det) > 0.0))
      throw std::runtime_error("degenerate element in mesh");
    const double meas = std::abs(det) / (d == 2 ? 2.0 : 6.0);
    elem_measure[e] = meas;
    measure_sum += meas;
    Jinv = J.inverse();
    // grad of barycentric i>=1 is row (i-1) of J^{-1}; grad of lambda_0 = -sum
    const std::size_t base = static_cast<std::size_t>(e) * (d + 1) * d;
    for (int i = 1; i <= d; ++i)
      for (int x = 0; x < d; ++x) {
        elem_grads[base + static_cast<std::size_t>(i) * d + x] = Jinv(i - 1, x);
        elem_grads[base + x] -= Jinv(i - 1, x);
      }
    for (int i = 0; i <= d; ++i) lumped_mass[el[i]] += meas / (d + 1);
    for (int a = 0; a <= d; ++a)
      for (int b = a + 1; b <= d; ++b) {
        double len2 = 0.0;
        for (int x = 0; x < d; ++x) {
          const double dx = nodes[el[a]][x] - nodes[el[b]][x];
          len2 += dx * dx;
        }
        h = std::max(h, std::sqrt(len2));
      }
  }
  if (volume == 0.0) volume = measure_sum;

  interior.clear();
  interior_index.assign(nodes.size(), -1);
  for (int i = 0; i < n_nodes(); ++i)
    if (!boundary[i]) {
      interior_index[i] = static_cast<int>(interior.size());
      interior.push_back(i);
    }
  if (interior.empty()) throw std::runtime_error("mesh has no interior node");
}

double Mesh::resolution_near(double radius, std::array<double, 3> center) const {
  double res = 0.0;
  for (int e = 0; e < n_elements(); ++e) {
    bool near = false;
    for (int v : element(e)) {
      double d2 = 0.0;
      for (int x = 0; x < dim; ++x) {
        const double dx = nodes[v][x] - center[x];
        d2 += dx * dx;
      }
      if (d2 <= radius * radius) {
        near = true;
        break;
      }
    }
    if (!near) continue;
    const auto el = element(e);
    for (int a = 0; a <= dim; ++a)
      for (int b = a + 1; b <= dim; ++b) {
        double len2 = 0.0;
        for (int x = 0; x < dim; ++x) {
          const double dx = nodes[el[a]][x] - nodes[el[b]][x];
          len2 += dx * dx;
        }
        res = std::max(res, std::sqrt(len2));
      }
  }
  return res;
}

Mesh generate_mesh(const DomainSpec& spec, double h) {
  return generate_mesh(spec, h, MeshOptions{});
}

Mesh generate_mesh(const DomainSpec& spec, double h, const MeshOptions& opts) {
  validate(spec, h);
  Mesh m;
  switch (spec.shape) {
    case DomainShape::UnitSquare:
      m = grid_2d(1.0, 1.0, spec.center, h);
      break;
    case DomainShape::Rectangle:
      m = grid_2d(spec.width, spec.height, spec.center, h);
      break;
    case DomainShape::Disc:
      m = disc_mesh(spec.radius, spec.center, h, opts);
      break;
    case DomainShape::Cube:
      m = cube_mesh(spec.side, spec.center, h);
      break;
  }
  m.finalize();
  return m;
}

double mesh_volume(const Mesh& mesh) {
  double v = 0.0;
  for (double meas : mesh.elem_measure) v += meas;
  return v;
}

}  // namespace nlap
