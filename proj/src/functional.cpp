#include "nlap/functional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace nlap {

OverflowError::OverflowError(double t)
    : std::range_error("nonlinearity overflow: |t|^{N'} exceeds exp range at t = " +
                       std::to_string(t)),
      t_(t) {}

namespace {

// -- Gauss-Legendre nodes on [-1,1], computed once per order ---------------

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const GaussRule& gauss24() {
  static const GaussRule rule = gauss_legendre(24);
  return rule;
}

template <class F>
double gauss_panel(double a, double b, F&& f) {
  const auto& g = gauss24();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i)
    acc += g.w[i] * f(mid + half * g.x[i]);
  return acc * half;
}

double exp_arg(double t, double n_conj) { return std::pow(std::abs(t), n_conj); }

void check_range(double t, double n_conj) {
  if (exp_arg(t, n_conj) > kExpArgLimit) throw OverflowError(t);
}

}  // namespace

// -- PrimitiveTable ----------------------------------------------------------

PrimitiveTable::PrimitiveTable(int N) : N_(N), N_conj_(double(N) / (N - 1)) {
  const double t_max = std::pow(kExpArgLimit, 1.0 / N_conj_);
  knots_.push_back(0.0);
  double t = 1e-8;
  while (t < 1.0 && t < t_max) {
    knots_.push_back(t);
    t *= 1.25;
  }
  while (knots_.back() < t_max) {
    const double cur = knots_.back();
    const double rate = N_conj_ * std::pow(cur, N_conj_ - 1.0);
    const double dt = std::min(0.25, 2.0 / std::max(rate, 1.0));
    knots_.push_back(std::min(cur + dt, t_max));
  }
  cumulative_.resize(knots_.size(), 0.0);
  auto integrand = [&](double s) {
    return std::pow(s, N_ - 1) * std::exp(std::pow(s, N_conj_));
  };
  for (std::size_t i = 1; i < knots_.size(); ++i)
    cumulative_[i] =
        cumulative_[i - 1] + gauss_panel(knots_[i - 1], knots_[i], integrand);
}

double PrimitiveTable::value(double t) const {
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  check_range(a, N_conj_);
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
  const std::size_t idx = static_cast<std::size_t>(it - knots_.begin()) - 1;
  auto integrand = [&](double s) {
    return std::pow(s, N_ - 1) * std::exp(std::pow(s, N_conj_));
  };
  const std::size_t last = std::min(idx, knots_.size() - 1);
  const double r = cumulative_[last] + gauss_panel(knots_[last], a, integrand);
  if (!std::isfinite(r)) throw OverflowError(t);  // backstop near the range edge
  return r;
}

namespace {

std::shared_ptr<const PrimitiveTable> shared_table(int N) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const PrimitiveTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[N];
  if (!slot) slot = std::make_shared<const PrimitiveTable>(N);
  return slot;
}

}  // namespace

double unit_sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

FunctionalParams::FunctionalParams(int N_in, double lambda_in)
    : N(N_in), lambda(lambda_in) {
  if (N < 2) throw std::invalid_argument("FunctionalParams requires N >= 2");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  N_conj = static_cast<double>(N) / (N - 1);
  omega = unit_sphere_area(N);
  alpha_N = N * std::pow(omega, 1.0 / (N - 1));
  F_table = shared_table(N);
}

FeFunction::FeFunction(const Mesh& m, std::vector<double> v)
    : mesh(&m), values(std::move(v)) {
  if (static_cast<int>(values.size()) != m.n_nodes())
    throw std::invalid_argument("FeFunction size does not match mesh");
}

bool dirichlet_admissible(const FeFunction& u, double tol) {
  for (int i = 0; i < u.size(); ++i)
    if (u.mesh->boundary[i] && std::abs(u.values[i]) > tol) return false;
  return true;
}

void enforce_dirichlet(FeFunction& u) {
  for (int i = 0; i < u.size(); ++i)
    if (u.mesh->boundary[i]) u.values[i] = 0.0;
}

// -- pointwise nonlinearity --------------------------------------------------

double nonlinearity_f(double t, const FunctionalParams& p) {
  if (t == 0.0) return 0.0;
  check_range(t, p.N_conj);
  const double a = std::abs(t);
  const double r = std::pow(a, p.N - 2) * t * std::exp(std::pow(a, p.N_conj));
  if (!std::isfinite(r)) throw OverflowError(t);
  return r;
}

double nonlinearity_df(double t, const FunctionalParams& p) {
  check_range(t, p.N_conj);
  const double a = std::abs(t);
  if (a == 0.0) return p.N == 2 ? 1.0 : 0.0;
  const double e = std::exp(std::pow(a, p.N_conj));
  const double r = e * ((p.N - 1) * std::pow(a, p.N - 2) +
                        p.N_conj * std::pow(a, p.N + p.N_conj - 2.0));
  if (!std::isfinite(r)) throw OverflowError(t);
  return r;
}

double primitive_F(double t, const FunctionalParams& p) {
  return p.F_table->value(t);
}

// -- exact P1 integrals ------------------------------------------------------

namespace {

constexpr int kMaxVerts = 4;

double factorial(int n) {
  static const double table[] = {1,      1,       2,        6,        24,
                                 120,    720,     5040,     40320,    362880,
                                 3628800, 39916800, 479001600};
  return table[n];
}

// sum over multi-indices |k| = deg of prod vals[i]^{k_i}, optionally weighted
// by (k_slot + 1)
double hom_sym_sum(const double* vals, int nv, int deg, int slot) {
  double total = 0.0;
  int k[kMaxVerts] = {0, 0, 0, 0};
  // enumerate compositions of deg into nv parts
  auto rec = [&](auto&& self, int pos, int remaining, double prod) -> void {
    if (pos == nv - 1) {
      k[pos] = remaining;
      const double term = prod * std::pow(vals[pos], remaining);
      total += slot >= 0 ? term * (k[slot] + 1) : term;
      return;
    }
    double p = prod;
    for (int c = 0; c <= remaining; ++c) {
      k[pos] = c;
      self(self, pos + 1, remaining - c, p);
      p *= vals[pos];
    }
  };
  rec(rec, 0, deg, 1.0);
  return total;
}

// int_T u^N over a d-simplex with P1 values vals, T of given measure
double simplex_int_pow(double meas, const double* vals, int d, int N) {
  return meas * factorial(d) * factorial(N) / factorial(N + d) *
         hom_sym_sum(vals, d + 1, N, -1);
}

// int_T u^p * mu_j (sub-simplex barycentric basis j)
double simplex_int_pow_basis(double meas, const double* vals, int d, int p, int j) {
  return meas * factorial(d) * factorial(p) / factorial(p + 1 + d) *
         hom_sym_sum(vals, d + 1, p, j);
}

// A sub-simplex of a parent element, tracked in parent barycentric coords.
struct SubSimplex {
  double bary[kMaxVerts][kMaxVerts];  // vertex -> parent barycentric coords
  double vals[kMaxVerts];
  double meas;
};

double det3(const double m[3][3]) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double bary_measure_ratio(const SubSimplex& s, int d) {
  // |det| of the (d+1)x(d+1) matrix of barycentric coordinates
  if (d == 2) {
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = s.bary[i][j];
    return std::abs(det3(m));
  }
  double m[3][3];  // expand along the last column using affine structure:
  // det of 4x4 barycentric matrix equals det of 3x3 differences
  double diff[3][4];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) diff[i][j] = s.bary[i + 1][j] - s.bary[0][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = diff[i][j + 1];
  return std::abs(det3(m));
}

SubSimplex whole_element(std::span<const double> vals, int d) {
  SubSimplex s{};
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) s.bary[i][j] = i == j ? 1.0 : 0.0;
    s.vals[i] = vals[i];
  }
  s.meas = 1.0;  // ratio; caller multiplies by element measure
  return s;
}

void cut_point(const SubSimplex& s, int i, int j, double* out_bary) {
  // zero of u on the segment between vertices i (value a) and j (value b)
  const double a = s.vals[i], b = s.vals[j];
  const double t = a / (a - b);
  for (int x = 0; x < kMaxVerts; ++x)
    out_bary[x] = (1.0 - t) * s.bary[i][x] + t * s.bary[j][x];
}

// Splits an element with mixed-sign values into sign-constant sub-simplices.
// Vertices with value exactly zero are grouped with the positive side; the
// resulting cuts are degenerate there and contribute zero measure.
void clip_element(std::span<const double> vals, int d,
                  std::vector<SubSimplex>& out) {
  out.clear();
  const SubSimplex parent = whole_element(vals, d);
  int pos[kMaxVerts], neg[kMaxVerts];
  int np = 0, nn = 0;
  for (int i = 0; i <= d; ++i)
    (vals[i] >= 0.0 ? pos[np++] : neg[nn++]) = i;
  if (np == 0 || nn == 0) {
    out.push_back(parent);
    out.back().meas = 1.0;
    return;
  }

  auto make_sub = [&](std::initializer_list<const double*> bcoords,
                      std::initializer_list<double> values) {
    SubSimplex s{};
    int i = 0;
    for (const double* b : bcoords) {
      for (int x = 0; x < kMaxVerts; ++x) s.bary[i][x] = b[x];
      ++i;
    }
    i = 0;
    for (double v : values) s.vals[i++] = v;
    s.meas = bary_measure_ratio(s, d);
    out.push_back(s);
  };
  auto vb = [&](int v) { return parent.bary[v]; };

  if (d == 2) {
    // apex = the side with a single vertex
    const int apex = np == 1 ? pos[0] : neg[0];
    const int* other = np == 1 ? neg : pos;
    double p0[kMaxVerts], p1[kMaxVerts];
    cut_point(parent, apex, other[0], p0);
    cut_point(parent, apex, other[1], p1);
    make_sub({vb(apex), p0, p1}, {vals[apex], 0.0, 0.0});
    make_sub({p0, vb(other[0]), vb(other[1])}, {0.0, vals[other[0]], vals[other[1]]});
    make_sub({p0, vb(other[1]), p1}, {0.0, vals[other[1]], 0.0});
    return;
  }

  // d == 3. Prisms below have planar quad faces (each lies on a tet face or
  // on the cut plane), so the standard 3-tet wedge split partitions them.
  if (np == 1 || nn == 1) {
    const int apex = np == 1 ? pos[0] : neg[0];
    const int* other = np == 1 ? neg : pos;
    double p0[kMaxVerts], p1[kMaxVerts], p2[kMaxVerts];
    cut_point(parent, apex, other[0], p0);
    cut_point(parent, apex, other[1], p1);
    cut_point(parent, apex, other[2], p2);
    make_sub({vb(apex), p0, p1, p2}, {vals[apex], 0.0, 0.0, 0.0});
    // frustum: bottom (o0,o1,o2), top (p0,p1,p2)
    make_sub({vb(other[0]), vb(other[1]), vb(other[2]), p0},
             {vals[other[0]], vals[other[1]], vals[other[2]], 0.0});
    make_sub({vb(other[1]), vb(other[2]), p0, p1},
             {vals[other[1]], vals[other[2]], 0.0, 0.0});
    make_sub({vb(other[2]), p0, p1, p2}, {vals[other[2]], 0.0, 0.0, 0.0});
    return;
  }
  // 2-2 split: pos {A,B}, neg {C,D}; both cut-quad triangulations share the
  // diagonal P_AD - P_BC, so the two wedges tile the tetrahedron.
  const int A = pos[0], B = pos[1], C = neg[0], D = neg[1];
  double pac[kMaxVerts], pad[kMaxVerts], pbc[kMaxVerts], pbd[kMaxVerts];
  cut_point(parent, A, C, pac);
  cut_point(parent, A, D, pad);
  cut_point(parent, B, C, pbc);
  cut_point(parent, B, D, pbd);
  // positive wedge: bottom (A, P_AC, P_AD), top (B, P_BC, P_BD)
  make_sub({vb(A), pac, pad, vb(B)}, {vals[A], 0.0, 0.0, vals[B]});
  make_sub({pac, pad, vb(B), pbc}, {0.0, 0.0, vals[B], 0.0});
  make_sub({pad, vb(B), pbc, pbd}, {0.0, vals[B], 0.0, 0.0});
  // negative wedge: bottom (C, P_AC, P_BC), top (D, P_AD, P_BD)
  make_sub({vb(C), pac, pbc, vb(D)}, {vals[C], 0.0, 0.0, vals[D]});
  make_sub({pac, pbc, vb(D), pad}, {0.0, 0.0, vals[D], 0.0});
  make_sub({pbc, vb(D), pad, pbd}, {0.0, vals[D], 0.0, 0.0});
}

}  // namespace

double integral_grad_pow(const FeFunction& u, int N) {
  const Mesh& m = *u.mesh;
  const int d = m.dim;
  double total = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto el = m.element(e);
    double g[3] = {0, 0, 0};
    for (int v = 0; v <= d; ++v) {
      const auto gb = m.basis_grad(e, v);
      for (int x = 0; x < d; ++x) g[x] += u.values[el[v]] * gb[x];
    }
    double norm2 = 0.0;
    for (int x = 0; x < d; ++x) norm2 += g[x] * g[x];
    total += m.elem_measure[e] * std::pow(norm2, N / 2.0);
  }
  return total;
}

void add_grad_integral_grad_pow(const FeFunction& u, int N, std::span<double> out) {
  const Mesh& m = *u.mesh;
  const int d = m.dim;
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto el = m.element(e);
    double g[3] = {0, 0, 0};
    for (int v = 0; v <= d; ++v) {
      const auto gb = m.basis_grad(e, v);
      for (int x = 0; x < d; ++x) g[x] += u.values[el[v]] * gb[x];
    }
    double norm2 = 0.0;
    for (int x = 0; x < d; ++x) norm2 += g[x] * g[x];
    if (norm2 == 0.0) continue;
    const double w = N * m.elem_measure[e] * std::pow(norm2, (N - 2) / 2.0);
    for (int v = 0; v <= d; ++v) {
      const auto gb = m.basis_grad(e, v);
      double dot = 0.0;
      for (int x = 0; x < d; ++x) dot += g[x] * gb[x];
      out[el[v]] += w * dot;
    }
  }
}

double integral_abs_pow(const FeFunction& u, int N) {
  const Mesh& m = *u.mesh;
  const int d = m.dim;
  double total = 0.0;
  std::vector<SubSimplex> pieces;
  double vals[kMaxVerts];
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto el = m.element(e);
    for (int v = 0; v <= d; ++v) vals[v] = u.values[el[v]];
    clip_element({vals, static_cast<std::size_t>(d + 1)}, d, pieces);
    for (const auto& s : pieces) {
      if (s.meas == 0.0) continue;
      total += std::abs(simplex_int_pow(m.elem_measure[e] * s.meas, s.vals, d, N));
    }
  }
  return total;
}

void add_grad_integral_abs_pow(const FeFunction& u, int N, std::span<double> out) {
  const Mesh& m = *u.mesh;
  const int d = m.dim;
  std::vector<SubSimplex> pieces;
  double vals[kMaxVerts];
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto el = m.element(e);
    for (int v = 0; v <= d; ++v) vals[v] = u.values[el[v]];
    clip_element({vals, static_cast<std::size_t>(d + 1)}, d, pieces);
    for (const auto& s : pieces) {
      if (s.meas == 0.0) continue;
      double sum = 0.0;
      for (int j = 0; j <= d; ++j) sum += s.vals[j];
      if (sum == 0.0) continue;
      // |u|^{N-1} sgn(u) = sgn(u)^N u^{N-1} with u of constant sign per piece
      const double mult = (sum < 0.0 && N % 2 == 0) ? 1.0 : (sum < 0.0 ? -1.0 : 1.0);
      const double meas = m.elem_measure[e] * s.meas;
      for (int i = 0; i <= d; ++i) {
        // parent basis phi_i restricted to the sub-simplex has nodal values
        // bary[j][i]; integrate u^{N-1} phi_i via the moment formula
        double acc = 0.0;
        for (int j = 0; j <= d; ++j) {
          if (s.bary[j][i] == 0.0) continue;
          acc += s.bary[j][i] * simplex_int_pow_basis(meas, s.vals, d, N - 1, j);
        }
        out[el[i]] += mult * N * acc;
      }
    }
  }
}

// -- energy ------------------------------------------------------------------

double energy_Phi(const FeFunction& u, const FunctionalParams& p) {
  const double grad_term = integral_grad_pow(u, p.N) / p.N;
  if (p.lambda == 0.0) return grad_term;
  double f_term = 0.0;
  for (int i = 0; i < u.size(); ++i)
    f_term += u.mesh->lumped_mass[i] * primitive_F(u.values[i], p);
  return grad_term - p.lambda * f_term;
}

FeFunction grad_Phi(const FeFunction& u, const FunctionalParams& p) {
  FeFunction g(*u.mesh);
  std::vector<double> dG(u.size(), 0.0);
  add_grad_integral_grad_pow(u, p.N, dG);  // carries the factor N already
  for (int i = 0; i < u.size(); ++i) {
    if (u.mesh->boundary[i]) continue;
    g.values[i] = dG[i] / p.N -
                  p.lambda * u.mesh->lumped_mass[i] * nonlinearity_f(u.values[i], p);
  }
  return g;
}

double psi(const FeFunction& u, const FunctionalParams& p) { return psi(u, p.N); }

double psi(const FeFunction& u, int N) {
  const double L = integral_abs_pow(u, N);
  if (!(L > 0.0)) throw std::invalid_argument("psi: int |u|^N vanishes (u = 0?)");
  return 1.0 / L;
}

FeFunction radial_project(const FeFunction& u, const FunctionalParams& p) {
  return radial_project(u, p.N);
}

FeFunction radial_project(const FeFunction& u, int N) {
  const double G = integral_grad_pow(u, N);
  if (!(G > 0.0))
    throw std::invalid_argument("radial_project: ||grad u||_N vanishes (u = 0?)");
  const double scale = std::pow(G, -1.0 / N);
  FeFunction v(*u.mesh);
  for (int i = 0; i < u.size(); ++i) v.values[i] = scale * u.values[i];
  return v;
}

double tm_functional(const FeFunction& u, double alpha, const FunctionalParams& p) {
  double acc = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double arg = alpha * std::pow(std::abs(u.values[i]), p.N_conj);
    if (arg > kExpArgLimit) throw OverflowError(u.values[i]);
    acc += u.mesh->lumped_mass[i] * std::exp(arg);
  }
  return acc;
}

}  // namespace nlap
