#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "nlap/mesh.hpp"

namespace nlap {

/// Thrown when exp(|t|^N') would exceed double range. Callers doing line
/// searches catch this and treat the step as inadmissible; the value is
/// never silently +inf.
class OverflowError : public std::range_error {
 public:
  explicit OverflowError(double t);
  double argument() const { return t_; }

 private:
  double t_;
};

inline constexpr double kExpArgLimit = 700.0;

/// Cumulative table for F(t) = int_0^|t| s^{N-1} exp(s^{N'}) ds.
/// Panels are log-spaced near zero and shrink like 1/(N' t^{N'-1}) for
/// large t so that fixed-order Gauss panels stay at full precision.
class PrimitiveTable {
 public:
  explicit PrimitiveTable(int N);
  double value(double t) const;  // t within [0, t_max]
  double t_max() const { return knots_.back(); }

 private:
  int N_;
  double N_conj_;
  std::vector<double> knots_;
  std::vector<double> cumulative_;
};

/// Parameter bundle (N, N', lambda, alpha_N) driving every energy
/// evaluation. omega is the area of the unit sphere in R^N, computed from
/// 2 pi^{N/2} / Gamma(N/2).
struct FunctionalParams {
  int N = 2;
  double N_conj = 2.0;   // N/(N-1)
  double lambda = 1.0;
  double omega = 0.0;    // area of unit sphere S^{N-1}
  double alpha_N = 0.0;  // N * omega^{1/(N-1)}
  std::shared_ptr<const PrimitiveTable> F_table;

  FunctionalParams() : FunctionalParams(2, 1.0) {}
  FunctionalParams(int N, double lambda);
};

double unit_sphere_area(int N);

/// Nodal coefficients over a mesh. Members of W^{1,N}_0 must vanish on
/// boundary-masked nodes; multiplier fields (cutoffs) need not.
struct FeFunction {
  const Mesh* mesh = nullptr;
  std::vector<double> values;

  FeFunction() = default;
  explicit FeFunction(const Mesh& m) : mesh(&m), values(m.n_nodes(), 0.0) {}
  FeFunction(const Mesh& m, std::vector<double> v);

  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  int size() const { return static_cast<int>(values.size()); }
};

bool dirichlet_admissible(const FeFunction& u, double tol = 0.0);
void enforce_dirichlet(FeFunction& u);

// pointwise nonlinearity and primitive -------------------------------------

/// f(t) = |t|^{N-2} t exp(|t|^{N'}); the spectral parameter is applied by
/// the caller.
double nonlinearity_f(double t, const FunctionalParams& p);
/// f'(t), used by the Newton refiner.
double nonlinearity_df(double t, const FunctionalParams& p);
/// F(t) = int_0^|t| s^{N-1} exp(s^{N'}) ds, even in t.
double primitive_F(double t, const FunctionalParams& p);

// discrete integrals --------------------------------------------------------

/// int |grad u|^N, exact per element for P1.
double integral_grad_pow(const FeFunction& u, int N);
/// d/du_i of integral_grad_pow, accumulated into `out`.
void add_grad_integral_grad_pow(const FeFunction& u, int N, std::span<double> out);

/// int |u|^N, exact per element: sign-constant pieces use the closed-form
/// simplex moment of u^N; sign-changing elements are clipped along u = 0.
double integral_abs_pow(const FeFunction& u, int N);
/// d/du_i of integral_abs_pow, accumulated into `out`.
void add_grad_integral_abs_pow(const FeFunction& u, int N, std::span<double> out);

/// Mass-lumped quadrature sum m_i g(u_i).
template <class G>
double lumped_integral(const FeFunction& u, G&& g) {
  double acc = 0.0;
  for (int i = 0; i < u.size(); ++i) acc += u.mesh->lumped_mass[i] * g(u.values[i]);
  return acc;
}

// energy functional ---------------------------------------------------------

/// Phi(u) = int [ (1/N)|grad u|^N - lambda F(u) ] with the elementwise-exact
/// gradient term and mass-lumped F term.
double energy_Phi(const FeFunction& u, const FunctionalParams& p);
/// Coefficient-space gradient of Phi; zero on boundary nodes.
FeFunction grad_Phi(const FeFunction& u, const FunctionalParams& p);

/// Psi(u) = 1 / int |u|^N. Rejects u = 0.
double psi(const FeFunction& u, const FunctionalParams& p);
double psi(const FeFunction& u, int N);

/// Radial projection u / ||grad u||_N onto M = { int |grad u|^N = 1 }.
FeFunction radial_project(const FeFunction& u, const FunctionalParams& p);
FeFunction radial_project(const FeFunction& u, int N);

/// int exp(alpha |u|^{N'}) by nodal quadrature.
double tm_functional(const FeFunction& u, double alpha, const FunctionalParams& p);

}  // namespace nlap
