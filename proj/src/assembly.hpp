// Internal sparse-assembly helpers shared by the eigен solver and the Newton
// refiner. Interior-dof numbering comes from Mesh::interior_index.
#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "nlap/functional.hpp"
#include "nlap/mesh.hpp"

namespace nlap::detail {

using SpMat = Eigen::SparseMatrix<double>;

// K_ij = sum_e meas_e w_e grad(phi_i).grad(phi_j), interior rows/cols only.
inline SpMat weighted_stiffness(const Mesh& m, const std::vector<double>& w) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m.n_elements()) * 16);
  const int d = m.dim;
  for (int e = 0; e < m.n_elements(); ++e) {
    if (w[e] == 0.0) continue;
    const auto el = m.element(e);
    const double c = m.elem_measure[e] * w[e];
    for (int a = 0; a <= d; ++a) {
      const int ia = m.interior_index[el[a]];
      if (ia < 0) continue;
      const auto ga = m.basis_grad(e, a);
      for (int b = 0; b <= d; ++b) {
        const int ib = m.interior_index[el[b]];
        if (ib < 0) continue;
        const auto gb = m.basis_grad(e, b);
        double dot = 0.0;
        for (int x = 0; x < d; ++x) dot += ga[x] * gb[x];
        trips.emplace_back(ia, ib, c * dot);
      }
    }
  }
  SpMat K(m.n_interior(), m.n_interior());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

inline Eigen::VectorXd to_interior(const Mesh& m, const std::vector<double>& full) {
  Eigen::VectorXd v(m.n_interior());
  for (int i = 0; i < m.n_interior(); ++i) v[i] = full[m.interior[i]];
  return v;
}

inline void from_interior(const Mesh& m, const Eigen::VectorXd& v,
                          std::vector<double>& full) {
  std::fill(full.begin(), full.end(), 0.0);
  for (int i = 0; i < m.n_interior(); ++i) full[m.interior[i]] = v[i];
}

}  // namespace nlap::detail
