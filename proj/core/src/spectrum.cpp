// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace gi {

std::vector<double> adjacency_spectrum(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n == 0) return {};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [u, v] : g.edges()) {
    a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
    a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

SpectrumVerdict spectrum_compare(const Graph& g1, const Graph& g2, double tolerance) {
  if (g1.size() != g2.size()) return SpectrumVerdict::different;
  const auto s1 = adjacency_spectrum(g1), s2 = adjacency_spectrum(g2);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (std::abs(s1[i] - s2[i]) > tolerance) return SpectrumVerdict::different;
  }
  return SpectrumVerdict::cospectral;
}

}  // namespace gi
