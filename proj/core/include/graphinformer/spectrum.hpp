// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "graphinformer/graph.hpp"

namespace gi {

/// Ascending adjacency eigenvalues.
std::vector<double> adjacency_spectrum(const Graph& g);

enum class SpectrumVerdict { cospectral, different };

/// Compares sorted spectra elementwise within `tolerance`.
SpectrumVerdict spectrum_compare(const Graph& g1, const Graph& g2, double tolerance = 1e-8);

}  // namespace gi
