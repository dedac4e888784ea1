#pragma once

#include <cstddef>
#include <vector>

#include "kernelpf/matrix.hpp"

namespace kernelpf {

/// Support graph of a finite kernel: edge i -> j when M(i,{j}) > 0.
std::vector<std::vector<std::size_t>> support_graph(const Matrix& m, double threshold = 0.0);

/// True iff the support graph is strongly connected (counting measure is
/// then an irreducibility measure).
bool strongly_connected(const std::vector<std::vector<std::size_t>>& graph);

struct PeriodResult {
  std::size_t d = 1;
  /// classes[i] in {0..d-1}; mass from class c flows only into class c+1 mod d.
  std::vector<std::size_t> classes;
};

/// Period of an irreducible finite kernel: gcd of all cycle lengths through
/// a fixed reference state, plus the cyclic class partition. Throws on
/// reducible input.
PeriodResult detect_period_graph(const std::vector<std::vector<std::size_t>>& graph);

}  // namespace kernelpf
