#pragma once

#include "causagen/ci_test.hpp"
#include "causagen/graph.hpp"

namespace causagen {

struct PcOptions {
  double alpha = 0.05;
  int max_condition_size = 3;
};

// PC-stable: adjacency sets are frozen at the start of each level, separating
// sets are the first independent subset in lexicographic order, colliders are
// oriented from separating sets, then Meek rules close the pattern.
Cpdag pc_stable(const NodeSet& nodes, const CiTest& test, const PcOptions& options = {});
Cpdag pc_stable(const Table& data, const PcOptions& options = {});

// Fixpoint of Meek rules R1-R4. Throws DataError if the input has a directed
// cycle or an orientation would create one.
Cpdag meek_closure(const Cpdag& g);

}  // namespace causagen
