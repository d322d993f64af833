#pragma once

#include <cstddef>
#include <vector>

#include "cqw/types.hpp"

namespace cqw {

/// Sum in a fixed pairwise tree order; the result does not depend on threading.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

/// Pairwise sum of |psi|^2 over all spinors (no area weight).
double sum_norm2(const std::vector<Spinor>& data);

}  // namespace cqw
