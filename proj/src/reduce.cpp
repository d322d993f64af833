#include "cqw/reduce.hpp"

namespace cqw {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double sum_norm2(const std::vector<Spinor>& data) {
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) v[i] = data[i].norm2();
  return pairwise_sum(v);
}

}  // namespace cqw
