#include "offtarget/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace offtarget {

template <typename T>
void adam_update(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state, double lr) {
  const std::size_t n = params.values.size();
  if (grads.values.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw std::invalid_argument("adam: shape mismatch");
  for (T g : grads.values)
    if (!std::isfinite(g)) throw std::runtime_error("adam: non-finite gradient");

  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const T tb1 = static_cast<T>(b1);
  const T tb2 = static_cast<T>(b2);
  const T step = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(state.eps);
  T* p = params.values.data();
  const T* g = grads.values.data();
  T* m = state.first_moment.data();
  T* v = state.second_moment.data();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = tb1 * m[i] + (T(1) - tb1) * g[i];
    v[i] = tb2 * v[i] + (T(1) - tb2) * g[i] * g[i];
    p[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
  }
}

template void adam_update<float>(Parameters<float>&, const Parameters<float>&, AdamState<float>&, double);
template void adam_update<double>(Parameters<double>&, const Parameters<double>&, AdamState<double>&, double);

}  // namespace offtarget
