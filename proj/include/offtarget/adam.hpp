#pragma once

#include <cstdint>
#include <vector>

#include "offtarget/parameters.hpp"

namespace offtarget {

template <typename T>
struct AdamState {
  AlignedVector<T> first_moment;
  AlignedVector<T> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;

  static AdamState for_params(const Parameters<T>& p) {
    AdamState s;
    s.first_moment.assign(p.values.size(), T(0));
    s.second_moment.assign(p.values.size(), T(0));
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam step. Throws on non-finite gradients, leaving
/// params and state untouched.
template <typename T>
void adam_update(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state, double lr);

}  // namespace offtarget
