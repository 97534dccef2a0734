#include <algorithm>
#include <cmath>
#include <string>

#include "doctest.h"
#include "offtarget/transformer.hpp"
#include "test_support.hpp"

using namespace offtarget;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 1e-4;
constexpr std::uint64_t kDropoutSeed = 2718;

double loss_at(const Parameters<double>& p, const ModelConfig& c, const Batch& batch, double smoothing) {
  Rng rng(kDropoutSeed);
  return compute_loss(p, c, batch, smoothing, true, &rng);
}

struct TensorError {
  std::string name;
  double relative = 0.0;
};

// Per tensor: max |fd - analytic| / max(max |fd|, max |analytic|, floor). The
// floor only matters for tensors whose true gradient is zero, such as key
// biases, which softmax is invariant to.
constexpr double kScaleFloor = 1e-6;

std::vector<TensorError> gradient_errors(const ModelConfig& c, std::uint64_t seed, double smoothing) {
  auto p = init_params<double>(c, seed);
  // move gains and biases off their trivial init so every path is exercised
  Rng jitter(seed ^ 0xabcdef);
  for (auto& v : p.values) v += 0.1 * (uniform01(jitter) - 0.5);
  const auto batch = testing::random_batch(3, c.vocab_size, seed + 1);
  Rng rng(kDropoutSeed);
  const auto analytic = loss_and_grads(p, c, batch, smoothing, rng);
  CHECK(analytic.loss == doctest::Approx(loss_at(p, c, batch, smoothing)).epsilon(1e-12));

  std::vector<TensorError> out;
  for (int s = 0; s < static_cast<int>(p.layout.tensors.size()); ++s) {
    const auto& info = p.layout.tensors[static_cast<std::size_t>(s)];
    double max_diff = 0, max_fd = 0, max_an = 0;
    for (std::size_t i = 0; i < info.size(); ++i) {
      const std::size_t k = info.offset + i;
      const double keep = p.values[k];
      p.values[k] = keep + kStep;
      const double up = loss_at(p, c, batch, smoothing);
      p.values[k] = keep - kStep;
      const double down = loss_at(p, c, batch, smoothing);
      p.values[k] = keep;
      const double fd = (up - down) / (2 * kStep);
      const double an = analytic.grads.values[k];
      max_diff = std::max(max_diff, std::abs(fd - an));
      max_fd = std::max(max_fd, std::abs(fd));
      max_an = std::max(max_an, std::abs(an));
    }
    const double scale = std::max({max_fd, max_an, kScaleFloor});
    out.push_back({info.name, max_diff / scale});
  }
  return out;
}

void check_all(const std::vector<TensorError>& errors) {
  for (const auto& e : errors) {
    INFO(e.name << " relative error " << e.relative);
    CHECK(e.relative < kTolerance);
  }
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  const auto c = testing::tiny_config();
  check_all(gradient_errors(c, 1, 0.0));
}

TEST_CASE("gradients with label smoothing") {
  const auto c = testing::tiny_config();
  check_all(gradient_errors(c, 2, 0.2));
}

TEST_CASE("gradients with the encoder residual removed") {
  auto c = testing::tiny_config();
  c.residual_removed_enc_layer = 0;
  check_all(gradient_errors(c, 3, 0.2));
}

TEST_CASE("gradients through deeper stacks without dropout") {
  auto c = testing::tiny_config();
  c.enc_layers = 2;
  c.dec_layers = 2;
  c.dropout_prob = 0.0;
  c.residual_removed_enc_layer = 1;
  check_all(gradient_errors(c, 4, 0.1));
}
