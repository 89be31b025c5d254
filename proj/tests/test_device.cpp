#include <doctest.h>

#include <cmath>
#include <random>

#include "actnas/device.hpp"

using namespace actnas;

namespace {

DeviceProfile hand_profile(double noise = 0.0) {
  DeviceProfile p;
  p.name = "hand";
  p.base_layer_cost = 1.0;
  p.per_activation_cost = {0.5, 4.0, 2.0, 0.75, 1.0};
  p.memory_per_element = {2.0, 8.0, 1.0, 2.0, 3.0};
  p.noise_amplitude = noise;
  p.seed = 99;
  return p;
}

double sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST_CASE("noise-free latency is the exact deterministic sum") {
  const ModelSpec m = make_toy_model(2);  // 256 + 10 elements, SiLU
  const double expected = (256.0 * (1.0 + 4.0) + 10.0 * (1.0 + 4.0)) * 1e-6;
  for (int runs : {1, 3, 50, 400}) {
    CHECK(simulate_latency(m, hand_profile(), MeasurementConfig{runs, {}}) == expected);
  }
}

TEST_CASE("latency with mixed activations matches manual arithmetic") {
  ModelSpec m = make_toy_model(2);
  m.layers[0].activation = ActivationKind::ReLU;
  m.layers[1].activation = ActivationKind::Hardswish;
  const double expected = (256.0 * 1.5 + 10.0 * 3.0) * 1e-6;
  CHECK(simulate_latency(m, hand_profile()) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("noisy latency is reproducible") {
  const ModelSpec m = make_toy_model(5);
  const DeviceProfile p = hand_profile(0.3);
  CHECK(simulate_latency(m, p) == simulate_latency(m, p));
  DeviceProfile other = p;
  other.seed = 100;
  CHECK(simulate_latency(m, p) != simulate_latency(m, other));
  const double noiseless = simulate_latency(m, hand_profile());
  CHECK(std::abs(simulate_latency(m, p) / noiseless - 1.0) <= 0.3);
}

TEST_CASE("averaging over more runs shrinks the spread") {
  const ModelSpec m = make_toy_model(4);
  std::vector<double> one, many;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DeviceProfile p = hand_profile(0.2);
    p.seed = seed;
    one.push_back(simulate_latency(m, p, MeasurementConfig{1, {}}));
    many.push_back(simulate_latency(m, p, MeasurementConfig{400, {}}));
  }
  CHECK(sample_std(one) / sample_std(many) > 5.0);
}

TEST_CASE("raising an activation coefficient never lowers latency") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    ModelSpec m = make_toy_model(1 + rng() % 8);
    for (auto& l : m.layers) l.activation = kAllActivations[rng() % 5];
    const ActivationKind bumped = m.layers[rng() % m.size()].activation;
    DeviceProfile p = hand_profile(0.1);
    const double before = simulate_latency(m, p);
    p.per_activation_cost[column_index(bumped)] += 0.01 + static_cast<double>(rng() % 100) / 10.0;
    CHECK(simulate_latency(m, p) >= before);
  }
}

TEST_CASE("memory model") {
  const ModelSpec m = make_toy_model(3);
  DeviceProfile flat = hand_profile();
  flat.memory_per_element.fill(3.0);
  CHECK(simulate_memory(m, flat) == doctest::Approx(3.0 * static_cast<double>(m.total_elements()) / 1024.0));

  const DeviceProfile p = hand_profile();
  const ModelSpec swapped = apply_replacement(m, {1, ActivationKind::ReLU});
  const double expected_change = static_cast<double>(m.layers[1].element_count()) * (2.0 - 8.0) / 1024.0;
  CHECK(simulate_memory(swapped, p) - simulate_memory(m, p) == doctest::Approx(expected_change));

  // conv 256 elements relu, dense 16 leakyrelu, dense 10 hardswish.
  const ModelSpec mixed = apply_assignment(
      m, Assignment{ActivationKind::ReLU, ActivationKind::LeakyReLU, ActivationKind::Hardswish});
  REQUIRE(m.layers[1].element_count() == 16);
  CHECK(simulate_memory(mixed, p) == doctest::Approx((256.0 * 2.0 + 16.0 * 3.0 + 10.0 * 1.0) / 1024.0));
}

TEST_CASE("input shape override rescales convolution layers") {
  const ModelSpec m = make_toy_model(2);
  MeasurementConfig cfg;
  cfg.input_shape = {3, 32, 32};
  const double expected = (4.0 * 256.0 * 5.0 + 10.0 * 5.0) * 1e-6;
  CHECK(simulate_latency(m, hand_profile(), cfg) == doctest::Approx(expected));
  cfg.input_shape = {3, 32};
  CHECK_THROWS_AS(simulate_latency(m, hand_profile(), cfg), ConfigError);
}

TEST_CASE("profile validation and files") {
  DeviceProfile p = hand_profile(0.25);
  CHECK(parse_profile(dump_profile(p)) == p);
  for (const DeviceProfile& b : builtin_profiles()) CHECK(parse_profile(dump_profile(b)) == b);

  DeviceProfile negative = p;
  negative.per_activation_cost[2] = -1.0;
  CHECK_THROWS_AS(validate(negative), ConfigError);
  DeviceProfile loud = p;
  loud.noise_amplitude = 1.0;
  CHECK_THROWS_AS(validate(loud), ConfigError);
  CHECK_THROWS_AS(parse_profile(R"({"name": "x", "base_layer_cost": 1})"), ConfigError);
  CHECK_THROWS_AS(simulate_latency(make_toy_model(2), p, MeasurementConfig{0, {}}), ConfigError);
  CHECK_THROWS_AS(builtin_profile("tpu"), ConfigError);
}

TEST_CASE("built-in profiles order activation costs") {
  CHECK(builtin_profiles().size() == 4);
  for (const DeviceProfile& p : builtin_profiles()) {
    CHECK(p.activation_cost(ActivationKind::ReLU) < p.activation_cost(ActivationKind::ReLU6));
    CHECK(p.activation_cost(ActivationKind::ReLU6) < p.activation_cost(ActivationKind::LeakyReLU));
    CHECK(p.activation_cost(ActivationKind::LeakyReLU) < p.activation_cost(ActivationKind::Hardswish));
    CHECK(p.activation_cost(ActivationKind::Hardswish) < p.activation_cost(ActivationKind::SiLU));
  }
}
