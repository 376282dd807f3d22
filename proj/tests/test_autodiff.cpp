#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fusionloc/autodiff.hpp"
#include "fusionloc/checkpoint.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/optim.hpp"
#include "test_util.hpp"

using namespace fusionloc;
using ad::Tensor;

TEST_CASE("relu, softmax and max follow their definitions") {
  Tensor x = Tensor::constant({3}, {-1.0, 0.0, 2.0});
  Tensor r = ad::relu(x);
  CHECK(r.value(0) == 0.0);
  CHECK(r.value(1) == 0.0);
  CHECK(r.value(2) == 2.0);

  Tensor s = ad::softmax(Tensor::constant({2}, {0.0, 0.0}));
  CHECK(s.value(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.value(1) == doctest::Approx(0.5).epsilon(1e-12));

  Tensor m = ad::max_over_set(Tensor::constant({2, 2}, {1, 5, 3, 2}), 0);
  CHECK(m.value(0) == 3.0);
  CHECK(m.value(1) == 5.0);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(11);
  std::vector<double> vals(24 * 7);
  for (double& v : vals) v = rng.uniform(-30.0, 30.0);
  Tensor rows = ad::softmax(Tensor::constant({24, 7}, vals), 1);
  for (std::size_t r = 0; r < 24; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 7; ++c) sum += rows.value(r * 7 + c);
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("identity loss yields unit gradient") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {}, {3.5});
  ad::backward(p);
  CHECK(p.grad()[0] == 1.0);
}

TEST_CASE("max routes gradient to the larger input") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {2}, {2.0, 1.0});
  ad::backward(ad::max_over_set(p));
  CHECK(p.grad()[0] == 1.0);
  CHECK(p.grad()[1] == 0.0);
}

TEST_CASE("max tie-break routes gradient to the first maximal element") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {3}, {4.0, 4.0, 1.0});
  ad::backward(ad::max_over_set(p));
  CHECK(p.grad()[0] == 1.0);
  CHECK(p.grad()[1] == 0.0);
}

TEST_CASE("parameter used twice accumulates both path gradients") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {}, {1.25});
  ad::backward(ad::add(p, p));
  CHECK(p.grad()[0] == 2.0);
}

TEST_CASE("two-layer perceptron gradients match finite differences") {
  // Independent oracle for the whole engine: a random 2-layer perceptron
  // with every op kind the dense layers use.
  ad::ParameterStore store;
  Rng rng(17);
  auto init = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-0.8, 0.8);
    return v;
  };
  Tensor w1 = store.create("w1", {4, 8}, init(32));
  Tensor b1 = store.create("b1", {8}, init(8));
  Tensor w2 = store.create("w2", {8, 3}, init(24));
  Tensor b2 = store.create("b2", {3}, init(3));
  const std::vector<double> input = init(4);
  const std::vector<double> target = init(3);

  auto loss_fn = [&]() {
    Tensor x = Tensor::constant({4}, input);
    Tensor h = ad::relu(ad::add(ad::matmul(x, w1), b1));
    Tensor y = ad::add(ad::matmul(h, w2), b2);
    Tensor diff = ad::sub(y, Tensor::constant({3}, target));
    return ad::l2_norm(diff);
  };
  const auto gc = testutil::gradcheck(store, loss_fn, 67, 5, 1e-5);
  CHECK(gc.checked == 67);
  CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("every op kind survives a finite-difference check") {
  ad::ParameterStore store;
  Rng rng(23);
  auto init = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-0.7, 0.7);
    return v;
  };
  Tensor a = store.create("a", {3, 4}, init(12));
  Tensor b = store.create("b", {3, 4}, init(12));
  Tensor c = store.create("c", {4}, init(4));
  Tensor s = store.create("s", {}, {0.3});

  auto loss_fn = [&]() {
    Tensor m = ad::mul(ad::add(a, c), ad::exp(ad::negate(b)));  // bias bcast
    Tensor sm = ad::softmax(m, 1);
    Tensor cat = ad::concat({sm, ad::scalar_mul(a, 0.4)}, 1);   // {3,8}
    Tensor g = ad::gather_rows(cat, {2, 0, 2});
    Tensor mx = ad::max_over_set(g, 1);                          // {3}
    Tensor flat = ad::reshape(g, {24});
    return ad::add(ad::add(ad::l1_norm(mx), ad::l2_norm(flat)),
                   ad::mul(s, ad::l2_norm(ad::matmul(a, c))));
  };
  const auto gc = testutil::gradcheck(store, loss_fn, 120, 9, 1e-5);
  CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("conv2d matches finite differences including padding and stride") {
  ad::ParameterStore store;
  Rng rng(31);
  auto init = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-0.6, 0.6);
    return v;
  };
  Tensor img = store.create("img", {2, 7, 7}, init(98));
  Tensor w = store.create("w", {3, 2, 3, 3}, init(54));
  Tensor b = store.create("b", {3}, init(3));

  auto loss_fn = [&]() {
    Tensor y = ad::relu(ad::conv2d(img, w, b, 2, 1));
    return ad::l2_norm(ad::reshape(y, {y.numel()}));
  };
  const auto gc = testutil::gradcheck(store, loss_fn, 100, 13, 1e-5);
  CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("forward is pure: identical outputs and gradients across runs") {
  ad::ParameterStore store;
  Tensor w = store.create("w", {2, 2}, {0.5, -0.25, 1.5, 0.75});
  auto run = [&]() {
    store.zero_grad();
    Tensor x = Tensor::constant({2}, {0.2, -1.1});
    Tensor loss = ad::l2_norm(ad::relu(ad::matmul(x, w)));
    ad::backward(loss);
    return std::make_pair(loss.item(),
                          std::vector<double>(w.grad().begin(), w.grad().end()));
  };
  const auto first = run();
  const auto second = run();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
}

TEST_CASE("shape mismatches are rejected") {
  Tensor a = Tensor::constant({2}, {1, 2});
  Tensor b = Tensor::constant({3}, {1, 2, 3});
  CHECK_THROWS_AS((void)ad::add(a, b), InvalidInputError);
  CHECK_THROWS_AS((void)ad::matmul(a, b), InvalidInputError);
  CHECK_THROWS_AS((void)ad::mul(a, b), InvalidInputError);
  CHECK_THROWS_AS(ad::backward(a), InvalidInputError);
}

TEST_CASE("non-finite results raise a numeric failure") {
  Tensor big = Tensor::constant({2}, {800.0, 1.0});
  CHECK_THROWS_AS((void)ad::exp(big), NumericError);
  CHECK_THROWS_AS((void)Tensor::constant({1}, {std::nan("")}), NumericError);
}

TEST_CASE("unreachable parameters keep a zero gradient") {
  ad::ParameterStore store;
  Tensor used = store.create("used", {}, {2.0});
  Tensor unused = store.create("unused", {}, {5.0});
  ad::backward(ad::scalar_mul(used, 3.0));
  CHECK(used.grad()[0] == 3.0);
  CHECK(unused.grad()[0] == 0.0);
}

TEST_CASE("adam leaves parameters alone with zero gradients and zero decay") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {2}, {1.0, -2.0});
  ad::AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;
  ad::Adam adam(cfg);
  adam.step(store);
  CHECK(p.value(0) == 1.0);
  CHECK(p.value(1) == -2.0);
}

TEST_CASE("adam first step moves a unit-gradient scalar by about lr") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {}, {1.0});
  ad::AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;
  ad::Adam adam(cfg);
  ad::backward(p);  // gradient 1
  adam.step(store);
  // Bias-corrected first step: lr * 1 / (1 + eps).
  CHECK(p.value(0) == doctest::Approx(0.9).epsilon(1e-7));
  // Gradients zeroed by the step.
  CHECK(p.grad()[0] == 0.0);
}

TEST_CASE("identical parameters with identical gradients stay identical") {
  ad::ParameterStore store;
  Tensor p1 = store.create("p1", {}, {0.7});
  Tensor p2 = store.create("p2", {}, {0.7});
  ad::AdamConfig cfg;
  ad::Adam adam(cfg);
  for (int step = 0; step < 5; ++step) {
    store.zero_grad();
    ad::backward(ad::add(ad::scalar_mul(p1, 2.0), ad::scalar_mul(p2, 2.0)));
    adam.step(store);
    CHECK(p1.value(0) == p2.value(0));
  }
}

TEST_CASE("decoupled weight decay shrinks before the moment update") {
  ad::ParameterStore store;
  Tensor p = store.create("p", {}, {2.0});
  ad::AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.5;
  ad::Adam adam(cfg);
  adam.step(store);  // zero gradient: only the decay term acts
  CHECK(p.value(0) == doctest::Approx(2.0 * (1.0 - 0.01 * 0.5)).epsilon(1e-12));
}

TEST_CASE("checkpoint container round trips bit-exactly") {
  ad::ParameterStore store;
  Rng rng(41);
  std::vector<double> vals(60);
  for (double& v : vals) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
  store.create("layer.w", {5, 12}, vals);
  store.create("layer.b", {3}, {1e-300, -0.0, 3.5});

  Checkpoint out;
  out.meta = {{"note", "round trip"}};
  append_parameters(out, store, "param.");
  const std::string path = testutil::scratch_dir("ckpt") + "/roundtrip.flck";
  write_checkpoint(path, out);
  const Checkpoint in = read_checkpoint(path);

  CHECK(in.meta.at("note") == "round trip");
  REQUIRE(in.blobs.size() == 2);
  for (std::size_t b = 0; b < in.blobs.size(); ++b) {
    REQUIRE(in.blobs[b].values.size() == out.blobs[b].values.size());
    for (std::size_t i = 0; i < in.blobs[b].values.size(); ++i) {
      // Bit-exact, including signed zero.
      CHECK(std::memcmp(&in.blobs[b].values[i], &out.blobs[b].values[i],
                        sizeof(double)) == 0);
    }
  }

  ad::ParameterStore store2;
  store2.create("layer.w", {5, 12}, std::vector<double>(60, 0.0));
  store2.create("layer.b", {3}, {0.0, 0.0, 0.0});
  restore_parameters(in, store2, "param.");
  CHECK(std::memcmp(store2.get("layer.w").values().data(),
                    store.get("layer.w").values().data(),
                    60 * sizeof(double)) == 0);
}
