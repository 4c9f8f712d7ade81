//  Copyright 2026 The Typhoon Joint Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.


#include <doctest.h>

#include <cmath>
#include <numeric>

#include "test_util.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/layers.hpp"

using namespace typhoon;
using typhoon::testing::random_tensor;
using typhoon::testing::values;

namespace {

std::vector<Tensor> tensors_of(const LstmParams& p) {
  return {p.x_i, p.x_f, p.x_o, p.x_g, p.h_i, p.h_f, p.h_o, p.h_g,
          p.b_i, p.b_f, p.b_o, p.b_g};
}

LstmParams random_lstm(std::size_t d, std::size_t u, Rng& rng) {
  LstmParams p = LstmParams::init(d, u, rng);
  for (Tensor& t : tensors_of(p)) {
    for (double& v : t.mutable_data()) v = rng.uniform(-0.8, 0.8);
  }
  return p;
}

// Reference unroll through the per-step cell.
Tensor composed_final(const LstmParams& p, const std::vector<Tensor>& steps, bool reverse) {
  const std::size_t n = steps.front().dim(0);
  Tensor h = Tensor::zeros({n, p.units});
  Tensor m = Tensor::zeros({n, p.units});
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Tensor& x = steps[reverse ? steps.size() - 1 - i : i];
    LstmState s = lstm_cell_step(p, x, h, m);
    h = s.h;
    m = s.m;
  }
  return h;
}

}  // namespace

TEST_CASE("glorot bounds") {
  Rng rng(1);
  Tensor w = glorot_uniform({30, 20}, 30, 20, rng);
  const double a = std::sqrt(6.0 / 50.0);
  for (double v : w.data()) CHECK(std::abs(v) <= a);
}

TEST_CASE("lstm cell spot values") {
  LstmParams zero = LstmParams::zeros(3, 4);
  LstmState s = lstm_cell_step(zero, Tensor::vector({1, 2, 3}), Tensor::zeros({4}),
                               Tensor::zeros({4}));
  for (double v : s.h.data()) CHECK(v == 0.0);
  for (double v : s.m.data()) CHECK(v == 0.0);

  LstmParams p = LstmParams::zeros(1, 1);
  for (Tensor* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_g}) b->mutable_data()[0] = 40.0;
  s = lstm_cell_step(p, Tensor::vector({0.3}), Tensor::zeros({1}), Tensor::zeros({1}));
  CHECK(s.m.item() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.h.item() == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));

  CHECK_THROWS_AS(lstm_cell_step(p, Tensor::vector({1, 2}), Tensor::zeros({1}),
                                 Tensor::zeros({1})),
                  ShapeError);
}

TEST_CASE("lstm cell gradient, 64 units") {
  Rng rng(8);
  LstmParams p = random_lstm(6, 64, rng);
  for (Tensor& t : tensors_of(p)) {
    for (double& v : t.mutable_data()) v *= 0.3;
  }
  Tensor x = random_tensor({6}, rng);
  Tensor h = random_tensor({64}, rng);
  Tensor m = random_tensor({64}, rng);
  std::vector<Tensor> params = tensors_of(p);
  params.insert(params.end(), {x, h, m});
  const double err = gradient_check(
      [&]() {
        LstmState s = lstm_cell_step(p, x, h, m);
        return ops::add(ops::sum(s.h), ops::scale(ops::sum(s.m), 0.5));
      },
      params);
  CHECK(err <= 1e-4);
}

TEST_CASE("fused sequence matches the per-step cell") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t d = 1 + rng.below(4), u = 1 + rng.below(5);
    const std::size_t s = 1 + rng.below(5), n = 1 + rng.below(3);
    LstmParams p = random_lstm(d, u, rng);
    std::vector<Tensor> steps;
    for (std::size_t t = 0; t < s; ++t) steps.push_back(random_tensor({n, d}, rng));
    for (bool reverse : {false, true}) {
      const auto fused = values(lstm_sequence(p, steps, reverse));
      const auto ref = values(composed_final(p, steps, reverse));
      REQUIRE(fused.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(fused[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fused sequence gradient") {
  Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t d = 1 + rng.below(3), u = 1 + rng.below(4);
    const std::size_t s = 1 + rng.below(4), n = 1 + rng.below(3);
    LstmParams p = random_lstm(d, u, rng);
    std::vector<Tensor> steps;
    for (std::size_t t = 0; t < s; ++t) steps.push_back(random_tensor({n, d}, rng));
    Tensor w = random_tensor({n, u}, rng);
    std::vector<Tensor> params = tensors_of(p);
    params.insert(params.end(), steps.begin(), steps.end());
    const bool reverse = trial % 2 == 1;
    const double err = gradient_check(
        [&]() { return ops::sum(ops::mul(lstm_sequence(p, steps, reverse), w)); }, params);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("bilstm forward") {
  Rng rng(4);
  LstmParams zf = LstmParams::zeros(3, 5), zb = LstmParams::zeros(3, 5);
  Tensor out = bilstm_forward(zf, zb, random_tensor({4, 3}, rng));
  CHECK(out.shape() == Shape{10});
  for (double v : out.data()) CHECK(v == 0.0);

  // Palindromic input with shared weights: both directions see the same sequence.
  LstmParams p = random_lstm(2, 3, rng);
  Tensor seq = Tensor::from({3, 2}, {0.1, -0.4, 0.7, 0.2, 0.1, -0.4});
  Tensor both = bilstm_forward(p, p, seq);
  for (std::size_t j = 0; j < 3; ++j) CHECK(both[j] == doctest::Approx(both[3 + j]));

  for (std::size_t s : {1, 2, 7}) {
    CHECK(bilstm_forward(p, p, random_tensor({s, 2}, rng)).shape() == Shape{6});
  }
  CHECK_THROWS(bilstm_forward(p, p, std::span<const Tensor>{}));
}

TEST_CASE("bilstm hand unroll, s=2, u=1") {
  const double wi = 0.5, wf = -0.3, wo = 0.8, wg = 1.1;
  const double ui = 0.2, uf = 0.4, uo = -0.6, ug = 0.3;
  const double bi = 0.1, bf = 1.0, bo = -0.2, bg = 0.05;
  LstmParams p = LstmParams::zeros(1, 1);
  const std::pair<Tensor*, double> set[] = {
      {&p.x_i, wi}, {&p.x_f, wf}, {&p.x_o, wo}, {&p.x_g, wg}, {&p.h_i, ui}, {&p.h_f, uf},
      {&p.h_o, uo}, {&p.h_g, ug}, {&p.b_i, bi}, {&p.b_f, bf}, {&p.b_o, bo}, {&p.b_g, bg}};
  for (auto [t, v] : set) t->mutable_data()[0] = v;
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  auto step = [&](double x, double h, double m) {
    const double i = sig(wi * x + ui * h + bi), f = sig(wf * x + uf * h + bf);
    const double o = sig(wo * x + uo * h + bo), g = std::tanh(wg * x + ug * h + bg);
    const double m2 = f * m + i * g;
    return std::pair{o * std::tanh(m2), m2};
  };
  const double x1 = 0.7, x2 = -1.2;
  auto [hf1, mf1] = step(x1, 0, 0);
  const double hf = step(x2, hf1, mf1).first;
  auto [hb1, mb1] = step(x2, 0, 0);
  const double hb = step(x1, hb1, mb1).first;
  Tensor out = bilstm_forward(p, p, Tensor::from({2, 1}, {x1, x2}));
  CHECK(out[0] == doctest::Approx(hf).epsilon(1e-13));
  CHECK(out[1] == doctest::Approx(hb).epsilon(1e-13));
}

TEST_CASE("dense forward") {
  Tensor x = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor id = Tensor::from({2, 2}, {1, 0, 0, 1});
  CHECK(values(dense_forward(id, Tensor::zeros({2}), x, Activation::none)) == values(x));
  CHECK(dense_forward(Tensor::from({2, 1}, {1, 1}), Tensor::vector({-2}),
                      Tensor::from({1, 2}, {1, 1}), Activation::relu)
            .item() == 0.0);
  Tensor b = Tensor::vector({0.5, -1.0});
  Tensor y = dense_forward(id, b, Tensor::zeros({3, 2}), Activation::sigmoid);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(y.at(r, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.5))));
    CHECK(y.at(r, 1) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  }
  CHECK_THROWS_AS(dense_forward(id, b, Tensor::zeros({1, 3}), Activation::none), ShapeError);
}

TEST_CASE("conv1d forward") {
  Conv1dParams p;
  p.kernels = Tensor::from({1, 1, 3}, {0, 1, 0});
  p.bias = Tensor::zeros({1});
  p.kernel_size = 3;
  Rng rng(9);
  Tensor x = random_tensor({6, 1}, rng);
  CHECK(values(conv1d_forward(p, x)) == values(x));

  p.kernels = Tensor::from({1, 1, 3}, {1, 1, 1});
  CHECK(values(conv1d_forward(p, Tensor::from({3, 1}, {1, 2, 3}))) ==
        std::vector<double>{3, 6, 5});

  Conv1dParams even;
  even.kernels = Tensor::zeros({1, 1, 2});
  even.bias = Tensor::zeros({1});
  even.kernel_size = 2;
  CHECK_THROWS_AS(conv1d_forward(even, x), ContractError);

  Conv1dParams batched = Conv1dParams::init(2, 3, 3, rng);
  CHECK(conv1d_forward(batched, random_tensor({4, 5, 2}, rng)).shape() == Shape{4, 5, 3});
}

TEST_CASE("maxpool forward") {
  CHECK(values(maxpool1d_forward(Tensor::from({4, 1}, {1, 3, 2, 5}), 2)) ==
        std::vector<double>{3, 5});
  CHECK(values(maxpool1d_forward(Tensor::from({3, 1}, {1, 2, 3}), 2)) ==
        std::vector<double>{2, 3});
  CHECK(values(maxpool1d_forward(Tensor::full({5, 2}, 1.5), 2)) ==
        std::vector<double>(6, 1.5));
  CHECK_THROWS(maxpool1d_forward(Tensor::zeros({3, 1}), 0));

  Tensor x = Tensor::from({2, 1}, {4, 4}, true);
  Tape tape;
  TapeScope scope(tape);
  tape.backward(ops::sum(maxpool1d_forward(x, 2)));
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("dropout") {
  Rng rng(13);
  Tensor x = random_tensor({50}, rng);
  CHECK(values(dropout_forward(x, 0.4, false, rng)) == values(x));
  CHECK(values(dropout_forward(x, 0.0, true, rng)) == values(x));
  CHECK_THROWS(dropout_forward(x, 1.0, true, rng));

  Tensor ones = Tensor::full({100000}, 1.0);
  const auto out = values(dropout_forward(ones, 0.5, true, rng));
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / out.size();
  CHECK(mean >= 0.98);
  CHECK(mean <= 1.02);
  for (double v : out) CHECK((v == 0.0 || v == 2.0));
}

TEST_CASE("softmax") {
  const Tensor flat = softmax(Tensor::zeros({4}));
  for (double v : flat.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  Tensor two = softmax(Tensor::vector({0.0, std::log(2.0)}));
  CHECK(two[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  Tensor big = softmax(Tensor::vector({1000, 1000}));
  CHECK(big[0] == 0.5);
  CHECK(big[1] == 0.5);
  CHECK_THROWS(softmax(Tensor::vector({0.0, NAN})));

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(8);
    Tensor z = random_tensor({k}, rng, 1000.0);
    const double shift = rng.uniform(-50, 50);
    std::vector<double> zs = values(z);
    for (double& v : zs) v += shift;
    const auto a = values(softmax(z));
    const auto b = values(softmax(Tensor::vector(zs)));
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(a[i] >= 0.0);
      CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      total += a[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("layer gradients on random configurations") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t len = 1 + rng.below(6), in = 1 + rng.below(3), out = 1 + rng.below(3);
    Conv1dParams conv = Conv1dParams::init(in, out, 3, rng);
    Tensor x = random_tensor({len, in}, rng);
    Tensor w = random_tensor({len, out}, rng);
    const Tensor cparams[] = {conv.kernels, conv.bias, x};
    CHECK(gradient_check([&]() { return ops::sum(ops::mul(conv1d_forward(conv, x), w)); },
                         cparams) <= 1e-4);

    DenseParams dense = DenseParams::init(in, out, rng);
    Tensor xs = random_tensor({3, in}, rng);
    const Tensor dparams[] = {dense.w, dense.b, xs};
    CHECK(gradient_check(
              [&]() {
                return ops::sum(ops::mul(dense_forward(dense, xs, Activation::sigmoid),
                                         dense_forward(dense, xs, Activation::none)));
              },
              dparams) <= 1e-4);

    Tensor px = random_tensor({len, 2}, rng);
    CHECK(gradient_check(
              [&](const Tensor& t) {
                Tensor y = maxpool1d_forward(t, 2);
                return ops::sum(ops::mul(y, y));
              },
              px) <= 1e-4);

    Tensor z = random_tensor({2, 4}, rng, 3.0);
    Tensor sw = random_tensor({2, 4}, rng);
    CHECK(gradient_check([&](const Tensor& t) { return ops::sum(ops::mul(softmax(t), sw)); },
                         z) <= 1e-4);
  }
}
