#pragma once

// Randomised finite-difference cases for every differentiable primitive and
// layer. Shared by the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cyclecast/autodiff.hpp"
#include "cyclecast/layers.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast::testing {

struct GradCase {
  std::string name;
  std::function<GradCheckReport(Rng&)> run;
};

inline Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t(r, c);
  for (auto& v : t.storage()) v = rng.uniform(-scale, scale);
  return t;
}

// Entries bounded away from zero so ReLU is differentiable under the probe.
inline Tensor away_from_zero(Rng& rng, std::size_t r, std::size_t c) {
  Tensor t(r, c);
  for (auto& v : t.storage()) {
    double m = rng.uniform(0.05, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

inline std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

inline void fill_random(Tensor& t, Rng& rng, double scale = 0.5) {
  for (auto& v : t.storage()) v = rng.uniform(-scale, scale);
}

// Projects an output onto a fixed random direction so every entry of the
// output contributes to the scalar being differentiated.
inline Var probe(Tape& tape, Var out, const Tensor& dir) { return sum(mul(out, tape.constant(dir))); }

// Central-difference step. The stack puts ReLU between layers, so the loss is
// only piecewise smooth; 1e-5 probes occasionally straddle a kink.
inline constexpr double kProbeStep = 1e-6;

inline GradCheckReport check(const std::function<Var(Tape&)>& f, std::vector<Tensor*> params) {
  return grad_check(f, params, kProbeStep, 1e-4, 1e-7);
}

inline GradCheckReport unary_case(Rng& rng, Var (*op)(Var), bool kinked) {
  std::size_t r = dim(rng, 1, 5), c = dim(rng, 1, 5);
  Tensor x = kinked ? away_from_zero(rng, r, c) : random_tensor(rng, r, c, 2.0);
  Tensor d = random_tensor(rng, r, c);
  return check([&](Tape& t) { return probe(t, op(t.param(x)), d); }, {&x});
}

inline GradCheckReport binary_case(Rng& rng, Var (*op)(Var, Var)) {
  std::size_t r = dim(rng, 1, 5), c = dim(rng, 1, 5);
  // Second operand shape cycles through the broadcast modes.
  std::size_t mode = dim(rng, 0, 3);
  std::size_t br = (mode == 0 || mode == 2) ? r : 1;
  std::size_t bc = (mode == 0 || mode == 1) ? c : 1;
  Tensor a = random_tensor(rng, r, c), b = random_tensor(rng, br, bc);
  Tensor d = random_tensor(rng, r, c);
  return check([&](Tape& t) { return probe(t, op(t.param(a), t.param(b)), d); }, {&a, &b});
}

inline std::vector<GradCase> primitive_cases() {
  std::vector<GradCase> cases;
  cases.push_back({"matmul", [](Rng& rng) {
                     std::size_t m = dim(rng, 1, 5), k = dim(rng, 1, 5), n = dim(rng, 1, 5);
                     Tensor a = random_tensor(rng, m, k), b = random_tensor(rng, k, n), d = random_tensor(rng, m, n);
                     return check([&](Tape& t) { return probe(t, matmul(t.param(a), t.param(b)), d); }, {&a, &b});
                   }});
  cases.push_back({"add", [](Rng& rng) { return binary_case(rng, &add); }});
  cases.push_back({"sub", [](Rng& rng) { return binary_case(rng, &sub); }});
  cases.push_back({"mul", [](Rng& rng) { return binary_case(rng, &mul); }});
  cases.push_back({"tanh", [](Rng& rng) { return unary_case(rng, &tanh, false); }});
  cases.push_back({"sigmoid", [](Rng& rng) { return unary_case(rng, &sigmoid, false); }});
  cases.push_back({"relu", [](Rng& rng) { return unary_case(rng, &relu, true); }});
  cases.push_back({"square", [](Rng& rng) { return unary_case(rng, &square, false); }});
  cases.push_back({"scale_shift", [](Rng& rng) {
                     std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
                     double s = rng.uniform(-3, 3), k = rng.uniform(-3, 3);
                     Tensor x = random_tensor(rng, r, c), d = random_tensor(rng, r, c);
                     return check([&](Tape& t) { return probe(t, add_scalar(scale(t.param(x), s), k), d); }, {&x});
                   }});
  cases.push_back({"concat_slice", [](Rng& rng) {
                     std::size_t r = dim(rng, 1, 4), c1 = dim(rng, 1, 4), c2 = dim(rng, 1, 4);
                     Tensor a = random_tensor(rng, r, c1), b = random_tensor(rng, r, c2);
                     std::size_t begin = dim(rng, 0, c1 + c2 - 1);
                     std::size_t count = dim(rng, 1, c1 + c2 - begin);
                     std::size_t rb = dim(rng, 0, r - 1), rc = dim(rng, 1, r - rb);
                     Tensor d = random_tensor(rng, rc, count);
                     return check(
                         [&](Tape& t) {
                           Var parts[] = {t.param(a), t.param(b)};
                           Var cat = concat_cols(parts);
                           return probe(t, slice_rows(slice_cols(cat, begin, count), rb, rc), d);
                         },
                         {&a, &b});
                   }});
  cases.push_back({"sum_squares", [](Rng& rng) {
                     Tensor x = random_tensor(rng, dim(rng, 1, 5), dim(rng, 1, 5));
                     return check([&](Tape& t) { return sum_squares(t.param(x)); }, {&x});
                   }});
  cases.push_back({"dense", [](Rng& rng) {
                     std::size_t n = dim(rng, 1, 4), in = dim(rng, 1, 6), out = dim(rng, 1, 4);
                     Tensor x = random_tensor(rng, n, in), w = random_tensor(rng, in, out), b = random_tensor(rng, 1, out);
                     Tensor d = random_tensor(rng, n, out);
                     return check([&](Tape& t) { return probe(t, dense(t.param(x), w, b), d); }, {&x, &w, &b});
                   }});
  cases.push_back({"lstm_step", [](Rng& rng) {
                     std::size_t n = dim(rng, 1, 3), in = dim(rng, 1, 4), h = dim(rng, 1, 4);
                     LstmCellParams p(in, h);
                     fill_random(p.w, rng);
                     fill_random(p.b, rng);
                     Tensor x = random_tensor(rng, n, in), h0 = random_tensor(rng, n, h), c0 = random_tensor(rng, n, h);
                     Tensor dh = random_tensor(rng, n, h), dc = random_tensor(rng, n, h);
                     return check(
                         [&](Tape& t) {
                           auto s = lstm_step(p, t.param(x), {t.param(h0), t.param(c0)});
                           return add(probe(t, s.h, dh), probe(t, s.c, dc));
                         },
                         {&p.w, &p.b, &x, &h0, &c0});
                   }});
  cases.push_back({"bilstm_stack", [](Rng& rng) {
                     std::size_t n = dim(rng, 1, 3), in = dim(rng, 1, 4), steps = dim(rng, 1, 4);
                     std::vector<std::size_t> sizes{dim(rng, 1, 4), dim(rng, 1, 3)};
                     bool bidir = rng.uniform() < 0.7;
                     BiLstmStackParams p(in, sizes, bidir, false, rng.uniform() < 0.5);
                     std::vector<Tensor*> params;
                     p.visit("s", [&](const std::string&, Tensor& t, bool) {
                       fill_random(t, rng);
                       params.push_back(&t);
                     });
                     std::vector<Tensor> xs, ds;
                     for (std::size_t s = 0; s < steps; ++s) {
                       xs.push_back(random_tensor(rng, n, in));
                       ds.push_back(random_tensor(rng, n, p.output()));
                     }
                     params.push_back(&xs[0]);
                     return check(
                         [&](Tape& t) {
                           std::vector<Var> in_steps;
                           for (auto& x : xs) in_steps.push_back(t.param(x));
                           auto out = bilstm_forward(p, in_steps);
                           Var total = probe(t, out[0], ds[0]);
                           for (std::size_t s = 1; s < out.size(); ++s) total = add(total, probe(t, out[s], ds[s]));
                           return total;
                         },
                         params);
                   }});
  cases.push_back({"autoencoder", [](Rng& rng) {
                     std::size_t n = dim(rng, 1, 4), d = dim(rng, 2, 6), b = dim(rng, 1, 3);
                     AutoencoderParams p(d, b);
                     for (Tensor* t : {&p.enc_w, &p.enc_b, &p.dec_w, &p.dec_b}) fill_random(*t, rng);
                     Tensor h = random_tensor(rng, n, d), dz = random_tensor(rng, n, b), dr = random_tensor(rng, n, d);
                     return check(
                         [&](Tape& t) {
                           auto e = autoencode(p, t.param(h));
                           return add(probe(t, e.z, dz), probe(t, e.reconstruction, dr));
                         },
                         {&p.enc_w, &p.enc_b, &p.dec_w, &p.dec_b, &h});
                   }});
  cases.push_back({"attention_pool", [](Rng& rng) {
                     std::size_t n = dim(rng, 1, 3), d = dim(rng, 1, 4), steps = dim(rng, 1, 5);
                     AttentionParams p(d);
                     fill_random(p.u, rng, 1.0);
                     fill_random(p.c, rng, 1.0);
                     std::vector<Tensor> xs;
                     for (std::size_t s = 0; s < steps; ++s) xs.push_back(random_tensor(rng, n, d));
                     Tensor dp = random_tensor(rng, n, d);
                     std::vector<Tensor*> params{&p.u, &p.c};
                     for (auto& x : xs) params.push_back(&x);
                     return check(
                         [&](Tape& t) {
                           std::vector<Var> vs;
                           for (auto& x : xs) vs.push_back(t.param(x));
                           return probe(t, attention_pool(&p, vs).pooled, dp);
                         },
                         params);
                   }});
  return cases;
}

}  // namespace cyclecast::testing
