#include "rex/nn.hpp"

#include <algorithm>
#include <cmath>

namespace rex {

void init_uniform(Tensor& t, Rng& rng, double lo, double hi) {
  for (double& v : t.value) v = rng.uniform(lo, hi);
}

void init_fan_in(Tensor& t, Rng& rng) {
  double scale = 1.0 / std::sqrt(static_cast<double>(t.cols > 0 ? t.cols : 1));
  for (double& v : t.value) v = rng.uniform(-scale, scale);
}

void matvec_acc(const Tensor& w, const Vec& x, Vec& y) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    double s = 0.0;
    const double* row = &w.value[r * w.cols];
    for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    y[r] += s;
  }
}

void matvec_backward(Tensor& w, const Vec& x, const Vec& dy, Vec* dx) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    double g = dy[r];
    if (g == 0.0) continue;
    double* grow = &w.grad[r * w.cols];
    const double* row = &w.value[r * w.cols];
    for (std::size_t c = 0; c < w.cols; ++c) {
      grow[c] += g * x[c];
      if (dx) (*dx)[c] += row[c] * g;
    }
  }
}

RnnCell rnn_cell_from_string(const std::string& s) {
  if (s == "tanh") return RnnCell::tanh_cell;
  if (s == "lstm") return RnnCell::lstm;
  throw ConfigError("unknown rnn cell: '" + s + "'");
}

const char* rnn_cell_name(RnnCell c) {
  return c == RnnCell::tanh_cell ? "tanh" : "lstm";
}

void RnnCellParams::build(const std::string& prefix, RnnCell c, std::size_t in,
                          std::size_t h) {
  cell = c;
  d_in = in;
  d_h = h;
  std::size_t gates = (c == RnnCell::lstm) ? 4 : 1;
  wx = Tensor(prefix + ".wx", gates * h, in);
  wh = Tensor(prefix + ".wh", gates * h, h);
  b = Tensor(prefix + ".b", gates * h, 1);
}

void RnnCellParams::init(Rng& rng) {
  init_fan_in(wx, rng);
  init_fan_in(wh, rng);
  // biases start at zero
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void rnn_forward(const RnnCellParams& p, const std::vector<Vec>& inputs,
                 RnnDirectionTrace& trace) {
  const std::size_t T = inputs.size();
  const std::size_t d = p.d_h;
  trace.inputs = inputs;
  trace.h.assign(T, Vec(d, 0.0));
  if (p.cell == RnnCell::lstm) {
    trace.c.assign(T, Vec(d, 0.0));
    trace.gates.assign(T, Vec(4 * d, 0.0));
  }
  Vec h_prev(d, 0.0);
  Vec c_prev(d, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    if (p.cell == RnnCell::tanh_cell) {
      Vec pre(d, 0.0);
      for (std::size_t r = 0; r < d; ++r) pre[r] = p.b.value[r];
      matvec_acc(p.wx, inputs[t], pre);
      matvec_acc(p.wh, h_prev, pre);
      for (std::size_t r = 0; r < d; ++r) trace.h[t][r] = std::tanh(pre[r]);
    } else {
      Vec pre(4 * d, 0.0);
      for (std::size_t r = 0; r < 4 * d; ++r) pre[r] = p.b.value[r];
      matvec_acc(p.wx, inputs[t], pre);
      matvec_acc(p.wh, h_prev, pre);
      Vec& g = trace.gates[t];
      for (std::size_t r = 0; r < d; ++r) {
        double i = sigmoid(pre[r]);
        double f = sigmoid(pre[d + r]);
        double gg = std::tanh(pre[2 * d + r]);
        double o = sigmoid(pre[3 * d + r]);
        g[r] = i;
        g[d + r] = f;
        g[2 * d + r] = gg;
        g[3 * d + r] = o;
        trace.c[t][r] = f * c_prev[r] + i * gg;
        trace.h[t][r] = o * std::tanh(trace.c[t][r]);
      }
      c_prev = trace.c[t];
    }
    h_prev = trace.h[t];
  }
}

void rnn_backward(RnnCellParams& p, const RnnDirectionTrace& trace,
                  const std::vector<Vec>& upstream_h,
                  std::vector<Vec>* input_grads) {
  const std::size_t T = trace.h.size();
  const std::size_t d = p.d_h;
  const Vec zero(d, 0.0);
  Vec dh_next(d, 0.0);  // dL/dh_t flowing from step t+1
  Vec dc_next(d, 0.0);
  for (std::size_t ti = T; ti-- > 0;) {
    const Vec& h_prev = (ti == 0) ? zero : trace.h[ti - 1];
    Vec dh(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) dh[r] = upstream_h[ti][r] + dh_next[r];
    Vec dpre;
    if (p.cell == RnnCell::tanh_cell) {
      dpre.assign(d, 0.0);
      for (std::size_t r = 0; r < d; ++r) {
        double h = trace.h[ti][r];
        dpre[r] = dh[r] * (1.0 - h * h);
      }
    } else {
      const Vec& c_prev_v = (ti == 0) ? zero : trace.c[ti - 1];
      const Vec& gates = trace.gates[ti];
      dpre.assign(4 * d, 0.0);
      Vec dc(d, 0.0);
      for (std::size_t r = 0; r < d; ++r) {
        double i = gates[r];
        double f = gates[d + r];
        double gg = gates[2 * d + r];
        double o = gates[3 * d + r];
        double tc = std::tanh(trace.c[ti][r]);
        double d_o = dh[r] * tc;
        dc[r] = dc_next[r] + dh[r] * o * (1.0 - tc * tc);
        double di = dc[r] * gg;
        double df = dc[r] * c_prev_v[r];
        double dg = dc[r] * i;
        dpre[r] = di * i * (1.0 - i);
        dpre[d + r] = df * f * (1.0 - f);
        dpre[2 * d + r] = dg * (1.0 - gg * gg);
        dpre[3 * d + r] = d_o * o * (1.0 - o);
        dc_next[r] = dc[r] * f;
      }
    }
    for (std::size_t r = 0; r < dpre.size(); ++r) p.b.grad[r] += dpre[r];
    Vec* dx = nullptr;
    if (input_grads) dx = &(*input_grads)[ti];
    matvec_backward(p.wx, trace.inputs[ti], dpre, dx);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    matvec_backward(p.wh, h_prev, dpre, &dh_next);
  }
}

void BiRnnParams::build(const std::string& prefix, RnnCell cell, std::size_t in,
                        std::size_t h) {
  d_in = in;
  d_h = h;
  fwd.build(prefix + ".fwd", cell, in, h);
  bwd.build(prefix + ".bwd", cell, in, h);
}

void BiRnnParams::init(Rng& rng) {
  fwd.init(rng);
  bwd.init(rng);
}

std::vector<Tensor*> BiRnnParams::tensors() {
  return {&fwd.wx, &fwd.wh, &fwd.b, &bwd.wx, &bwd.wh, &bwd.b};
}

std::vector<Vec> birnn_forward(const BiRnnParams& p, const std::vector<Vec>& inputs,
                               BiRnnTrace& trace) {
  const std::size_t T = inputs.size();
  rnn_forward(p.fwd, inputs, trace.fwd);
  std::vector<Vec> reversed(inputs.rbegin(), inputs.rend());
  rnn_forward(p.bwd, reversed, trace.bwd);
  std::vector<Vec> out(T, Vec(2 * p.d_h, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t r = 0; r < p.d_h; ++r) {
      out[t][r] = trace.fwd.h[t][r];
      out[t][p.d_h + r] = trace.bwd.h[T - 1 - t][r];
    }
  }
  return out;
}

void birnn_backward(BiRnnParams& p, const BiRnnTrace& trace,
                    const std::vector<Vec>& upstream,
                    std::vector<Vec>* input_grads) {
  const std::size_t T = trace.fwd.h.size();
  std::vector<Vec> up_fwd(T, Vec(p.d_h, 0.0));
  std::vector<Vec> up_bwd(T, Vec(p.d_h, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t r = 0; r < p.d_h; ++r) {
      up_fwd[t][r] = upstream[t][r];
      up_bwd[T - 1 - t][r] = upstream[t][p.d_h + r];
    }
  }
  rnn_backward(p.fwd, trace.fwd, up_fwd, input_grads);
  if (input_grads) {
    std::vector<Vec> rev_grads(T, Vec(p.d_in, 0.0));
    rnn_backward(p.bwd, trace.bwd, up_bwd, &rev_grads);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < p.d_in; ++c)
        (*input_grads)[t][c] += rev_grads[T - 1 - t][c];
    }
  } else {
    rnn_backward(p.bwd, trace.bwd, up_bwd, nullptr);
  }
}

Vec birnn_final_state(const BiRnnParams& p, const std::vector<Vec>& inputs,
                      BiRnnTrace& trace) {
  Vec out(2 * p.d_h, 0.0);
  if (inputs.empty()) return out;
  rnn_forward(p.fwd, inputs, trace.fwd);
  std::vector<Vec> reversed(inputs.rbegin(), inputs.rend());
  rnn_forward(p.bwd, reversed, trace.bwd);
  const std::size_t T = inputs.size();
  for (std::size_t r = 0; r < p.d_h; ++r) {
    out[r] = trace.fwd.h[T - 1][r];
    out[p.d_h + r] = trace.bwd.h[T - 1][r];
  }
  return out;
}

void birnn_final_state_backward(BiRnnParams& p, const BiRnnTrace& trace,
                                const Vec& upstream, std::vector<Vec>* input_grads) {
  const std::size_t T = trace.fwd.h.size();
  if (T == 0) return;
  std::vector<Vec> up_fwd(T, Vec(p.d_h, 0.0));
  std::vector<Vec> up_bwd(T, Vec(p.d_h, 0.0));
  for (std::size_t r = 0; r < p.d_h; ++r) {
    up_fwd[T - 1][r] = upstream[r];
    up_bwd[T - 1][r] = upstream[p.d_h + r];
  }
  rnn_backward(p.fwd, trace.fwd, up_fwd, input_grads);
  if (input_grads) {
    std::vector<Vec> rev_grads(T, Vec(p.d_in, 0.0));
    rnn_backward(p.bwd, trace.bwd, up_bwd, &rev_grads);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < p.d_in; ++c)
        (*input_grads)[t][c] += rev_grads[T - 1 - t][c];
    }
  } else {
    rnn_backward(p.bwd, trace.bwd, up_bwd, nullptr);
  }
}

}  // namespace rex
