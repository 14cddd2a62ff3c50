#ifndef REX_NN_HPP
#define REX_NN_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "rex/common.hpp"

namespace rex {

using Vec = std::vector<double>;

// Row-major parameter block with a paired gradient buffer. Vectors are
// rows x 1.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec value;
  Vec grad;
  bool trainable = true;

  Tensor() = default;
  Tensor(std::string n, std::size_t r, std::size_t c, bool train = true)
      : name(std::move(n)), rows(r), cols(c), value(r * c, 0.0), grad(r * c, 0.0),
        trainable(train) {}

  double& at(std::size_t r, std::size_t c) { return value[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return value[r * cols + c]; }
  double& grad_at(std::size_t r, std::size_t c) { return grad[r * cols + c]; }
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

void init_uniform(Tensor& t, Rng& rng, double lo, double hi);
// scaled uniform ±1/sqrt(fan_in) with fan_in = cols
void init_fan_in(Tensor& t, Rng& rng);

// y += W x
void matvec_acc(const Tensor& w, const Vec& x, Vec& y);
// for y = W x: dW += dy ⊗ x, and dx += W^T dy when dx != nullptr
void matvec_backward(Tensor& w, const Vec& x, const Vec& dy, Vec* dx);

enum class RnnCell { tanh_cell, lstm };

RnnCell rnn_cell_from_string(const std::string& s);
const char* rnn_cell_name(RnnCell c);

// One direction of a recurrent pass. For lstm the weight rows stack the
// four gates in order i, f, g, o.
struct RnnCellParams {
  RnnCell cell = RnnCell::tanh_cell;
  std::size_t d_in = 0;
  std::size_t d_h = 0;
  Tensor wx;  // (gates*d_h) x d_in
  Tensor wh;  // (gates*d_h) x d_h
  Tensor b;   // (gates*d_h) x 1

  void build(const std::string& prefix, RnnCell c, std::size_t in, std::size_t h);
  void init(Rng& rng);
};

struct RnnDirectionTrace {
  std::vector<Vec> inputs;
  std::vector<Vec> h;      // hidden states, one per step
  std::vector<Vec> c;      // lstm cell states
  std::vector<Vec> gates;  // lstm post-activation gates (i,f,g,o concatenated)
};

void rnn_forward(const RnnCellParams& p, const std::vector<Vec>& inputs,
                 RnnDirectionTrace& trace);
// upstream_h[t] = dL/dh_t; accumulates parameter grads and, when non-null,
// input grads (same index order as the forward inputs).
void rnn_backward(RnnCellParams& p, const RnnDirectionTrace& trace,
                  const std::vector<Vec>& upstream_h, std::vector<Vec>* input_grads);

struct BiRnnParams {
  std::size_t d_in = 0;
  std::size_t d_h = 0;
  RnnCellParams fwd;
  RnnCellParams bwd;

  void build(const std::string& prefix, RnnCell cell, std::size_t in, std::size_t h);
  void init(Rng& rng);
  std::vector<Tensor*> tensors();
  std::size_t output_dim() const { return 2 * d_h; }
};

struct BiRnnTrace {
  RnnDirectionTrace fwd;
  RnnDirectionTrace bwd;  // stored in reversed input order
};

// outputs[t] = concat(h_fwd[t], h_bwd[t]), indexed by original position.
std::vector<Vec> birnn_forward(const BiRnnParams& p, const std::vector<Vec>& inputs,
                               BiRnnTrace& trace);
// upstream[t] has width 2*d_h; input grads are accumulated when non-null.
void birnn_backward(BiRnnParams& p, const BiRnnTrace& trace,
                    const std::vector<Vec>& upstream,
                    std::vector<Vec>* input_grads);

// concat(final forward state, final backward state); empty input gives zeros.
Vec birnn_final_state(const BiRnnParams& p, const std::vector<Vec>& inputs,
                      BiRnnTrace& trace);
void birnn_final_state_backward(BiRnnParams& p, const BiRnnTrace& trace,
                                const Vec& upstream, std::vector<Vec>* input_grads);

}  // namespace rex

#endif  // REX_NN_HPP
