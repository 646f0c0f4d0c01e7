#ifndef SIGNSKIP_MLP_ENGINE_HPP
#define SIGNSKIP_MLP_ENGINE_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "signskip/predictor.hpp"
#include "signskip/signpack.hpp"
#include "signskip/sparse_linear.hpp"
#include "signskip/tensor.hpp"

namespace signskip {

// One gate-based MLP block: y = (relu_theta(x*gate) (.) (x*up)) * down.
// down is stored pre-transposed (k rows of length d) so the output
// projection can skip whole rows. gate_signs is packed once from gate.
struct MlpLayerWeights {
  DenseMatrix gate;    // k x d
  DenseMatrix up;      // k x d
  DenseMatrix down_t;  // k x d, rows of W_down^T
  SignPackedMatrix gate_signs;
  ActivationThreshold theta;
};

inline MlpLayerWeights make_layer(DenseMatrix gate, DenseMatrix up,
                                  DenseMatrix down_t, ActivationThreshold theta,
                                  unsigned threads = 1) {
  if (gate.rows != up.rows || gate.cols != up.cols ||
      gate.rows != down_t.rows || gate.cols != down_t.cols)
    throw shape_error("make_layer: gate/up/down_t dimensions differ");
  if (gate.rows == 0 || gate.cols == 0)
    throw shape_error("make_layer: empty projection");
  if (!(theta.theta >= 0.0f))
    throw value_error("make_layer: theta must be >= 0 and finite");
  check_finite(gate, "make_layer: gate");
  check_finite(up, "make_layer: up");
  check_finite(down_t, "make_layer: down_t");
  MlpLayerWeights layer;
  layer.gate = std::move(gate);
  layer.up = std::move(up);
  layer.down_t = std::move(down_t);
  layer.theta = theta;
  layer.gate_signs = pack_signs_matrix(layer.gate, threads);
  return layer;
}

struct MlpStack {
  std::vector<MlpLayerWeights> layers;
  std::size_t d = 0;  // model dim
  std::size_t k = 0;  // hidden dim
};

inline MlpStack make_stack(std::vector<MlpLayerWeights> layers) {
  if (layers.empty()) throw shape_error("make_stack: no layers");
  MlpStack stack;
  stack.k = layers.front().gate.rows;
  stack.d = layers.front().gate.cols;
  for (const auto& l : layers)
    if (l.gate.rows != stack.k || l.gate.cols != stack.d)
      throw shape_error("make_stack: layers disagree on (k,d)");
  stack.layers = std::move(layers);
  return stack;
}

// Per-layer record of what the predictor decided and what actually happened.
// `truth` is ground truth from the dense gate dots: in sparse mode it needs a
// dense recomputation, so it is filled only when collect_truth is set.
struct LayerTrace {
  SkipMask predicted;       // sparse mode only, else empty
  SkipMask truth;           // gate dot <= theta; see above
  SkipMask h1_actual_zero;  // h1[i] == 0 after activation
  SkipMask h3_zero;         // h3[i] == 0 entering the down projection
  DenseVector h1, h2, h3;   // retained only with keep_vectors
  std::vector<std::uint32_t> n_neg_histogram;  // hist[n] = rows with N_neg == n
};

struct ForwardOptions {
  bool collect_truth = false;
  bool keep_vectors = false;
  unsigned threads = 1;
};

struct LayerResult {
  DenseVector y;
  LayerTrace trace;
};

enum class ForwardMode { dense, sparse };

namespace detail {

inline SkipMask zero_mask_of(const DenseVector& v) {
  SkipMask m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    m.bits[i] = v[i] == 0.0f ? 1 : 0;
  return m;
}

inline SkipMask truth_from_dots(const DenseVector& gate_dots, float theta) {
  SkipMask m(gate_dots.size());
  for (std::size_t i = 0; i < gate_dots.size(); ++i)
    m.bits[i] = gate_dots[i] <= theta ? 1 : 0;
  return m;
}

}  // namespace detail

// Dense reference forward; also the oracle the sparse path is compared to.
inline LayerResult mlp_forward_dense(const MlpLayerWeights& layer,
                                     const DenseVector& x,
                                     const ForwardOptions& opts = {}) {
  if (x.size() != layer.gate.cols)
    throw shape_error("mlp_forward_dense: x.len != d");
  LayerResult r;
  DenseVector gate_dots = dense_gemv(layer.gate, x, opts.threads);
  DenseVector h1 = relu_theta(gate_dots, layer.theta);
  DenseVector h2 = dense_gemv(layer.up, x, opts.threads);
  DenseVector h3 = hadamard(h1, h2);
  SkipMask none(layer.gate.rows, false);
  r.y = accumulate_down(layer.down_t, h3, none, opts.threads);

  r.trace.truth = detail::truth_from_dots(gate_dots, layer.theta.theta);
  r.trace.h1_actual_zero = detail::zero_mask_of(h1);
  r.trace.h3_zero = detail::zero_mask_of(h3);
  if (opts.keep_vectors) {
    r.trace.h1 = std::move(h1);
    r.trace.h2 = std::move(h2);
    r.trace.h3 = std::move(h3);
  }
  return r;
}

// Predicted-then-actual sparse forward:
//   (a) pack input signs, predict the skip mask for the gate projection;
//   (b) gate GEMV skips predicted rows, then the activation runs;
//   (c) rows with h1 == 0 join the mask (actual sparsity found after step 1);
//   (d) up GEMV runs under the widened mask, h3 = h1 (.) h2;
//   (e) rows with h3 == 0 join the mask;
//   (f) the down projection accumulates only surviving rows.
// Predicted-but-wrong rows are never recovered; that is the accuracy cost
// alpha trades against.
inline LayerResult mlp_forward_sparse(const MlpLayerWeights& layer,
                                      const DenseVector& x, AlphaX100 alpha,
                                      const ForwardOptions& opts = {}) {
  if (x.size() != layer.gate.cols)
    throw shape_error("mlp_forward_sparse: x.len != d");
  LayerResult r;
  const bool tracing = opts.collect_truth;

  SignPackedVector x_signs = pack_signs_vector(x);
  std::vector<std::uint32_t> n_neg;
  SkipMask predicted =
      predict_skip_mask(layer.gate_signs, x_signs, alpha, opts.threads,
                        tracing ? &n_neg : nullptr);

  DenseVector h1 =
      relu_theta(sparse_gemv_rows(layer.gate, x, predicted, opts.threads),
                 layer.theta);

  SkipMask mask2 = detail::zero_mask_of(h1);
  mask2.merge(predicted);

  DenseVector h2 = sparse_gemv_rows(layer.up, x, mask2, opts.threads);
  DenseVector h3 = hadamard(h1, h2);

  SkipMask mask4 = detail::zero_mask_of(h3);
  mask4.merge(mask2);

  r.y = accumulate_down(layer.down_t, h3, mask4, opts.threads);

  r.trace.h1_actual_zero = std::move(mask2);
  r.trace.h3_zero = std::move(mask4);
  if (tracing) {
    DenseVector gate_dots = dense_gemv(layer.gate, x, opts.threads);
    r.trace.truth = detail::truth_from_dots(gate_dots, layer.theta.theta);
    r.trace.n_neg_histogram.assign(layer.gate.cols + 1, 0);
    for (std::uint32_t n : n_neg) r.trace.n_neg_histogram[n] += 1;
  }
  r.trace.predicted = std::move(predicted);
  if (opts.keep_vectors) {
    r.trace.h1 = std::move(h1);
    r.trace.h2 = std::move(h2);
    r.trace.h3 = std::move(h3);
  }
  return r;
}

// Unit-RMS rescale applied between stacked layers. The blocks here run
// without the residual/normalization machinery of a full transformer, and
// raw outputs of stacked random MLPs grow without bound; the rescale keeps
// multi-layer runs conditioned. Zero vectors pass through unchanged.
inline DenseVector rms_normalize(const DenseVector& v) {
  double sum_sq = 0.0;
  for (float x : v.data) sum_sq += static_cast<double>(x) * x;
  if (sum_sq == 0.0) return v;
  float inv = static_cast<float>(
      1.0 / std::sqrt(sum_sq / static_cast<double>(v.size())));
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

struct StackResult {
  DenseVector y;
  std::vector<LayerTrace> traces;
};

// Feeds x through the layers in order. In sparse mode the schedule supplies
// one alpha per layer. The final layer's output is returned unrescaled.
inline StackResult stack_forward(const MlpStack& stack, const DenseVector& x,
                                 ForwardMode mode,
                                 const AlphaSchedule& schedule = {},
                                 const ForwardOptions& opts = {}) {
  if (mode == ForwardMode::sparse &&
      schedule.per_layer.size() != stack.layers.size())
    throw shape_error("stack_forward: schedule length " +
                      std::to_string(schedule.per_layer.size()) +
                      " != layer count " +
                      std::to_string(stack.layers.size()));
  StackResult result;
  result.traces.reserve(stack.layers.size());
  DenseVector cur = x;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    if (l > 0) cur = rms_normalize(cur);
    LayerResult lr =
        mode == ForwardMode::dense
            ? mlp_forward_dense(stack.layers[l], cur, opts)
            : mlp_forward_sparse(stack.layers[l], cur, schedule.per_layer[l],
                                 opts);
    result.traces.push_back(std::move(lr.trace));
    cur = std::move(lr.y);
  }
  result.y = std::move(cur);
  return result;
}

}  // namespace signskip

#endif  // SIGNSKIP_MLP_ENGINE_HPP
