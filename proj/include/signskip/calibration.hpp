#ifndef SIGNSKIP_CALIBRATION_HPP
#define SIGNSKIP_CALIBRATION_HPP

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

#include "signskip/metrics.hpp"
#include "signskip/mlp_engine.hpp"

namespace signskip {

// mask[i] = true iff the dense gate dot for row i lands at or below theta,
// i.e. the activation output is exactly zero.
inline SkipMask ground_truth_mask(const MlpLayerWeights& layer,
                                  const DenseVector& x, unsigned threads = 1) {
  DenseVector dots = dense_gemv(layer.gate, x, threads);
  SkipMask m(dots.size());
  for (std::size_t i = 0; i < dots.size(); ++i)
    m.bits[i] = dots[i] <= layer.theta.theta ? 1 : 0;
  return m;
}

// One sweep cell: a (layer, alpha) pair averaged over the input set.
// Column order is fixed by the CSV format below.
struct SweepRow {
  std::size_t layer = 0;
  std::uint32_t alpha_x100 = 100;
  double precision = 0.0;
  double recall = 0.0;
  double sparsity = 0.0;      // mean predicted-skip fraction
  double h3_l2_error = 0.0;   // mean ||h3_sparse - h3_dense||_2
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::size_t layer_count = 0;
  std::vector<std::uint32_t> grid;  // ascending alpha_x100 values
};

inline void write_csv(const SweepTable& table, std::ostream& os) {
  os << "layer,alpha_x100,precision,recall,sparsity,h3_l2_error\n";
  for (const auto& r : table.rows)
    os << r.layer << ',' << r.alpha_x100 << ',' << r.precision << ','
       << r.recall << ',' << r.sparsity << ',' << r.h3_l2_error << '\n';
}

namespace detail {

// Per-(layer, input, alpha) evaluation against the dense intermediates of
// the same input. Dense h1/h2 are passed in so the sweep computes them once
// per (layer, input) rather than once per alpha.
struct CellStats {
  PredictorScore score;
  double predicted_sparsity = 0.0;
  double true_sparsity = 0.0;
  double h3_err = 0.0;
};

inline CellStats evaluate_cell(const MlpLayerWeights& layer,
                               const SignPackedVector& x_signs,
                               const DenseVector& h1_dense,
                               const DenseVector& h3_dense,
                               const SkipMask& truth, AlphaX100 alpha,
                               unsigned threads) {
  CellStats out;
  SkipMask predicted =
      predict_skip_mask(layer.gate_signs, x_signs, alpha, threads);
  out.score = score_predictor(predicted, truth);
  out.predicted_sparsity =
      static_cast<double>(predicted.count_skipped()) / predicted.size();
  out.true_sparsity =
      static_cast<double>(truth.count_skipped()) / truth.size();

  // h3 under this mask: falsely skipped rows zero out, everything else is
  // bit-equal to dense, so the error comes from false positives only.
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted.bits[i] && h1_dense[i] != 0.0f) {
      double v = static_cast<double>(h3_dense[i]);
      sum += v * v;
    }
  out.h3_err = std::sqrt(sum);
  return out;
}

}  // namespace detail

// Sweeps every (layer, alpha) cell over the input set. Layer inputs follow
// the dense trajectory (rescaled between layers), so every alpha is judged
// against the same per-layer input and the per-instance false-positive
// monotonicity along the grid carries over to the table.
inline SweepTable sweep_alpha(const MlpStack& stack,
                              const std::vector<DenseVector>& inputs,
                              const std::vector<std::uint32_t>& grid,
                              unsigned threads = 1) {
  if (inputs.empty()) throw value_error("sweep_alpha: no inputs");
  if (grid.empty()) throw value_error("sweep_alpha: empty grid");

  const std::size_t L = stack.layers.size();
  const std::size_t A = grid.size();
  struct Accum {
    double precision = 0, recall = 0, sparsity = 0, err = 0;
  };
  std::vector<Accum> acc(L * A);

  for (const DenseVector& x0 : inputs) {
    DenseVector cur = x0;
    for (std::size_t l = 0; l < L; ++l) {
      if (l > 0) cur = rms_normalize(cur);
      const MlpLayerWeights& layer = stack.layers[l];

      DenseVector gate_dots = dense_gemv(layer.gate, cur, threads);
      DenseVector h1 = relu_theta(gate_dots, layer.theta);
      DenseVector h2 = dense_gemv(layer.up, cur, threads);
      DenseVector h3 = hadamard(h1, h2);
      SkipMask truth =
          detail::truth_from_dots(gate_dots, layer.theta.theta);
      SignPackedVector x_signs = pack_signs_vector(cur);

      for (std::size_t a = 0; a < A; ++a) {
        auto cell = detail::evaluate_cell(layer, x_signs, h1, h3, truth,
                                          AlphaX100{grid[a]}, threads);
        Accum& s = acc[l * A + a];
        s.precision += cell.score.precision;
        s.recall += cell.score.recall;
        s.sparsity += cell.predicted_sparsity;
        s.err += cell.h3_err;
      }
      cur = accumulate_down(layer.down_t, h3,
                            SkipMask(layer.down_t.rows, false), threads);
    }
  }

  SweepTable table;
  table.layer_count = L;
  table.grid = grid;
  const double n = static_cast<double>(inputs.size());
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t a = 0; a < A; ++a) {
      const Accum& s = acc[l * A + a];
      table.rows.push_back(SweepRow{l, grid[a], s.precision / n, s.recall / n,
                                    s.sparsity / n, s.err / n});
    }
  return table;
}

// Picks, for each of the first early_layer_count layers, the smallest grid
// alpha whose mean precision reaches the target (the largest grid alpha when
// none does). Remaining layers stay at 1.00. Grid must be ascending.
inline AlphaSchedule select_alpha(const SweepTable& table,
                                  double precision_target,
                                  std::size_t early_layer_count) {
  if (table.rows.empty() || table.layer_count == 0 || table.grid.empty())
    throw value_error("select_alpha: empty table");
  if (!std::is_sorted(table.grid.begin(), table.grid.end()))
    throw value_error("select_alpha: grid must be ascending");

  AlphaSchedule schedule;
  schedule.early_layer_count =
      std::min(early_layer_count, table.layer_count);
  schedule.per_layer.assign(table.layer_count, AlphaX100{100});

  const std::size_t A = table.grid.size();
  for (std::size_t l = 0; l < schedule.early_layer_count; ++l) {
    std::uint32_t chosen = table.grid.back();
    for (std::size_t a = 0; a < A; ++a) {
      if (table.rows[l * A + a].precision >= precision_target) {
        chosen = table.grid[a];
        break;
      }
    }
    schedule.per_layer[l] = AlphaX100{chosen};
  }
  return schedule;
}

}  // namespace signskip

#endif  // SIGNSKIP_CALIBRATION_HPP
