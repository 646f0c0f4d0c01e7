// Command-line driver: synthetic model generation, sign-pack sidecars,
// dense/sparse inference, predictor evaluation, alpha sweeps/calibration,
// and op-count/memory/timing reports.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "signskip/signskip.hpp"

namespace ss = signskip;
using nlohmann::json;

namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("SIGNSKIP_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

ss::AlphaX100 parse_alpha(const std::string& text) {
  if (text == "inf" || text == "INF" || text == "Inf")
    return ss::AlphaX100{ss::ALPHA_NEVER_SKIP_BY_MAJORITY};
  double a = 0.0;
  std::size_t pos = 0;
  try {
    a = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || !(a > 0.0) || a > 1e6)
    throw ss::value_error("alpha: expected a positive decimal or 'inf', got '" +
                          text + "'");
  return ss::AlphaX100{static_cast<std::uint32_t>(std::llround(a * 100.0))};
}

std::vector<std::uint32_t> parse_grid(const std::string& text) {
  std::vector<std::uint32_t> grid;
  std::stringstream ss_in(text);
  std::string tok;
  while (std::getline(ss_in, tok, ',')) {
    if (tok.empty()) continue;
    grid.push_back(parse_alpha(tok).value);
  }
  if (grid.empty()) throw ss::value_error("grid: no alpha values parsed");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ss::value_error("grid: alpha values must be ascending");
  return grid;
}

ss::GenSpec input_spec(const ss::MlpStack& stack, std::uint64_t seed,
                       float input_mean) {
  ss::GenSpec spec;
  spec.layers = static_cast<std::uint32_t>(stack.layers.size());
  spec.d = static_cast<std::uint32_t>(stack.d);
  spec.k = static_cast<std::uint32_t>(stack.k);
  spec.seed = seed;
  if (input_mean != 0.0f) {
    spec.mode = ss::GenMode::sparsity_biased;
    spec.input_mean = input_mean;
  }
  return spec;
}

ss::AlphaSchedule load_schedule(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ss::format_error("schedule: cannot open " + path);
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded() || !j.contains("alpha_x100") ||
      !j["alpha_x100"].is_array())
    throw ss::format_error("schedule: expected {\"alpha_x100\": [...]} in " +
                           path);
  ss::AlphaSchedule schedule;
  for (const auto& v : j["alpha_x100"])
    schedule.per_layer.push_back(ss::AlphaX100{v.get<std::uint32_t>()});
  schedule.early_layer_count = j.value("early_layer_count", std::size_t{0});
  return schedule;
}

// Writes to the given path, or stdout when the path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream os(path);
  if (!os) throw ss::format_error("output: cannot open " + path);
  os << content;
}

std::string cpu_description() {
  std::ifstream is("/proc/cpuinfo");
  std::string line;
  std::string model = "unknown cpu";
  while (std::getline(is, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(colon + 2);
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " hw threads";
}

int cmd_gen(std::uint32_t layers, std::uint32_t d, std::uint32_t k,
            const std::string& mode, std::uint64_t seed, float theta,
            float gate_row_shift, const std::string& out) {
  ss::GenSpec spec;
  spec.layers = layers;
  spec.d = d;
  spec.k = k;
  spec.seed = seed;
  if (mode == "sparsity_biased") {
    spec.mode = ss::GenMode::sparsity_biased;
    spec.gate_row_shift = gate_row_shift < 0.0f ? 0.3f : gate_row_shift;
  } else if (mode == "iid_gaussian") {
    if (gate_row_shift >= 0.0f)
      throw ss::value_error("gen: --gate-row-shift requires --mode sparsity_biased");
  } else {
    throw ss::value_error("gen: unknown mode '" + mode + "'");
  }
  ss::MlpStack stack = ss::gen_synthetic(spec, theta);
  ss::write_model(out, stack);
  std::cout << "wrote " << out << ": layers=" << layers << " d=" << d
            << " k=" << k << " theta=" << theta << "\n";
  return 0;
}

int cmd_pack(const std::string& model_path, const std::string& out,
             unsigned threads) {
  ss::MlpStack stack = ss::read_model(model_path, threads);
  ss::write_signpack(out, stack);
  std::cout << "wrote " << out << ": " << stack.layers.size() << " layers, "
            << stack.layers.front().gate_signs.words.size()
            << " words per layer\n";
  return 0;
}

int cmd_run(const std::string& model_path, const std::string& signs_path,
            const std::string& mode, const std::string& alpha_text,
            const std::string& schedule_path, std::uint64_t seed,
            std::size_t inputs, float input_mean, bool trace,
            unsigned threads) {
  ss::MlpStack stack = ss::read_model(model_path, threads);
  if (!signs_path.empty())
    ss::attach_signpack(stack, ss::read_signpack(signs_path));

  ss::ForwardMode fmode;
  if (mode == "dense") fmode = ss::ForwardMode::dense;
  else if (mode == "sparse") fmode = ss::ForwardMode::sparse;
  else throw ss::value_error("run: unknown mode '" + mode + "'");

  ss::AlphaSchedule schedule;
  if (!schedule_path.empty()) {
    schedule = load_schedule(schedule_path);
    if (schedule.per_layer.size() != stack.layers.size())
      throw ss::shape_error("run: schedule has " +
                            std::to_string(schedule.per_layer.size()) +
                            " entries for " +
                            std::to_string(stack.layers.size()) + " layers");
  } else {
    schedule.per_layer.assign(stack.layers.size(), parse_alpha(alpha_text));
  }

  auto xs = ss::gen_inputs(input_spec(stack, seed, input_mean), inputs);

  ss::ForwardOptions opts;
  opts.threads = threads;
  opts.collect_truth = trace;

  const std::size_t L = stack.layers.size();
  std::vector<double> predicted(L, 0), h1_zero(L, 0), h3_zero(L, 0);
  std::vector<double> precision(L, 0), recall(L, 0);
  std::uint64_t checksum = ss::kFnvOffset;
  for (const auto& x : xs) {
    ss::StackResult r = ss::stack_forward(stack, x, fmode, schedule, opts);
    for (std::size_t l = 0; l < L; ++l) {
      const ss::LayerTrace& t = r.traces[l];
      double k = static_cast<double>(stack.k);
      if (fmode == ss::ForwardMode::sparse)
        predicted[l] += t.predicted.count_skipped() / k;
      h1_zero[l] += t.h1_actual_zero.count_skipped() / k;
      h3_zero[l] += t.h3_zero.count_skipped() / k;
      if (trace && t.truth.size() == stack.k &&
          fmode == ss::ForwardMode::sparse) {
        ss::PredictorScore s = ss::score_predictor(t.predicted, t.truth);
        precision[l] += s.precision;
        recall[l] += s.recall;
      }
    }
    checksum = ss::fnv1a64_f32(
        std::span<const float>(r.y.data.data(), r.y.data.size()), checksum);
  }

  std::cout << "model: " << model_path << " layers=" << L << " d=" << stack.d
            << " k=" << stack.k << "\n";
  std::cout << "mode=" << mode << " inputs=" << inputs << " seed=" << seed
            << " threads=" << threads << "\n";
  double n = static_cast<double>(xs.size());
  for (std::size_t l = 0; l < L; ++l) {
    std::cout << "layer " << l << ":";
    if (fmode == ss::ForwardMode::sparse)
      std::cout << " predicted_sparsity=" << predicted[l] / n;
    std::cout << " h1_zero=" << h1_zero[l] / n
              << " h3_zero=" << h3_zero[l] / n;
    if (trace && fmode == ss::ForwardMode::sparse)
      std::cout << " precision=" << precision[l] / n
                << " recall=" << recall[l] / n;
    std::cout << "\n";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(checksum));
  std::cout << "output_checksum: " << buf << "\n";
  return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& grid_text,
              std::size_t inputs, std::uint64_t seed, float input_mean,
              unsigned threads, const std::string& out) {
  ss::MlpStack stack = ss::read_model(model_path, threads);
  auto grid = parse_grid(grid_text);
  auto xs = ss::gen_inputs(input_spec(stack, seed, input_mean), inputs);
  ss::SweepTable table = ss::sweep_alpha(stack, xs, grid, threads);
  std::ostringstream os;
  ss::write_csv(table, os);
  emit(out, os.str());
  return 0;
}

int cmd_calibrate(const std::string& model_path, const std::string& grid_text,
                  double precision_target, long early_layers,
                  std::size_t inputs, std::uint64_t seed, float input_mean,
                  unsigned threads, const std::string& out) {
  ss::MlpStack stack = ss::read_model(model_path, threads);
  auto grid = parse_grid(grid_text);
  auto xs = ss::gen_inputs(input_spec(stack, seed, input_mean), inputs);
  ss::SweepTable table = ss::sweep_alpha(stack, xs, grid, threads);
  std::size_t early = early_layers < 0
                          ? (stack.layers.size() + 1) / 2
                          : static_cast<std::size_t>(early_layers);
  ss::AlphaSchedule schedule =
      ss::select_alpha(table, precision_target, early);

  json j;
  j["alpha_x100"] = json::array();
  for (const auto& a : schedule.per_layer) j["alpha_x100"].push_back(a.value);
  j["early_layer_count"] = schedule.early_layer_count;
  j["precision_target"] = precision_target;
  emit(out, j.dump(2) + "\n");
  return 0;
}

int cmd_bench(std::uint32_t d, std::uint32_t k, std::uint32_t layers,
              const std::string& report, double sparsity, std::uint32_t rank,
              double skip_ratio, int warmup, int repeats, std::uint64_t seed,
              bool have_seed, unsigned threads) {
  bool want_opcounts = report == "opcounts" || report == "all";
  bool want_timing = report == "timing" || report == "all";
  if (!want_opcounts && !want_timing)
    throw ss::value_error("bench: unknown report '" + report + "'");

  if (want_opcounts) {
    ss::OpCountReport ops = ss::op_counts(d, k, sparsity, rank);
    ss::MemoryReport sp = ss::signpack_memory(d, k, layers);
    ss::MemoryReport cmp = ss::comparator_memory(d, k, rank, layers);
    std::cout << "op counts per layer (d=" << d << " k=" << k << "):\n";
    std::cout << "  predictor_word_ops " << ops.predictor_word_ops << "\n";
    std::cout << "  dense_mlp_macs " << ops.dense_mlp_macs << "\n";
    std::cout << "  sparse_mlp_macs " << ops.sparse_mlp_macs << " (sparsity "
              << sparsity << ")\n";
    std::cout << "  comparator_predictor_macs " << ops.comparator_predictor_macs
              << " (rank " << rank << ")\n";
    std::cout << "memory (" << layers << " layers):\n";
    char mib[64];
    std::snprintf(mib, sizeof mib, "%.1f", sp.mib);
    std::cout << "  signpack " << sp.bytes << " bytes = " << mib << " MiB\n";
    std::snprintf(mib, sizeof mib, "%.1f", cmp.mib);
    std::cout << "  comparator " << cmp.bytes << " bytes = " << mib
              << " MiB\n";
    std::snprintf(mib, sizeof mib, "%.2f",
                  static_cast<double>(cmp.bytes) / static_cast<double>(sp.bytes));
    std::cout << "  comparator/signpack ratio " << mib << "x\n";
  }

  if (want_timing) {
    if (!have_seed)
      throw ss::value_error("bench: --seed is required for timing runs");
    std::cout << "machine: " << cpu_description() << "\n";

    ss::DenseMatrix W(k, d);
    ss::fill_gaussian(W, ss::derive_stream_seed(seed, 0), 0.0f);
    ss::DenseVector x(d);
    {
      ss::GaussianSampler g(ss::derive_stream_seed(seed, 1));
      for (auto& v : x.data) v = g.next_f32();
    }
    // Forced mask: exactly round(skip_ratio * k) rows, chosen by a seeded
    // Fisher-Yates shuffle so the skipped set is scattered.
    std::size_t n_skip = static_cast<std::size_t>(
        std::llround(skip_ratio * static_cast<double>(k)));
    std::vector<std::uint32_t> idx(k);
    for (std::uint32_t i = 0; i < k; ++i) idx[i] = i;
    ss::Xoshiro256pp rng(ss::derive_stream_seed(seed, 2));
    for (std::size_t i = k; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.next() % i);
      std::swap(idx[i - 1], idx[j]);
    }
    ss::SkipMask forced(k, false);
    for (std::size_t i = 0; i < n_skip; ++i) forced.set(idx[i], true);
    ss::SkipMask none(k, false);

    ss::TimingResult dense = ss::time_median(warmup, repeats, [&] {
      auto y = ss::sparse_gemv_rows(W, x, none, threads);
      ss::do_not_optimize(y.data[0]);
    });
    ss::TimingResult sparse = ss::time_median(warmup, repeats, [&] {
      auto y = ss::sparse_gemv_rows(W, x, forced, threads);
      ss::do_not_optimize(y.data[0]);
    });

    ss::macs::enabled.store(true);
    ss::macs::reset();
    auto y = ss::sparse_gemv_rows(W, x, forced, threads);
    ss::do_not_optimize(y.data[0]);
    std::uint64_t sparse_macs = ss::macs::count();
    ss::macs::enabled.store(false);

    std::cout << "gemv timing (k=" << k << " d=" << d << ", warmup=" << warmup
              << " repeats=" << repeats << " threads=" << threads << "):\n";
    std::cout << "  dense_median_us " << dense.median_us << "\n";
    std::cout << "  sparse_median_us " << sparse.median_us << " (skip_ratio "
              << skip_ratio << ")\n";
    std::cout << "  sparse/dense ratio " << sparse.median_us / dense.median_us
              << "\n";
    std::cout << "  sparse_macs " << sparse_macs << " (expected "
              << static_cast<std::uint64_t>(k - n_skip) * d << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sign-bit sparsity prediction and row-skipping MLP engine"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --threads after the subcommand too
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "kernel thread count (results are identical for any value)")
      ->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded synthetic model");
  std::uint32_t g_layers = 1, g_d = 0, g_k = 0;
  std::uint64_t g_seed = 0;
  float g_theta = 0.0f, g_shift = -1.0f;
  std::string g_mode = "iid_gaussian", g_out;
  gen->add_option("--layers", g_layers, "decoder layer count")->required();
  gen->add_option("--d", g_d, "model dim")->required();
  gen->add_option("--k", g_k, "hidden dim")->required();
  gen->add_option("--mode", g_mode, "iid_gaussian | sparsity_biased");
  gen->add_option("--seed", g_seed, "generation seed")->required();
  gen->add_option("--theta", g_theta, "activation threshold (>= 0)");
  gen->add_option("--gate-row-shift", g_shift,
                  "gate row mean shift (sparsity_biased; default 0.3)");
  gen->add_option("-o,--output", g_out, "model file path")->required();

  // pack
  auto* pack = app.add_subcommand("pack", "write the sign-pack sidecar");
  std::string p_model, p_out;
  pack->add_option("--model", p_model, "model file")->required();
  pack->add_option("-o,--output", p_out, "sidecar path")->required();

  // run
  auto* run = app.add_subcommand("run", "dense or sparse stack forward");
  std::string r_model, r_signs, r_mode, r_alpha = "1.00", r_schedule;
  std::uint64_t r_seed = 0;
  std::size_t r_inputs = 1;
  float r_input_mean = 0.0f;
  bool r_trace = false;
  run->add_option("--model", r_model, "model file")->required();
  run->add_option("--signs", r_signs, "sign-pack sidecar (verified vs model)");
  run->add_option("--mode", r_mode, "dense | sparse")->required();
  auto* r_alpha_opt =
      run->add_option("--alpha", r_alpha, "alpha as decimal or 'inf'");
  run->add_option("--alpha-schedule", r_schedule, "per-layer schedule JSON")
      ->excludes(r_alpha_opt);
  run->add_option("--seed", r_seed, "input generation seed")->required();
  run->add_option("--inputs", r_inputs, "number of input vectors")
      ->check(CLI::PositiveNumber);
  run->add_option("--input-mean", r_input_mean, "input distribution mean");
  run->add_flag("--trace", r_trace, "collect ground truth, print precision/recall");

  // eval-predictor
  auto* ev = app.add_subcommand("eval-predictor",
                                "per-layer precision/recall CSV at one alpha");
  std::string e_model, e_alpha = "1.00", e_out;
  std::uint64_t e_seed = 0;
  std::size_t e_inputs = 32;
  float e_input_mean = 0.0f;
  ev->add_option("--model", e_model, "model file")->required();
  ev->add_option("--alpha", e_alpha, "alpha as decimal or 'inf'");
  ev->add_option("--seed", e_seed, "input generation seed")->required();
  ev->add_option("--inputs", e_inputs, "number of input vectors")
      ->check(CLI::PositiveNumber);
  ev->add_option("--input-mean", e_input_mean, "input distribution mean");
  ev->add_option("-o,--output", e_out, "CSV path (stdout if omitted)");

  // sweep-alpha
  auto* sw = app.add_subcommand("sweep-alpha",
                                "precision/recall/sparsity/error CSV over a grid");
  std::string s_model, s_grid = "1.00,1.01,1.02,1.03,1.05,1.10", s_out;
  std::uint64_t s_seed = 0;
  std::size_t s_inputs = 32;
  float s_input_mean = 0.0f;
  sw->add_option("--model", s_model, "model file")->required();
  sw->add_option("--grid", s_grid, "ascending comma-separated alphas");
  sw->add_option("--seed", s_seed, "input generation seed")->required();
  sw->add_option("--inputs", s_inputs, "number of input vectors")
      ->check(CLI::PositiveNumber);
  sw->add_option("--input-mean", s_input_mean, "input distribution mean");
  sw->add_option("-o,--output", s_out, "CSV path (stdout if omitted)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "select per-layer alphas, emit schedule JSON");
  std::string c_model, c_grid = "1.00,1.01,1.02,1.03,1.05,1.10", c_out;
  double c_target = 0.99;
  long c_early = -1;
  std::uint64_t c_seed = 0;
  std::size_t c_inputs = 32;
  float c_input_mean = 0.0f;
  cal->add_option("--model", c_model, "model file")->required();
  cal->add_option("--grid", c_grid, "ascending comma-separated alphas");
  cal->add_option("--precision-target", c_target, "mean precision target");
  cal->add_option("--early-layers", c_early,
                  "layers eligible for alpha > 1 (default: half the stack)");
  cal->add_option("--seed", c_seed, "input generation seed")->required();
  cal->add_option("--inputs", c_inputs, "number of input vectors")
      ->check(CLI::PositiveNumber);
  cal->add_option("--input-mean", c_input_mean, "input distribution mean");
  cal->add_option("-o,--output", c_out, "JSON path (stdout if omitted)");

  // bench
  auto* bn = app.add_subcommand("bench", "op-count/memory/timing reports");
  std::uint32_t b_d = 5120, b_k = 13824, b_layers = 40, b_rank = 1024;
  std::string b_report = "opcounts";
  double b_sparsity = 0.92, b_skip = 0.90;
  int b_warmup = 3, b_repeats = 9;
  std::uint64_t b_seed = 0;
  bool b_timing = false;
  bn->add_option("--d", b_d, "model dim");
  bn->add_option("--k", b_k, "hidden dim");
  bn->add_option("--layers", b_layers, "layer count for memory totals");
  bn->add_option("--report", b_report, "opcounts | timing | all");
  bn->add_flag("--timing", b_timing, "shorthand for --report all");
  bn->add_option("--sparsity", b_sparsity, "assumed sparsity for op counts");
  bn->add_option("--rank", b_rank, "comparator predictor rank");
  bn->add_option("--skip-ratio", b_skip, "forced skip ratio for timing");
  bn->add_option("--warmup", b_warmup, "warmup iterations");
  bn->add_option("--repeats", b_repeats, "timed iterations (median reported)");
  auto* b_seed_opt = bn->add_option("--seed", b_seed, "timing data seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return cmd_gen(g_layers, g_d, g_k, g_mode, g_seed, g_theta, g_shift,
                     g_out);
    if (*pack) return cmd_pack(p_model, p_out, threads);
    if (*run)
      return cmd_run(r_model, r_signs, r_mode, r_alpha, r_schedule, r_seed,
                     r_inputs, r_input_mean, r_trace, threads);
    if (*ev)
      return cmd_sweep(e_model, e_alpha, e_inputs, e_seed, e_input_mean,
                       threads, e_out);
    if (*sw)
      return cmd_sweep(s_model, s_grid, s_inputs, s_seed, s_input_mean,
                       threads, s_out);
    if (*cal)
      return cmd_calibrate(c_model, c_grid, c_target, c_early, c_inputs,
                           c_seed, c_input_mean, threads, c_out);
    if (*bn)
      return cmd_bench(b_d, b_k, b_layers, b_timing ? "all" : b_report,
                       b_sparsity, b_rank, b_skip, b_warmup, b_repeats, b_seed,
                       b_seed_opt->count() > 0, threads);
  } catch (const ss::format_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 2;
  } catch (const ss::shape_error& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 3;
  } catch (const ss::value_error& e) {
    std::cerr << "value error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 10;
  }
  return 1;
}
