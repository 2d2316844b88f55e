// cmrf: approximate-inference workbench for discrete pairwise MRFs.
//
// Subcommands: infer, sweep, clamp, seqsearch, hist, gen. Model sources are
// either a file (--model, UAI or native by extension) or a generated family
// (--family plus parameters). CSV outputs are deterministic for fixed seeds,
// except for the wall-time columns.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmrf/clamping.hpp"
#include "cmrf/errors.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/experiments.hpp"
#include "cmrf/gen.hpp"
#include "cmrf/io.hpp"
#include "cmrf/select.hpp"

namespace {

using namespace cmrf;

struct ModelSource {
  std::string model_path;
  std::string family;
  int n = 9;
  int rows = 0, cols = 0;
  bool open_grid = false;
  int degree = 4;
  double erdos_p = -1.0;
  std::vector<double> theta_range{-2.0, 2.0};
  std::vector<double> w_range{-6.0, 6.0};
  double w_uniform = 0.0;
  bool has_w_uniform = false;
  std::uint64_t seed = 0;
  int default_grid_side = 3;

  void add_options(CLI::App* cmd, bool allow_file = true) {
    if (allow_file) cmd->add_option("--model", model_path, "model file (.uai or native text)");
    cmd->add_option("--family", family, "grid|erdos|regular|complete|cycle");
    cmd->add_option("--n", n, "variable count (non-grid families)");
    cmd->add_option("--rows", rows, "grid rows");
    cmd->add_option("--cols", cols, "grid cols");
    cmd->add_flag("--open-grid", open_grid, "disable toroidal wrap edges");
    cmd->add_option("--degree", degree, "regular-graph degree");
    cmd->add_option("--p", erdos_p, "erdos edge probability (default: avg degree 4)");
    cmd->add_option("--theta-range", theta_range, "singleton range lo,hi")
        ->delimiter(',')
        ->expected(2);
    cmd->add_option("--w-range", w_range, "edge weight range lo,hi")->delimiter(',')->expected(2);
    cmd->add_option("--w-uniform", w_uniform, "symmetric model: theta=0, all W equal")
        ->each([this](const std::string&) { has_w_uniform = true; });
    cmd->add_option("--seed", seed, "PRNG seed");
  }

  GenSpec gen_spec() const {
    GenSpec spec = parse_family(family.empty() ? "grid" : family);
    spec.n = n;
    spec.rows = rows > 0 ? rows : default_grid_side;
    spec.cols = cols > 0 ? cols : spec.rows;
    spec.toroidal = !open_grid;
    spec.degree = degree;
    spec.erdos_p = erdos_p;
    spec.theta_lo = theta_range[0];
    spec.theta_hi = theta_range[1];
    spec.w_lo = w_range[0];
    spec.w_hi = w_range[1];
    spec.seed = seed;
    if (has_w_uniform) {
      spec.symmetric_w = w_uniform;
      if (spec.family == GenSpec::Family::Complete)
        spec.family = GenSpec::Family::SymmetricComplete;
      else if (spec.family != GenSpec::Family::SymmetricCycle)
        throw InputError("--w-uniform applies to cycle or complete families");
    } else if (spec.family == GenSpec::Family::SymmetricCycle) {
      spec.symmetric_w = w_uniform;  // cycle family is symmetric by definition
    }
    return spec;
  }

  PairwiseModel load() const {
    if (!model_path.empty()) return load_model(model_path);
    if (family.empty()) throw InputError("give --model or --family");
    return generate(gen_spec());
  }
};

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  std::string token;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!token.empty()) out.push_back(method_from_string(token));
      token.clear();
    } else {
      token += c;
    }
  }
  if (out.empty()) throw InputError("at least one method required");
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  return out;
}

std::string with_suffix(const std::string& path, const std::string& tag) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

int run_infer(const ModelSource& source, const std::string& method, const std::string& scores_out,
              std::uint64_t seed) {
  PairwiseModel m = source.load();
  ClampConfig cfg;
  cfg.mf.seed = seed;
  cfg.bethe.seed = seed;
  cfg.trw.seed = seed;
  InferenceResult result = run_inference(m, method_from_string(method), cfg);
  print_infer(std::cout, std::cerr, result);
  if (!scores_out.empty()) {
    std::vector<SelectionScore> scores;
    if (m.is_binary()) {
      scores.push_back(score_maxw(m, true));
      scores.push_back(score_maxw(m, false));
      scores.push_back(score_mpower(m));
      scores.push_back(score_cycles(m, CycleMode::Frustrated));
      scores.push_back(score_cycles(m, CycleMode::Strong));
      EdgeAppearance rho = default_tree_weights(m);
      InferenceResult trw = trw_optimize(m, rho, cfg.trw);
      std::size_t plain = scores.size();
      for (std::size_t i = 0; i < plain; ++i) scores.push_back(tre_adjust(scores[i], m, trw));
    }
    auto out = open_out(scores_out);
    write_scores_csv(out, scores);
  }
  return 0;
}

int run_clamp(ExperimentSpec spec, const std::string& out_path, bool full, bool runs_given) {
  auto run_one = [&](const ExperimentSpec& one, const std::string& path) {
    auto main_csv = open_out(path);
    auto mean_csv = open_out(with_suffix(path, "_mean"));
    auto timing_csv = open_out(with_suffix(path, "_timing"));
    cmd_clamp_experiment(main_csv, mean_csv, timing_csv, one, ClampConfig{});
    std::fprintf(stderr, "wrote %s (+ _mean, _timing)\n", path.c_str());
  };
  if (!full) {
    run_one(spec, out_path);
    return 0;
  }
  std::fprintf(stderr,
               "warning: --full runs the full family matrix (%d runs x 18 families); "
               "expect hours of runtime\n",
               runs_given ? spec.runs : 100);
  if (!runs_given) spec.runs = 100;
  struct FamilyCase {
    const char* tag;
    GenSpec::Family family;
    int n, rows;
    double w_lo, w_hi;
  };
  std::vector<FamilyCase> cases;
  for (auto [wl, wh, rtag] : {std::tuple{0.0, 6.0, "att06"}, std::tuple{-6.0, 6.0, "mix66"}}) {
    for (int side : {5, 7, 9}) {
      cases.push_back({rtag, GenSpec::Family::Grid, side * side, side, wl, wh});
      cases.push_back({rtag, GenSpec::Family::Erdos, side * side, 0, wl, wh});
      cases.push_back({rtag, GenSpec::Family::Regular, side * side, 0, wl, wh});
    }
  }
  for (auto [wl, wh, rtag] :
       {std::tuple{0.0, 6.0, "att06"}, std::tuple{-6.0, 6.0, "mix66"}, std::tuple{-12.0, 12.0, "mix1212"}})
    for (int n : {10, 15}) cases.push_back({rtag, GenSpec::Family::Complete, n, 0, wl, wh});

  for (const FamilyCase& fc : cases) {
    ExperimentSpec one = spec;
    one.gen.family = fc.family;
    one.gen.n = fc.n;
    one.gen.rows = one.gen.cols = fc.rows;
    one.gen.w_lo = fc.w_lo;
    one.gen.w_hi = fc.w_hi;
    const char* family = fc.family == GenSpec::Family::Grid      ? "grid"
                         : fc.family == GenSpec::Family::Erdos   ? "erdos"
                         : fc.family == GenSpec::Family::Regular ? "regular"
                                                                 : "complete";
    std::string tag = std::string("_") + family + std::to_string(fc.n) + "_" + fc.tag;
    try {
      run_one(one, with_suffix(out_path, tag));
    } catch (const std::exception& e) {
      // One family failing (e.g. an elimination width blowup) should not
      // abort the rest of the matrix.
      std::fprintf(stderr, "family %s skipped: %s\n", tag.c_str(), e.what());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clamp-and-sum partition function workbench for pairwise MRFs"};
  app.require_subcommand(1);

  // infer
  auto* infer = app.add_subcommand("infer", "single-shot inference on one model");
  ModelSource infer_src;
  infer_src.add_options(infer);
  std::string infer_method = "bethe";
  std::string scores_out;
  infer->add_option("--method", infer_method, "mf|bethe|trw|exact");
  infer->add_option("--scores-out", scores_out, "write the heuristic score table CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "symmetric-model error curves over a weight grid");
  SweepSpec sweep_spec;
  std::string sweep_topology = "complete";
  std::string sweep_methods = "mf,bethe,trw";
  std::string sweep_out = "sweep.csv";
  sweep->add_option("--topology", sweep_topology, "cycle|complete");
  sweep->add_option("--n", sweep_spec.n, "variable count (<= 12)");
  sweep->add_option("--w-min", sweep_spec.w_lo, "weight grid start");
  sweep->add_option("--w-max", sweep_spec.w_hi, "weight grid end");
  sweep->add_option("--w-step", sweep_spec.w_step, "weight grid step");
  sweep->add_option("--method,--methods", sweep_methods, "comma list of methods");
  sweep->add_option("--out", sweep_out, "output CSV");

  // clamp
  auto* clamp_cmd = app.add_subcommand("clamp", "error vs clamp count experiment");
  ModelSource clamp_src;
  clamp_src.family = "grid";
  clamp_src.default_grid_side = 5;
  clamp_src.add_options(clamp_cmd, /*allow_file=*/false);
  std::string clamp_methods = "mf,bethe,trw";
  std::vector<std::string> clamp_selectors;
  int clamp_runs = 20, clamp_rounds = 5, clamp_jobs = 1;
  bool clamp_full = false;
  std::string clamp_out = "clamp.csv";
  clamp_cmd->add_option("--method,--methods", clamp_methods, "comma list of methods");
  clamp_cmd->add_option("--selector", clamp_selectors,
                        "selector names (default: the ten-heuristic basket)");
  auto* clamp_runs_opt = clamp_cmd->add_option("--runs", clamp_runs, "number of generated models");
  clamp_cmd->add_option("--rounds", clamp_rounds, "clamp rounds per run");
  clamp_cmd->add_option("--jobs", clamp_jobs, "concurrent runs");
  clamp_cmd->add_option("--out", clamp_out, "output CSV (mean/timing derive from it)");
  clamp_cmd->add_flag("--full", clamp_full, "run the full family matrix at 100 runs");

  // seqsearch
  auto* seq = app.add_subcommand("seqsearch", "exhaustive clamp sequences vs greedy");
  ModelSource seq_src;
  seq_src.add_options(seq);
  std::string seq_method = "trw";
  int seq_k = 2;
  seq->add_option("--method", seq_method, "mf|bethe|trw|exact");
  seq->add_option("--k", seq_k, "sequence length (<= 3)");

  // hist
  auto* hist = app.add_subcommand("hist", "signed Bethe error histogram at rounds 0..2");
  ModelSource hist_src;
  hist_src.family = "grid";
  hist_src.default_grid_side = 5;
  hist_src.add_options(hist, /*allow_file=*/false);
  int hist_runs = 20, hist_jobs = 1;
  std::string hist_selector = "maxW";
  std::string hist_out = "hist.csv";
  hist->add_option("--runs", hist_runs, "number of generated models");
  hist->add_option("--selector", hist_selector, "clamp selector");
  hist->add_option("--jobs", hist_jobs, "concurrent runs");
  hist->add_option("--out", hist_out, "output CSV");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a model file");
  ModelSource gen_src;
  gen_src.family = "grid";
  gen_src.add_options(gen_cmd, /*allow_file=*/false);
  std::string gen_out;
  gen_cmd->add_option("--out", gen_out, "output path (.uai or native); stdout if omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) return run_infer(infer_src, infer_method, scores_out, infer_src.seed);

    if (*sweep) {
      sweep_spec.cycle = sweep_topology == "cycle";
      if (!sweep_spec.cycle && sweep_topology != "complete")
        throw InputError("sweep topology must be cycle or complete");
      sweep_spec.methods = parse_methods(sweep_methods);
      auto out = open_out(sweep_out);
      cmd_sweep(out, sweep_spec, ClampConfig{});
      std::fprintf(stderr, "wrote %s\n", sweep_out.c_str());
      return 0;
    }

    if (*clamp_cmd) {
      ExperimentSpec spec;
      spec.gen = clamp_src.gen_spec();
      spec.runs = clamp_runs;
      spec.rounds = clamp_rounds;
      spec.methods = parse_methods(clamp_methods);
      spec.selectors = clamp_selectors;
      spec.seed = clamp_src.seed;
      spec.jobs = clamp_jobs;
      return run_clamp(spec, clamp_out, clamp_full, clamp_runs_opt->count() > 0);
    }

    if (*seq) {
      PairwiseModel m = seq_src.load();
      ClampConfig cfg;
      cfg.mf.seed = seq_src.seed;
      cfg.bethe.seed = seq_src.seed;
      SequenceSearchResult r = cmd_sequence_search(m, method_from_string(seq_method), seq_k, cfg);
      auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
      };
      std::printf("greedy_sequence=%s\n", join(r.greedy_sequence).c_str());
      std::printf("greedy_aggregate=%.12g\n", r.greedy_aggregate);
      std::printf("best_sequence=%s\n", join(r.best_sequence).c_str());
      std::printf("best_aggregate=%.12g\n", r.best_aggregate);
      std::printf("gap=%.12g\n", r.gap);
      return 0;
    }

    if (*hist) {
      ExperimentSpec spec;
      spec.gen = hist_src.gen_spec();
      spec.runs = hist_runs;
      spec.selectors = {hist_selector};
      spec.seed = hist_src.seed;
      spec.jobs = hist_jobs;
      auto out = open_out(hist_out);
      cmd_histogram(out, spec, ClampConfig{});
      std::fprintf(stderr, "wrote %s\n", hist_out.c_str());
      return 0;
    }

    if (*gen_cmd) {
      PairwiseModel m = generate(gen_src.gen_spec());
      if (gen_out.empty()) {
        write_native(std::cout, m);
      } else {
        save_model(gen_out, m);
        std::fprintf(stderr, "wrote %s\n", gen_out.c_str());
      }
      return 0;
    }
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
