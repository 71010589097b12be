// tools/sdlbench.cpp
//
// Command-line driver for the SDL toolkit: training, prediction, data
// simulation, benchmark sweeps, and conditioning diagnostics.
//
// Every command is deterministic given (config, seed): re-running with the
// same inputs produces byte-identical artifact files. Numeric CSV artifacts
// are headerless so they round-trip through load_matrix_csv; column orders
// and any string-valued fields (method and solver names) live in JSON
// sidecars instead.
//
// Exit codes: 0 success, 2 bad input (missing or malformed files, invalid
// flags or config), 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sdl/bench.hpp"
#include "sdl/classifier.hpp"
#include "sdl/constraints.hpp"
#include "sdl/csv.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/generative.hpp"
#include "sdl/metrics.hpp"
#include "sdl/problem.hpp"
#include "sdl/rng.hpp"
#include "sdl/solvers.hpp"

namespace {

using nlohmann::json;
using namespace sdl;

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small I/O helpers
// ---------------------------------------------------------------------------

std::vector<int> load_labels_csv(const std::string &path) {
  const DenseMatrix m = load_matrix_csv(path);
  if (m.cols() != 1)
    throw std::invalid_argument("labels file must have one value per line: " +
                                path);
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (v != std::floor(v) || std::fabs(v) > 1e9)
      throw std::invalid_argument("labels file has a non-integer entry: " +
                                  path);
    out[i] = static_cast<int>(v);
  }
  return out;
}

void save_labels_csv(const std::string &path, const std::vector<int> &labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  for (int v : labels) out << v << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json_file(const std::string &path, const json &j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

json load_json_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw std::invalid_argument("bad JSON in " + path + ": " + e.what());
  }
}

std::string join_path(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

void ensure_outdir(const std::string &dir) {
  if (dir.empty()) throw std::invalid_argument("--out must not be empty");
  fs::create_directories(dir);
}

json summary_to_json(const EvalSummary &s, bool with_recon) {
  json j;
  j["accuracy"] = s.accuracy;
  j["f_score"] = s.f_score;
  j["f_macro"] = s.f_macro;
  if (with_recon) j["recon_rel"] = s.recon_rel;
  json confusion = json::array();
  for (std::size_t i = 0; i < s.confusion.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < s.confusion.cols(); ++k)
      row.push_back(s.confusion(i, k));
    confusion.push_back(row);
  }
  j["confusion"] = confusion;
  return j;
}

// ---------------------------------------------------------------------------
// Constraint and score-function spellings
// ---------------------------------------------------------------------------

// Accepted forms: "unbounded", "nonneg", "ball:R", "nonneg-ball:R",
// "box:LO:HI".
ConstraintSpec parse_constraint(const std::string &text) {
  std::vector<std::string> parts;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ':')) parts.push_back(token);
  auto num = [&text](const std::string &s) {
    double v = 0.0;
    if (!sdl::detail::parse_double_token(s, &v))
      throw std::invalid_argument("bad constraint number in '" + text + "'");
    return v;
  };
  if (parts.size() == 1 && parts[0] == "unbounded")
    return ConstraintSpec::unbounded();
  if (parts.size() == 1 && parts[0] == "nonneg")
    return ConstraintSpec::nonneg_orthant();
  if (parts.size() == 2 && parts[0] == "ball")
    return ConstraintSpec::frobenius_ball(num(parts[1]));
  if (parts.size() == 2 && parts[0] == "nonneg-ball")
    return ConstraintSpec::nonneg_frobenius_ball(num(parts[1]));
  if (parts.size() == 3 && parts[0] == "box")
    return ConstraintSpec::box(num(parts[1]), num(parts[2]));
  throw std::invalid_argument("unknown constraint spec '" + text + "'");
}

ScoreFunction parse_score(const std::string &name) {
  if (name == "exp") return score_exp();
  if (name == "softplus") return score_softplus();
  throw std::invalid_argument("unknown score function '" + name + "'");
}

Mode parse_mode(const std::string &name) {
  if (name == "filter") return Mode::Filter;
  if (name == "feature") return Mode::Feature;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config-file merging: flag > config[command][key] > config[key] > default
// ---------------------------------------------------------------------------

// Returns true when the slot now holds an explicit user value (from the
// command line or the config file) rather than the built-in default.
template <typename T>
bool merge_key(const CLI::App &sub, const json &root, const std::string &flag,
               T *slot) {
  const CLI::Option *opt = sub.get_option_no_throw("--" + flag);
  if (opt != nullptr && opt->count() > 0) return true;
  const json *node = nullptr;
  const std::string &cmd = sub.get_name();
  if (root.contains(cmd) && root.at(cmd).is_object() &&
      root.at(cmd).contains(flag))
    node = &root.at(cmd).at(flag);
  else if (root.contains(flag) && !root.at(flag).is_object())
    node = &root.at(flag);
  if (node == nullptr) return false;
  try {
    *slot = node->get<T>();
  } catch (const json::exception &) {
    throw std::invalid_argument("config: bad value for key '" + flag + "'");
  }
  return true;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string config_path;
  std::string data_path, labels_path, aux_path;
  std::string out_dir = "out";
  std::string solver = "bcd-filt";
  std::string mode;  // empty = implied by the solver
  std::string score = "exp";
  std::string dict_constraint = "nonneg-ball:1";
  std::string code_constraint = "nonneg";
  std::string beta_constraint = "ball:20";
  std::string aux_constraint = "unbounded";
  std::string lifted_constraint = "unbounded";
  std::size_t rank = 2;
  std::size_t kappa = 0;  // 0 = largest label in the labels file
  std::size_t iters = 100;
  std::size_t sub_iters = 5;
  double xi = 1.0;
  double nu = 0.0;
  double tau = 0.01;
  double l1 = 0.0;
  double radius_scale = 1.0;
  std::uint64_t seed = 1;
  int positive = 1;
  bool timings = false;
  bool tau_given = false;
};

void add_train_flags(CLI::App *sub, TrainOpts *o) {
  sub->add_option("--config", o->config_path, "JSON config file; flags win");
  sub->add_option("--data", o->data_path, "p x n data CSV");
  sub->add_option("--labels", o->labels_path, "labels CSV, one integer per line");
  sub->add_option("--aux", o->aux_path, "q x n auxiliary covariate CSV");
  sub->add_option("--out", o->out_dir, "output directory");
  sub->add_option("--solver", o->solver)
      ->check(CLI::IsMember({"conv-filt", "conv-feat", "bcd-filt", "bcd-feat"}));
  sub->add_option("--mode", o->mode)->check(CLI::IsMember({"filter", "feature"}));
  sub->add_option("--score", o->score)->check(CLI::IsMember({"exp", "softplus"}));
  sub->add_option("--rank", o->rank, "dictionary rank r");
  sub->add_option("--kappa", o->kappa, "number of non-reference classes");
  sub->add_option("--iters", o->iters, "outer iterations");
  sub->add_option("--sub-iters", o->sub_iters, "block substeps (BCD only)");
  sub->add_option("--xi", o->xi, "reconstruction weight");
  sub->add_option("--nu", o->nu, "classifier regularization weight");
  sub->add_option("--tau", o->tau, "stepsize (conv solvers only)");
  sub->add_option("--l1", o->l1, "L1 weight on the code block (BCD only)");
  sub->add_option("--radius-scale", o->radius_scale,
                  "trust-radius multiplier (BCD only)");
  sub->add_option("--seed", o->seed, "RNG seed");
  sub->add_option("--positive", o->positive, "positive class for the F-score");
  sub->add_option("--dict-constraint", o->dict_constraint);
  sub->add_option("--code-constraint", o->code_constraint);
  sub->add_option("--beta-constraint", o->beta_constraint);
  sub->add_option("--aux-constraint", o->aux_constraint);
  sub->add_option("--lifted-constraint", o->lifted_constraint);
  sub->add_flag("--timings", o->timings,
                "append a wall-clock column to report.csv");
}

void merge_train(const CLI::App &sub, const json &root, TrainOpts *o) {
  merge_key(sub, root, "data", &o->data_path);
  merge_key(sub, root, "labels", &o->labels_path);
  merge_key(sub, root, "aux", &o->aux_path);
  merge_key(sub, root, "out", &o->out_dir);
  merge_key(sub, root, "solver", &o->solver);
  merge_key(sub, root, "mode", &o->mode);
  merge_key(sub, root, "score", &o->score);
  merge_key(sub, root, "rank", &o->rank);
  merge_key(sub, root, "kappa", &o->kappa);
  merge_key(sub, root, "iters", &o->iters);
  merge_key(sub, root, "sub-iters", &o->sub_iters);
  merge_key(sub, root, "xi", &o->xi);
  merge_key(sub, root, "nu", &o->nu);
  o->tau_given = merge_key(sub, root, "tau", &o->tau);
  merge_key(sub, root, "l1", &o->l1);
  merge_key(sub, root, "radius-scale", &o->radius_scale);
  merge_key(sub, root, "seed", &o->seed);
  merge_key(sub, root, "positive", &o->positive);
  merge_key(sub, root, "dict-constraint", &o->dict_constraint);
  merge_key(sub, root, "code-constraint", &o->code_constraint);
  merge_key(sub, root, "beta-constraint", &o->beta_constraint);
  merge_key(sub, root, "aux-constraint", &o->aux_constraint);
  merge_key(sub, root, "lifted-constraint", &o->lifted_constraint);
  merge_key(sub, root, "timings", &o->timings);
}

std::size_t infer_kappa(const std::vector<int> &labels) {
  int m = 1;
  for (int v : labels) m = std::max(m, v);
  return static_cast<std::size_t>(m);
}

SdlProblem build_problem(const TrainOpts &o, DenseMatrix x_data,
                         DenseMatrix x_aux, std::vector<int> labels) {
  SdlProblem prob;
  prob.kappa = o.kappa > 0 ? o.kappa : infer_kappa(labels);
  prob.x_data = std::move(x_data);
  prob.x_aux = std::move(x_aux);
  prob.labels = std::move(labels);
  prob.rank = o.rank;
  prob.xi = o.xi;
  prob.nu = o.nu;
  prob.h = parse_score(o.score);
  prob.constraints.dict = parse_constraint(o.dict_constraint);
  prob.constraints.code = parse_constraint(o.code_constraint);
  prob.constraints.beta = parse_constraint(o.beta_constraint);
  prob.constraints.aux = parse_constraint(o.aux_constraint);
  prob.lifted_constraint = parse_constraint(o.lifted_constraint);
  prob.mode = solver_mode(o.solver);
  if (!o.mode.empty() && parse_mode(o.mode) != prob.mode)
    throw std::invalid_argument("--mode conflicts with --solver " + o.solver);
  prob.validate();
  return prob;
}

// Default stepsize for the convex solvers when --tau is not given: the
// midpoint of the admissible interval on well-conditioned instances, else
// the default 0.01 capped by a universal curvature bound.
double auto_tau(const SdlProblem &prob) {
  const ConditioningReport cond = conditioning(prob, 1.0);
  if (cond.condition_ok) return cond.tau_mid();
  const double l_safe =
      std::max(2.0 * prob.xi, 2.0 * prob.nu + static_cast<double>(prob.n()) *
                                                  cond.delta_plus);
  return std::min(0.01, 1.0 / l_safe);
}

int cmd_train(const TrainOpts &o) {
  if (o.data_path.empty() || o.labels_path.empty())
    throw std::invalid_argument("train: --data and --labels are required");
  DenseMatrix x_data = load_matrix_csv(o.data_path);
  std::vector<int> labels = load_labels_csv(o.labels_path);
  DenseMatrix x_aux = o.aux_path.empty() ? DenseMatrix(0, x_data.cols())
                                         : load_matrix_csv(o.aux_path);
  SdlProblem prob = build_problem(o, std::move(x_data), std::move(x_aux),
                                  std::move(labels));
  TrainSettings ts;
  ts.iters = o.iters;
  ts.sub_iters = o.sub_iters;
  ts.l1_code = o.l1;
  ts.radius_scale = o.radius_scale;
  ts.seed = o.seed;
  const bool convex = o.solver == "conv-filt" || o.solver == "conv-feat";
  ts.tau = o.tau_given || !convex ? o.tau : auto_tau(prob);

  const TrainOutcome fit = train_solver(prob, o.solver, ts);
  const EvalSummary summary = evaluate_state(prob, fit.factors, o.positive);

  ensure_outdir(o.out_dir);
  save_matrix_csv(join_path(o.out_dir, "w.csv"), fit.factors.w);
  save_matrix_csv(join_path(o.out_dir, "h.csv"), fit.factors.h);
  save_matrix_csv(join_path(o.out_dir, "beta.csv"), fit.factors.beta);
  if (prob.q() > 0)
    save_matrix_csv(join_path(o.out_dir, "gamma.csv"), fit.factors.gamma);
  fit.report.save_csv(join_path(o.out_dir, "report.csv"), o.timings);
  write_json_file(join_path(o.out_dir, "metrics.json"),
                  summary_to_json(summary, true));

  json manifest;
  manifest["command"] = "train";
  manifest["solver"] = o.solver;
  manifest["mode"] = prob.mode == Mode::Filter ? "filter" : "feature";
  manifest["score"] = o.score;
  manifest["seed"] = o.seed;
  manifest["dims"] = {{"p", prob.p()},
                      {"q", prob.q()},
                      {"n", prob.n()},
                      {"rank", prob.rank},
                      {"kappa", prob.kappa}};
  manifest["hyper"] = {{"xi", prob.xi},       {"nu", prob.nu},
                       {"tau", ts.tau},       {"l1", o.l1},
                       {"iters", o.iters},    {"sub_iters", o.sub_iters},
                       {"radius_scale", o.radius_scale}};
  manifest["constraints"] = {{"dict", o.dict_constraint},
                             {"code", o.code_constraint},
                             {"beta", o.beta_constraint},
                             {"aux", o.aux_constraint},
                             {"lifted", o.lifted_constraint}};
  json files = {{"w", "w.csv"}, {"h", "h.csv"}, {"beta", "beta.csv"}};
  if (prob.q() > 0) files["gamma"] = "gamma.csv";
  manifest["files"] = files;
  json report_columns = {"iter", "loss", "stationarity", "grad_mapping_norm"};
  if (o.timings) report_columns.push_back("elapsed_s");
  manifest["report"] = {{"columns", report_columns},
                        {"final_loss", fit.report.final_loss()},
                        {"termination", fit.report.termination},
                        {"rank_deficient", fit.report.rank_deficient}};
  write_json_file(join_path(o.out_dir, "model.json"), manifest);

  std::cout << "train: " << o.solver << " finished (" << fit.report.termination
            << ", loss " << format_double(fit.report.final_loss())
            << "), artifacts in " << o.out_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictOpts {
  std::string config_path;
  std::string model_path;
  std::string data_path, labels_path, aux_path;
  std::string out_dir = "out";
  int positive = 1;
};

int cmd_predict(const PredictOpts &o) {
  if (o.model_path.empty() || o.data_path.empty())
    throw std::invalid_argument("predict: --model and --data are required");
  const json manifest = load_json_file(o.model_path);
  const std::string model_dir = fs::path(o.model_path).parent_path().string();
  auto model_file = [&](const std::string &key) {
    return join_path(model_dir.empty() ? "." : model_dir,
                     manifest.at("files").at(key).get<std::string>());
  };

  SdlProblem prob;
  prob.x_data = load_matrix_csv(o.data_path);
  const std::size_t q = manifest.at("dims").at("q").get<std::size_t>();
  if (q > 0 && o.aux_path.empty())
    throw std::invalid_argument("predict: model expects --aux covariates");
  prob.x_aux = o.aux_path.empty() ? DenseMatrix(0, prob.x_data.cols())
                                  : load_matrix_csv(o.aux_path);
  prob.rank = manifest.at("dims").at("rank").get<std::size_t>();
  prob.kappa = manifest.at("dims").at("kappa").get<std::size_t>();
  prob.mode = parse_mode(manifest.at("mode").get<std::string>());
  prob.h = parse_score(manifest.at("score").get<std::string>());
  prob.constraints.code = parse_constraint(
      manifest.at("constraints").at("code").get<std::string>());
  if (prob.x_aux.rows() != q)
    throw std::invalid_argument("predict: aux row count does not match model");
  if (prob.x_data.rows() != manifest.at("dims").at("p").get<std::size_t>())
    throw std::invalid_argument("predict: data row count does not match model");

  FactorState state;
  state.w = load_matrix_csv(model_file("w"));
  state.beta = load_matrix_csv(model_file("beta"));
  state.gamma = q > 0 ? load_matrix_csv(model_file("gamma"))
                      : DenseMatrix(0, prob.kappa);
  state.h = DenseMatrix(prob.rank, prob.x_data.cols());  // unused by predict

  const std::size_t n = prob.x_data.cols();
  std::vector<int> pred(n);
  std::vector<std::vector<double>> probs(n);
  std::vector<double> x(prob.p()), xa(prob.q());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < prob.p(); ++a) x[a] = prob.x_data(a, s);
    for (std::size_t c = 0; c < prob.q(); ++c) xa[c] = prob.x_aux(c, s);
    Prediction pr = predict(prob, state, x, xa);
    pred[s] = pr.label;
    probs[s] = std::move(pr.probs);
  }

  ensure_outdir(o.out_dir);
  {
    const std::string path = join_path(o.out_dir, "predictions.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    for (std::size_t s = 0; s < n; ++s) {
      out << pred[s];
      for (double p : probs[s]) out << ',' << format_double(p);
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
  }
  if (!o.labels_path.empty()) {
    const std::vector<int> truth = load_labels_csv(o.labels_path);
    const EvalSummary s = classification_metrics(pred, truth, o.positive);
    write_json_file(join_path(o.out_dir, "metrics.json"),
                    summary_to_json(s, false));
  }
  std::cout << "predict: wrote " << n << " predictions to " << o.out_dir
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string config_path;
  std::string variant = "weak-filt";
  std::string out_dir = "out";
  std::size_t p = 8, n = 200, q = 0, rank = 2, kappa = 1;
  double sigma = 0.1, sigma_aux = 0.1, beta_scale = 1.0, label_norm = 14.0;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateOpts &o) {
  ensure_outdir(o.out_dir);
  SampledData data;
  json manifest;
  manifest["command"] = "simulate";
  manifest["variant"] = o.variant;
  manifest["seed"] = o.seed;
  if (o.variant == "weak-filt" || o.variant == "weak-feat") {
    const GenerativeVariant v = o.variant == "weak-filt"
                                    ? GenerativeVariant::WeakFilter
                                    : GenerativeVariant::WeakFeature;
    const GenerativeParams gp =
        make_weak_instance(v, o.p, o.n, o.q, o.rank, o.kappa, o.sigma,
                           o.sigma_aux, o.seed, o.beta_scale);
    data = v == GenerativeVariant::WeakFilter
               ? sample_weak_filter(gp, Rng::derive_seed(o.seed, 1))
               : sample_weak_feature(gp, Rng::derive_seed(o.seed, 1));
    manifest["params"] = {{"p", o.p},         {"n", o.n},
                          {"q", o.q},         {"rank", o.rank},
                          {"kappa", o.kappa}, {"sigma", o.sigma},
                          {"sigma_aux", o.sigma_aux},
                          {"beta_scale", o.beta_scale}};
  } else if (o.variant == "strong-filt") {
    const GenerativeParams gp =
        make_strong_instance(o.p, o.n, o.q, o.rank, o.kappa, o.sigma,
                             o.sigma_aux, o.seed, o.beta_scale);
    data = sample_strong_filter(gp, Rng::derive_seed(o.seed, 1));
    manifest["params"] = {{"p", o.p},         {"n", o.n},
                          {"q", o.q},         {"rank", o.rank},
                          {"kappa", o.kappa}, {"sigma", o.sigma},
                          {"sigma_aux", o.sigma_aux},
                          {"beta_scale", o.beta_scale}};
  } else if (o.variant == "semi") {
    SemiSyntheticSpec spec = bundled_semisynthetic_spec(o.label_norm);
    spec.n = o.n;
    spec.sigma = o.sigma;
    SemiSyntheticData semi = make_semisynthetic(spec, o.seed);
    data.x_data = std::move(semi.x_data);
    data.labels = std::move(semi.labels);
    data.x_aux = DenseMatrix(0, o.n);
    manifest["params"] = {{"p", spec.p},
                          {"n", o.n},
                          {"r_bar", spec.r_bar},
                          {"sigma", o.sigma},
                          {"label_norm", o.label_norm}};
  } else {
    throw std::invalid_argument("unknown variant '" + o.variant + "'");
  }
  save_matrix_csv(join_path(o.out_dir, "data.csv"), data.x_data);
  save_labels_csv(join_path(o.out_dir, "labels.csv"), data.labels);
  json files = {{"data", "data.csv"}, {"labels", "labels.csv"}};
  if (data.x_aux.rows() > 0) {
    save_matrix_csv(join_path(o.out_dir, "aux.csv"), data.x_aux);
    files["aux"] = "aux.csv";
  }
  manifest["files"] = files;
  write_json_file(join_path(o.out_dir, "sim.json"), manifest);
  std::cout << "simulate: " << o.variant << " wrote " << data.x_data.rows()
            << " x " << data.x_data.cols() << " dataset to " << o.out_dir
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// bench-pareto
// ---------------------------------------------------------------------------

struct ParetoOpts {
  std::string config_path;
  std::string data_path, labels_path;
  std::string out_dir = "out";
  std::vector<std::string> methods = {"sdl-filt", "sdl-feat", "lr", "nmf-lr"};
  std::vector<double> xi_grid = {0.1, 1.0, 5.0, 10.0};
  std::size_t replicates = 5;
  std::size_t rank = 2;
  std::size_t iters = 40;
  std::size_t sub_iters = 3;
  std::size_t lr_iters = 300;
  std::size_t nmf_iters = 60;
  std::size_t n = 500;       // bundled dataset size when no --data given
  double sigma = 0.5;        // bundled dataset noise level
  double nu = 0.0;
  double beta_radius = 20.0;
  std::uint64_t seed = 1;
  int positive = 1;
};

int cmd_bench_pareto(const ParetoOpts &o) {
  DenseMatrix x_data;
  std::vector<int> labels;
  std::string dataset;
  if (o.data_path.empty() != o.labels_path.empty())
    throw std::invalid_argument(
        "bench-pareto: --data and --labels must be given together");
  if (o.data_path.empty()) {
    SemiSyntheticSpec spec = bundled_semisynthetic_spec();
    spec.n = o.n;
    spec.sigma = o.sigma;
    SemiSyntheticData semi =
        make_semisynthetic(spec, Rng::derive_seed(o.seed, 9999));
    x_data = std::move(semi.x_data);
    labels = std::move(semi.labels);
    dataset = "bundled-semisynthetic";
  } else {
    x_data = load_matrix_csv(o.data_path);
    labels = load_labels_csv(o.labels_path);
    dataset = o.data_path;
  }

  ParetoConfig cfg;
  cfg.methods = o.methods;
  cfg.xi_grid = o.xi_grid;
  cfg.replicates = o.replicates;
  cfg.seed = o.seed;
  cfg.rank = o.rank;
  cfg.nu = o.nu;
  cfg.iters = o.iters;
  cfg.sub_iters = o.sub_iters;
  cfg.beta_radius = o.beta_radius;
  cfg.lr_iters = o.lr_iters;
  cfg.nmf_iters = o.nmf_iters;
  cfg.positive = o.positive;
  const std::vector<ParetoRow> rows = run_pareto(x_data, labels, cfg);

  ensure_outdir(o.out_dir);
  const std::string csv_path = join_path(o.out_dir, "pareto.csv");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out)
      throw std::invalid_argument("cannot open for writing: " + csv_path);
    for (const ParetoRow &row : rows) {
      const auto it =
          std::find(cfg.methods.begin(), cfg.methods.end(), row.method);
      out << (it - cfg.methods.begin()) << ',' << format_double(row.xi) << ','
          << format_double(row.recon_rel) << ','
          << format_double(row.accuracy) << ',' << format_double(row.f_score)
          << ',' << row.seed << ',' << format_double(row.recon_rel_sd) << ','
          << format_double(row.accuracy_sd) << ','
          << format_double(row.f_score_sd) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + csv_path);
  }
  json sidecar;
  sidecar["command"] = "bench-pareto";
  sidecar["dataset"] = dataset;
  sidecar["methods"] = o.methods;
  sidecar["columns"] = {"method_id", "xi",   "recon_rel",
                        "accuracy",  "f_score", "seed",
                        "recon_rel_sd", "accuracy_sd", "f_score_sd"};
  sidecar["replicates"] = o.replicates;
  sidecar["seed"] = o.seed;
  sidecar["xi-grid"] = o.xi_grid;
  write_json_file(join_path(o.out_dir, "pareto.json"), sidecar);
  std::cout << "bench-pareto: wrote " << rows.size() << " rows to " << csv_path
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// bench-curves
// ---------------------------------------------------------------------------

struct CurvesOpts {
  TrainOpts train;  // shared hyperparameters; solver field unused
  std::vector<std::string> solvers = {"conv-filt", "conv-feat", "bcd-filt",
                                      "bcd-feat"};
};

int cmd_bench_curves(const CurvesOpts &o) {
  DenseMatrix x_data;
  DenseMatrix x_aux;
  std::vector<int> labels;
  if (o.train.data_path.empty()) {
    // Small bundled weak-filter sample so the command works out of the box.
    const GenerativeParams gp = make_weak_instance(
        GenerativeVariant::WeakFilter, 8, 120, 0, 2, 1, 0.1, 0.1,
        Rng::derive_seed(o.train.seed, 555));
    SampledData data = sample_weak_filter(gp, Rng::derive_seed(o.train.seed, 556));
    x_data = std::move(data.x_data);
    x_aux = std::move(data.x_aux);
    labels = std::move(data.labels);
  } else {
    if (o.train.labels_path.empty())
      throw std::invalid_argument("bench-curves: --labels required with --data");
    x_data = load_matrix_csv(o.train.data_path);
    labels = load_labels_csv(o.train.labels_path);
    x_aux = o.train.aux_path.empty() ? DenseMatrix(0, x_data.cols())
                                     : load_matrix_csv(o.train.aux_path);
  }

  ensure_outdir(o.train.out_dir);
  const std::string csv_path = join_path(o.train.out_dir, "curves.csv");
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + csv_path);
  for (std::size_t si = 0; si < o.solvers.size(); ++si) {
    const std::string &solver = o.solvers[si];
    TrainOpts to = o.train;
    to.solver = solver;
    to.mode.clear();
    SdlProblem prob = build_problem(to, x_data, x_aux, labels);
    TrainSettings ts;
    ts.iters = to.iters;
    ts.sub_iters = to.sub_iters;
    ts.l1_code = to.l1;
    ts.seed = to.seed;
    const bool convex = solver == "conv-filt" || solver == "conv-feat";
    ts.tau = to.tau_given || !convex ? to.tau : auto_tau(prob);
    const TrainOutcome fit = train_solver(prob, solver, ts);
    for (const IterationRecord &rec : fit.report.records) {
      out << si << ',' << rec.iter << ',' << format_double(rec.loss) << ','
          << format_double(rec.stationarity) << ','
          << format_double(rec.grad_mapping_norm);
      if (to.timings) out << ',' << format_double(rec.elapsed_s);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + csv_path);
  out.close();

  json sidecar;
  sidecar["command"] = "bench-curves";
  sidecar["solvers"] = o.solvers;
  json columns = {"solver_id", "iter", "loss", "stationarity",
                  "grad_mapping_norm"};
  if (o.train.timings) columns.push_back("elapsed_s");
  sidecar["columns"] = columns;
  sidecar["seed"] = o.train.seed;
  write_json_file(join_path(o.train.out_dir, "curves.json"), sidecar);
  std::cout << "bench-curves: wrote " << o.solvers.size() << " traces to "
            << csv_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// consistency
// ---------------------------------------------------------------------------

struct ConsistencyOpts {
  std::string config_path;
  std::string variant = "weak-filt";
  std::string out_dir = "out";
  std::vector<std::size_t> n_grid = {200, 800, 3200};
  std::size_t replicates = 5;
  std::size_t p = 12, q = 0, rank = 2, kappa = 1;
  std::size_t iters = 0;  // 0 = logarithmic default
  double sigma = 0.05, sigma_aux = 0.1, nu = 0.0;
  std::uint64_t seed = 1;
};

int cmd_consistency(const ConsistencyOpts &o) {
  ConsistencyConfig cfg;
  if (o.variant == "weak-filt")
    cfg.variant = GenerativeVariant::WeakFilter;
  else if (o.variant == "weak-feat")
    cfg.variant = GenerativeVariant::WeakFeature;
  else
    throw std::invalid_argument("consistency: unknown variant '" + o.variant +
                                "'");
  cfg.n_grid = o.n_grid;
  cfg.replicates = o.replicates;
  cfg.seed = o.seed;
  cfg.p = o.p;
  cfg.q = o.q;
  cfg.r = o.rank;
  cfg.kappa = o.kappa;
  cfg.sigma = o.sigma;
  cfg.sigma_aux = o.sigma_aux;
  cfg.nu = o.nu;
  cfg.t_iters = o.iters;
  const ConsistencyResult res = run_weak_consistency(cfg);

  ensure_outdir(o.out_dir);
  const std::string csv_path = join_path(o.out_dir, "consistency.csv");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out)
      throw std::invalid_argument("cannot open for writing: " + csv_path);
    for (const ConsistencyRow &row : res.rows)
      out << row.n << ',' << format_double(row.err) << ','
          << format_double(row.err_sd) << ',' << format_double(row.err_recon)
          << ',' << format_double(row.err_stacked) << '\n';
    if (!out) throw std::runtime_error("write failed for " + csv_path);
  }
  json sidecar;
  sidecar["command"] = "consistency";
  sidecar["variant"] = o.variant;
  sidecar["columns"] = {"n", "err", "err_sd", "err_recon", "err_stacked"};
  sidecar["slope"] = res.slope;
  sidecar["replicates"] = o.replicates;
  sidecar["seed"] = o.seed;
  sidecar["sigma"] = o.sigma;
  write_json_file(join_path(o.out_dir, "consistency.json"), sidecar);
  std::cout << "consistency: slope " << format_double(res.slope) << ", rows in "
            << csv_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// check-conditioning
// ---------------------------------------------------------------------------

struct ConditioningOpts {
  std::string config_path;
  std::string data_path, labels_path, aux_path;
  std::string out_dir;  // empty = stdout only
  std::string mode = "filter";
  std::string score = "exp";
  std::size_t kappa = 1;
  double xi = 1.0, nu = 0.0, m_bound = 1.0;
};

int cmd_check_conditioning(const ConditioningOpts &o) {
  if (o.data_path.empty())
    throw std::invalid_argument("check-conditioning: --data is required");
  SdlProblem prob;
  prob.x_data = load_matrix_csv(o.data_path);
  prob.x_aux = o.aux_path.empty() ? DenseMatrix(0, prob.x_data.cols())
                                  : load_matrix_csv(o.aux_path);
  prob.labels = o.labels_path.empty()
                    ? std::vector<int>(prob.x_data.cols(), 0)
                    : load_labels_csv(o.labels_path);
  prob.kappa = o.kappa;
  prob.rank = 1;
  prob.xi = o.xi;
  prob.nu = o.nu;
  prob.mode = parse_mode(o.mode);
  prob.h = parse_score(o.score);
  prob.validate();
  const ConditioningReport rep = conditioning(prob, o.m_bound);

  json j;
  j["mode"] = o.mode;
  j["xi"] = o.xi;
  j["nu"] = o.nu;
  j["m_bound"] = o.m_bound;
  j["delta_minus"] = rep.delta_minus;
  j["delta_plus"] = rep.delta_plus;
  j["lambda_max_aux"] = rep.lambda_max_aux;
  j["alpha_minus"] = rep.alpha_minus;
  j["alpha_plus"] = rep.alpha_plus;
  j["gamma_max"] = rep.gamma_max;
  j["mu_star"] = rep.mu_star;
  j["l_star"] = rep.l_star;
  j["mu"] = rep.mu;
  j["l"] = rep.l;
  j["ratio"] = rep.ratio;
  j["condition_ok"] = rep.condition_ok;
  j["tau_lo"] = rep.tau_lo;
  j["tau_hi"] = rep.tau_hi;
  j["tau_mid"] = rep.tau_mid();
  j["rho_at_tau_mid"] = rep.rho(rep.tau_mid());
  j["feature_nu_lo"] = rep.feature_nu_lo;
  j["feature_nu_hi"] = rep.feature_nu_hi;
  j["feature_nu_in_band"] = rep.feature_nu_in_band;
  std::cout << j.dump(2) << '\n';
  if (!o.out_dir.empty()) {
    ensure_outdir(o.out_dir);
    write_json_file(join_path(o.out_dir, "conditioning.json"), j);
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char **argv) {
  CLI::App app{"supervised dictionary learning benchmark tool"};
  app.require_subcommand(1);

  TrainOpts train_opts;
  CLI::App *train = app.add_subcommand("train", "fit a model and save it");
  add_train_flags(train, &train_opts);

  PredictOpts predict_opts;
  CLI::App *predict =
      app.add_subcommand("predict", "label new samples with a saved model");
  predict->add_option("--config", predict_opts.config_path);
  predict->add_option("--model", predict_opts.model_path, "path to model.json");
  predict->add_option("--data", predict_opts.data_path);
  predict->add_option("--labels", predict_opts.labels_path,
                      "optional truth labels for metrics.json");
  predict->add_option("--aux", predict_opts.aux_path);
  predict->add_option("--out", predict_opts.out_dir);
  predict->add_option("--positive", predict_opts.positive);

  SimulateOpts sim_opts;
  CLI::App *simulate =
      app.add_subcommand("simulate", "draw a dataset from a generative model");
  simulate->add_option("--config", sim_opts.config_path);
  simulate->add_option("--variant", sim_opts.variant)
      ->check(CLI::IsMember({"weak-filt", "weak-feat", "strong-filt", "semi"}));
  simulate->add_option("--out", sim_opts.out_dir);
  simulate->add_option("--p", sim_opts.p);
  simulate->add_option("--n", sim_opts.n);
  simulate->add_option("--q", sim_opts.q);
  simulate->add_option("--rank", sim_opts.rank);
  simulate->add_option("--kappa", sim_opts.kappa);
  simulate->add_option("--sigma", sim_opts.sigma);
  simulate->add_option("--sigma-aux", sim_opts.sigma_aux);
  simulate->add_option("--beta-scale", sim_opts.beta_scale);
  simulate->add_option("--label-norm", sim_opts.label_norm);
  simulate->add_option("--seed", sim_opts.seed);

  ParetoOpts pareto_opts;
  CLI::App *pareto = app.add_subcommand(
      "bench-pareto", "sweep (method, xi) and tabulate the Pareto points");
  pareto->add_option("--config", pareto_opts.config_path);
  pareto->add_option("--data", pareto_opts.data_path);
  pareto->add_option("--labels", pareto_opts.labels_path);
  pareto->add_option("--out", pareto_opts.out_dir);
  pareto->add_option("--methods", pareto_opts.methods)->delimiter(',');
  pareto->add_option("--xi-grid", pareto_opts.xi_grid)->delimiter(',');
  pareto->add_option("--replicates", pareto_opts.replicates);
  pareto->add_option("--rank", pareto_opts.rank);
  pareto->add_option("--iters", pareto_opts.iters);
  pareto->add_option("--sub-iters", pareto_opts.sub_iters);
  pareto->add_option("--lr-iters", pareto_opts.lr_iters);
  pareto->add_option("--nmf-iters", pareto_opts.nmf_iters);
  pareto->add_option("--n", pareto_opts.n);
  pareto->add_option("--sigma", pareto_opts.sigma);
  pareto->add_option("--nu", pareto_opts.nu);
  pareto->add_option("--beta-radius", pareto_opts.beta_radius);
  pareto->add_option("--seed", pareto_opts.seed);
  pareto->add_option("--positive", pareto_opts.positive);

  CurvesOpts curves_opts;
  CLI::App *curves = app.add_subcommand(
      "bench-curves", "per-iteration traces for several solvers on one dataset");
  add_train_flags(curves, &curves_opts.train);
  curves->add_option("--solvers", curves_opts.solvers)->delimiter(',');

  ConsistencyOpts cons_opts;
  CLI::App *consistency = app.add_subcommand(
      "consistency", "weak-model estimation error against sample size");
  consistency->add_option("--config", cons_opts.config_path);
  consistency->add_option("--variant", cons_opts.variant)
      ->check(CLI::IsMember({"weak-filt", "weak-feat"}));
  consistency->add_option("--out", cons_opts.out_dir);
  consistency->add_option("--n-grid", cons_opts.n_grid)->delimiter(',');
  consistency->add_option("--replicates", cons_opts.replicates);
  consistency->add_option("--p", cons_opts.p);
  consistency->add_option("--q", cons_opts.q);
  consistency->add_option("--rank", cons_opts.rank);
  consistency->add_option("--kappa", cons_opts.kappa);
  consistency->add_option("--iters", cons_opts.iters);
  consistency->add_option("--sigma", cons_opts.sigma);
  consistency->add_option("--sigma-aux", cons_opts.sigma_aux);
  consistency->add_option("--nu", cons_opts.nu);
  consistency->add_option("--seed", cons_opts.seed);

  ConditioningOpts cond_opts;
  CLI::App *cond = app.add_subcommand(
      "check-conditioning", "print convexity/smoothness diagnostics as JSON");
  cond->add_option("--config", cond_opts.config_path);
  cond->add_option("--data", cond_opts.data_path);
  cond->add_option("--labels", cond_opts.labels_path);
  cond->add_option("--aux", cond_opts.aux_path);
  cond->add_option("--out", cond_opts.out_dir,
                   "also write conditioning.json here");
  cond->add_option("--mode", cond_opts.mode)
      ->check(CLI::IsMember({"filter", "feature"}));
  cond->add_option("--score", cond_opts.score)
      ->check(CLI::IsMember({"exp", "softplus"}));
  cond->add_option("--kappa", cond_opts.kappa);
  cond->add_option("--xi", cond_opts.xi);
  cond->add_option("--nu", cond_opts.nu);
  cond->add_option("--m-bound", cond_opts.m_bound);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    auto config_for = [](const std::string &path) {
      return path.empty() ? json::object() : load_json_file(path);
    };
    if (train->parsed()) {
      const json cfg = config_for(train_opts.config_path);
      merge_train(*train, cfg, &train_opts);
      return cmd_train(train_opts);
    }
    if (predict->parsed()) {
      const json cfg = config_for(predict_opts.config_path);
      merge_key(*predict, cfg, "model", &predict_opts.model_path);
      merge_key(*predict, cfg, "data", &predict_opts.data_path);
      merge_key(*predict, cfg, "labels", &predict_opts.labels_path);
      merge_key(*predict, cfg, "aux", &predict_opts.aux_path);
      merge_key(*predict, cfg, "out", &predict_opts.out_dir);
      merge_key(*predict, cfg, "positive", &predict_opts.positive);
      return cmd_predict(predict_opts);
    }
    if (simulate->parsed()) {
      const json cfg = config_for(sim_opts.config_path);
      merge_key(*simulate, cfg, "variant", &sim_opts.variant);
      merge_key(*simulate, cfg, "out", &sim_opts.out_dir);
      merge_key(*simulate, cfg, "p", &sim_opts.p);
      merge_key(*simulate, cfg, "n", &sim_opts.n);
      merge_key(*simulate, cfg, "q", &sim_opts.q);
      merge_key(*simulate, cfg, "rank", &sim_opts.rank);
      merge_key(*simulate, cfg, "kappa", &sim_opts.kappa);
      merge_key(*simulate, cfg, "sigma", &sim_opts.sigma);
      merge_key(*simulate, cfg, "sigma-aux", &sim_opts.sigma_aux);
      merge_key(*simulate, cfg, "beta-scale", &sim_opts.beta_scale);
      merge_key(*simulate, cfg, "label-norm", &sim_opts.label_norm);
      merge_key(*simulate, cfg, "seed", &sim_opts.seed);
      return cmd_simulate(sim_opts);
    }
    if (pareto->parsed()) {
      const json cfg = config_for(pareto_opts.config_path);
      merge_key(*pareto, cfg, "data", &pareto_opts.data_path);
      merge_key(*pareto, cfg, "labels", &pareto_opts.labels_path);
      merge_key(*pareto, cfg, "out", &pareto_opts.out_dir);
      merge_key(*pareto, cfg, "methods", &pareto_opts.methods);
      merge_key(*pareto, cfg, "xi-grid", &pareto_opts.xi_grid);
      merge_key(*pareto, cfg, "replicates", &pareto_opts.replicates);
      merge_key(*pareto, cfg, "rank", &pareto_opts.rank);
      merge_key(*pareto, cfg, "iters", &pareto_opts.iters);
      merge_key(*pareto, cfg, "sub-iters", &pareto_opts.sub_iters);
      merge_key(*pareto, cfg, "lr-iters", &pareto_opts.lr_iters);
      merge_key(*pareto, cfg, "nmf-iters", &pareto_opts.nmf_iters);
      merge_key(*pareto, cfg, "n", &pareto_opts.n);
      merge_key(*pareto, cfg, "sigma", &pareto_opts.sigma);
      merge_key(*pareto, cfg, "nu", &pareto_opts.nu);
      merge_key(*pareto, cfg, "beta-radius", &pareto_opts.beta_radius);
      merge_key(*pareto, cfg, "seed", &pareto_opts.seed);
      merge_key(*pareto, cfg, "positive", &pareto_opts.positive);
      return cmd_bench_pareto(pareto_opts);
    }
    if (curves->parsed()) {
      const json cfg = config_for(curves_opts.train.config_path);
      merge_train(*curves, cfg, &curves_opts.train);
      merge_key(*curves, cfg, "solvers", &curves_opts.solvers);
      return cmd_bench_curves(curves_opts);
    }
    if (consistency->parsed()) {
      const json cfg = config_for(cons_opts.config_path);
      merge_key(*consistency, cfg, "variant", &cons_opts.variant);
      merge_key(*consistency, cfg, "out", &cons_opts.out_dir);
      merge_key(*consistency, cfg, "n-grid", &cons_opts.n_grid);
      merge_key(*consistency, cfg, "replicates", &cons_opts.replicates);
      merge_key(*consistency, cfg, "p", &cons_opts.p);
      merge_key(*consistency, cfg, "q", &cons_opts.q);
      merge_key(*consistency, cfg, "rank", &cons_opts.rank);
      merge_key(*consistency, cfg, "kappa", &cons_opts.kappa);
      merge_key(*consistency, cfg, "iters", &cons_opts.iters);
      merge_key(*consistency, cfg, "sigma", &cons_opts.sigma);
      merge_key(*consistency, cfg, "sigma-aux", &cons_opts.sigma_aux);
      merge_key(*consistency, cfg, "nu", &cons_opts.nu);
      merge_key(*consistency, cfg, "seed", &cons_opts.seed);
      return cmd_consistency(cons_opts);
    }
    if (cond->parsed()) {
      const json cfg = config_for(cond_opts.config_path);
      merge_key(*cond, cfg, "data", &cond_opts.data_path);
      merge_key(*cond, cfg, "labels", &cond_opts.labels_path);
      merge_key(*cond, cfg, "aux", &cond_opts.aux_path);
      merge_key(*cond, cfg, "out", &cond_opts.out_dir);
      merge_key(*cond, cfg, "mode", &cond_opts.mode);
      merge_key(*cond, cfg, "score", &cond_opts.score);
      merge_key(*cond, cfg, "kappa", &cond_opts.kappa);
      merge_key(*cond, cfg, "xi", &cond_opts.xi);
      merge_key(*cond, cfg, "nu", &cond_opts.nu);
      merge_key(*cond, cfg, "m-bound", &cond_opts.m_bound);
      return cmd_check_conditioning(cond_opts);
    }
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
