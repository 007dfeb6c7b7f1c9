#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlreg/error.hpp"
#include "nlreg/io.hpp"
#include "nlreg/kernel.hpp"
#include "nlreg/metrics.hpp"
#include "nlreg/nrsfm.hpp"
#include "nlreg/parallel.hpp"
#include "nlreg/pipeline.hpp"
#include "nlreg/robust_kpca.hpp"
#include "nlreg/synth.hpp"
#include "nlreg/tnh.hpp"

namespace nlreg::cli {

namespace {

using json = nlohmann::ordered_json;

struct Penalty {
  double rho0 = 1.0;
  double rho_max = 1e4;
  double rho_scale = 10.0;
  int max_outer = 1000;
  int max_inner = 50;
  int lm_iters = 100;
};

struct KernelChoice {
  std::string family = "rbf";
  std::string width = "dmed";
};

struct Options {
  std::string data, gt, test, out;
  double tau = 0.0;
  double tnh_tau = 1e-3;
  double missing_prob = 0.0;
  std::uint64_t seed = 0;
  Penalty penalty;
  KernelChoice kernel;
  int rounds = 5;
  int rank = 0;
  int tnh_iters = 20000;
  bool gt_cameras = false;
  std::string problem = "completion";
  // synth
  std::string kind;
  int n_per_class = 100;
  int dim = 12;
  int classes = 3;
  double noise = 0.0;
  int frames = 50;
  int points = 30;
  double amplitude = 0.6;
  int threads = 0;
};

void add_penalty(CLI::App* app, Penalty& p) {
  app->add_option("--rho0", p.rho0, "Initial penalty weight")->check(CLI::PositiveNumber);
  app->add_option("--rho-max", p.rho_max, "Final penalty weight")->check(CLI::PositiveNumber);
  app->add_option("--rho-scale", p.rho_scale, "Penalty multiplier between stages (> 1)");
  app->add_option("--max-outer", p.max_outer, "Maximum number of penalty stages")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-inner", p.max_inner, "Maximum C/S alternations per stage")
      ->check(CLI::PositiveNumber);
  app->add_option("--lm-iters", p.lm_iters, "Levenberg-Marquardt iteration cap per S update")
      ->check(CLI::PositiveNumber);
}

void add_kernel(CLI::App* app, KernelChoice& k) {
  app->add_option("--kernel", k.family, "Kernel family")
      ->check(CLI::IsMember({"rbf", "linear"}));
  app->add_option("--width", k.width, "RBF width: dmax, dmed, or an explicit gamma value");
}

PenaltySchedule schedule_of(const Penalty& p) {
  PenaltySchedule s{p.rho0, p.rho_max, p.rho_scale};
  s.validate();
  return s;
}

SolveOptions solve_options_of(const Penalty& p) {
  SolveOptions o;
  o.max_outer = p.max_outer;
  o.max_inner = p.max_inner;
  o.lm.max_iters = p.lm_iters;
  return o;
}

KernelModel resolve_kernel(const KernelChoice& choice, const Eigen::MatrixXd& samples) {
  if (choice.family == "linear") return KernelModel::linear();
  if (choice.width == "dmax") return KernelModel::rbf(select_width(samples, WidthCriterion::DMax));
  if (choice.width == "dmed") return KernelModel::rbf(select_width(samples, WidthCriterion::DMed));
  double gamma = 0.0;
  const char* first = choice.width.data();
  const char* last = first + choice.width.size();
  const auto [ptr, ec] = std::from_chars(first, last, gamma);
  if (ec != std::errc() || ptr != last || !(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidInputError("--width must be dmax, dmed or a positive gamma, got '" +
                            choice.width + "'");
  return KernelModel::rbf(gamma);
}

json kernel_json(const KernelModel& k) {
  json j;
  j["family"] = k.family == KernelFamily::Rbf ? "rbf" : "linear";
  if (k.family == KernelFamily::Rbf) j["gamma"] = k.gamma;
  return j;
}

json config_json(const CLI::App& sub) {
  json cfg;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto res = opt->reduced_results();
      if (opt->get_type_size() == 0)
        cfg[name] = true;
      else
        cfg[name] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (opt->get_type_size() == 0) {
      cfg[name] = false;
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

json solve_report_json(const SolveReport& rep) {
  json j;
  j["stages"] = json::array();
  for (const auto& s : rep.stages)
    j["stages"].push_back({{"rho", s.rho},
                           {"inner_iterations", s.inner_iterations},
                           {"constraint_residual", s.constraint_residual},
                           {"energy", s.energy}});
  j["energy_trace"] = json::array();
  for (const auto& e : rep.energy_trace)
    j["energy_trace"].push_back({{"stage", e.stage},
                                 {"inner", e.inner},
                                 {"rho", e.rho},
                                 {"after_c_step", e.after_c_step},
                                 {"after_s_step", e.after_s_step}});
  j["stage_energy_nonincreasing"] = rep.stage_energy_nonincreasing();
  j["effective_rank"] = rep.C.effective_rank;
  j["trace_norm"] = rep.C.trace_norm();
  return j;
}

json rms_json(const CompletionRms& r) { return {{"deleted", r.deleted}, {"all", r.all}}; }

// Matrix files mark unobserved cells with nan.
MaskedObservations observations_from(const Eigen::MatrixXd& M) {
  MaskedObservations W;
  W.mask = M.array().isFinite();
  W.values = W.mask.select(M, 0.0);
  return W;
}

// Extra Bernoulli deletions on top of whatever the file already hides.
MaskMatrix delete_more(MaskedObservations& W, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidInputError("--missing-prob must be in [0, 1)");
  const MaskMatrix drop = random_deletion_mask(W.values.rows(), W.values.cols(), p, seed);
  const MaskMatrix removed = drop && W.mask;
  W.mask = W.mask && !drop;
  return removed;
}

struct CompletionInput {
  MaskedObservations W;
  std::optional<Eigen::MatrixXd> truth;
  MaskMatrix deleted;  // entries hidden from the solver for which truth is known
};

CompletionInput completion_input(const Options& o) {
  if (o.data.empty()) throw InvalidInputError("--data is required");
  const Eigen::MatrixXd M = load_matrix(o.data);
  CompletionInput in;
  in.W = observations_from(M);
  const bool fully_observed = in.W.mask.all();
  delete_more(in.W, o.missing_prob, o.seed);
  if (!o.gt.empty()) {
    in.truth = load_matrix(o.gt);
    if (in.truth->rows() != M.rows() || in.truth->cols() != M.cols())
      throw ShapeMismatchError("--gt and --data differ in shape");
  } else if (fully_observed) {
    in.truth = M;
  }
  if (in.truth) in.deleted = !in.W.mask && in.truth->array().isFinite();
  in.W.validate();
  return in;
}

json data_json(const CompletionInput& in) {
  return {{"rows", in.W.values.rows()},
          {"cols", in.W.values.cols()},
          {"observed", in.W.observed_count()},
          {"deleted_with_truth", in.truth ? in.deleted.count() : 0}};
}

json run_complete(const Options& o) {
  const CompletionInput in = completion_input(o);
  const CompletionLoss loss(in.W);
  const Eigen::MatrixXd S0 = mean_impute(in.W);
  const KernelModel k = resolve_kernel(o.kernel, S0);
  const SolveReport rep =
      regularized_solve(loss, S0, k, o.tau, schedule_of(o.penalty), solve_options_of(o.penalty));

  json r;
  r["data"] = data_json(in);
  r["kernel"] = kernel_json(k);
  r["solve"] = solve_report_json(rep);
  json metrics = json::object();
  if (in.truth && in.deleted.count() > 0) {
    metrics["completion_rms"] = rms_json(completion_rms(rep.S, *in.truth, in.deleted));
    metrics["mean_imputation_rms"] = rms_json(completion_rms(S0, *in.truth, in.deleted));
  }
  r["metrics"] = metrics;
  r["timing"] = {{"wall_seconds", rep.wall_seconds}};
  if (!o.out.empty()) save_matrix(rep.S, o.out);
  return r;
}

std::optional<Eigen::MatrixXd> nrsfm_truth(const Options& o, const MocapData& m) {
  if (!o.gt.empty()) {
    Eigen::MatrixXd gt = load_matrix(o.gt);
    if (gt.rows() != 3 * m.frames() || gt.cols() != m.points())
      throw ShapeMismatchError("--gt must be a 3F x N shape sequence");
    return gt;
  }
  return m.ground_truth;
}

MocapData mocap_input(const Options& o) {
  if (o.data.empty()) throw InvalidInputError("--data is required");
  MocapData m = load_mocap(o.data);
  if (o.missing_prob > 0.0) {
    if (!(o.missing_prob < 1.0)) throw InvalidInputError("--missing-prob must be in [0, 1)");
    const MaskMatrix drop = random_deletion_mask(m.frames(), m.points(), o.missing_prob, o.seed);
    for (Eigen::Index f = 0; f < m.frames(); ++f)
      for (Eigen::Index j = 0; j < m.points(); ++j)
        if (drop(f, j)) m.W.mask(2 * f, j) = m.W.mask(2 * f + 1, j) = false;
  }
  return m;
}

std::optional<CameraSequence> chosen_cameras(const Options& o, const MocapData& m) {
  if (!o.gt_cameras) return std::nullopt;
  if (!m.cameras) throw InvalidInputError("--gt-cameras needs a cameras section in --data");
  return m.cameras;
}

json run_tnh(const Options& o) {
  TnhOptions topts;
  topts.max_iters = o.tnh_iters;
  json r;
  r["problem"] = o.problem;
  TnhResult res;
  json metrics = json::object();
  if (o.problem == "completion") {
    const CompletionInput in = completion_input(o);
    res = tnh_solve(in.W, std::nullopt, o.tau, topts);
    r["data"] = data_json(in);
    if (in.truth && in.deleted.count() > 0) {
      metrics["completion_rms"] = rms_json(completion_rms(res.X, *in.truth, in.deleted));
      metrics["mean_imputation_rms"] =
          rms_json(completion_rms(mean_impute(in.W), *in.truth, in.deleted));
    }
  } else {
    const MocapData m = mocap_input(o);
    std::optional<CameraSequence> cams = chosen_cameras(o, m);
    if (!cams) {
      const RigidFactorization rigid = rigid_factorization_init(m.W);
      cams = refine_cameras(m.W, tile_shape(rigid.shape, m.frames()), rigid.cameras);
    }
    res = tnh_solve(m.W, cams, o.tau, topts);
    r["data"] = {{"frames", m.frames()}, {"points", m.points()},
                 {"observed_points", m.W.observed_count() / 2}};
    metrics["reprojection_rms"] = reprojection_rms(m.W, *cams, res.X);
    if (const auto gt = nrsfm_truth(o, m)) metrics["e3d"] = e3d(res.X, *gt);
  }
  r["solver"] = {{"iterations", res.iterations},
                 {"converged", res.converged},
                 {"lipschitz", res.lipschitz},
                 {"objective_initial", res.objective_trace.empty() ? 0.0 : res.objective_trace.front()},
                 {"objective_final", res.objective_trace.empty() ? 0.0 : res.objective_trace.back()}};
  r["metrics"] = metrics;
  if (!o.out.empty()) save_matrix(res.X, o.out);
  return r;
}

json run_nrsfm(const Options& o) {
  const MocapData m = mocap_input(o);
  NrsfmOptions nopts;
  nopts.tau = o.tau;
  nopts.tnh_tau = o.tnh_tau;
  nopts.rounds = o.rounds;
  nopts.tnh.max_iters = o.tnh_iters;
  nopts.schedule = schedule_of(o.penalty);
  nopts.solve = solve_options_of(o.penalty);
  if (o.kernel.family == "linear") {
    nopts.family = KernelFamily::Linear;
  } else if (o.kernel.width == "dmax") {
    nopts.width = WidthCriterion::DMax;
  } else if (o.kernel.width != "dmed") {
    nopts.gamma = resolve_kernel(o.kernel, Eigen::MatrixXd()).gamma;
  }
  const auto start = std::chrono::steady_clock::now();
  const NrsfmResult res = solve_nrsfm(m.W, chosen_cameras(o, m), nopts);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json r;
  r["data"] = {{"frames", m.frames()}, {"points", m.points()},
               {"observed_points", m.W.observed_count() / 2},
               {"ground_truth_truncated", m.gt_truncated}};
  r["kernel"] = kernel_json(res.kernel);
  r["rounds"] = json::array();
  for (std::size_t i = 0; i < res.rounds.size(); ++i) {
    json round = solve_report_json(res.rounds[i]);
    round["reprojection_rms"] = res.reprojection[i];
    r["rounds"].push_back(std::move(round));
  }
  int warnings = 0;
  for (bool w : res.cameras.warnings) warnings += w;
  r["camera_warnings"] = warnings;
  json metrics = json::object();
  metrics["reprojection_rms"] = res.reprojection.back();
  if (const auto gt = nrsfm_truth(o, m)) {
    metrics["e3d"] = e3d(res.shapes, *gt);
    metrics["e3d_tnh_init"] = e3d(res.tnh_shapes, *gt);
  }
  r["metrics"] = metrics;
  r["timing"] = {{"wall_seconds", wall}};
  if (!o.out.empty()) save_matrix(res.shapes, o.out);
  return r;
}

json run_kpca(const Options& o) {
  if (o.data.empty()) throw InvalidInputError("--data is required");
  const LabeledData train = load_labeled_csv(o.data);
  const KernelModel k = resolve_kernel(o.kernel, train.data);
  const Eigen::MatrixXd K = kernel_matrix(train.data, k);
  const FeatureBasis robust = robust_kpca(K, {o.tau, o.penalty.rho0});
  const Eigen::Index rank = o.rank > 0 ? o.rank : std::max<Eigen::Index>(1, robust.effective_rank);
  const FeatureBasis plain = truncated_kpca(K, rank);

  json r;
  r["data"] = {{"samples", train.data.cols()}, {"dim", train.data.rows()}};
  r["kernel"] = kernel_json(k);
  r["robust"] = {{"effective_rank", robust.effective_rank},
                 {"trace_norm", robust.trace_norm()},
                 {"objective", robust.objective}};
  r["baseline"] = {{"rank", rank}};
  json metrics = json::object();
  if (!o.gt.empty()) {
    const LabeledData clean = load_labeled_csv(o.gt);
    if (clean.data.rows() != train.data.rows() || clean.data.cols() != train.data.cols())
      throw ShapeMismatchError("--gt and --data differ in shape");
    const Eigen::MatrixXd Kgt = kernel_matrix(clean.data, k);
    metrics["manifold_error"] = manifold_error(robust.gram(), Kgt, true);
    metrics["manifold_error_unnormalized"] = manifold_error(robust.gram(), Kgt, false);
    metrics["baseline_manifold_error"] = manifold_error(plain.gram(), Kgt, true);
  }
  if (!o.test.empty()) {
    const LabeledData test = load_labeled_csv(o.test);
    metrics["knn_error"] = knn_classify(robust, train, test.data, k, test.labels).error_rate;
    metrics["baseline_knn_error"] = knn_classify(plain, train, test.data, k, test.labels).error_rate;
  }
  r["metrics"] = metrics;
  if (!o.out.empty()) save_matrix(robust.gram(), o.out);
  return r;
}

Eigen::MatrixXd with_nan(const Eigen::MatrixXd& M, const MaskMatrix& deleted) {
  return deleted.select(Eigen::MatrixXd::Constant(M.rows(), M.cols(),
                                                  std::numeric_limits<double>::quiet_NaN()),
                        M);
}

json run_synth(const Options& o) {
  if (o.out.empty()) throw InvalidInputError("--out (output prefix) is required");
  json files = json::array();
  json r;
  if (o.kind == "manifold") {
    // Twice the requested samples, split alternately into train and test.
    const ManifoldSample s = synth_manifold(2 * o.n_per_class, o.dim, o.noise, o.seed, o.classes);
    const Eigen::Index n = s.clean.cols() / 2;
    LabeledData train, test, clean;
    train.data.resize(o.dim, n);
    test.data.resize(o.dim, n);
    clean.data.resize(o.dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      train.data.col(j) = s.noisy.data.col(2 * j);
      clean.data.col(j) = s.clean.col(2 * j);
      test.data.col(j) = s.noisy.data.col(2 * j + 1);
      train.labels.push_back(s.noisy.labels[static_cast<std::size_t>(2 * j)]);
      test.labels.push_back(s.noisy.labels[static_cast<std::size_t>(2 * j + 1)]);
    }
    clean.labels = train.labels;
    save_labeled_csv(train, o.out + "_train.csv");
    save_labeled_csv(clean, o.out + "_train_clean.csv");
    save_labeled_csv(test, o.out + "_test.csv");
    files = {o.out + "_train.csv", o.out + "_train_clean.csv", o.out + "_test.csv"};
    r["samples"] = {{"train", n}, {"test", n}, {"dim", o.dim}};
  } else if (o.kind == "completion") {
    const ManifoldSample s = synth_manifold(o.n_per_class, o.dim, o.noise, o.seed, o.classes);
    const MaskMatrix deleted =
        random_deletion_mask(s.noisy.data.rows(), s.noisy.data.cols(), o.missing_prob, o.seed + 1);
    save_matrix(with_nan(s.noisy.data, deleted), o.out + "_observed.csv");
    save_matrix(s.noisy.data, o.out + "_truth.csv");
    files = {o.out + "_observed.csv", o.out + "_truth.csv"};
    r["matrix"] = {{"rows", s.noisy.data.rows()}, {"cols", s.noisy.data.cols()},
                   {"deleted", deleted.count()}};
  } else {
    const NrsfmInstance inst =
        synth_nrsfm(o.frames, o.points, o.amplitude, o.missing_prob, o.noise, o.seed);
    MocapData m;
    m.W = inst.W;
    m.ground_truth = inst.shapes;
    m.cameras = inst.cameras;
    save_mocap(m, o.out + ".mocap");
    files = {o.out + ".mocap"};
    r["sequence"] = {{"frames", o.frames}, {"points", o.points},
                     {"observed_points", inst.W.observed_count() / 2}};
  }
  r["files"] = files;
  return r;
}

std::string usage_of(const CLI::App& app) {
  return app.help();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-linear low-dimensional regularization solvers", "nlreg"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;
  app.add_option("--threads", o.threads, "OpenMP thread count (0 = runtime default)");

  auto* kpca = app.add_subcommand("kpca", "Robust kernel PCA of labelled data, with metrics");
  kpca->add_option("--data", o.data, "Training samples (labelled CSV)")->required();
  kpca->add_option("--gt", o.gt, "Noise-free training samples (labelled CSV)");
  kpca->add_option("--test", o.test, "Test samples for 1-NN error (labelled CSV)");
  kpca->add_option("--tau", o.tau, "Trace-norm weight")->check(CLI::NonNegativeNumber);
  kpca->add_option("--rho0", o.penalty.rho0, "Penalty weight rho")->check(CLI::PositiveNumber);
  kpca->add_option("--rank", o.rank, "Baseline KPCA rank (0 = robust effective rank)");
  add_kernel(kpca, o.kernel);
  kpca->add_option("--out", o.out, "Write the denoised kernel matrix here");

  auto* complete = app.add_subcommand("complete", "Matrix completion with the kernel regularizer");
  complete->add_option("--data", o.data, "Matrix file; nan marks missing entries")->required();
  complete->add_option("--gt", o.gt, "Complete ground-truth matrix for RMS");
  complete->add_option("--tau", o.tau, "Trace-norm weight")->check(CLI::NonNegativeNumber);
  add_penalty(complete, o.penalty);
  add_kernel(complete, o.kernel);
  complete->add_option("--missing-prob", o.missing_prob, "Extra random deletions");
  complete->add_option("--seed", o.seed, "Seed for --missing-prob");
  complete->add_option("--out", o.out, "Write the completed matrix here");

  auto* tnh = app.add_subcommand("tnh", "Linear trace-norm baseline");
  tnh->add_option("--problem", o.problem, "completion or nrsfm")
      ->check(CLI::IsMember({"completion", "nrsfm"}));
  tnh->add_option("--data", o.data, "Matrix file (completion) or mocap file (nrsfm)")->required();
  tnh->add_option("--gt", o.gt, "Ground truth matrix (shape sequence for nrsfm)");
  tnh->add_option("--tau", o.tau, "Trace-norm weight")->check(CLI::PositiveNumber);
  tnh->add_option("--max-iters", o.tnh_iters, "Proximal gradient iteration cap")
      ->check(CLI::PositiveNumber);
  tnh->add_flag("--gt-cameras", o.gt_cameras, "Use the cameras stored in the mocap file");
  tnh->add_option("--missing-prob", o.missing_prob, "Extra random deletions");
  tnh->add_option("--seed", o.seed, "Seed for --missing-prob");
  tnh->add_option("--out", o.out, "Write the estimate here");

  auto* nrsfm = app.add_subcommand("nrsfm", "Non-rigid structure from motion");
  nrsfm->add_option("--data", o.data, "Mocap file")->required();
  nrsfm->add_option("--gt", o.gt, "Ground-truth 3F x N shapes (overrides the file's)");
  nrsfm->add_option("--tau", o.tau, "Trace-norm weight in feature space")
      ->check(CLI::NonNegativeNumber);
  nrsfm->add_option("--tnh-tau", o.tnh_tau, "Trace-norm weight of the initializing baseline")
      ->check(CLI::PositiveNumber);
  nrsfm->add_option("--max-iters", o.tnh_iters, "Baseline iteration cap")
      ->check(CLI::PositiveNumber);
  nrsfm->add_option("--rounds", o.rounds, "Shape / camera alternation rounds")
      ->check(CLI::PositiveNumber);
  nrsfm->add_flag("--gt-cameras", o.gt_cameras, "Keep the file's cameras fixed");
  add_penalty(nrsfm, o.penalty);
  add_kernel(nrsfm, o.kernel);
  nrsfm->add_option("--missing-prob", o.missing_prob, "Extra random (frame, point) deletions");
  nrsfm->add_option("--seed", o.seed, "Seed for --missing-prob");
  nrsfm->add_option("--out", o.out, "Write the 3F x N shapes here");

  auto* synth = app.add_subcommand("synth", "Generate synthetic data sets");
  synth->add_option("kind", o.kind, "manifold, completion or nrsfm")
      ->required()
      ->check(CLI::IsMember({"manifold", "completion", "nrsfm"}));
  synth->add_option("--out", o.out, "Output path prefix")->required();
  synth->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--n-per-class", o.n_per_class, "Samples per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--classes", o.classes, "Number of manifold classes")
      ->check(CLI::PositiveNumber);
  synth->add_option("--dim", o.dim, "Ambient dimension")->check(CLI::PositiveNumber);
  synth->add_option("--noise", o.noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
  synth->add_option("--missing-prob", o.missing_prob, "Deletion probability");
  synth->add_option("--frames", o.frames, "NRSfM frames")->check(CLI::PositiveNumber);
  synth->add_option("--points", o.points, "NRSfM points")->check(CLI::PositiveNumber);
  synth->add_option("--amplitude", o.amplitude, "Joint swing amplitude in radians");

  // Per-command defaults that differ from the shared Options initializers.
  // Only the display string is set here; the value is applied after parsing since
  // every subcommand binds the same variable.
  complete->get_option("--tau")->default_str("0.1");
  kpca->get_option("--tau")->default_str("0.1");
  tnh->get_option("--tau")->default_str("1");
  nrsfm->get_option("--tau")->default_str("0.0001");
  // Frame samples are long (3N unknowns each), so NRSfM S updates get a smaller budget.
  nrsfm->get_option("--max-inner")->default_str("10");
  nrsfm->get_option("--lm-iters")->default_str("10");

  std::vector<const char*> argv{"nlreg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << usage_of(app);
    return 0;
  } catch (const CLI::ParseError& e) {
    const json doc = {{"error", {{"category", "usage"}, {"message", e.what()}}}};
    err << doc.dump() << "\n" << usage_of(app);
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  if (sub != synth) {
    const CLI::Option* tau = sub->get_option("--tau");
    if (tau->count() == 0) o.tau = std::stod(tau->get_default_str());
  }
  if (sub == nrsfm) {
    if (nrsfm->get_option("--max-inner")->count() == 0) o.penalty.max_inner = 10;
    if (nrsfm->get_option("--lm-iters")->count() == 0) o.penalty.lm_iters = 10;
  }
  json report;
  report["command"] = sub->get_name();
  report["config"] = config_json(*sub);
  try {
    set_threads(o.threads);
    json body;
    if (sub == kpca) body = run_kpca(o);
    else if (sub == complete) body = run_complete(o);
    else if (sub == tnh) body = run_tnh(o);
    else if (sub == nrsfm) body = run_nrsfm(o);
    else body = run_synth(o);
    for (auto& [key, value] : body.items()) report[key] = value;
  } catch (const Error& e) {
    const json doc = {{"command", sub->get_name()},
                      {"error", {{"category", std::string(category_name(e.category()))},
                                 {"message", e.what()}}}};
    err << doc.dump(2) << "\n";
    return 3 + static_cast<int>(e.category());
  } catch (const std::exception& e) {
    const json doc = {{"command", sub->get_name()},
                      {"error", {{"category", "unexpected"}, {"message", e.what()}}}};
    err << doc.dump(2) << "\n";
    return kExitUnexpected;
  }
  out << report.dump(2) << "\n";
  return 0;
}

}  // namespace nlreg::cli
