#include "phex/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "phex/errors.hpp"
#include "phex/numeric.hpp"

namespace phex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MarginalTable infer(const ConditionedModel& cm, const ClampSet& clamps,
                    Inference method, const LBPOptions& lbp_opts) {
  return method == Inference::kExact ? exact_marginals(cm, clamps)
                                     : run_lbp(cm, clamps, lbp_opts);
}

void check_targets(int n, const std::vector<Target>& targets) {
  if (targets.empty()) throw ValidationError("instance needs at least one target");
  std::vector<char> seen(n, 0);
  for (const Target& t : targets) {
    if (t.label < 0 || t.label >= n) {
      throw ValidationError("target label id out of range");
    }
    if (t.state != 1 && t.state != -1) {
      throw ValidationError("target state must be +1 or -1");
    }
    if (seen[t.label]) throw ValidationError("duplicate target label");
    seen[t.label] = 1;
  }
}

double target_log_prob(const MarginalTable& table, const Target& t) {
  const double p = table.p[t.label];
  const double prob = t.state == 1 ? p : 1.0 - p;
  if (prob <= 0.0) return -kInf;
  return std::log(prob);
}

}  // namespace

double nll_loss(const IsingModel& model, const EvidenceVector& z,
                const std::vector<Target>& targets, Inference method,
                const LBPOptions& lbp_opts) {
  check_targets(model.n, targets);
  const ConditionedModel cm = condition(model, z);
  const MarginalTable table = infer(cm, {}, method, lbp_opts);
  double loss = 0.0;
  for (const Target& t : targets) loss -= target_log_prob(table, t);
  return loss;
}

double nll_loss_hex(const LabelGraph& graph, const EvidenceVector& z,
                    const std::vector<Target>& targets) {
  check_targets(graph.size(), targets);
  const MarginalTable table = exact_hex_marginals(graph, z);
  double loss = 0.0;
  for (const Target& t : targets) loss -= target_log_prob(table, t);
  return loss;
}

std::vector<double> grad_scores(const IsingModel& model, const EvidenceVector& z,
                                const std::vector<Target>& targets,
                                Inference method, const LBPOptions& lbp_opts) {
  check_targets(model.n, targets);
  const ConditionedModel cm = condition(model, z);
  const MarginalTable unclamped = infer(cm, {}, method, lbp_opts);
  std::vector<double> grad(model.n, 0.0);
  for (const Target& t : targets) {
    const MarginalTable clamped =
        infer(cm, ClampSet{}.set(t.label, t.state), method, lbp_opts);
    for (int i = 0; i < model.n; ++i) {
      grad[i] -= clamped.expectation(i) - unclamped.expectation(i);
    }
  }
  return grad;
}

GradReport finite_difference_check(const IsingModel& model,
                                   const EvidenceVector& z,
                                   const std::vector<Target>& targets,
                                   Inference method, double epsilon,
                                   const LBPOptions& lbp_opts) {
  if (epsilon <= 0.0) throw ValidationError("finite-difference epsilon must be > 0");
  GradReport report;
  report.analytic = grad_scores(model, z, targets, method, lbp_opts);
  report.numeric.assign(model.n, 0.0);
  EvidenceVector probe = z;
  for (int i = 0; i < model.n; ++i) {
    probe[i] = z[i] + epsilon;
    const double up = nll_loss(model, probe, targets, method, lbp_opts);
    probe[i] = z[i] - epsilon;
    const double down = nll_loss(model, probe, targets, method, lbp_opts);
    probe[i] = z[i];
    report.numeric[i] = (up - down) / (2.0 * epsilon);
  }
  double max_err = 0.0;
  for (int i = 0; i < model.n; ++i) {
    const double scale = std::max(
        {1.0, std::abs(report.analytic[i]), std::abs(report.numeric[i])});
    max_err = std::max(max_err,
                       std::abs(report.analytic[i] - report.numeric[i]) / scale);
  }
  report.max_rel_error = max_err;
  return report;
}

LinearScorer LinearScorer::zeros(int n, int d) {
  LinearScorer s;
  s.n = n;
  s.d = d;
  s.weights.assign(n, std::vector<double>(d, 0.0));
  s.bias.assign(n, 0.0);
  return s;
}

EvidenceVector LinearScorer::score(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != d) {
    throw ValidationError("feature dimension mismatch: got " +
                          std::to_string(x.size()) + ", scorer expects " +
                          std::to_string(d));
  }
  EvidenceVector z(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = bias[i];
    const auto& row = weights[i];
    for (int f = 0; f < d; ++f) acc += row[f] * x[f];
    z[i] = acc;
  }
  return z;
}

TrainResult train_linear(const LinearScorer& init,
                         const std::vector<TrainingInstance>& data,
                         const IsingModel& model, const TrainOptions& opts) {
  if (init.n != model.n) {
    throw ValidationError("scorer output size does not match label count");
  }
  if (data.empty()) throw ValidationError("no training data");
  if (opts.epochs < 0 || opts.batch_size <= 0) {
    throw ValidationError("bad training hyperparameters");
  }

  TrainResult result;
  result.scorer = init;
  std::mt19937_64 rng(opts.shuffle_seed);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += opts.batch_size) {
      const size_t stop = std::min(order.size(), start + opts.batch_size);
      std::vector<std::vector<double>> grad_w(
          model.n, std::vector<double>(init.d, 0.0));
      std::vector<double> grad_b(model.n, 0.0);
      for (size_t idx = start; idx < stop; ++idx) {
        const TrainingInstance& inst = data[order[idx]];
        const EvidenceVector z = result.scorer.score(inst.x);
        const std::vector<double> gz =
            grad_scores(model, z, inst.targets, opts.inference, opts.lbp);
        const ConditionedModel cm = condition(model, z);
        const MarginalTable table = infer(cm, {}, opts.inference, opts.lbp);
        for (const Target& t : inst.targets) epoch_loss -= target_log_prob(table, t);
        for (int i = 0; i < model.n; ++i) {
          if (gz[i] == 0.0) continue;
          for (int f = 0; f < init.d; ++f) grad_w[i][f] += gz[i] * inst.x[f];
          grad_b[i] += gz[i];
        }
      }
      const double step = opts.learning_rate / static_cast<double>(stop - start);
      for (int i = 0; i < model.n; ++i) {
        for (int f = 0; f < init.d; ++f) {
          result.scorer.weights[i][f] -= step * grad_w[i][f];
        }
        result.scorer.bias[i] -= step * grad_b[i];
      }
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      std::ostringstream os;
      os << "training diverged at epoch " << epoch << ": mean loss " << epoch_loss
         << " (learning rate " << opts.learning_rate << ")";
      throw NumericalError(os.str());
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  return result;
}

const std::vector<double>& default_strength_grid() {
  static const std::vector<double> grid = {0.0, 0.1, 0.3, 0.5, 0.7, 1.0, 1.5};
  return grid;
}

double multiclass_accuracy(const LinearScorer& scorer, const IsingModel& model,
                           const std::vector<TrainingInstance>& data,
                           const std::vector<int>& candidates, Inference method,
                           const LBPOptions& lbp_opts) {
  if (data.empty()) return 0.0;
  int correct = 0;
  int counted = 0;
  for (const TrainingInstance& inst : data) {
    int truth = -1;
    for (const Target& t : inst.targets) {
      if (t.state != 1) continue;
      if (std::find(candidates.begin(), candidates.end(), t.label) !=
          candidates.end()) {
        truth = t.label;
        break;
      }
    }
    if (truth < 0) continue;
    const ConditionedModel cm = condition(model, scorer.score(inst.x));
    const MarginalTable table = infer(cm, {}, method, lbp_opts);
    if (predict_multiclass(table, candidates) == truth) ++correct;
    ++counted;
  }
  return counted == 0 ? 0.0 : static_cast<double>(correct) / counted;
}

GridSearchResult grid_search_strength(const std::vector<double>& candidates,
                                      const LabelGraph& graph, StrengthMode mode,
                                      const std::vector<TrainingInstance>& train,
                                      const std::vector<TrainingInstance>& val,
                                      const std::vector<int>& class_candidates,
                                      int dim, const TrainOptions& opts) {
  if (candidates.empty()) throw ValidationError("strength grid is empty");
  GridSearchResult result;
  for (double u : candidates) {
    const LabelGraph graph_u = mode == StrengthMode::kUniform
                                   ? with_uniform_strength(graph, u)
                                   : scale_strengths(graph, u);
    const IsingModel model = compile(normalize_mece(graph_u));
    const TrainResult trained =
        train_linear(LinearScorer::zeros(model.n, dim), train, model, opts);
    const double acc = multiclass_accuracy(trained.scorer, model, val,
                                           class_candidates, opts.inference,
                                           opts.lbp);
    result.rows.push_back({u, acc});
  }
  // Ties break to the smaller u: only a strict improvement moves the pick.
  size_t best = 0;
  for (size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].val_accuracy > result.rows[best].val_accuracy) best = i;
  }
  result.best_u = result.rows[best].u;
  return result;
}

}  // namespace phex
