#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phex/errors.hpp"
#include "phex/exact.hpp"
#include "phex/io.hpp"
#include "phex/lbp.hpp"
#include "phex/learning.hpp"
#include "phex/synthetic.hpp"

namespace {

using phex::Json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    phex::write_text_file(out_path, text);
  }
}

void print_warnings(const phex::ValidationReport& report) {
  for (const auto& w : report.warnings) {
    std::cerr << "warning [" << w.code << "]: " << w.message << "\n";
  }
}

phex::Inference parse_method(const std::string& name) {
  if (name == "exact") return phex::Inference::kExact;
  if (name == "lbp") return phex::Inference::kLbp;
  throw phex::ValidationError("unknown inference method '" + name + "'");
}

std::pair<std::string, int> parse_assignment(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw phex::ValidationError("expected name=+1 or name=-1, got '" + text + "'");
  }
  const std::string name = text.substr(0, eq);
  const std::string state = text.substr(eq + 1);
  if (state == "1" || state == "+1") return {name, 1};
  if (state == "-1") return {name, -1};
  throw phex::ValidationError("state in '" + text + "' must be +1 or -1");
}

struct MethodFlags {
  std::string method = "exact";
  phex::LBPOptions lbp;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "Inference method")
        ->check(CLI::IsMember({"exact", "lbp"}));
    cmd->add_option("--max-iters", lbp.max_iterations, "LBP sweep limit");
    cmd->add_option("--tol", lbp.tolerance, "LBP convergence tolerance");
    cmd->add_option("--damping", lbp.damping, "LBP message damping in [0,1)");
  }
};

struct TrainFlags {
  double lr = 0.05;
  int epochs = 50;
  int batch = 16;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "SGD learning rate");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--batch", batch, "Minibatch size");
    cmd->add_option("--seed", seed, "Shuffle seed");
  }

  phex::TrainOptions options(const MethodFlags& m) const {
    phex::TrainOptions opts;
    opts.learning_rate = lr;
    opts.epochs = epochs;
    opts.batch_size = batch;
    opts.shuffle_seed = seed;
    opts.inference = parse_method(m.method);
    opts.lbp = m.lbp;
    return opts;
  }
};

phex::MarginalTable infer_one(const phex::LabelGraph& graph,
                              const phex::EvidenceVector& z,
                              const phex::ClampSet& clamps,
                              const MethodFlags& flags) {
  if (graph.has_hard_edges()) {
    if (parse_method(flags.method) != phex::Inference::kExact) {
      throw phex::ValidationError(
          "hard edges need --method exact (enumeration oracle)");
    }
    return phex::exact_hex_marginals(graph, z, clamps);
  }
  const phex::ConditionedModel cm =
      phex::condition(phex::compile(phex::normalize_mece(graph)), z);
  if (parse_method(flags.method) == phex::Inference::kExact) {
    return phex::exact_marginals(cm, clamps);
  }
  return phex::run_lbp(cm, clamps, flags.lbp);
}

std::vector<int> resolve_candidates(const phex::LabelGraph& graph,
                                    const std::vector<std::string>& names) {
  std::vector<int> ids;
  for (const std::string& name : names) {
    const int id = graph.label_id(name);
    if (id < 0) {
      throw phex::ValidationError("unknown candidate label '" + name + "'");
    }
    ids.push_back(id);
  }
  return ids;
}

int run(int argc, char** argv) {
  CLI::App app{"pHEX label-relation inference engine"};
  app.require_subcommand(1);

  // --- compile -------------------------------------------------------------
  auto* compile_cmd =
      app.add_subcommand("compile", "Compile a label graph to an Ising model");
  struct {
    std::string graph, out;
  } compile_opts;
  compile_cmd->add_option("--graph", compile_opts.graph, "Label graph JSON")
      ->required();
  compile_cmd->add_option("--out", compile_opts.out, "Output path (default stdout)");
  compile_cmd->callback([&] {
    phex::ValidationReport report;
    const phex::LabelGraph graph = phex::load_graph(compile_opts.graph, &report);
    print_warnings(report);
    const phex::IsingModel model = phex::compile(phex::normalize_mece(graph));
    emit(phex::ising_to_json(model, graph.labels).dump(2) + "\n", compile_opts.out);
  });

  // --- infer ---------------------------------------------------------------
  auto* infer_cmd =
      app.add_subcommand("infer", "Per-label marginals for score rows");
  struct {
    std::string graph, scores, out;
    std::vector<std::string> clamps;
    MethodFlags method;
  } infer_opts;
  infer_cmd->add_option("--graph", infer_opts.graph, "Label graph JSON")->required();
  infer_cmd->add_option("--scores", infer_opts.scores, "Scores CSV")->required();
  infer_cmd->add_option("--clamp", infer_opts.clamps,
                        "Clamp label=+1/-1 (repeatable)");
  infer_cmd->add_option("--out", infer_opts.out, "Output path (default stdout)");
  infer_opts.method.attach(infer_cmd);
  infer_cmd->callback([&] {
    phex::ValidationReport report;
    const phex::LabelGraph graph = phex::load_graph(infer_opts.graph, &report);
    print_warnings(report);
    phex::ClampSet clamps;
    for (const std::string& text : infer_opts.clamps) {
      const auto [name, state] = parse_assignment(text);
      const int id = graph.label_id(name);
      if (id < 0) throw phex::ValidationError("unknown clamp label '" + name + "'");
      clamps.set(id, state);
    }
    std::ostringstream out;
    for (const phex::EvidenceVector& z :
         phex::load_scores_csv(infer_opts.scores, graph)) {
      const phex::MarginalTable table =
          infer_one(graph, z, clamps, infer_opts.method);
      out << phex::marginals_to_json(table, graph).dump() << "\n";
    }
    emit(out.str(), infer_opts.out);
  });

  // --- gradcheck -----------------------------------------------------------
  auto* grad_cmd = app.add_subcommand(
      "gradcheck", "Analytic vs finite-difference gradient of the NLL");
  struct {
    std::string graph, scores, out;
    std::vector<std::string> targets;
    double epsilon = 1e-5;
    MethodFlags method;
  } grad_opts;
  grad_cmd->add_option("--graph", grad_opts.graph, "Label graph JSON")->required();
  grad_cmd->add_option("--scores", grad_opts.scores, "Scores CSV (first row used)")
      ->required();
  grad_cmd->add_option("--target", grad_opts.targets,
                       "Observed label=+1/-1 (repeatable)")
      ->required();
  grad_cmd->add_option("--epsilon", grad_opts.epsilon, "Finite-difference step");
  grad_cmd->add_option("--out", grad_opts.out, "Output path (default stdout)");
  grad_opts.method.attach(grad_cmd);
  grad_cmd->callback([&] {
    phex::ValidationReport report;
    const phex::LabelGraph graph = phex::load_graph(grad_opts.graph, &report);
    print_warnings(report);
    const auto rows = phex::load_scores_csv(grad_opts.scores, graph);
    if (rows.empty()) throw phex::ValidationError("scores file has no rows");
    std::vector<phex::Target> targets;
    for (const std::string& text : grad_opts.targets) {
      const auto [name, state] = parse_assignment(text);
      const int id = graph.label_id(name);
      if (id < 0) throw phex::ValidationError("unknown target label '" + name + "'");
      targets.push_back({id, state});
    }
    const phex::IsingModel model = phex::compile(phex::normalize_mece(graph));
    const phex::GradReport result = phex::finite_difference_check(
        model, rows.front(), targets, parse_method(grad_opts.method.method),
        grad_opts.epsilon, grad_opts.method.lbp);
    Json j;
    j["labels"] = graph.labels;
    j["analytic"] = result.analytic;
    j["numeric"] = result.numeric;
    j["max_rel_error"] = result.max_rel_error;
    emit(j.dump(2) + "\n", grad_opts.out);
  });

  // --- train ---------------------------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train", "Fit a linear scorer by CRF gradient descent");
  struct {
    std::string graph, data, out;
    MethodFlags method;
    TrainFlags train;
  } train_opts;
  train_cmd->add_option("--graph", train_opts.graph, "Label graph JSON")->required();
  train_cmd->add_option("--data", train_opts.data, "Training instances JSONL")
      ->required();
  train_cmd->add_option("--out", train_opts.out, "Scorer output path")->required();
  train_opts.method.attach(train_cmd);
  train_opts.train.attach(train_cmd);
  train_cmd->callback([&] {
    phex::ValidationReport report;
    const phex::LabelGraph graph = phex::load_graph(train_opts.graph, &report);
    print_warnings(report);
    const auto data = phex::load_instances_jsonl(train_opts.data, graph);
    if (data.empty()) throw phex::ValidationError("training file has no instances");
    const phex::IsingModel model = phex::compile(phex::normalize_mece(graph));
    const int dim = static_cast<int>(data.front().x.size());
    const phex::TrainResult result =
        phex::train_linear(phex::LinearScorer::zeros(graph.size(), dim), data,
                           model, train_opts.train.options(train_opts.method));
    phex::save_scorer(result.scorer, graph, train_opts.out);
    Json j;
    j["instances"] = data.size();
    j["epochs"] = result.epoch_loss.size();
    j["epoch_loss"] = result.epoch_loss;
    std::cout << j.dump(2) << "\n";
  });

  // --- synth ---------------------------------------------------------------
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic experiment dataset");
  struct {
    std::string task = "hierarchy";
    std::string out, spec_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double rho = -1.0;
  } synth_opts;
  synth_cmd->add_option("--task", synth_opts.task, "Task family")
      ->check(CLI::IsMember({"hierarchy", "zeroshot"}));
  synth_cmd->add_option("--out", synth_opts.out, "Dataset directory")->required();
  synth_cmd->add_option("--spec", synth_opts.spec_path,
                        "Task spec JSON (overrides the pinned defaults)");
  synth_cmd->add_option("--seed", synth_opts.seed, "Generator seed");
  synth_cmd->add_option("--rho", synth_opts.rho,
                        "Relabel fraction override (hierarchy)");
  synth_cmd->callback([&] {
    synth_opts.seed_given = synth_cmd->count("--seed") > 0;
    phex::SyntheticTaskSpec spec;
    if (!synth_opts.spec_path.empty()) {
      spec = phex::spec_from_json(phex::load_json_file(synth_opts.spec_path));
      if (synth_opts.seed_given) spec.seed = synth_opts.seed;
    } else if (synth_opts.task == "hierarchy") {
      spec = phex::default_hierarchy_spec();
      if (synth_opts.seed_given) spec.seed = synth_opts.seed;
    } else {
      spec = phex::default_zero_shot_spec(synth_opts.seed_given ? synth_opts.seed
                                                                : 1);
    }
    if (synth_opts.rho >= 0.0) spec.relabel_fraction = synth_opts.rho;
    const phex::SyntheticDataset data = synth_opts.task == "hierarchy"
                                            ? phex::build_hierarchy_task(spec)
                                            : phex::build_zero_shot_task(spec);
    phex::save_dataset(data, spec, synth_opts.out);
    Json j;
    j["task"] = synth_opts.task;
    j["seed"] = spec.seed;
    j["labels"] = data.graph.size();
    j["train"] = data.train.size();
    j["val"] = data.val.size();
    j["test"] = data.test.size();
    std::cout << j.dump(2) << "\n";
  });

  // --- eval ----------------------------------------------------------------
  auto* eval_cmd =
      app.add_subcommand("eval", "Score a trained model on labeled instances");
  struct {
    std::string graph, scorer, data, out;
    std::vector<std::string> candidates;
    double u = std::numeric_limits<double>::quiet_NaN();
    MethodFlags method;
  } eval_opts;
  eval_cmd->add_option("--graph", eval_opts.graph, "Label graph JSON")->required();
  eval_cmd->add_option("--scorer", eval_opts.scorer, "Scorer JSON")->required();
  eval_cmd->add_option("--data", eval_opts.data, "Labeled instances JSONL")
      ->required();
  eval_cmd->add_option("--candidates", eval_opts.candidates,
                       "Candidate labels (default: MECE members)")
      ->delimiter(',');
  eval_cmd->add_option("--u", eval_opts.u, "Strength metadata for the report");
  eval_cmd->add_option("--out", eval_opts.out, "Output path (default stdout)");
  eval_opts.method.attach(eval_cmd);
  eval_cmd->callback([&] {
    phex::ValidationReport report;
    const phex::LabelGraph graph = phex::load_graph(eval_opts.graph, &report);
    print_warnings(report);
    const phex::LinearScorer scorer = phex::load_scorer(eval_opts.scorer, graph);
    const auto data = phex::load_instances_jsonl(eval_opts.data, graph);
    std::vector<int> candidates = resolve_candidates(graph, eval_opts.candidates);
    if (candidates.empty()) {
      if (graph.mece) {
        candidates = graph.mece->members;
      } else {
        candidates.resize(graph.size());
        for (int i = 0; i < graph.size(); ++i) candidates[i] = i;
      }
    }
    std::vector<phex::MarginalTable> tables;
    std::vector<int> truth;
    for (size_t i = 0; i < data.size(); ++i) {
      int t = -1;
      for (const phex::Target& target : data[i].targets) {
        if (target.state == 1 &&
            std::find(candidates.begin(), candidates.end(), target.label) !=
                candidates.end()) {
          t = target.label;
          break;
        }
      }
      if (t < 0) {
        throw phex::ValidationError(
            "instance " + std::to_string(i + 1) +
            " has no positive target among the candidates");
      }
      tables.push_back(
          infer_one(graph, scorer.score(data[i].x), {}, eval_opts.method));
      truth.push_back(t);
    }
    phex::EvalReport result = phex::evaluate(tables, truth, candidates);
    result.u = eval_opts.u;
    emit(phex::eval_report_to_json(result, graph).dump(2) + "\n", eval_opts.out);
  });

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Grid search the relation strength on a dataset directory");
  struct {
    std::string dataset, out;
    std::vector<double> grid;
    std::string mode = "uniform";
    MethodFlags method;
    TrainFlags train;
  } sweep_opts;
  sweep_cmd->add_option("--dataset", sweep_opts.dataset, "Directory from synth")
      ->required();
  sweep_cmd->add_option("--u", sweep_opts.grid, "Candidate strengths")
      ->delimiter(',');
  sweep_cmd->add_option("--mode", sweep_opts.mode, "uniform or scale")
      ->check(CLI::IsMember({"uniform", "scale"}));
  sweep_cmd->add_option("--out", sweep_opts.out, "CSV output path (default stdout)");
  sweep_opts.method.attach(sweep_cmd);
  sweep_opts.train.attach(sweep_cmd);
  sweep_cmd->callback([&] {
    const phex::SyntheticDataset data = phex::load_dataset(sweep_opts.dataset);
    const std::vector<double>& grid =
        sweep_opts.grid.empty() ? phex::default_strength_grid() : sweep_opts.grid;
    const phex::StrengthMode mode = sweep_opts.mode == "uniform"
                                        ? phex::StrengthMode::kUniform
                                        : phex::StrengthMode::kScalePriors;
    const phex::GridSearchResult result = phex::grid_search_strength(
        grid, data.graph, mode, data.train, data.val, data.eval_candidates,
        data.dim, sweep_opts.train.options(sweep_opts.method));
    std::ostringstream csv;
    csv << "u,val_accuracy\n";
    for (const phex::GridSearchRow& row : result.rows) {
      csv << Json(row.u).dump() << "," << Json(row.val_accuracy).dump() << "\n";
    }
    emit(csv.str(), sweep_opts.out);
    Json j;
    j["best_u"] = result.best_u;
    std::cerr << j.dump() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const phex::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const phex::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
