#include "phex/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phex/errors.hpp"

namespace phex {

namespace {

// Shortest round-trip representation, same as the JSON dumps use.
std::string double_repr(double v) { return Json(v).dump(); }

int require_label(const LabelGraph& graph, const std::string& name,
                  const std::string& context) {
  const int id = graph.label_id(name);
  if (id < 0) {
    throw ValidationError("unknown label '" + name + "' in " + context);
  }
  return id;
}

std::string label_name(const std::vector<std::string>& labels, int id) {
  if (id < 0 || id >= static_cast<int>(labels.size())) {
    throw ValidationError("label id " + std::to_string(id) + " out of range");
  }
  return labels[id];
}

EdgeStrength strength_from_edge_json(const Json& e) {
  const int have_u = e.contains("u") ? 1 : 0;
  const int have_q = e.contains("q") ? 1 : 0;
  const int have_hard = e.contains("hard") ? 1 : 0;
  if (have_u + have_q + have_hard != 1) {
    throw ValidationError(
        "each edge needs exactly one of \"u\", \"q\", or \"hard\"");
  }
  if (have_hard) {
    if (!e.at("hard").is_boolean() || !e.at("hard").get<bool>()) {
      throw ValidationError("\"hard\" must be true when present");
    }
    return EdgeStrength::hard_relation();
  }
  if (have_u) return EdgeStrength::finite(e.at("u").get<double>());
  return EdgeStrength::from_q(e.at("q").get<double>());
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

void check_csv_safe(const std::string& name) {
  if (name.find_first_of(",\r\n\"") != std::string::npos) {
    throw ValidationError("label name '" + name + "' is not CSV-safe");
  }
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad number '" + text + "' in " + context);
  }
}

}  // namespace

Json graph_to_json(const LabelGraph& graph) {
  Json j;
  j["labels"] = graph.labels;
  j["edges"] = Json::array();
  for (const RelationEdge& edge : graph.edges) {
    Json e;
    if (edge.kind == RelationKind::kExclusion) {
      e["kind"] = "exclusion";
      e["a"] = label_name(graph.labels, edge.a);
      e["b"] = label_name(graph.labels, edge.b);
    } else {
      e["kind"] = "subsumption";
      e["parent"] = label_name(graph.labels, edge.parent());
      e["child"] = label_name(graph.labels, edge.child());
    }
    if (edge.strength.hard()) {
      e["hard"] = true;
    } else {
      e["u"] = edge.strength.u();
    }
    j["edges"].push_back(std::move(e));
  }
  if (graph.mece) {
    Json members = Json::array();
    for (int m : graph.mece->members) {
      members.push_back(label_name(graph.labels, m));
    }
    j["mece"] = Json{{"members", std::move(members)}};
  }
  return j;
}

LabelGraph graph_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("labels") || !j.at("labels").is_array()) {
      throw ValidationError("graph file needs a \"labels\" array");
    }
    LabelGraph graph(j.at("labels").get<std::vector<std::string>>());
    for (const Json& e : j.value("edges", Json::array())) {
      const std::string kind = e.at("kind").get<std::string>();
      const EdgeStrength strength = strength_from_edge_json(e);
      if (kind == "exclusion") {
        graph.add_exclusion(
            require_label(graph, e.at("a").get<std::string>(), "edge"),
            require_label(graph, e.at("b").get<std::string>(), "edge"),
            strength);
      } else if (kind == "subsumption") {
        graph.add_subsumption(
            require_label(graph, e.at("parent").get<std::string>(), "edge"),
            require_label(graph, e.at("child").get<std::string>(), "edge"),
            strength);
      } else {
        throw ValidationError("unknown edge kind '" + kind + "'");
      }
    }
    if (j.contains("mece")) {
      std::vector<int> members;
      for (const Json& name : j.at("mece").at("members")) {
        members.push_back(
            require_label(graph, name.get<std::string>(), "mece group"));
      }
      graph.set_mece(std::move(members));
    }
    return graph;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed graph JSON: ") + e.what());
  }
}

void save_graph(const LabelGraph& graph, const std::string& path) {
  write_text_file(path, graph_to_json(graph).dump(2) + "\n");
}

LabelGraph load_graph(const std::string& path, ValidationReport* report) {
  LabelGraph graph = graph_from_json(load_json_file(path));
  ValidationReport local = validate(graph);
  if (!local.ok()) {
    throw ValidationError("invalid graph in " + path + ": " + local.summary());
  }
  if (report != nullptr) *report = std::move(local);
  return graph;
}

Json ising_to_json(const IsingModel& model,
                   const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != model.n) {
    throw ValidationError("label list does not match model size");
  }
  Json j;
  j["n"] = model.n;
  j["labels"] = labels;
  j["J"] = Json::array();
  for (const auto& [key, value] : model.couplings) {
    j["J"].push_back(Json::array({key.first, key.second, value}));
  }
  j["h"] = model.fields;
  if (model.mece) j["mece"] = model.mece->members;
  return j;
}

std::vector<EvidenceVector> load_scores_csv(const std::string& path,
                                            const LabelGraph& graph) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("scores file " + path + " is empty");
  }
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<int> columns;
  std::vector<char> seen(graph.size(), 0);
  for (const std::string& name : header) {
    const int id = require_label(graph, name, "scores header");
    if (seen[id]) {
      throw ValidationError("duplicate column '" + name + "' in scores header");
    }
    seen[id] = 1;
    columns.push_back(id);
  }

  std::vector<EvidenceVector> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != columns.size()) {
      throw ValidationError("row " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(columns.size()));
    }
    EvidenceVector z(graph.size(), 0.0);
    for (size_t c = 0; c < columns.size(); ++c) {
      z[columns[c]] =
          parse_double(fields[c], path + " row " + std::to_string(line_no));
    }
    rows.push_back(std::move(z));
  }
  return rows;
}

void save_scores_csv(const std::string& path, const LabelGraph& graph,
                     const std::vector<EvidenceVector>& rows) {
  std::ostringstream out;
  for (int i = 0; i < graph.size(); ++i) {
    check_csv_safe(graph.labels[i]);
    out << (i == 0 ? "" : ",") << graph.labels[i];
  }
  out << "\n";
  for (const EvidenceVector& z : rows) {
    if (static_cast<int>(z.size()) != graph.size()) {
      throw ValidationError("score row length does not match label count");
    }
    for (int i = 0; i < graph.size(); ++i) {
      out << (i == 0 ? "" : ",") << double_repr(z[i]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Json marginals_to_json(const MarginalTable& table, const LabelGraph& graph) {
  if (static_cast<int>(table.p.size()) != graph.size()) {
    throw ValidationError("marginal table does not match graph size");
  }
  Json j;
  j["labels"] = graph.labels;
  j["p"] = table.p;
  j["method"] = table.method;
  j["iterations"] = table.iterations;
  j["converged"] = table.converged;
  if (table.mece_dist) {
    Json members = Json::array();
    for (int m : table.mece_members) {
      members.push_back(label_name(graph.labels, m));
    }
    j["mece"] = Json{{"members", std::move(members)}, {"dist", *table.mece_dist}};
  }
  return j;
}

Json scorer_to_json(const LinearScorer& scorer,
                    const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != scorer.n) {
    throw ValidationError("label list does not match scorer size");
  }
  Json j;
  j["labels"] = labels;
  j["dim"] = scorer.d;
  j["weights"] = scorer.weights;
  j["bias"] = scorer.bias;
  return j;
}

LinearScorer scorer_from_json(const Json& j, const LabelGraph& graph) {
  try {
    if (j.at("labels").get<std::vector<std::string>>() != graph.labels) {
      throw ValidationError("scorer labels do not match the graph");
    }
    LinearScorer scorer;
    scorer.n = graph.size();
    scorer.d = j.at("dim").get<int>();
    if (scorer.d <= 0) throw ValidationError("scorer dim must be positive");
    scorer.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    scorer.bias = j.at("bias").get<std::vector<double>>();
    if (static_cast<int>(scorer.weights.size()) != scorer.n ||
        static_cast<int>(scorer.bias.size()) != scorer.n) {
      throw ValidationError("scorer weight/bias rows do not match label count");
    }
    for (const auto& row : scorer.weights) {
      if (static_cast<int>(row.size()) != scorer.d) {
        throw ValidationError("scorer weight row does not match dim");
      }
    }
    return scorer;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scorer JSON: ") + e.what());
  }
}

void save_scorer(const LinearScorer& scorer, const LabelGraph& graph,
                 const std::string& path) {
  write_text_file(path, scorer_to_json(scorer, graph.labels).dump(2) + "\n");
}

LinearScorer load_scorer(const std::string& path, const LabelGraph& graph) {
  return scorer_from_json(load_json_file(path), graph);
}

void save_instances_jsonl(const std::string& path, const LabelGraph& graph,
                          const std::vector<TrainingInstance>& instances) {
  std::ostringstream out;
  for (const TrainingInstance& inst : instances) {
    Json j;
    j["x"] = inst.x;
    j["targets"] = Json::array();
    for (const Target& t : inst.targets) {
      j["targets"].push_back(Json{{"label", label_name(graph.labels, t.label)},
                                  {"state", t.state}});
    }
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<TrainingInstance> load_instances_jsonl(const std::string& path,
                                                   const LabelGraph& graph) {
  std::istringstream in(read_text_file(path));
  std::vector<TrainingInstance> instances;
  std::string line;
  int line_no = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      const Json j = Json::parse(line);
      TrainingInstance inst;
      inst.x = j.at("x").get<std::vector<double>>();
      if (inst.x.empty()) throw ValidationError("empty feature vector");
      if (dim < 0) dim = static_cast<int>(inst.x.size());
      if (static_cast<int>(inst.x.size()) != dim) {
        throw ValidationError("inconsistent feature dimension");
      }
      for (const Json& t : j.at("targets")) {
        const int label = require_label(
            graph, t.at("label").get<std::string>(), "instance targets");
        const int state = t.at("state").get<int>();
        if (state != 1 && state != -1) {
          throw ValidationError("target state must be +1 or -1");
        }
        inst.targets.push_back({label, state});
      }
      instances.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return instances;
}

Json eval_report_to_json(const EvalReport& report, const LabelGraph& graph) {
  Json j;
  j["num_instances"] = report.num_instances;
  j["topk"] = Json::object();
  for (const auto& [k, acc] : report.topk) {
    j["topk"][std::to_string(k)] = acc;
  }
  j["per_class_mean"] = report.per_class_mean;
  j["per_class"] = Json::object();
  for (const auto& [label, total] : report.per_class_total) {
    const auto it = report.per_class_correct.find(label);
    j["per_class"][label_name(graph.labels, label)] =
        Json{{"correct", it == report.per_class_correct.end() ? 0 : it->second},
             {"total", total}};
  }
  j["method"] = report.method;
  j["iterations"] = report.iterations;
  j["u"] = std::isnan(report.u) ? Json(nullptr) : Json(report.u);
  return j;
}

Json spec_to_json(const SyntheticTaskSpec& spec) {
  Json j;
  j["seed"] = spec.seed;
  j["num_classes"] = spec.num_classes;
  j["num_attributes"] = spec.num_attributes;
  j["predicates"] = spec.predicates;
  j["num_parents"] = spec.num_parents;
  j["dim"] = spec.dim;
  j["centroid_scale"] = spec.centroid_scale;
  j["secondary_scale"] = spec.secondary_scale;
  j["noise_scale"] = spec.noise_scale;
  j["train_per_class"] = spec.train_per_class;
  j["val_per_class"] = spec.val_per_class;
  j["test_per_class"] = spec.test_per_class;
  j["unseen_classes"] = spec.unseen_classes;
  j["relabel_fraction"] = spec.relabel_fraction;
  j["label_noise"] = spec.label_noise;
  j["relation_noise"] = spec.relation_noise;
  j["u_pos"] = spec.u_pos;
  j["u_neg"] = spec.u_neg;
  return j;
}

SyntheticTaskSpec spec_from_json(const Json& j) {
  try {
    SyntheticTaskSpec defaults, spec;
    spec.seed = j.value("seed", defaults.seed);
    spec.num_classes = j.value("num_classes", defaults.num_classes);
    spec.num_attributes = j.value("num_attributes", defaults.num_attributes);
    spec.predicates = j.value("predicates", defaults.predicates);
    spec.num_parents = j.value("num_parents", defaults.num_parents);
    spec.dim = j.value("dim", defaults.dim);
    spec.centroid_scale = j.value("centroid_scale", defaults.centroid_scale);
    spec.secondary_scale = j.value("secondary_scale", defaults.secondary_scale);
    spec.noise_scale = j.value("noise_scale", defaults.noise_scale);
    spec.train_per_class = j.value("train_per_class", defaults.train_per_class);
    spec.val_per_class = j.value("val_per_class", defaults.val_per_class);
    spec.test_per_class = j.value("test_per_class", defaults.test_per_class);
    spec.unseen_classes = j.value("unseen_classes", defaults.unseen_classes);
    spec.relabel_fraction =
        j.value("relabel_fraction", defaults.relabel_fraction);
    spec.label_noise = j.value("label_noise", defaults.label_noise);
    spec.relation_noise = j.value("relation_noise", defaults.relation_noise);
    spec.u_pos = j.value("u_pos", defaults.u_pos);
    spec.u_neg = j.value("u_neg", defaults.u_neg);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed task spec JSON: ") + e.what());
  }
}

void save_dataset(const SyntheticDataset& data, const SyntheticTaskSpec& spec,
                  const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir), ec);
  if (ec) {
    throw ValidationError("cannot create directory " + dir + ": " + ec.message());
  }
  const auto at = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  save_graph(data.graph, at("graph.json"));
  save_instances_jsonl(at("train.jsonl"), data.graph, data.train);
  save_instances_jsonl(at("val.jsonl"), data.graph, data.val);
  save_instances_jsonl(at("test.jsonl"), data.graph, data.test);

  Json meta;
  meta["spec"] = spec_to_json(spec);
  meta["dim"] = data.dim;
  const auto names = [&data](const std::vector<int>& ids) {
    Json arr = Json::array();
    for (int id : ids) arr.push_back(label_name(data.graph.labels, id));
    return arr;
  };
  meta["class_labels"] = names(data.class_labels);
  meta["eval_candidates"] = names(data.eval_candidates);
  meta["val_truth"] = names(data.val_truth);
  meta["test_truth"] = names(data.test_truth);
  write_text_file(at("meta.json"), meta.dump(2) + "\n");
}

SyntheticDataset load_dataset(const std::string& dir) {
  const auto at = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  SyntheticDataset data;
  data.graph = load_graph(at("graph.json"));
  data.train = load_instances_jsonl(at("train.jsonl"), data.graph);
  data.val = load_instances_jsonl(at("val.jsonl"), data.graph);
  data.test = load_instances_jsonl(at("test.jsonl"), data.graph);
  const Json meta = load_json_file(at("meta.json"));
  try {
    data.dim = meta.at("dim").get<int>();
    const auto ids = [&data](const Json& arr) {
      std::vector<int> out;
      for (const Json& name : arr) {
        out.push_back(
            require_label(data.graph, name.get<std::string>(), "meta.json"));
      }
      return out;
    };
    data.class_labels = ids(meta.at("class_labels"));
    data.eval_candidates = ids(meta.at("eval_candidates"));
    data.val_truth = ids(meta.at("val_truth"));
    data.test_truth = ids(meta.at("test_truth"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed meta.json: ") + e.what());
  }
  return data;
}

Json load_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("JSON parse error in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw ValidationError("failed while writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace phex
