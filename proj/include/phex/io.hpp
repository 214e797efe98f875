#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "phex/eval.hpp"
#include "phex/ising.hpp"
#include "phex/label_graph.hpp"
#include "phex/learning.hpp"
#include "phex/synthetic.hpp"

namespace phex {

// Ordered so dumps are stable and diffable; doubles serialize via the
// shortest round-trip representation, which keeps outputs byte-deterministic.
using Json = nlohmann::ordered_json;

// Graph files: {"labels": [...], "edges": [...], "mece": {"members": [...]}}.
// Exclusions carry "a"/"b", subsumptions "parent"/"child"; each edge carries
// exactly one of "u", "q", or "hard": true.
Json graph_to_json(const LabelGraph& graph);
LabelGraph graph_from_json(const Json& j);
void save_graph(const LabelGraph& graph, const std::string& path);
// Throws ValidationError when the file fails graph validation; warnings are
// returned through `report` when provided.
LabelGraph load_graph(const std::string& path,
                      ValidationReport* report = nullptr);

Json ising_to_json(const IsingModel& model,
                   const std::vector<std::string>& labels);

// Scores CSV: header row of label names, one row of reals per instance.
// Columns may cover any subset of the graph's labels; missing labels score 0.
std::vector<EvidenceVector> load_scores_csv(const std::string& path,
                                            const LabelGraph& graph);
void save_scores_csv(const std::string& path, const LabelGraph& graph,
                     const std::vector<EvidenceVector>& rows);

Json marginals_to_json(const MarginalTable& table, const LabelGraph& graph);

Json scorer_to_json(const LinearScorer& scorer,
                    const std::vector<std::string>& labels);
LinearScorer scorer_from_json(const Json& j, const LabelGraph& graph);
void save_scorer(const LinearScorer& scorer, const LabelGraph& graph,
                 const std::string& path);
LinearScorer load_scorer(const std::string& path, const LabelGraph& graph);

// Instances JSONL: one {"x": [...], "targets": [{"label": name, "state": s}]}
// object per line.
void save_instances_jsonl(const std::string& path, const LabelGraph& graph,
                          const std::vector<TrainingInstance>& instances);
std::vector<TrainingInstance> load_instances_jsonl(const std::string& path,
                                                   const LabelGraph& graph);

Json eval_report_to_json(const EvalReport& report, const LabelGraph& graph);

Json spec_to_json(const SyntheticTaskSpec& spec);
SyntheticTaskSpec spec_from_json(const Json& j);

// Dataset directory: graph.json, train.jsonl, val.jsonl, test.jsonl, meta.json.
void save_dataset(const SyntheticDataset& data, const SyntheticTaskSpec& spec,
                  const std::string& dir);
SyntheticDataset load_dataset(const std::string& dir);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace phex
