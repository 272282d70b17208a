// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphinformer/attention.hpp"
#include "graphinformer/builtin_graphs.hpp"
#include "graphinformer/errors.hpp"
#include "graphinformer/graph.hpp"
#include "graphinformer/informer.hpp"
#include "graphinformer/routes.hpp"
#include "graphinformer/separation.hpp"
#include "graphinformer/spectrum.hpp"
#include "graphinformer/synth.hpp"
#include "graphinformer/train.hpp"
#include "graphinformer/wl.hpp"

namespace gi::cli {
namespace {

using nlohmann::json;

constexpr double kGradTolerance = 1e-4;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty()) return;
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
}

ScoreMap parse_score_map(const std::string& s) { return score_map_from_string(s); }

// Graph inputs -----------------------------------------------------------------

struct GraphSources {
  std::vector<std::string> sets;
  std::vector<std::string> graph6_files;
  std::vector<std::string> json_files;
  std::vector<std::string> graph6;
};

void add_graph_sources(CLI::App* cmd, GraphSources& src) {
  std::string known;
  for (const auto& n : builtin_graph_names()) known += (known.empty() ? "" : ", ") + n;
  cmd->add_option("--set", src.sets, "Builtin graph set (" + known + ")");
  cmd->add_option("--graph6-file", src.graph6_files, "File with one graph6 string per line")
      ->check(CLI::ExistingFile);
  cmd->add_option("--graph-json", src.json_files, "JSON graph document (object or array of objects)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--graph6", src.graph6, "Inline graph6 string");
}

struct GraphGroup {
  std::string name;
  std::vector<Graph> graphs;
};

std::vector<GraphGroup> collect_groups(const GraphSources& src) {
  std::vector<GraphGroup> groups;
  for (const auto& s : src.sets) groups.push_back({s, builtin_graphs(s)});
  for (const auto& f : src.graph6_files) {
    groups.push_back({std::filesystem::path(f).stem().string(), read_graph6_file(f)});
  }
  for (const auto& f : src.json_files) {
    const json doc = read_json(f);
    GraphGroup g{std::filesystem::path(f).stem().string(), {}};
    if (doc.is_array()) {
      for (const auto& item : doc) g.graphs.push_back(load_graph_json(item));
    } else {
      g.graphs.push_back(load_graph_json(doc));
    }
    for (std::size_t i = 0; i < g.graphs.size(); ++i) {
      if (g.graphs[i].name().empty()) g.graphs[i].set_name(g.name + "-G" + std::to_string(i + 1));
    }
    groups.push_back(std::move(g));
  }
  if (!src.graph6.empty()) {
    GraphGroup g{"graph6", {}};
    for (std::size_t i = 0; i < src.graph6.size(); ++i) {
      Graph graph = parse_graph6(src.graph6[i]);
      graph.set_name("graph6-G" + std::to_string(i + 1));
      g.graphs.push_back(std::move(graph));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Graph> flatten(const std::vector<GraphGroup>& groups) {
  std::vector<Graph> out;
  for (const auto& g : groups) out.insert(out.end(), g.graphs.begin(), g.graphs.end());
  return out;
}

// iso-test ---------------------------------------------------------------------

struct IsoOptions {
  GraphSources sources;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  double threshold = 1e-4;
  std::string score_map = "sigmoid";
  std::size_t k = 4;
  std::string norm = "max-abs";
  std::string report;
  bool require_all = false;
};

int run_iso(const IsoOptions& o, std::ostream& out) {
  GraphSources src = o.sources;
  if (src.sets.empty() && src.graph6_files.empty() && src.json_files.empty() && src.graph6.empty()) {
    src.sets = {"RegN6D3", "RegN8D3", "Q4vsHoffman"};
  }
  const auto groups = collect_groups(src);
  std::vector<ScoreMap> maps;
  if (o.score_map == "both") {
    maps = {ScoreMap::sigmoid, ScoreMap::softmax};
  } else {
    maps = {parse_score_map(o.score_map)};
  }
  if (o.seeds == 0) throw ConfigError("--seeds must be at least 1");

  json runs = json::array();
  json summary = json::object();
  bool all_ok = true;
  for (ScoreMap map : maps) {
    std::vector<SeparationReport> first;
    std::vector<std::size_t> fully(groups.size(), 0);
    for (std::size_t s = 0; s < o.seeds; ++s) {
      SeparationConfig cfg = isomorphism_config(o.seed + s);
      cfg.model.attention.score_map = map;
      cfg.histogram_k = o.k;
      cfg.threshold = o.threshold;
      cfg.norm = o.norm == "l2" ? EmbeddingNorm::l2 : EmbeddingNorm::max_abs;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        SeparationReport r = gi_separate(groups[g].graphs, cfg, groups[g].name);
        fully[g] += r.all_separated();
        runs.push_back(r.to_json());
        if (s == 0) first.push_back(std::move(r));
      }
    }
    out << "score map: " << to_string(map) << ", seed " << o.seed << ", threshold " << fmt("%g", o.threshold)
        << ", route histogram k=" << o.k << "\n";
    out << format_separation_table(first);
    json per_set = json::object();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (o.seeds > 1) {
        out << "  " << groups[g].name << ": all graphs separated for " << fully[g] << " / " << o.seeds
            << " seeds\n";
      }
      per_set[groups[g].name] = {{"seeds_fully_separated", fully[g]}, {"seeds", o.seeds}};
      all_ok = all_ok && fully[g] == o.seeds;
    }
    summary[to_string(map)] = per_set;
    out << "\n";
  }
  write_json(o.report, {{"command", "iso-test"},
                        {"seed", o.seed},
                        {"seeds", o.seeds},
                        {"threshold", o.threshold},
                        {"histogram_k", o.k},
                        {"norm", o.norm},
                        {"runs", runs},
                        {"summary", summary}});
  return o.require_all && !all_ok ? 1 : 0;
}

// gradcheck --------------------------------------------------------------------

struct GradOptions {
  std::uint64_t seed = 3;
  std::size_t layers = 2;
  std::size_t hidden = 8;
  std::size_t heads = 2;
  std::size_t nodes = 5;
  std::size_t graphs = 2;
  std::string score_map = "both";
  std::string head = "both";
  std::optional<int> radius;
  std::string report;
};

/// Small random dataset: graphs with 2..max_nodes nodes, random targets.
Dataset gradcheck_data(TaskType task, std::size_t count, std::size_t max_nodes, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{task, 1, {}};
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<std::int64_t>(max_nodes)));
    Graph g = random_connected_graph(rng, n, 0.5);
    if (task == TaskType::node_regression) {
      Tensor t(Shape{n, 1});
      for (std::size_t v = 0; v < n; ++v) t[v] = uniform(rng, -2.0, 2.0);
      d.samples.push_back({std::move(g), std::move(t), Tensor(Shape{n, 1}, 1.0)});
    } else {
      d.samples.push_back({std::move(g), Tensor(Shape{1}, static_cast<double>(i % 2)), Tensor(Shape{1}, 1.0)});
    }
  }
  return d;
}

int run_gradcheck(const GradOptions& o, std::ostream& out) {
  if (o.heads == 0 || o.hidden % o.heads != 0) throw ConfigError("--hidden must be a multiple of --heads");
  std::vector<ScoreMap> maps = o.score_map == "both" ? std::vector<ScoreMap>{ScoreMap::softmax, ScoreMap::sigmoid}
                                                     : std::vector<ScoreMap>{parse_score_map(o.score_map)};
  std::vector<HeadType> heads;
  if (o.head == "both" || o.head == "node") heads.push_back(HeadType::node_regression);
  if (o.head == "both" || o.head == "graph") heads.push_back(HeadType::graph_classification);

  json results = json::array();
  double worst = 0.0;
  out << "head                  score map  params  max rel. error\n";
  for (HeadType head : heads) {
    for (ScoreMap map : maps) {
      const TaskType task = head == HeadType::node_regression ? TaskType::node_regression
                                                              : TaskType::graph_classification;
      Dataset data = gradcheck_data(task, o.graphs, o.nodes, o.seed);
      TrainConfig tc;
      tc.routes.histogram_k = 3;
      tc.routes.log_histogram = true;
      tc.routes.distance_bins = DistanceBins::standard(2);
      InformerConfig mc;
      mc.n_layers = o.layers;
      mc.d_hidden = o.hidden;
      mc.attention.n_heads = o.heads;
      mc.attention.d_k = mc.attention.d_v = mc.attention.d_r = o.hidden / o.heads;
      mc.attention.score_map = map;
      if (o.radius) mc.attention.radii = {*o.radius};
      mc.f_route = tc.routes.feature_count();
      mc.head = head;
      InformerModel model(mc, o.seed);
      PreparedDataset prepared(data, tc);
      const GradCheckResult r = model_grad_check(model, prepared);
      worst = std::max(worst, r.max_rel_error);
      char line[160];
      std::snprintf(line, sizeof line, "%-21s %-10s %6zu  %.3e\n", to_string(head).c_str(),
                    to_string(map).c_str(), r.coordinates, r.max_rel_error);
      out << line;
      results.push_back({{"head", to_string(head)},
                         {"score_map", to_string(map)},
                         {"coordinates", r.coordinates},
                         {"max_rel_error", r.max_rel_error},
                         {"analytic", r.analytic},
                         {"numeric", r.numeric}});
    }
  }
  const bool pass = worst < kGradTolerance;
  out << "max relative error " << fmt("%.3e", worst) << (pass ? " < " : " >= ") << fmt("%g", kGradTolerance)
      << (pass ? "  PASS\n" : "  FAIL\n");
  write_json(o.report, {{"command", "gradcheck"},
                        {"seed", o.seed},
                        {"layers", o.layers},
                        {"hidden", o.hidden},
                        {"heads", o.heads},
                        {"results", results},
                        {"max_rel_error", worst},
                        {"tolerance", kGradTolerance},
                        {"pass", pass}});
  return pass ? 0 : 1;
}

// train-toy --------------------------------------------------------------------

struct ToyOptions {
  std::string task = "node";
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> data_seed;
  std::size_t train = 500;
  std::size_t val = 100;
  std::size_t epochs = 100;
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t layers = 2;
  std::size_t hidden = 48;
  std::size_t heads = 6;
  std::size_t key = 8;
  int radius = 2;
  std::size_t k = 4;
  bool raw_histogram = false;
  int distance_bins = 0;
  std::string score_map = "softmax";
  double dropout = 0.0;
  bool ablate = false;
  bool no_pool = false;
  bool no_standardize = false;
  std::string checkpoint;
  std::string report;
  std::string export_data;
};

TrainConfig toy_train_config(const ToyOptions& o) {
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.learning_rate = o.lr;
  tc.batch_size = o.batch;
  tc.seed = o.seed;
  tc.routes.histogram_k = o.k;
  tc.routes.log_histogram = !o.raw_histogram;
  if (o.distance_bins > 0) tc.routes.distance_bins = DistanceBins::standard(o.distance_bins);
  tc.zero_routes = o.ablate;
  tc.standardize_targets = !o.no_standardize;
  tc.eval_train_every_epoch = false;
  return tc;
}

InformerConfig toy_model_config(const ToyOptions& o, TaskType task, const TrainConfig& tc) {
  InformerConfig mc;
  mc.n_layers = o.layers;
  mc.d_hidden = o.hidden;
  mc.attention.n_heads = o.heads;
  mc.attention.d_k = mc.attention.d_v = mc.attention.d_r = o.key;
  mc.attention.score_map = parse_score_map(o.score_map);
  if (o.radius >= 0) mc.attention.radii = {o.radius};
  mc.f_route = tc.routes.feature_count();
  mc.dropout = o.dropout;
  mc.pool = !o.no_pool;
  mc.head = task == TaskType::node_regression ? HeadType::node_regression : HeadType::graph_classification;
  return mc;
}

int run_train_toy(const ToyOptions& o, std::ostream& out) {
  const TaskType task = task_from_string(o.task);
  const std::uint64_t data_seed = o.data_seed.value_or(o.seed);
  Dataset all = task == TaskType::node_regression ? synth_node_task(o.train + o.val, data_seed)
                                                  : synth_graph_task(o.train + o.val, data_seed);
  Dataset train_set = all.slice(0, o.train), val_set = all.slice(o.train, o.train + o.val);
  if (!o.export_data.empty()) {
    save_dataset(train_set, std::filesystem::path(o.export_data) / "train");
    save_dataset(val_set, std::filesystem::path(o.export_data) / "val");
  }
  TrainConfig tc = toy_train_config(o);
  tc.metric = task == TaskType::node_regression ? StopMetric::mae : StopMetric::auc;
  InformerConfig mc = toy_model_config(o, task, tc);
  InformerModel model(mc, o.seed);

  const std::string metric = tc.metric == StopMetric::mae ? "MAE" : "AUC";
  out << "train-toy " << o.task << (o.ablate ? " (route features zeroed)" : "") << ": " << o.train << " train / "
      << o.val << " validation graphs, seed " << o.seed << ", " << model.parameters().scalar_count()
      << " parameters\n";
  TrainResult r = train(model, train_set, val_set, tc);
  for (const EpochRecord& e : r.history) {
    if ((e.epoch + 1) % 10 == 0 || e.epoch == 0) {
      out << "epoch " << (e.epoch + 1) << "  lr " << fmt("%.2e", e.learning_rate) << "  loss "
          << fmt("%.4f", e.train_loss) << "  val " << metric << " "
          << (e.val_metric ? fmt("%.4f", *e.val_metric) : std::string("n/a")) << "\n";
    }
  }
  out << "best epoch " << (r.best_epoch + 1) << ": val " << metric << " "
      << (r.best_val_metric ? fmt("%.4f", *r.best_val_metric) : std::string("n/a")) << ", train " << metric << " "
      << (r.best_train_metric ? fmt("%.4f", *r.best_train_metric) : std::string("n/a")) << "\n";

  const std::string ckpt =
      o.checkpoint.empty() ? "gi-" + o.task + "-seed" + std::to_string(o.seed) + ".ckpt.json" : o.checkpoint;
  write_json(ckpt, r.checkpoint);
  out << "checkpoint written to " << ckpt << "\n";
  json report = r.to_json();
  report["command"] = "train-toy";
  report["task"] = o.task;
  report["seed"] = o.seed;
  report["data_seed"] = data_seed;
  report["config"] = {{"model", mc.to_json()}, {"train", tc.to_json()}};
  report["checkpoint_path"] = ckpt;
  write_json(o.report, report);
  return 0;
}

// attn-dump --------------------------------------------------------------------

struct DumpOptions {
  GraphSources sources;
  std::string checkpoint;
  std::uint64_t seed = 1;
  std::string score_map = "sigmoid";
  std::string output;
};

struct LoadedModel {
  InformerModel model;
  RouteFeatureConfig routes;
  bool zero_routes = false;
};

LoadedModel load_checkpoint(const std::string& path) {
  const json doc = read_json(path);
  RouteFeatureConfig routes;
  InformerModel model = InformerModel::from_checkpoint(doc);
  if (doc.contains("routes")) {
    routes = route_config_from_json(doc["routes"]);
  } else {
    routes.histogram_k = model.config().f_route;
  }
  if (routes.feature_count() != model.config().f_route) {
    throw ConfigError(path + ": route config gives " + std::to_string(routes.feature_count()) +
                      " features, model expects " + std::to_string(model.config().f_route));
  }
  return {std::move(model), routes, doc.value("zero_routes", false)};
}

int run_attn_dump(const DumpOptions& o, std::ostream& out) {
  GraphSources src = o.sources;
  if (src.sets.empty() && src.graph6_files.empty() && src.json_files.empty() && src.graph6.empty()) {
    src.sets = {"RegN6D3"};
  }
  const std::vector<Graph> graphs = flatten(collect_groups(src));
  if (graphs.empty()) throw ConfigError("attn-dump: no graphs given");

  std::optional<LoadedModel> loaded;
  if (!o.checkpoint.empty()) {
    loaded.emplace(load_checkpoint(o.checkpoint));
  } else {
    SeparationConfig cfg = isomorphism_config(o.seed);
    cfg.model.attention.score_map = parse_score_map(o.score_map);
    RouteFeatureConfig rc;
    rc.histogram_k = cfg.histogram_k;
    loaded.emplace(LoadedModel{InformerModel(cfg.model, o.seed), rc, false});
  }
  InformerModel& model = loaded->model;
  std::vector<RouteTensor> routes;
  for (const Graph& g : graphs) {
    RouteTensor r = route_features(g, loaded->routes);
    if (loaded->zero_routes) r.values().fill(0.0);
    routes.push_back(std::move(r));
  }
  const BatchedGraphs b = batch(graphs, routes, model.config().pool);
  std::vector<std::vector<Tensor>> probs;
  Tape tape;
  ForwardOptions fwd;
  fwd.attention = &probs;
  model.encode(tape, b, fwd);
  const auto maps = attention_maps(probs, b);

  for (const AttentionMap& m : maps) {
    out << "layer " << m.layer << " head " << m.head << " graph " << graphs[m.sample].name() << "\n";
    out << "      ";
    for (const auto& label : m.node_labels) out << std::string(8 - std::min<std::size_t>(8, label.size()), ' ') << label;
    out << "\n";
    const std::size_t n = m.node_labels.size();
    for (std::size_t i = 0; i < n; ++i) {
      out << std::string(6 - std::min<std::size_t>(6, m.node_labels[i].size()), ' ') << m.node_labels[i];
      for (std::size_t j = 0; j < n; ++j) out << fmt("%8.4f", m.matrix[i * n + j]);
      out << "\n";
    }
  }
  json doc = attention_dump_json(maps);
  for (auto& item : doc) item["graph"] = graphs[item["sample"].get<std::size_t>()].name();
  write_json(o.output, doc);
  return 0;
}

// wl-compare -------------------------------------------------------------------

struct WLOptions {
  GraphSources sources;
  std::string report;
};

int run_wl_compare(const WLOptions& o, std::ostream& out) {
  GraphSources src = o.sources;
  if (src.sets.empty() && src.graph6_files.empty() && src.json_files.empty() && src.graph6.empty()) {
    src.sets = {"RegN6D3", "RegN8D3", "Q4vsHoffman"};
  }
  json groups_json = json::array();
  for (const GraphGroup& group : collect_groups(src)) {
    out << group.name << "\n";
    json graphs_json = json::array();
    for (const Graph& g : group.graphs) {
      const WLColoring c = wl_refine(g);
      out << "  " << g.name() << ": n=" << g.size() << ", WL classes " << c.class_count() << " after "
          << c.iterations() << " iterations\n";
      graphs_json.push_back({{"name", g.name()},
                             {"n", g.size()},
                             {"wl_classes", c.class_count()},
                             {"wl_iterations", c.iterations()},
                             {"colors", c.final_colors()}});
    }
    json pairs = json::array();
    std::size_t wl_sep = 0, spec_sep = 0, total = 0;
    for (std::size_t i = 0; i < group.graphs.size(); ++i) {
      for (std::size_t j = i + 1; j < group.graphs.size(); ++j) {
        const bool wl = wl_distinguish(group.graphs[i], group.graphs[j]) == WLVerdict::separated;
        const bool spec = spectrum_compare(group.graphs[i], group.graphs[j]) == SpectrumVerdict::different;
        wl_sep += wl;
        spec_sep += spec;
        ++total;
        out << "  " << group.graphs[i].name() << " vs " << group.graphs[j].name() << ": WL "
            << (wl ? "separated" : "indistinguishable") << ", spectra " << (spec ? "different" : "cospectral")
            << "\n";
        pairs.push_back({{"a", group.graphs[i].name()},
                         {"b", group.graphs[j].name()},
                         {"wl", wl ? "separated" : "indistinguishable"},
                         {"spectrum", spec ? "different" : "cospectral"}});
      }
    }
    out << "  WL separates " << wl_sep << " / " << total << " pairs; spectra differ for " << spec_sep << " / "
        << total << "\n";
    groups_json.push_back({{"set", group.name},
                           {"graphs", graphs_json},
                           {"pairs", pairs},
                           {"pairs_separated_wl", wl_sep},
                           {"pairs_spectrum_different", spec_sep},
                           {"pairs_tested", total}});
  }
  write_json(o.report, {{"command", "wl-compare"}, {"groups", groups_json}});
  return 0;
}

// eval -------------------------------------------------------------------------

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string synth;
  std::size_t count = 100;
  std::uint64_t data_seed = 1;
  std::size_t batch = 64;
  bool predictions = false;
  std::string report;
};

int run_eval(const EvalOptions& o, std::ostream& out) {
  if (o.data.empty() == o.synth.empty()) throw ConfigError("eval: give exactly one of --data or --synth");
  LoadedModel loaded = load_checkpoint(o.checkpoint);
  Dataset data;
  if (!o.data.empty()) {
    data = load_dataset(o.data);
  } else {
    data = task_from_string(o.synth) == TaskType::node_regression ? synth_node_task(o.count, o.data_seed)
                                                                  : synth_graph_task(o.count, o.data_seed);
  }
  const HeadType expected =
      data.task == TaskType::node_regression ? HeadType::node_regression : HeadType::graph_classification;
  if (loaded.model.config().head != expected) {
    throw ConfigError("eval: checkpoint has a " + to_string(loaded.model.config().head) + " head but the data is " +
                      to_string(data.task));
  }
  TrainConfig tc;
  tc.routes = loaded.routes;
  tc.zero_routes = loaded.zero_routes;
  PreparedDataset prepared(data, tc);
  const Evaluation ev = evaluate(loaded.model, prepared, o.batch);
  out << "graphs " << data.size() << ", loss " << fmt("%.6f", ev.loss);
  if (ev.mae) out << ", MAE " << fmt("%.6f", *ev.mae);
  if (data.task == TaskType::graph_classification) {
    out << ", AUC " << (ev.auc ? fmt("%.6f", *ev.auc) : std::string("undefined (single class)"));
  }
  out << "\n";
  json report = {{"command", "eval"},
                 {"checkpoint", o.checkpoint},
                 {"graphs", data.size()},
                 {"task", to_string(data.task)},
                 {"loss", ev.loss},
                 {"mae", ev.mae ? json(*ev.mae) : json(nullptr)},
                 {"auc", ev.auc ? json(*ev.auc) : json(nullptr)}};
  if (o.predictions) {
    json preds = json::array();
    for (const Tensor& p : ev.predictions) preds.push_back(std::vector<double>(p.data().begin(), p.data().end()));
    report["predictions"] = preds;
  }
  write_json(o.report, report);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph Informer: route-based graph attention, isomorphism lab and toy training"};
  app.name("gi");
  app.require_subcommand(1);

  IsoOptions iso;
  auto* iso_cmd = app.add_subcommand("iso-test", "Separate graphs with an untrained injective Graph Informer");
  add_graph_sources(iso_cmd, iso.sources);
  iso_cmd->add_option("--seed", iso.seed, "First random seed")->capture_default_str();
  iso_cmd->add_option("--seeds", iso.seeds, "Number of consecutive seeds to run")->capture_default_str();
  iso_cmd->add_option("--threshold", iso.threshold, "Embedding difference threshold")->capture_default_str();
  iso_cmd->add_option("--score-map", iso.score_map, "sigmoid, softmax or both")
      ->check(CLI::IsMember({"sigmoid", "softmax", "both"}))
      ->capture_default_str();
  iso_cmd->add_option("-k,--route-k", iso.k, "Route histogram length")->capture_default_str();
  iso_cmd->add_option("--norm", iso.norm, "Embedding distance: max-abs or l2")
      ->check(CLI::IsMember({"max-abs", "l2"}))
      ->capture_default_str();
  iso_cmd->add_option("--report", iso.report, "Write a JSON report to this path");
  iso_cmd->add_flag("--require-all", iso.require_all, "Exit 1 unless every graph is separated for every seed");

  GradOptions grad;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare model gradients with central differences");
  grad_cmd->add_option("--seed", grad.seed)->capture_default_str();
  grad_cmd->add_option("--layers", grad.layers)->capture_default_str();
  grad_cmd->add_option("--hidden", grad.hidden)->capture_default_str();
  grad_cmd->add_option("--heads", grad.heads)->capture_default_str();
  grad_cmd->add_option("--nodes", grad.nodes, "Largest graph size")->capture_default_str();
  grad_cmd->add_option("--graphs", grad.graphs, "Graphs in the batch")->capture_default_str();
  grad_cmd->add_option("--radius", grad.radius, "Attention radius (default unlimited)");
  grad_cmd->add_option("--score-map", grad.score_map)
      ->check(CLI::IsMember({"sigmoid", "softmax", "both"}))
      ->capture_default_str();
  grad_cmd->add_option("--head", grad.head)->check(CLI::IsMember({"node", "graph", "both"}))->capture_default_str();
  grad_cmd->add_option("--report", grad.report, "Write a JSON report to this path");

  ToyOptions toy;
  auto* toy_cmd = app.add_subcommand("train-toy", "Train on a synthetic node or graph task");
  toy_cmd->add_option("task", toy.task, "node or graph")->required()->check(CLI::IsMember({"node", "graph"}));
  toy_cmd->add_option("--seed", toy.seed, "Model initialization and shuffling seed")->capture_default_str();
  toy_cmd->add_option("--data-seed", toy.data_seed, "Dataset seed (default: --seed)");
  toy_cmd->add_option("--train", toy.train, "Training graphs")->capture_default_str();
  toy_cmd->add_option("--val", toy.val, "Validation graphs")->capture_default_str();
  toy_cmd->add_option("--epochs", toy.epochs)->capture_default_str();
  toy_cmd->add_option("--lr", toy.lr)->capture_default_str();
  toy_cmd->add_option("--batch", toy.batch)->capture_default_str();
  toy_cmd->add_option("--layers", toy.layers)->capture_default_str();
  toy_cmd->add_option("--hidden", toy.hidden)->capture_default_str();
  toy_cmd->add_option("--heads", toy.heads)->capture_default_str();
  toy_cmd->add_option("--key", toy.key, "d_k = d_v = d_r")->capture_default_str();
  toy_cmd->add_option("--radius", toy.radius, "Attention radius, -1 for unlimited")->capture_default_str();
  toy_cmd->add_option("-k,--route-k", toy.k, "Route histogram length")->capture_default_str();
  toy_cmd->add_flag("--raw-histogram", toy.raw_histogram, "Use raw walk counts instead of log1p");
  toy_cmd->add_option("--distance-bins", toy.distance_bins, "Exact distance bins to append (0: none)")
      ->capture_default_str();
  toy_cmd->add_option("--score-map", toy.score_map)->check(CLI::IsMember({"sigmoid", "softmax"}))->capture_default_str();
  toy_cmd->add_option("--dropout", toy.dropout)->capture_default_str();
  toy_cmd->add_flag("--ablate", toy.ablate, "Zero all route features");
  toy_cmd->add_flag("--no-pool", toy.no_pool, "Drop the pool node");
  toy_cmd->add_flag("--no-standardize", toy.no_standardize, "Train on raw regression targets");
  toy_cmd->add_option("--checkpoint", toy.checkpoint, "Checkpoint path (default gi-<task>-seed<seed>.ckpt.json)");
  toy_cmd->add_option("--report", toy.report, "Write a JSON run report to this path");
  toy_cmd->add_option("--export-data", toy.export_data, "Also write the train/val datasets to this directory");

  DumpOptions dump;
  auto* dump_cmd = app.add_subcommand("attn-dump", "Print every head's attention matrix");
  add_graph_sources(dump_cmd, dump.sources);
  dump_cmd->add_option("--checkpoint", dump.checkpoint, "Trained checkpoint (default: untrained isomorphism model)")
      ->check(CLI::ExistingFile);
  dump_cmd->add_option("--seed", dump.seed, "Seed of the untrained model")->capture_default_str();
  dump_cmd->add_option("--score-map", dump.score_map, "Score map of the untrained model")
      ->check(CLI::IsMember({"sigmoid", "softmax"}))
      ->capture_default_str();
  dump_cmd->add_option("-o,--output", dump.output, "Write the JSON dump to this path");

  WLOptions wl;
  auto* wl_cmd = app.add_subcommand("wl-compare", "1-WL refinement and spectra for every pair in a graph set");
  add_graph_sources(wl_cmd, wl.sources);
  wl_cmd->add_option("--report", wl.report, "Write a JSON report to this path");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data, "Dataset directory (graphs/ and targets.json)")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--synth", ev.synth, "Generate a synthetic dataset: node or graph")
      ->check(CLI::IsMember({"node", "graph"}));
  eval_cmd->add_option("--count", ev.count, "Synthetic graphs")->capture_default_str();
  eval_cmd->add_option("--data-seed", ev.data_seed, "Synthetic dataset seed")->capture_default_str();
  eval_cmd->add_option("--batch", ev.batch)->capture_default_str();
  eval_cmd->add_flag("--predictions", ev.predictions, "Include per-sample predictions in the report");
  eval_cmd->add_option("--report", ev.report, "Write a JSON report to this path");

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "gi: unknown subcommand '" << args.front()
        << "' (expected iso-test, gradcheck, train-toy, attn-dump, wl-compare or eval)\n";
    return 2;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (iso_cmd->parsed()) return run_iso(iso, out);
    if (grad_cmd->parsed()) return run_gradcheck(grad, out);
    if (toy_cmd->parsed()) return run_train_toy(toy, out);
    if (dump_cmd->parsed()) return run_attn_dump(dump, out);
    if (wl_cmd->parsed()) return run_wl_compare(wl, out);
    if (eval_cmd->parsed()) return run_eval(ev, out);
  } catch (const ConfigError& e) {
    err << "gi: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "gi: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "gi: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gi::cli
