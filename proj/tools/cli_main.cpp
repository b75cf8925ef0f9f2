// rwpattern CLI: wires the pipeline end to end over the public C API.
// Exit codes: 0 success, 1 I/O or environment failure, 2 domain error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwpattern.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

int exit_code_of(rwp_status status) {
  if (status == RWP_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", rwp_status_name(status), rwp_last_error());
  return rwp_status_is_domain_error(status) ? 2 : 1;
}

int fail_domain(const char* name, const std::string& message) {
  std::fprintf(stderr, "error: %s: %s\n", name, message.c_str());
  return 2;
}

int fail_io(const std::string& message) {
  std::fprintf(stderr, "error: IO: %s\n", message.c_str());
  return 1;
}

// Every run records its resolved parameters next to its primary output.
int write_run_config(const ordered_json& config, const std::string& primary, bool is_dir) {
  std::string path = is_dir ? primary + "/run_config.json" : primary + ".config.json";
  FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) return fail_io("cannot write " + path);
  std::string text = config.dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), out);
  std::fclose(out);
  return 0;
}

struct MatrixHandle {
  rwp_matrix* ptr = nullptr;
  ~MatrixHandle() { rwp_matrix_free(ptr); }
};
struct RankingHandle {
  rwp_ranking* ptr = nullptr;
  ~RankingHandle() { rwp_ranking_free(ptr); }
};
struct ModelHandle {
  rwp_model* ptr = nullptr;
  ~ModelHandle() { rwp_model_free(ptr); }
};

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs, std::string* error) {
  std::vector<std::string> files;
  for (const auto& input : inputs) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      std::vector<std::string> listed;
      for (const auto& entry : fs::directory_iterator(input, ec)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name == "run_config.json" || name.ends_with(".config.json")) continue;  // our own sidecars
        auto ext = entry.path().extension().string();
        if (ext == ".json" || ext == ".events") listed.push_back(entry.path().string());
      }
      if (ec) {
        *error = "cannot list " + input + ": " + ec.message();
        return {};
      }
      std::sort(listed.begin(), listed.end());
      files.insert(files.end(), listed.begin(), listed.end());
    } else if (fs::exists(input, ec)) {
      files.push_back(input);
    } else {
      *error = "no such input: " + input;
      return {};
    }
  }
  return files;
}

int label_from_name(const std::string& path) {
  return fs::path(path).filename().string().find("infected") != std::string::npos
             ? RWP_LABEL_INFECTED
             : RWP_LABEL_NORMAL;
}

// ---------------------------------------------------------------- ingest ---

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
  int window_width = 0;
  int window_stride = 0;
  bool binary = false;
  int regkey_tail = 1;
};

int run_ingest(const IngestArgs& args) {
  std::string error;
  auto files = expand_inputs(args.inputs, &error);
  if (!error.empty()) return fail_io(error);
  if (files.empty()) return fail_domain("EMPTY_CORPUS", "no report files found");

  std::vector<rwp_report_input> reports;
  std::vector<std::string> truth_paths(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    rwp_report_input input{};
    input.path = files[i].c_str();
    input.label = label_from_name(files[i]);
    std::string truth = files[i] + ".truth";
    if (fs::exists(truth)) {
      truth_paths[i] = truth;
      input.truth_path = truth_paths[i].c_str();
    }
    reports.push_back(input);
  }

  rwp_ingest_opts opts;
  rwp_ingest_opts_default(&opts);
  opts.window_width = args.window_width;
  opts.window_stride = args.window_stride;
  opts.binary_counts = args.binary ? 1 : 0;
  opts.regkey_tail_components = args.regkey_tail;

  MatrixHandle matrix;
  if (rwp_status st = rwp_matrix_build(reports.data(), reports.size(), &opts, &matrix.ptr);
      st != RWP_OK)
    return exit_code_of(st);
  if (rwp_status st = rwp_matrix_save(matrix.ptr, args.out.c_str()); st != RWP_OK)
    return exit_code_of(st);

  std::printf("documents %zu vocabulary %zu\n", rwp_matrix_num_docs(matrix.ptr),
              rwp_matrix_vocab_size(matrix.ptr));

  ordered_json config;
  config["command"] = "ingest";
  config["inputs"] = files;
  config["out"] = args.out;
  config["window_width"] = args.window_width;
  config["window_stride"] = args.window_stride;
  config["binary_counts"] = args.binary;
  config["regkey_tail_components"] = args.regkey_tail;
  return write_run_config(config, args.out, false);
}

// ------------------------------------------------------------------ rank ---

struct RankArgs {
  std::string matrix;
  std::string method = "tfidf";
  std::string out;
  std::vector<std::string> targets;
  double ridge_scale = 1e-6;
  rwp_et_config et{};
  std::string model_out;
  std::string importance_out;
  std::string prune_out;
  double prune_min_score = 0.0;
  bool prune_drop_zero_variance = false;
};

int run_rank(const RankArgs& args) {
  MatrixHandle matrix;
  if (rwp_status st = rwp_matrix_load(args.matrix.c_str(), &matrix.ptr); st != RWP_OK)
    return exit_code_of(st);

  RankingHandle ranking;
  ModelHandle model;
  if (args.method == "tfidf") {
    std::vector<const char*> ids;
    for (const auto& t : args.targets) ids.push_back(t.c_str());
    if (rwp_status st =
            rwp_rank_tfidf(matrix.ptr, ids.empty() ? nullptr : ids.data(), ids.size(), &ranking.ptr);
        st != RWP_OK)
      return exit_code_of(st);
  } else if (args.method == "lda") {
    if (rwp_status st = rwp_rank_lda(matrix.ptr, args.ridge_scale, &ranking.ptr); st != RWP_OK)
      return exit_code_of(st);
  } else if (args.method == "et") {
    if (rwp_status st = rwp_et_fit(matrix.ptr, &args.et, &model.ptr); st != RWP_OK)
      return exit_code_of(st);
    if (rwp_status st = rwp_rank_et(model.ptr, matrix.ptr, 0, &ranking.ptr); st != RWP_OK)
      return exit_code_of(st);
    std::string model_path = args.model_out.empty() ? args.out + ".model" : args.model_out;
    if (rwp_status st = rwp_model_save(model.ptr, model_path.c_str()); st != RWP_OK)
      return exit_code_of(st);
    if (!args.importance_out.empty()) {
      RankingHandle importance;
      if (rwp_status st = rwp_rank_et(model.ptr, matrix.ptr, 1, &importance.ptr); st != RWP_OK)
        return exit_code_of(st);
      if (rwp_status st = rwp_ranking_save(importance.ptr, args.importance_out.c_str());
          st != RWP_OK)
        return exit_code_of(st);
    }
  } else {
    return fail_domain("INVALID_ARGUMENT", "unknown method: " + args.method);
  }

  if (rwp_status st = rwp_ranking_save(ranking.ptr, args.out.c_str()); st != RWP_OK)
    return exit_code_of(st);

  if (!args.prune_out.empty()) {
    MatrixHandle pruned;
    if (rwp_status st = rwp_matrix_prune(matrix.ptr, ranking.ptr, args.prune_min_score,
                                         args.prune_drop_zero_variance ? 1 : 0, &pruned.ptr);
        st != RWP_OK)
      return exit_code_of(st);
    if (rwp_status st = rwp_matrix_save(pruned.ptr, args.prune_out.c_str()); st != RWP_OK)
      return exit_code_of(st);
    std::printf("pruned vocabulary %zu of %zu\n", rwp_matrix_vocab_size(pruned.ptr),
                rwp_matrix_vocab_size(matrix.ptr));
  }
  std::printf("ranked %zu features (%s)\n", rwp_ranking_size(ranking.ptr), args.method.c_str());

  ordered_json config;
  config["command"] = "rank";
  config["matrix"] = args.matrix;
  config["method"] = args.method;
  config["out"] = args.out;
  if (args.method == "tfidf") config["targets"] = args.targets;
  if (args.method == "lda") config["ridge_scale"] = args.ridge_scale;
  if (args.method == "et") {
    config["et"] = {{"n_trees", args.et.n_trees},
                    {"k_candidates", args.et.k_candidates},
                    {"n_min", args.et.n_min},
                    {"max_depth", args.et.max_depth},
                    {"weight_infected", args.et.weight_infected},
                    {"weight_normal", args.et.weight_normal},
                    {"seed", args.et.seed},
                    {"n_threads", args.et.n_threads}};
    config["model_out"] = args.model_out.empty() ? args.out + ".model" : args.model_out;
    if (!args.importance_out.empty()) config["importance_out"] = args.importance_out;
  }
  if (!args.prune_out.empty()) {
    config["prune_out"] = args.prune_out;
    config["prune_min_score"] = args.prune_min_score;
    config["prune_drop_zero_variance"] = args.prune_drop_zero_variance;
  }
  return write_run_config(config, args.out, false);
}

// ---------------------------------------------------------------- detect ---

struct DetectArgs {
  std::string model;
  std::string matrix;
  std::string predictions_out;
  std::string metrics_out;
};

int run_detect(const DetectArgs& args) {
  ModelHandle model;
  if (rwp_status st = rwp_model_load(args.model.c_str(), &model.ptr); st != RWP_OK)
    return exit_code_of(st);
  MatrixHandle matrix;
  if (rwp_status st = rwp_matrix_load(args.matrix.c_str(), &matrix.ptr); st != RWP_OK)
    return exit_code_of(st);

  rwp_confusion counts{};
  if (rwp_status st = rwp_model_detect(model.ptr, matrix.ptr, args.predictions_out.c_str(),
                                       args.metrics_out.c_str(), &counts);
      st != RWP_OK)
    return exit_code_of(st);

  std::printf("tp %lld fp %lld fn %lld tn %lld\n", counts.tp, counts.fp, counts.fn, counts.tn);

  ordered_json config;
  config["command"] = "detect";
  config["model"] = args.model;
  config["matrix"] = args.matrix;
  config["predictions_out"] = args.predictions_out;
  config["metrics_out"] = args.metrics_out;
  return write_run_config(config, args.metrics_out, false);
}

// ----------------------------------------------------------------- graph ---

struct GraphArgs {
  std::string model;
  std::string matrix;
  std::string out;
  size_t tree_index = 0;
  rwp_graph_style style{};
  std::string malicious_color = "blue";
  std::string normal_color = "brown";
};

int run_graph(GraphArgs& args) {
  ModelHandle model;
  if (rwp_status st = rwp_model_load(args.model.c_str(), &model.ptr); st != RWP_OK)
    return exit_code_of(st);
  MatrixHandle matrix;
  if (rwp_status st = rwp_matrix_load(args.matrix.c_str(), &matrix.ptr); st != RWP_OK)
    return exit_code_of(st);

  args.style.malicious_color = args.malicious_color.c_str();
  args.style.normal_color = args.normal_color.c_str();

  char* text = nullptr;
  if (rwp_status st =
          rwp_model_to_dot(model.ptr, args.tree_index, matrix.ptr, &args.style, &text);
      st != RWP_OK)
    return exit_code_of(st);
  std::unique_ptr<char, decltype(&rwp_string_free)> guard(text, &rwp_string_free);

  if (rwp_status st = rwp_validate_dot(text); st != RWP_OK) return exit_code_of(st);

  FILE* out = std::fopen(args.out.c_str(), "wb");
  if (!out) return fail_io("cannot write " + args.out);
  std::fputs(text, out);
  std::fclose(out);
  std::printf("wrote %s\n", args.out.c_str());

  ordered_json config;
  config["command"] = "graph";
  config["model"] = args.model;
  config["matrix"] = args.matrix;
  config["out"] = args.out;
  config["tree_index"] = args.tree_index;
  config["max_levels"] = args.style.max_levels;
  config["malicious_color"] = args.malicious_color;
  config["normal_color"] = args.normal_color;
  config["annotate_class_counts"] = args.style.annotate_class_counts != 0;
  config["annotate_impurity"] = args.style.annotate_impurity != 0;
  config["annotate_correlation"] = args.style.annotate_correlation != 0;
  return write_run_config(config, args.out, false);
}

// ----------------------------------------------------------- experiments ---

struct ExperimentsArgs {
  std::string fixture;
  std::string out_dir;
  rwp_experiment_opts opts{};
};

int run_experiments_cmd(const ExperimentsArgs& args) {
  if (rwp_status st = rwp_run_experiments(args.fixture.c_str(), &args.opts, args.out_dir.c_str());
      st != RWP_OK)
    return exit_code_of(st);
  std::printf("wrote experiment bundle to %s\n", args.out_dir.c_str());

  ordered_json config;
  config["command"] = "experiments";
  config["fixture"] = args.fixture;
  config["out_dir"] = args.out_dir;
  config["seed"] = args.opts.seed;
  config["n_normal"] = args.opts.n_normal;
  config["events_per_doc"] = args.opts.events_per_doc;
  config["injection_rate"] = args.opts.injection_rate;
  config["top_k"] = args.opts.top_k;
  config["ridge_scale"] = args.opts.ridge_scale;
  config["doc_prune_min_score"] = args.opts.doc_prune_min_score;
  config["window_prune_min_score"] = args.opts.window_prune_min_score;
  config["window_width"] = args.opts.window_width;
  config["window_stride"] = args.opts.window_stride;
  config["detection_infected_streams"] = args.opts.detection_infected_streams;
  config["train_fraction"] = args.opts.train_fraction;
  config["et_n_trees"] = args.opts.et.n_trees;
  return write_run_config(config, args.out_dir, true);
}

// ----------------------------------------------------------------- synth ---

struct SynthArgs {
  std::string fixture = "none";
  std::string out_dir;
  rwp_synth_opts opts{};
  std::string format = "report";
};

int run_synth(SynthArgs& args) {
  if (args.format != "report" && args.format != "stream")
    return fail_domain("INVALID_ARGUMENT", "format must be report or stream");
  args.opts.stream_format = args.format == "stream" ? 1 : 0;
  if (rwp_status st = rwp_synth_write_corpus(
          args.fixture == "none" ? nullptr : args.fixture.c_str(), &args.opts,
          args.out_dir.c_str());
      st != RWP_OK)
    return exit_code_of(st);
  std::printf("wrote corpus to %s\n", args.out_dir.c_str());

  ordered_json config;
  config["command"] = "synth";
  config["fixture"] = args.fixture;
  config["out_dir"] = args.out_dir;
  config["seed"] = args.opts.seed;
  config["n_normal"] = args.opts.n_normal;
  config["events_per_doc"] = args.opts.events_per_doc;
  config["n_infected"] = args.opts.n_infected;
  config["injection_rate"] = args.opts.injection_rate;
  config["confuser_fraction"] = args.opts.confuser_fraction;
  config["format"] = args.format;
  return write_run_config(config, args.out_dir, true);
}

void add_et_options(CLI::App* cmd, rwp_et_config& et) {
  cmd->add_option("--trees", et.n_trees, "number of trees");
  cmd->add_option("--k-candidates", et.k_candidates,
                  "attributes per split (0 = sqrt, -1 = all)");
  cmd->add_option("--n-min", et.n_min, "minimum samples to split");
  cmd->add_option("--max-depth", et.max_depth, "depth cap (0 = unlimited)");
  cmd->add_option("--weight-infected", et.weight_infected, "class weight for infected");
  cmd->add_option("--weight-normal", et.weight_normal, "class weight for normal");
  cmd->add_option("--seed", et.seed, "forest seed");
  cmd->add_option("--threads", et.n_threads, "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavioral pattern extraction and early detection from host activity logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "parse reports into a term matrix artifact");
  cmd_ingest->add_option("inputs", ingest.inputs, "report files or directories")->required();
  cmd_ingest->add_option("--out", ingest.out, "matrix artifact path")->required();
  cmd_ingest->add_option("--window-width", ingest.window_width,
                         "events per detection window (0 = whole report)");
  cmd_ingest->add_option("--window-stride", ingest.window_stride, "window stride (0 = width)");
  cmd_ingest->add_flag("--binary", ingest.binary, "record presence instead of counts");
  cmd_ingest->add_option("--regkey-tail", ingest.regkey_tail,
                         "registry tail components in canonical keys");

  RankArgs rank;
  rwp_et_config_default(&rank.et);
  auto* cmd_rank = app.add_subcommand("rank", "score and rank features");
  cmd_rank->add_option("--matrix", rank.matrix, "matrix artifact")->required();
  cmd_rank->add_option("--method", rank.method, "tfidf | lda | et")->required();
  cmd_rank->add_option("--out", rank.out, "ranked list output")->required();
  cmd_rank->add_option("--targets", rank.targets,
                       "tfidf target document ids (default: all infected)");
  cmd_rank->add_option("--ridge-scale", rank.ridge_scale, "lda ridge scale");
  cmd_rank->add_option("--model-out", rank.model_out, "model path (et; default <out>.model)");
  cmd_rank->add_option("--importance-out", rank.importance_out,
                       "also write the impurity-importance ordering (et)");
  cmd_rank->add_option("--prune-out", rank.prune_out, "write a pruned matrix artifact");
  cmd_rank->add_option("--prune-min-score", rank.prune_min_score, "minimum |score| kept");
  cmd_rank->add_flag("--prune-drop-zero-variance", rank.prune_drop_zero_variance,
                     "also drop constant columns");
  add_et_options(cmd_rank, rank.et);

  DetectArgs detect;
  auto* cmd_detect = app.add_subcommand("detect", "classify documents with a trained model");
  cmd_detect->add_option("--model", detect.model, "model artifact")->required();
  cmd_detect->add_option("--matrix", detect.matrix, "matrix artifact")->required();
  cmd_detect->add_option("--predictions-out", detect.predictions_out, "predictions CSV")
      ->required();
  cmd_detect->add_option("--metrics-out", detect.metrics_out, "metrics CSV")->required();

  GraphArgs graph;
  rwp_graph_style_default(&graph.style);
  bool no_counts = false, no_impurity = false, no_corr = false;
  auto* cmd_graph = app.add_subcommand("graph", "export a decision tree as DOT");
  cmd_graph->add_option("--model", graph.model, "model artifact")->required();
  cmd_graph->add_option("--matrix", graph.matrix, "matrix artifact (for coloring)")->required();
  cmd_graph->add_option("--out", graph.out, "DOT output path")->required();
  cmd_graph->add_option("--tree-index", graph.tree_index, "tree to export");
  cmd_graph->add_option("--max-levels", graph.style.max_levels, "levels drawn before eliding");
  cmd_graph->add_option("--malicious-color", graph.malicious_color, "color for malicious splits");
  cmd_graph->add_option("--normal-color", graph.normal_color, "color for normal splits");
  cmd_graph->add_flag("--no-class-counts", no_counts, "omit class count annotations");
  cmd_graph->add_flag("--no-impurity", no_impurity, "omit impurity annotations");
  cmd_graph->add_flag("--no-correlation", no_corr, "omit correlation annotations");

  ExperimentsArgs experiments;
  rwp_experiment_opts_default(&experiments.opts);
  auto* cmd_exp = app.add_subcommand("experiments", "run the three-experiment harness");
  cmd_exp->add_option("--fixture", experiments.fixture, "fixture name")->required();
  cmd_exp->add_option("--out-dir", experiments.out_dir, "bundle directory")->required();
  cmd_exp->add_option("--seed", experiments.opts.seed, "corpus seed");
  cmd_exp->add_option("--normal", experiments.opts.n_normal, "baseline normal documents");
  cmd_exp->add_option("--events-per-doc", experiments.opts.events_per_doc, "events per document");
  cmd_exp->add_option("--rate", experiments.opts.injection_rate,
                      "planted events per 100 ambient events");
  cmd_exp->add_option("--top-k", experiments.opts.top_k, "stability top-k");
  cmd_exp->add_option("--ridge-scale", experiments.opts.ridge_scale, "lda ridge scale");
  cmd_exp->add_option("--doc-prune-min-score", experiments.opts.doc_prune_min_score,
                      "prune threshold for the report pipeline");
  cmd_exp->add_option("--window-prune-min-score", experiments.opts.window_prune_min_score,
                      "prune threshold for the window pipeline");
  cmd_exp->add_option("--window-width", experiments.opts.window_width, "detection window width");
  cmd_exp->add_option("--window-stride", experiments.opts.window_stride, "detection window stride");
  cmd_exp->add_option("--infected-streams", experiments.opts.detection_infected_streams,
                      "infected streams for detection");
  cmd_exp->add_option("--train-fraction", experiments.opts.train_fraction, "train split fraction");
  cmd_exp->add_option("--trees", experiments.opts.et.n_trees, "number of trees");

  SynthArgs synth;
  rwp_synth_opts_default(&synth.opts);
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic corpus");
  cmd_synth->add_option("--fixture", synth.fixture, "fixture name or 'none'");
  cmd_synth->add_option("--out-dir", synth.out_dir, "corpus directory")->required();
  cmd_synth->add_option("--seed", synth.opts.seed, "generator seed");
  cmd_synth->add_option("--normal", synth.opts.n_normal, "normal documents");
  cmd_synth->add_option("--events-per-doc", synth.opts.events_per_doc, "events per document");
  cmd_synth->add_option("--infected", synth.opts.n_infected, "infected streams");
  cmd_synth->add_option("--rate", synth.opts.injection_rate,
                        "planted events per 100 ambient events");
  cmd_synth->add_option("--confuser", synth.opts.confuser_fraction,
                        "fraction of normal docs receiving one planted event");
  cmd_synth->add_option("--format", synth.format, "report | stream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  if (cmd_ingest->parsed()) return run_ingest(ingest);
  if (cmd_rank->parsed()) return run_rank(rank);
  if (cmd_detect->parsed()) return run_detect(detect);
  if (cmd_graph->parsed()) {
    graph.style.annotate_class_counts = no_counts ? 0 : 1;
    graph.style.annotate_impurity = no_impurity ? 0 : 1;
    graph.style.annotate_correlation = no_corr ? 0 : 1;
    return run_graph(graph);
  }
  if (cmd_exp->parsed()) return run_experiments_cmd(experiments);
  if (cmd_synth->parsed()) return run_synth(synth);
  return 2;
}
