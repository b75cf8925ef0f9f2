#include "core/extra_trees.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace rwpattern {

namespace {

double gini(double w_normal, double w_infected) {
  double w = w_normal + w_infected;
  if (w <= 0.0) return 0.0;
  double pn = w_normal / w;
  double pi = w_infected / w;
  return 1.0 - pn * pn - pi * pi;
}

struct AttrRange {
  int32_t min = 0;
  int32_t max = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TermMatrix& matrix, const EtConfig& cfg, size_t tree_index,
              const FitObserver& observer)
      : matrix_(matrix),
        cfg_(cfg),
        tree_index_(tree_index),
        observer_(observer),
        rng_(derive_seed(cfg.seed, tree_index)),
        range_(matrix.vocab_size()),
        range_epoch_(matrix.vocab_size(), 0),
        nonzero_seen_(matrix.vocab_size(), 0) {}

  std::unique_ptr<TreeNode> build() {
    std::vector<size_t> all(matrix_.num_docs());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    return grow(std::move(all), 1);
  }

 private:
  double weight_of(Label l) const {
    return l == Label::infected ? cfg_.weight_infected : cfg_.weight_normal;
  }

  int resolve_k(size_t n_nonconstant) const {
    if (cfg_.k_candidates == EtConfig::K_ALL) return static_cast<int>(n_nonconstant);
    int k = cfg_.k_candidates;
    if (k == EtConfig::K_SQRT)
      k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(matrix_.vocab_size()))));
    return std::min(k, static_cast<int>(n_nonconstant));
  }

  // Per-attribute (min, max) over the node's rows, implicit zeros included.
  // The epoch trick avoids clearing the per-attribute arrays for every node.
  std::vector<int32_t> scan_ranges(const std::vector<size_t>& rows) {
    ++epoch_;
    for (size_t row : rows) {
      for (const auto& [term, count] : matrix_.documents[row].counts) {
        auto t = static_cast<size_t>(term);
        if (range_epoch_[t] != epoch_) {
          range_epoch_[t] = epoch_;
          range_[t] = {count, count};
          nonzero_seen_[t] = 1;
        } else {
          range_[t].min = std::min(range_[t].min, count);
          range_[t].max = std::max(range_[t].max, count);
          ++nonzero_seen_[t];
        }
      }
    }
    std::vector<int32_t> nonconstant;
    for (size_t t = 0; t < matrix_.vocab_size(); ++t) {
      if (range_epoch_[t] != epoch_) continue;  // all zero: constant
      if (nonzero_seen_[t] < rows.size()) range_[t].min = std::min(range_[t].min, 0);
      if (range_[t].max > range_[t].min) nonconstant.push_back(static_cast<int32_t>(t));
    }
    return nonconstant;
  }

  std::unique_ptr<TreeNode> grow(std::vector<size_t> rows, int depth) {
    auto node = std::make_unique<TreeNode>();
    node->depth = depth;
    for (size_t row : rows) {
      if (matrix_.documents[row].label == Label::infected)
        node->weight_infected += cfg_.weight_infected;
      else
        node->weight_normal += cfg_.weight_normal;
    }
    node->impurity = gini(node->weight_normal, node->weight_infected);

    bool pure = node->weight_normal == 0.0 || node->weight_infected == 0.0;
    bool too_small = rows.size() < static_cast<size_t>(cfg_.n_min);
    bool too_deep = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (pure || too_small || too_deep) {
      audit(rows, {}, -1);
      return node;
    }

    auto nonconstant = scan_ranges(rows);
    if (nonconstant.empty()) {
      audit(rows, {}, -1);
      return node;
    }

    size_t k = static_cast<size_t>(resolve_k(nonconstant.size()));
    rng_.partial_shuffle(nonconstant, k);

    std::vector<SplitCandidate> candidates;
    candidates.reserve(k);
    double total_weight = node->weight_normal + node->weight_infected;
    int best = -1;
    for (size_t c = 0; c < k; ++c) {
      int32_t attr = nonconstant[c];
      const auto& range = range_[static_cast<size_t>(attr)];
      double cut = rng_.open_range(static_cast<double>(range.min), static_cast<double>(range.max));

      double left_n = 0.0, left_i = 0.0;
      for (size_t row : rows) {
        const auto& doc = matrix_.documents[row];
        if (static_cast<double>(doc.count_of(attr)) <= cut) {
          if (doc.label == Label::infected)
            left_i += cfg_.weight_infected;
          else
            left_n += cfg_.weight_normal;
        }
      }
      double right_n = node->weight_normal - left_n;
      double right_i = node->weight_infected - left_i;
      double wl = left_n + left_i, wr = right_n + right_i;
      double decrease = node->impurity - (wl / total_weight) * gini(left_n, left_i) -
                        (wr / total_weight) * gini(right_n, right_i);
      candidates.push_back({attr, cut, decrease});
      if (best < 0 || decrease > candidates[static_cast<size_t>(best)].decrease)
        best = static_cast<int>(c);
    }

    if (best < 0 || !(candidates[static_cast<size_t>(best)].decrease > 0.0)) {
      audit(rows, std::move(candidates), -1);
      return node;
    }

    const auto& chosen = candidates[static_cast<size_t>(best)];
    std::vector<size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (size_t row : rows) {
      if (static_cast<double>(matrix_.documents[row].count_of(chosen.feature)) <= chosen.threshold)
        left_rows.push_back(row);
      else
        right_rows.push_back(row);
    }

    node->is_leaf = false;
    node->feature = chosen.feature;
    node->threshold = chosen.threshold;
    audit(rows, std::move(candidates), best);
    rows.clear();
    rows.shrink_to_fit();
    node->left = grow(std::move(left_rows), depth + 1);
    node->right = grow(std::move(right_rows), depth + 1);
    return node;
  }

  void audit(const std::vector<size_t>& rows, std::vector<SplitCandidate> candidates, int chosen) {
    if (!observer_) return;
    NodeAudit a;
    a.tree_index = tree_index_;
    a.sample_indices = rows;
    a.candidates = std::move(candidates);
    a.chosen = chosen;
    observer_(a);
  }

  const TermMatrix& matrix_;
  const EtConfig& cfg_;
  size_t tree_index_;
  const FitObserver& observer_;
  Rand rng_;

  std::vector<AttrRange> range_;
  std::vector<uint32_t> range_epoch_;
  std::vector<size_t> nonzero_seen_;
  uint32_t epoch_ = 0;
};

void collect_min_depth(const TreeNode* node, std::map<int32_t, int>& out) {
  if (!node || node->is_leaf) return;
  auto [it, inserted] = out.try_emplace(node->feature, node->depth);
  if (!inserted) it->second = std::min(it->second, node->depth);
  collect_min_depth(node->left.get(), out);
  collect_min_depth(node->right.get(), out);
}

void collect_importance(const TreeNode* node, double root_weight, std::vector<double>& out) {
  if (!node || node->is_leaf) return;
  double w = node->weight_normal + node->weight_infected;
  double wl = node->left->weight_normal + node->left->weight_infected;
  double wr = node->right->weight_normal + node->right->weight_infected;
  double decrease = node->impurity - (wl / w) * node->left->impurity - (wr / w) * node->right->impurity;
  out[static_cast<size_t>(node->feature)] += (w / root_weight) * decrease;
  collect_importance(node->left.get(), root_weight, out);
  collect_importance(node->right.get(), root_weight, out);
}

void write_node(const TreeNode* node, std::ostream& out) {
  if (node->is_leaf) {
    out << "L " << node->depth << ' ' << format_double(node->weight_normal) << ' '
        << format_double(node->weight_infected) << ' ' << format_double(node->impurity) << "\n";
    return;
  }
  out << "S " << node->feature << ' ' << format_double(node->threshold) << ' ' << node->depth << ' '
      << format_double(node->weight_normal) << ' ' << format_double(node->weight_infected) << ' '
      << format_double(node->impurity) << "\n";
  write_node(node->left.get(), out);
  write_node(node->right.get(), out);
}

std::unique_ptr<TreeNode> read_node(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::malformed_artifact, "truncated tree");
  std::istringstream row(line);
  std::string kind;
  row >> kind;
  auto node = std::make_unique<TreeNode>();
  if (kind == "L") {
    row >> node->depth >> node->weight_normal >> node->weight_infected >> node->impurity;
    if (!row) fail(Errc::malformed_artifact, "bad leaf row: " + line);
    return node;
  }
  if (kind != "S") fail(Errc::malformed_artifact, "bad node row: " + line);
  node->is_leaf = false;
  row >> node->feature >> node->threshold >> node->depth >> node->weight_normal >>
      node->weight_infected >> node->impurity;
  if (!row) fail(Errc::malformed_artifact, "bad split row: " + line);
  node->left = read_node(in);
  node->right = read_node(in);
  return node;
}

size_t count_nodes(const TreeNode* node) {
  if (!node) return 0;
  if (node->is_leaf) return 1;
  return 1 + count_nodes(node->left.get()) + count_nodes(node->right.get());
}

}  // namespace

std::map<int32_t, int> ExtraTreesModel::min_depth_per_feature() const {
  std::map<int32_t, int> out;
  for (const auto& tree : trees) collect_min_depth(tree.get(), out);
  return out;
}

std::vector<double> ExtraTreesModel::impurity_importance() const {
  std::vector<double> out(vocab_size, 0.0);
  for (const auto& tree : trees) {
    double root_weight = tree->weight_normal + tree->weight_infected;
    if (root_weight > 0.0) collect_importance(tree.get(), root_weight, out);
  }
  if (!trees.empty())
    for (double& v : out) v /= static_cast<double>(trees.size());
  return out;
}

ExtraTreesModel fit_et(const TermMatrix& matrix, const EtConfig& config,
                       const FitObserver& observer) {
  if (matrix.documents.empty()) fail(Errc::empty_corpus, "cannot fit on an empty corpus");
  if (!matrix.has_label(Label::infected) || !matrix.has_label(Label::normal))
    fail(Errc::single_class_corpus, "need at least one sample per class");
  if (config.n_trees < 1) fail(Errc::invalid_argument, "n_trees must be >= 1");
  if (config.n_min < 1) fail(Errc::invalid_argument, "n_min must be >= 1");
  if (config.max_depth < 0) fail(Errc::invalid_argument, "max_depth must be >= 0");
  if (config.k_candidates < EtConfig::K_ALL)
    fail(Errc::invalid_argument, "k_candidates must be -1 (all), 0 (sqrt) or positive");
  if (config.weight_infected <= 0.0 || config.weight_normal <= 0.0)
    fail(Errc::invalid_argument, "class weights must be positive");

  ExtraTreesModel model;
  model.config = config;
  model.vocab_size = matrix.vocab_size();
  model.vocab_hash = matrix.vocab_hash();
  model.trees.resize(static_cast<size_t>(config.n_trees));

  size_t n_threads = observer ? 1 : static_cast<size_t>(config.n_threads);
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, model.trees.size());

  auto build_one = [&](size_t t) {
    TreeBuilder builder(matrix, config, t, observer);
    model.trees[t] = builder.build();
  };

  if (n_threads <= 1) {
    for (size_t t = 0; t < model.trees.size(); ++t) build_one(t);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (size_t w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          size_t t = next.fetch_add(1);
          if (t >= model.trees.size()) return;
          build_one(t);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }
  return model;
}

Prediction predict(const ExtraTreesModel& model, std::span<const double> x) {
  if (x.size() != model.vocab_size)
    fail(Errc::dimension_mismatch, "input dimension does not match model vocabulary");
  if (model.trees.empty()) fail(Errc::internal, "model has no trees");

  double p_normal = 0.0, p_infected = 0.0;
  for (const auto& tree : model.trees) {
    const TreeNode* node = tree.get();
    while (!node->is_leaf)
      node = x[static_cast<size_t>(node->feature)] <= node->threshold ? node->left.get()
                                                                      : node->right.get();
    double w = node->weight_normal + node->weight_infected;
    p_normal += node->weight_normal / w;
    p_infected += node->weight_infected / w;
  }
  Prediction pred;
  pred.p_normal = p_normal / static_cast<double>(model.trees.size());
  pred.p_infected = p_infected / static_cast<double>(model.trees.size());
  pred.label = pred.p_infected >= pred.p_normal ? Label::infected : Label::normal;
  return pred;
}

RankedFeatureList et_feature_rank(const ExtraTreesModel& model,
                                  const std::vector<std::string>& vocabulary) {
  if (vocabulary.size() != model.vocab_size)
    fail(Errc::dimension_mismatch, "vocabulary size does not match model");
  auto depth = model.min_depth_per_feature();
  RankedFeatureList list;
  list.method = RankMethod::et;
  list.entries.reserve(vocabulary.size());
  for (size_t i = 0; i < vocabulary.size(); ++i) {
    auto it = depth.find(static_cast<int32_t>(i));
    if (it == depth.end())
      list.entries.push_back({vocabulary[i], 0.0, 0, true});
    else
      list.entries.push_back({vocabulary[i], -static_cast<double>(it->second), 0, false});
  }
  sort_and_rank(list.entries);
  return list;
}

RankedFeatureList et_importance_rank(const ExtraTreesModel& model,
                                     const std::vector<std::string>& vocabulary) {
  if (vocabulary.size() != model.vocab_size)
    fail(Errc::dimension_mismatch, "vocabulary size does not match model");
  auto depth = model.min_depth_per_feature();
  auto importance = model.impurity_importance();
  RankedFeatureList list;
  list.method = RankMethod::et;
  list.entries.reserve(vocabulary.size());
  for (size_t i = 0; i < vocabulary.size(); ++i) {
    bool used = depth.count(static_cast<int32_t>(i)) > 0;
    list.entries.push_back({vocabulary[i], used ? importance[i] : 0.0, 0, !used});
  }
  sort_and_rank(list.entries);
  return list;
}

void save_model(const ExtraTreesModel& model, std::ostream& out) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(model.vocab_hash));
  out << "rwpattern.model.v1\n";
  out << "vocab_hash " << hash << "\n";
  out << "vocab_size " << model.vocab_size << "\n";
  out << "config n_trees=" << model.config.n_trees << " k_candidates=" << model.config.k_candidates
      << " n_min=" << model.config.n_min << " max_depth=" << model.config.max_depth
      << " weight_infected=" << format_double(model.config.weight_infected)
      << " weight_normal=" << format_double(model.config.weight_normal)
      << " seed=" << model.config.seed << "\n";
  out << "trees " << model.trees.size() << "\n";
  for (size_t t = 0; t < model.trees.size(); ++t) {
    out << "tree " << t << " nodes " << count_nodes(model.trees[t].get()) << "\n";
    write_node(model.trees[t].get(), out);
  }
  out << "end\n";
}

void save_model_file(const ExtraTreesModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open for write: " + path);
  save_model(model, out);
  if (!out) fail(Errc::io, "write failed: " + path);
}

ExtraTreesModel load_model(std::istream& in) {
  std::string line;
  auto need_line = [&](const char* what) -> std::string& {
    if (!std::getline(in, line)) fail(Errc::malformed_artifact, std::string("truncated model: ") + what);
    return line;
  };

  if (need_line("magic") != "rwpattern.model.v1")
    fail(Errc::malformed_artifact, "not a model artifact (bad magic)");

  ExtraTreesModel model;
  if (need_line("vocab_hash").rfind("vocab_hash ", 0) != 0)
    fail(Errc::malformed_artifact, "missing vocab_hash");
  model.vocab_hash = std::stoull(line.substr(11), nullptr, 16);
  if (need_line("vocab_size").rfind("vocab_size ", 0) != 0)
    fail(Errc::malformed_artifact, "missing vocab_size");
  model.vocab_size = std::stoull(line.substr(11));

  if (need_line("config").rfind("config ", 0) != 0) fail(Errc::malformed_artifact, "missing config");
  {
    std::istringstream cfg(line.substr(7));
    std::string kv;
    while (cfg >> kv) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos) fail(Errc::malformed_artifact, "bad config entry: " + kv);
      std::string key = kv.substr(0, eq);
      std::string value = kv.substr(eq + 1);
      try {
        if (key == "n_trees") model.config.n_trees = std::stoi(value);
        else if (key == "k_candidates") model.config.k_candidates = std::stoi(value);
        else if (key == "n_min") model.config.n_min = std::stoi(value);
        else if (key == "max_depth") model.config.max_depth = std::stoi(value);
        else if (key == "weight_infected") model.config.weight_infected = std::stod(value);
        else if (key == "weight_normal") model.config.weight_normal = std::stod(value);
        else if (key == "seed") model.config.seed = std::stoull(value);
      } catch (const std::exception&) {
        fail(Errc::malformed_artifact, "bad config value: " + kv);
      }
    }
  }

  if (need_line("trees").rfind("trees ", 0) != 0) fail(Errc::malformed_artifact, "missing trees count");
  size_t n_trees = std::stoull(line.substr(6));
  model.trees.reserve(n_trees);
  for (size_t t = 0; t < n_trees; ++t) {
    if (need_line("tree header").rfind("tree ", 0) != 0)
      fail(Errc::malformed_artifact, "missing tree header");
    model.trees.push_back(read_node(in));
  }
  if (need_line("end") != "end") fail(Errc::malformed_artifact, "missing end marker");

  for (const auto& tree : model.trees) {
    std::map<int32_t, int> depths;
    collect_min_depth(tree.get(), depths);
    for (const auto& [feature, depth] : depths) {
      (void)depth;
      if (feature < 0 || static_cast<size_t>(feature) >= model.vocab_size)
        fail(Errc::malformed_artifact, "split feature out of range");
    }
  }
  return model;
}

ExtraTreesModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  return load_model(in);
}

}  // namespace rwpattern
