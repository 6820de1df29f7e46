#include "autoidx/decision_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace autoidx {

const char* to_string(WorkloadLabel label) {
  return label == WorkloadLabel::ReadIntensive ? "ReadIntensive" : "WriteIntensive";
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::ReadIntensive: return "ReadIntensive";
    case Classification::WriteIntensive: return "WriteIntensive";
    case Classification::Insufficient: return "Insufficient";
  }
  return "?";
}

double gini_impurity(std::span<const LabeledSnapshot> samples) {
  if (samples.empty()) return 0.0;
  std::size_t reads = 0;
  for (const auto& s : samples) {
    if (s.label == WorkloadLabel::ReadIntensive) ++reads;
  }
  const double p = static_cast<double>(reads) / static_cast<double>(samples.size());
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = 0;
  double threshold = 0.0;
  double reduction = 0.0;
};

std::unique_ptr<TreeNode> make_leaf(std::span<const LabeledSnapshot> samples) {
  auto node = std::make_unique<TreeNode>();
  node->leaf = true;
  std::size_t reads = 0;
  for (const auto& s : samples) {
    if (s.label == WorkloadLabel::ReadIntensive) ++reads;
  }
  const std::size_t writes = samples.size() - reads;
  node->label = reads >= writes ? WorkloadLabel::ReadIntensive : WorkloadLabel::WriteIntensive;
  node->purity = samples.empty()
                     ? 1.0
                     : static_cast<double>(std::max(reads, writes)) /
                           static_cast<double>(samples.size());
  return node;
}

SplitChoice best_split(std::vector<LabeledSnapshot>& samples, std::uint32_t min_leaf) {
  SplitChoice best;
  const double parent = gini_impurity(samples);
  const double n = static_cast<double>(samples.size());
  for (int f = 0; f < 3; ++f) {
    std::sort(samples.begin(), samples.end(),
              [f](const LabeledSnapshot& a, const LabeledSnapshot& b) {
                return a.features[f] < b.features[f];
              });
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].features[f] == samples[i - 1].features[f]) continue;
      const double threshold = (samples[i].features[f] + samples[i - 1].features[f]) / 2.0;
      // samples are sorted: the first i go left (feature < threshold).
      if (i < min_leaf || samples.size() - i < min_leaf) continue;
      std::size_t left_reads = 0;
      for (std::size_t j = 0; j < i; ++j) {
        if (samples[j].label == WorkloadLabel::ReadIntensive) ++left_reads;
      }
      std::size_t total_reads = left_reads;
      for (std::size_t j = i; j < samples.size(); ++j) {
        if (samples[j].label == WorkloadLabel::ReadIntensive) ++total_reads;
      }
      auto gini_of = [](double reads, double count) {
        if (count == 0) return 0.0;
        const double p = reads / count;
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
      };
      const double left_g = gini_of(static_cast<double>(left_reads), static_cast<double>(i));
      const double right_g = gini_of(static_cast<double>(total_reads - left_reads),
                                     static_cast<double>(samples.size() - i));
      const double weighted =
          (static_cast<double>(i) / n) * left_g +
          (static_cast<double>(samples.size() - i) / n) * right_g;
      const double reduction = parent - weighted;
      const bool better =
          reduction > best.reduction + 1e-12 ||
          (std::abs(reduction - best.reduction) <= 1e-12 && best.found &&
           (f < best.feature || (f == best.feature && threshold < best.threshold)));
      if (!best.found ? reduction > 1e-12 : better) {
        best.found = true;
        best.feature = f;
        best.threshold = threshold;
        best.reduction = reduction;
      }
    }
  }
  return best;
}

std::unique_ptr<TreeNode> train_node(std::vector<LabeledSnapshot> samples,
                                     const CartParams& params, std::uint32_t depth) {
  const double impurity = gini_impurity(samples);
  if (impurity <= 1e-12 || depth >= params.max_depth ||
      samples.size() < 2 * params.min_leaf_size) {
    return make_leaf(samples);
  }
  SplitChoice split = best_split(samples, params.min_leaf_size);
  if (!split.found) return make_leaf(samples);

  std::vector<LabeledSnapshot> left;
  std::vector<LabeledSnapshot> right;
  for (const auto& s : samples) {
    (s.features[split.feature] < split.threshold ? left : right).push_back(s);
  }
  auto node = std::make_unique<TreeNode>();
  node->leaf = false;
  node->feature = split.feature;
  node->threshold = split.threshold;
  node->left = train_node(std::move(left), params, depth + 1);
  node->right = train_node(std::move(right), params, depth + 1);
  return node;
}

}  // namespace

std::unique_ptr<TreeNode> train_cart(std::span<const LabeledSnapshot> samples,
                                     const CartParams& params) {
  if (samples.empty()) throw ConfigError("train_cart: empty training set");
  return train_node(std::vector<LabeledSnapshot>(samples.begin(), samples.end()), params, 0);
}

WorkloadLabel route(const TreeNode& tree, const std::array<double, 3>& features) {
  const TreeNode* node = &tree;
  while (!node->leaf) {
    node = features[node->feature] < node->threshold ? node->left.get() : node->right.get();
  }
  return node->label;
}

Classification classify(const TreeNode& tree, const WorkloadSnapshot& snapshot,
                        std::size_t k_min) {
  if (snapshot.records.size() < k_min) return Classification::Insufficient;
  return route(tree, snapshot.features()) == WorkloadLabel::ReadIntensive
             ? Classification::ReadIntensive
             : Classification::WriteIntensive;
}

std::unique_ptr<TreeNode> fallback_tree() {
  return parse_tree("split f1 2 ( leaf WriteIntensive ) ( leaf ReadIntensive )");
}

namespace {

void serialize_node(const TreeNode& node, std::ostringstream& out) {
  if (node.leaf) {
    out << "leaf " << to_string(node.label);
    return;
  }
  out << "split f" << (node.feature + 1) << " " << node.threshold << " ( ";
  serialize_node(*node.left, out);
  out << " ) ( ";
  serialize_node(*node.right, out);
  out << " )";
}

struct Parser {
  std::istringstream in;

  std::string next() {
    std::string tok;
    if (!(in >> tok)) throw ConfigError("tree parse: unexpected end of input");
    return tok;
  }

  std::unique_ptr<TreeNode> node() {
    const std::string head = next();
    auto n = std::make_unique<TreeNode>();
    if (head == "leaf") {
      const std::string label = next();
      if (label == "ReadIntensive") {
        n->label = WorkloadLabel::ReadIntensive;
      } else if (label == "WriteIntensive") {
        n->label = WorkloadLabel::WriteIntensive;
      } else {
        throw ConfigError("tree parse: unknown label " + label);
      }
      return n;
    }
    if (head != "split") throw ConfigError("tree parse: expected 'leaf' or 'split'");
    const std::string feature = next();
    if (feature.size() < 2 || feature[0] != 'f') {
      throw ConfigError("tree parse: expected f<i>");
    }
    n->leaf = false;
    n->feature = std::stoi(feature.substr(1)) - 1;  // features are named f1..f3
    if (n->feature < 0 || n->feature > 2) throw ConfigError("tree parse: feature out of range");
    n->threshold = std::stod(next());
    expect("(");
    n->left = node();
    expect(")");
    expect("(");
    n->right = node();
    expect(")");
    return n;
  }

  void expect(const std::string& tok) {
    const std::string got = next();
    if (got != tok) throw ConfigError("tree parse: expected '" + tok + "', got '" + got + "'");
  }
};

}  // namespace

std::string serialize_tree(const TreeNode& tree) {
  std::ostringstream out;
  out.precision(17);
  serialize_node(tree, out);
  return out.str();
}

std::unique_ptr<TreeNode> parse_tree(const std::string& text) {
  Parser parser{std::istringstream(text)};
  auto tree = parser.node();
  std::string extra;
  if (parser.in >> extra) throw ConfigError("tree parse: trailing tokens");
  return tree;
}

}  // namespace autoidx
