#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "autoidx/workload_monitor.hpp"

namespace autoidx {

enum class WorkloadLabel { ReadIntensive, WriteIntensive };
enum class Classification { ReadIntensive, WriteIntensive, Insufficient };

const char* to_string(WorkloadLabel label);
const char* to_string(Classification c);

struct LabeledSnapshot {
  std::array<double, 3> features{0, 0, 0};  // f1, f2, f3
  WorkloadLabel label = WorkloadLabel::ReadIntensive;
};

// Binary CART node: internal nodes route feature < threshold to the left.
struct TreeNode {
  bool leaf = true;
  WorkloadLabel label = WorkloadLabel::ReadIntensive;
  double purity = 1.0;
  int feature = 0;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
};

struct CartParams {
  std::uint32_t max_depth = 4;
  std::uint32_t min_leaf_size = 5;
};

// Greedy Gini-impurity CART training; split thresholds are midpoints of
// sorted distinct feature values, ties break toward the lower feature index
// and then the lower threshold.
std::unique_ptr<TreeNode> train_cart(std::span<const LabeledSnapshot> samples,
                                     const CartParams& params = {});

WorkloadLabel route(const TreeNode& tree, const std::array<double, 3>& features);

// Insufficient when the snapshot holds fewer than k_min records.
Classification classify(const TreeNode& tree, const WorkloadSnapshot& snapshot,
                        std::size_t k_min = 20);

// Hand-set fallback: scan/mutator ratio >= 2 reads as read-intensive.
std::unique_ptr<TreeNode> fallback_tree();

// Grammar: node := "leaf <label>" | "split f<i> <threshold> ( node ) ( node )"
std::string serialize_tree(const TreeNode& tree);
std::unique_ptr<TreeNode> parse_tree(const std::string& text);

double gini_impurity(std::span<const LabeledSnapshot> samples);

}  // namespace autoidx
