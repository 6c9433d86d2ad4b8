#pragma once

// Random well-formed RST trees with an independent recursive
// head-percolation oracle.

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "disco/corpus_formats.hpp"
#include "disco/discourse_graphs.hpp"
#include "disco/random.hpp"
#include "disco/relations.hpp"

namespace disco::testing {

struct TreeSample {
  int num_edus = 0;
  std::vector<RstTreeNode> nodes;  // includes the root node
  std::vector<RstEdge> expected_edges;
  int expected_root = 0;
};

namespace detail {

// Splits [first, last] into 2..3 children, recursing; returns head (0-based).
inline int build(int first, int last, Nuclearity nuc, const std::string& rel,
                 Rng& rng, TreeSample& out) {
  out.nodes.push_back({first, last, nuc, rel});
  if (first == last) return first - 1;
  const int width = last - first + 1;
  const int parts = width >= 3 && rng.bernoulli(0.3) ? 3 : 2;
  std::vector<int> cuts;
  while (static_cast<int>(cuts.size()) < parts - 1) {
    const int c = first + static_cast<int>(rng.below(static_cast<std::uint64_t>(width - 1)));
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<int, int>> spans;
  int at = first;
  for (int c : cuts) {
    spans.emplace_back(at, c);
    at = c + 1;
  }
  spans.emplace_back(at, last);

  // At least one nucleus per internal node.
  std::vector<bool> nucleus(spans.size());
  bool any = false;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    nucleus[i] = rng.bernoulli(0.5);
    any = any || nucleus[i];
  }
  if (!any) nucleus[rng.below(spans.size())] = true;

  std::vector<int> heads;
  std::vector<int> rels;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const int r = 1 + static_cast<int>(rng.below(kNumRelations - 2));
    const std::string name(kRelationNames[static_cast<std::size_t>(r)]);
    rels.push_back(r);
    heads.push_back(build(spans[i].first, spans[i].second,
                          nucleus[i] ? Nuclearity::Nucleus : Nuclearity::Satellite,
                          name, rng, out));
  }
  std::size_t head_child = 0;
  while (!nucleus[head_child]) ++head_child;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i == head_child) continue;
    out.expected_edges.push_back({heads[head_child], heads[i], rels[i]});
  }
  return heads[head_child];
}

}  // namespace detail

inline TreeSample random_tree(int num_edus, Rng& rng) {
  TreeSample s;
  s.num_edus = num_edus;
  s.expected_root = detail::build(1, num_edus, Nuclearity::Root, "Root", rng, s);
  std::sort(s.expected_edges.begin(), s.expected_edges.end());
  // Present nodes in a scrambled order; the converter must not rely on it.
  for (std::size_t i = s.nodes.size(); i > 1; --i) {
    std::swap(s.nodes[i - 1], s.nodes[rng.below(i)]);
  }
  return s;
}

}  // namespace disco::testing
