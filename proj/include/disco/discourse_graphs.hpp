#pragma once

// EDU-level discourse graphs: RST dependency graphs converted from
// constituency trees, and undirected coreference graphs.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "disco/corpus_formats.hpp"

namespace disco {

struct RstEdge {
  int source = 0;  // 0-based EDU
  int target = 0;
  int relation = 0;  // index into kRelationNames

  friend auto operator<=>(const RstEdge&, const RstEdge&) = default;
};

struct RstGraph {
  int num_edus = 0;
  std::vector<RstEdge> edges;
  // Head EDU of the whole tree; it carries the root designation and has no
  // incoming edge. Absent for graphs read back from sidecars or built from
  // empty trees.
  std::optional<int> root_edu;

  bool empty() const noexcept { return edges.empty(); }
  friend bool operator==(const RstGraph&, const RstGraph&) = default;
};

// Undirected; pairs are stored once as (a, b) with a < b, sorted.
class CorefGraph {
 public:
  CorefGraph() = default;
  CorefGraph(int num_edus, std::vector<std::pair<int, int>> pairs);

  int num_edus() const noexcept { return num_edus_; }
  const std::vector<std::pair<int, int>>& pairs() const noexcept {
    return pairs_;
  }
  std::size_t num_edges() const noexcept { return pairs_.size(); }
  bool connected(int a, int b) const;

  friend bool operator==(const CorefGraph&, const CorefGraph&) = default;

 private:
  int num_edus_ = 0;
  std::vector<std::pair<int, int>> pairs_;
};

struct Degree {
  int in = 0;
  int out = 0;
  friend bool operator==(const Degree&, const Degree&) = default;
};

// Head percolation: a subtree's head is the head of its leftmost nucleus
// child, and every other child's head receives an edge from it labelled with
// that child's relation. Tree nodes use 1-based EDU spans; the root node may
// be omitted (DPLP does not emit it). An empty tree yields an edgeless graph.
RstGraph tree_to_graph(const std::vector<RstTreeNode>& tree, int num_edus);

// Connects every pair of distinct EDUs that share a mention cluster.
CorefGraph build_coref_graph(int num_edus,
                             const std::vector<std::vector<int>>& clusters);

Degree degree_profile(const RstGraph& g, int edu);
// Incident edge count in both slots.
Degree degree_profile(const CorefGraph& g, int edu);

// Graph sidecar record:
// {"version", "doc_id", "num_edus", "rst_edges": [[s,t,r]], "coref_pairs": [[a,b]]}
struct DocumentGraphs {
  std::string doc_id;
  RstGraph rst;
  std::optional<CorefGraph> coref;
};

std::string serialize_graphs_jsonl(const DocumentGraphs& graphs);
DocumentGraphs parse_graphs_jsonl(std::string_view line);

}  // namespace disco
