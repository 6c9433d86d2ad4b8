#include "disco/discourse_graphs.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "disco/errors.hpp"
#include "disco/relations.hpp"

namespace disco {

namespace {

using json = nlohmann::json;

std::string span_str(const RstTreeNode& n) {
  return "(" + std::to_string(n.first_edu) + ", " +
         std::to_string(n.last_edu) + ")";
}

void check_edu(int edu, int num_edus) {
  if (edu < 0 || edu >= num_edus) {
    throw Error(ErrorCode::IndexOutOfRange,
                "EDU " + std::to_string(edu) + " outside [0, " +
                    std::to_string(num_edus) + ")");
  }
}

}  // namespace

RstGraph tree_to_graph(const std::vector<RstTreeNode>& tree, int num_edus) {
  RstGraph graph;
  graph.num_edus = num_edus;
  if (tree.empty()) {
    if (num_edus == 1) graph.root_edu = 0;
    return graph;
  }

  std::vector<RstTreeNode> nodes = tree;
  int lo = nodes.front().first_edu;
  int hi = nodes.front().last_edu;
  for (const auto& n : nodes) {
    if (n.first_edu < 1 || n.last_edu < n.first_edu || n.last_edu > num_edus) {
      throw Error(ErrorCode::SpanOutOfRange,
                  "span " + span_str(n) + " with " + std::to_string(num_edus) +
                      " EDUs");
    }
    lo = std::min(lo, n.first_edu);
    hi = std::max(hi, n.last_edu);
  }
  const bool has_root = std::any_of(nodes.begin(), nodes.end(), [&](auto& n) {
    return n.first_edu == lo && n.last_edu == hi;
  });
  if (!has_root) nodes.push_back({lo, hi, Nuclearity::Root, "root"});

  // Parents precede children in this order; a stack of open ancestors then
  // recovers the tree from the laminar span family.
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) {
    if (a.first_edu != b.first_edu) return a.first_edu < b.first_edu;
    return a.last_edu > b.last_edu;
  });
  const std::size_t n = nodes.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    while (!stack.empty() && !nodes[stack.back()].contains(nodes[i])) {
      if (nodes[stack.back()].last_edu >= nodes[i].first_edu) {
        throw Error(ErrorCode::InconsistentTree,
                    "span " + span_str(nodes[i]) + " crosses " +
                        span_str(nodes[stack.back()]));
      }
      stack.pop_back();
    }
    if (!stack.empty()) {
      const auto& parent = nodes[stack.back()];
      if (parent.first_edu == nodes[i].first_edu &&
          parent.last_edu == nodes[i].last_edu) {
        throw Error(ErrorCode::InconsistentTree,
                    "duplicate span " + span_str(nodes[i]));
      }
      children[stack.back()].push_back(i);
    } else if (i != 0) {
      throw Error(ErrorCode::InconsistentTree,
                  "span " + span_str(nodes[i]) + " outside root");
    }
    stack.push_back(i);
  }

  // Children of every internal node must tile its span exactly.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) continue;
    if (children[i].empty()) {
      throw Error(ErrorCode::InconsistentTree,
                  "internal span " + span_str(node) + " has no children");
    }
    int expect = node.first_edu;
    for (std::size_t c : children[i]) {
      if (nodes[c].first_edu != expect) {
        throw Error(ErrorCode::InconsistentTree,
                    "children of " + span_str(node) + " leave a gap at EDU " +
                        std::to_string(expect));
      }
      expect = nodes[c].last_edu + 1;
    }
    if (expect != node.last_edu + 1) {
      throw Error(ErrorCode::InconsistentTree,
                  "children of " + span_str(node) + " stop at EDU " +
                      std::to_string(expect - 1));
    }
  }

  std::vector<int> head(n, 0);
  for (std::size_t k = n; k-- > 0;) {
    if (nodes[k].is_leaf()) {
      head[k] = nodes[k].first_edu - 1;
      continue;
    }
    const auto& kids = children[k];
    std::size_t head_child = kids.front();
    for (std::size_t c : kids) {
      if (nodes[c].nuclearity == Nuclearity::Nucleus) {
        head_child = c;
        break;
      }
    }
    head[k] = head[head_child];
    for (std::size_t c : kids) {
      if (c == head_child) continue;
      graph.edges.push_back({head[k], head[c], relation_id(nodes[c].relation)});
    }
  }
  graph.root_edu = head[0];
  std::sort(graph.edges.begin(), graph.edges.end());
  return graph;
}

CorefGraph::CorefGraph(int num_edus, std::vector<std::pair<int, int>> pairs)
    : num_edus_(num_edus) {
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : pairs) {
    check_edu(a, num_edus);
    check_edu(b, num_edus);
    if (a == b) continue;
    unique.insert({std::min(a, b), std::max(a, b)});
  }
  pairs_.assign(unique.begin(), unique.end());
}

bool CorefGraph::connected(int a, int b) const {
  const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
  return std::binary_search(pairs_.begin(), pairs_.end(), key);
}

CorefGraph build_coref_graph(int num_edus,
                             const std::vector<std::vector<int>>& clusters) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& cluster : clusters) {
    for (int e : cluster) check_edu(e, num_edus);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
      for (std::size_t j = i + 1; j < cluster.size(); ++j) {
        pairs.emplace_back(cluster[i], cluster[j]);
      }
    }
  }
  return CorefGraph(num_edus, std::move(pairs));
}

Degree degree_profile(const RstGraph& g, int edu) {
  check_edu(edu, g.num_edus);
  Degree d;
  for (const auto& e : g.edges) {
    d.in += e.target == edu;
    d.out += e.source == edu;
  }
  return d;
}

Degree degree_profile(const CorefGraph& g, int edu) {
  check_edu(edu, g.num_edus());
  int incident = 0;
  for (auto [a, b] : g.pairs()) incident += (a == edu || b == edu);
  return {incident, incident};
}

std::string serialize_graphs_jsonl(const DocumentGraphs& graphs) {
  json rst = json::array();
  for (const auto& e : graphs.rst.edges) {
    rst.push_back({e.source, e.target, e.relation});
  }
  json coref = nullptr;
  if (graphs.coref) {
    coref = json::array();
    for (auto [a, b] : graphs.coref->pairs()) coref.push_back({a, b});
  }
  const json record = {{"version", kFormatVersion},
                       {"doc_id", graphs.doc_id},
                       {"num_edus", graphs.rst.num_edus},
                       {"rst_edges", std::move(rst)},
                       {"coref_pairs", std::move(coref)}};
  return record.dump();
}

DocumentGraphs parse_graphs_jsonl(std::string_view line) {
  try {
    const json record = json::parse(line);
    if (record.contains("version") &&
        record.at("version").get<std::string>() != kFormatVersion) {
      throw Error(ErrorCode::VersionMismatch,
                  "graph record version " +
                      record.at("version").get<std::string>());
    }
    DocumentGraphs out;
    out.doc_id = record.at("doc_id").get<std::string>();
    out.rst.num_edus = record.at("num_edus").get<int>();
    for (const auto& e : record.at("rst_edges")) {
      RstEdge edge{e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()};
      check_edu(edge.source, out.rst.num_edus);
      check_edu(edge.target, out.rst.num_edus);
      relation_name(edge.relation);
      out.rst.edges.push_back(edge);
    }
    if (record.contains("coref_pairs") && !record.at("coref_pairs").is_null()) {
      std::vector<std::pair<int, int>> pairs;
      for (const auto& p : record.at("coref_pairs")) {
        pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      }
      out.coref = CorefGraph(out.rst.num_edus, std::move(pairs));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

}  // namespace disco
