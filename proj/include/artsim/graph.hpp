#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace artsim {

using NodeId = std::uint32_t;

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
enum class Phase : std::uint8_t { Train = 0, Val = 1, Test = 2 };

const char* split_name(Split s);
const char* phase_name(Phase p);

/// Undirected graph in CSR form. Every constructor yields sorted rows,
/// symmetric adjacency, no self-loops and no duplicate entries.
class Graph {
 public:
  Graph() = default;

  /// Symmetrizes, drops self-loops, merges duplicates.
  static Graph from_edges(NodeId num_nodes,
                          std::span<const std::pair<NodeId, NodeId>> edges);

  NodeId num_nodes() const { return num_nodes_; }
  /// Directed adjacency entries: twice the undirected edge count.
  std::size_t num_entries() const { return col_idx_.size(); }
  std::size_t num_edges() const { return col_idx_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v], col_idx_.data() + row_ptr_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return row_ptr_[v + 1] - row_ptr_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<std::uint64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_idx() const { return col_idx_; }

  /// Undirected edges as (u, v) with u < v, ascending.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

 private:
  NodeId num_nodes_ = 0;
  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
};

/// Bijective mapping between external string ids and dense node indices,
/// in first-seen order.
struct IdMap {
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;

  NodeId intern(const std::string& name);
  /// Throws if the id is unknown.
  NodeId at(const std::string& name) const;
  std::size_t size() const { return names.size(); }
};

struct EdgeListData {
  Graph graph;
  IdMap ids;
};

/// Parses "src<TAB>dst" lines ('#' comments, blank lines skipped; any
/// whitespace separates the two ids). Self-loops dropped, duplicates merged.
/// With `fixed_ids`, node indices come from that map (unknown ids error and
/// mapped-but-absent nodes stay as isolated nodes); otherwise ids are
/// interned in first-seen order.
EdgeListData load_edge_list(std::istream& in, const IdMap* fixed_ids = nullptr);
EdgeListData load_edge_list_file(const std::string& path, const IdMap* fixed_ids = nullptr);
void save_edge_list(std::ostream& out, const Graph& g, const IdMap* ids = nullptr);

/// Id map persisted next to the graph: line i holds the external id of
/// node index i.
void save_id_map(std::ostream& out, const IdMap& ids);
IdMap load_id_map(std::istream& in);
void save_id_map_file(const std::string& path, const IdMap& ids);
IdMap load_id_map_file(const std::string& path);

/// Per-node Train/Val/Test labels; all three classes non-empty.
class SplitAssignment {
 public:
  explicit SplitAssignment(std::vector<Split> labels);

  Split label(NodeId v) const { return labels_[v]; }
  NodeId num_nodes() const { return static_cast<NodeId>(labels_.size()); }
  std::size_t count(Split s) const { return nodes_[static_cast<int>(s)].size(); }
  /// Node ids with the given label, ascending.
  const std::vector<NodeId>& nodes(Split s) const { return nodes_[static_cast<int>(s)]; }
  const std::vector<Split>& labels() const { return labels_; }

  bool operator==(const SplitAssignment&) const = default;

 private:
  std::vector<Split> labels_;
  std::vector<NodeId> nodes_[3];
};

/// Parses "node_id<TAB>{train|val|test}" lines; every node must appear
/// exactly once. The IdMap overload resolves external ids; the num_nodes
/// overload expects integer ids in [0, num_nodes).
SplitAssignment load_split(std::istream& in, const IdMap& ids);
SplitAssignment load_split(std::istream& in, NodeId num_nodes);
SplitAssignment load_split_file(const std::string& path, const IdMap& ids);
SplitAssignment load_split_file(const std::string& path, NodeId num_nodes);
void save_split(std::ostream& out, const SplitAssignment& s, const IdMap* ids = nullptr);
void save_split_file(const std::string& path, const SplitAssignment& s,
                     const IdMap* ids = nullptr);

/// Phase-dependent edge visibility:
///   Train — both endpoints Train;
///   Val   — no Test endpoint, Val-Val hidden;
///   Test  — everything except Test-Test.
bool edge_visible(Split a, Split b, Phase p);

/// Subgraph of g containing only phase-visible edges; node set unchanged.
Graph visible_graph(const Graph& g, const SplitAssignment& s, Phase p);

/// For Val/Test phases: each eval-split node with at least one hidden
/// same-split edge, mapped to its same-split neighbors (ascending).
std::map<NodeId, std::vector<NodeId>> hidden_relevance(const Graph& g,
                                                       const SplitAssignment& s,
                                                       Phase p);

// Binary CSR cache: magic "GCSR", little-endian u64 num_nodes, u64 num_edges
// (adjacency entries), row_ptr as u64[], col_idx as u32[].
void save_csr(std::ostream& out, const Graph& g);
Graph load_csr(std::istream& in);
void save_csr_file(const std::string& path, const Graph& g);
Graph load_csr_file(const std::string& path);

}  // namespace artsim
