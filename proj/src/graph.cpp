#include "artsim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "artsim/io.hpp"

namespace artsim {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Train: return "train";
    case Phase::Val: return "val";
    case Phase::Test: return "test";
  }
  return "?";
}

Graph Graph::from_edges(NodeId num_nodes,
                        std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> adj(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes)
      throw std::invalid_argument("edge endpoint " + std::to_string(std::max(u, v)) +
                                  " out of range for " + std::to_string(num_nodes) +
                                  " nodes");
    if (u == v) continue;  // self-loops dropped
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  Graph g;
  g.num_nodes_ = num_nodes;
  g.row_ptr_.assign(num_nodes + 1, 0);
  for (NodeId v = 0; v < num_nodes; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.row_ptr_[v + 1] = g.row_ptr_[v] + row.size();
  }
  g.col_idx_.reserve(g.row_ptr_[num_nodes]);
  for (auto& row : adj) g.col_idx_.insert(g.col_idx_.end(), row.begin(), row.end());
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

NodeId IdMap::intern(const std::string& name) {
  auto [it, inserted] = index.try_emplace(name, static_cast<NodeId>(names.size()));
  if (inserted) names.push_back(name);
  return it->second;
}

NodeId IdMap::at(const std::string& name) const {
  auto it = index.find(name);
  if (it == index.end())
    throw std::runtime_error("unknown node id '" + name + "'");
  return it->second;
}

namespace {

// Strips a trailing '\r' (CRLF input) and leading/trailing blanks.
std::string_view trimmed(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

EdgeListData load_edge_list(std::istream& in, const IdMap* fixed_ids) {
  EdgeListData data;
  if (fixed_ids) data.ids = *fixed_ids;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t lineno = 0;
  auto resolve = [&](const std::string& name) {
    return fixed_ids ? data.ids.at(name) : data.ids.intern(name);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trimmed(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (fields.size() != 2)
      throw std::runtime_error("edge list line " + std::to_string(lineno) +
                               ": expected 'src<TAB>dst', got '" + std::string(t) + "'");
    NodeId u = resolve(fields[0]);
    NodeId v = resolve(fields[1]);
    edges.emplace_back(u, v);
  }
  if (data.ids.size() == 0) throw std::runtime_error("edge list is empty");
  data.graph = Graph::from_edges(static_cast<NodeId>(data.ids.size()), edges);
  return data;
}

EdgeListData load_edge_list_file(const std::string& path, const IdMap* fixed_ids) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open edge list '" + path + "'");
  return load_edge_list(f, fixed_ids);
}

void save_id_map(std::ostream& out, const IdMap& ids) {
  for (const auto& name : ids.names) out << name << '\n';
  if (!out) throw std::runtime_error("id map write failed");
}

IdMap load_id_map(std::istream& in) {
  IdMap ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (ids.index.count(line))
      throw std::runtime_error("id map: duplicate id '" + line + "'");
    ids.intern(line);
  }
  if (ids.size() == 0) throw std::runtime_error("id map is empty");
  return ids;
}

void save_id_map_file(const std::string& path, const IdMap& ids) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_id_map(f, ids);
}

IdMap load_id_map_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open id map '" + path + "'");
  return load_id_map(f);
}

void save_edge_list(std::ostream& out, const Graph& g, const IdMap* ids) {
  for (const auto& [u, v] : g.edge_list()) {
    if (ids)
      out << ids->names[u] << '\t' << ids->names[v] << '\n';
    else
      out << u << '\t' << v << '\n';
  }
  if (!out) throw std::runtime_error("edge list write failed");
}

SplitAssignment::SplitAssignment(std::vector<Split> labels)
    : labels_(std::move(labels)) {
  for (NodeId v = 0; v < labels_.size(); ++v)
    nodes_[static_cast<int>(labels_[v])].push_back(v);
  for (int c = 0; c < 3; ++c)
    if (nodes_[c].empty())
      throw std::invalid_argument(std::string("split class '") +
                                  split_name(static_cast<Split>(c)) + "' is empty");
}

namespace {

SplitAssignment parse_split(std::istream& in,
                            const std::function<NodeId(const std::string&)>& resolve,
                            NodeId num_nodes,
                            const std::function<std::string(NodeId)>& name_of) {
  // 3 is the "unset" sentinel.
  std::vector<std::uint8_t> raw(num_nodes, 3);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trimmed(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (fields.size() != 2)
      throw std::runtime_error("split line " + std::to_string(lineno) +
                               ": expected 'node_id<TAB>label'");
    NodeId v = resolve(fields[0]);
    Split s;
    if (fields[1] == "train") s = Split::Train;
    else if (fields[1] == "val") s = Split::Val;
    else if (fields[1] == "test") s = Split::Test;
    else
      throw std::runtime_error("split line " + std::to_string(lineno) +
                               ": unknown label '" + fields[1] + "'");
    if (raw[v] != 3)
      throw std::runtime_error("split line " + std::to_string(lineno) +
                               ": duplicate node '" + fields[0] + "'");
    raw[v] = static_cast<std::uint8_t>(s);
  }
  std::vector<Split> labels(num_nodes);
  for (NodeId v = 0; v < num_nodes; ++v) {
    if (raw[v] == 3)
      throw std::runtime_error("split file missing node '" + name_of(v) + "'");
    labels[v] = static_cast<Split>(raw[v]);
  }
  return SplitAssignment(std::move(labels));
}

}  // namespace

SplitAssignment load_split(std::istream& in, const IdMap& ids) {
  return parse_split(
      in, [&](const std::string& s) { return ids.at(s); },
      static_cast<NodeId>(ids.size()), [&](NodeId v) { return ids.names[v]; });
}

SplitAssignment load_split(std::istream& in, NodeId num_nodes) {
  auto resolve = [num_nodes](const std::string& s) -> NodeId {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("split file: non-integer node id '" + s + "'");
    }
    if (pos != s.size() || v >= num_nodes)
      throw std::runtime_error("split file: node id '" + s + "' out of range");
    return static_cast<NodeId>(v);
  };
  return parse_split(in, resolve, num_nodes,
                     [](NodeId v) { return std::to_string(v); });
}

SplitAssignment load_split_file(const std::string& path, const IdMap& ids) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open split file '" + path + "'");
  return load_split(f, ids);
}

SplitAssignment load_split_file(const std::string& path, NodeId num_nodes) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open split file '" + path + "'");
  return load_split(f, num_nodes);
}

void save_split(std::ostream& out, const SplitAssignment& s, const IdMap* ids) {
  for (NodeId v = 0; v < s.num_nodes(); ++v) {
    if (ids)
      out << ids->names[v];
    else
      out << v;
    out << '\t' << split_name(s.label(v)) << '\n';
  }
  if (!out) throw std::runtime_error("split write failed");
}

void save_split_file(const std::string& path, const SplitAssignment& s, const IdMap* ids) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_split(f, s, ids);
}

bool edge_visible(Split a, Split b, Phase p) {
  switch (p) {
    case Phase::Train:
      return a == Split::Train && b == Split::Train;
    case Phase::Val:
      return a != Split::Test && b != Split::Test &&
             !(a == Split::Val && b == Split::Val);
    case Phase::Test:
      return !(a == Split::Test && b == Split::Test);
  }
  return false;
}

Graph visible_graph(const Graph& g, const SplitAssignment& s, Phase p) {
  if (s.num_nodes() != g.num_nodes())
    throw std::invalid_argument("split covers " + std::to_string(s.num_nodes()) +
                                " nodes, graph has " + std::to_string(g.num_nodes()));
  std::vector<std::pair<NodeId, NodeId>> kept;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.neighbors(u))
      if (u < v && edge_visible(s.label(u), s.label(v), p)) kept.emplace_back(u, v);
  return Graph::from_edges(g.num_nodes(), kept);
}

std::map<NodeId, std::vector<NodeId>> hidden_relevance(const Graph& g,
                                                       const SplitAssignment& s,
                                                       Phase p) {
  if (p == Phase::Train)
    throw std::invalid_argument("hidden_relevance is defined for val/test phases only");
  const Split want = p == Phase::Val ? Split::Val : Split::Test;
  std::map<NodeId, std::vector<NodeId>> rel;
  for (NodeId u : s.nodes(want)) {
    std::vector<NodeId> within;
    for (NodeId v : g.neighbors(u))
      if (s.label(v) == want) within.push_back(v);
    if (!within.empty()) rel.emplace(u, std::move(within));
  }
  return rel;
}

void save_csr(std::ostream& out, const Graph& g) {
  io::write_magic(out, "GCSR");
  io::write_u64_le(out, g.num_nodes());
  io::write_u64_le(out, g.num_entries());
  for (auto r : g.row_ptr()) io::write_u64_le(out, r);
  for (auto c : g.col_idx()) io::write_u32_le(out, c);
}

Graph load_csr(std::istream& in) {
  io::expect_magic(in, "GCSR", "GCSR");
  const std::uint64_t n = io::read_u64_le(in, "GCSR num_nodes");
  const std::uint64_t m = io::read_u64_le(in, "GCSR num_edges");
  if (n > 0xFFFFFFFFull) throw std::runtime_error("GCSR: node count too large");
  std::vector<std::uint64_t> row_ptr(n + 1);
  for (auto& r : row_ptr) r = io::read_u64_le(in, "GCSR row_ptr");
  if (row_ptr.front() != 0 || row_ptr.back() != m)
    throw std::runtime_error("GCSR: row_ptr does not span num_edges");
  std::vector<NodeId> col_idx(m);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m / 2);
  for (std::uint64_t u = 0; u < n; ++u) {
    if (row_ptr[u + 1] < row_ptr[u]) throw std::runtime_error("GCSR: row_ptr not monotone");
    for (std::uint64_t k = row_ptr[u]; k < row_ptr[u + 1]; ++k) {
      std::uint32_t v = io::read_u32_le(in, "GCSR col_idx");
      if (v >= n) throw std::runtime_error("GCSR: neighbor id out of range");
      col_idx[k] = v;
      edges.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  Graph g = Graph::from_edges(static_cast<NodeId>(n), edges);
  // Rebuilding through the canonicalizing constructor must reproduce the
  // stored arrays exactly; anything else means the file held an asymmetric,
  // unsorted or duplicated adjacency.
  if (g.row_ptr() != row_ptr || g.col_idx() != col_idx)
    throw std::runtime_error("GCSR: adjacency is not symmetric/sorted/deduplicated");
  return g;
}

void save_csr_file(const std::string& path, const Graph& g) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_csr(f, g);
}

Graph load_csr_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open CSR cache '" + path + "'");
  return load_csr(f);
}

}  // namespace artsim
