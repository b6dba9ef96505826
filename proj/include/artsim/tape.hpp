#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "artsim/graph.hpp"
#include "artsim/mat.hpp"

namespace artsim {

using TensorId = std::size_t;

/// Reverse-mode autodiff over dense row-major matrices.
///
/// A tape owns every node created during a forward pass, in recording order.
/// backward() walks the recording in exact reverse and accumulates gradients
/// additively into every node that requires them, so fan-out sums correctly.
/// A tape and its nodes belong to one worker; independent tapes may run
/// concurrently.
///
/// Subgradient conventions: relu'(0) = 0, and the gradient of a row L2
/// distance at distance 0 is 0.
template <class S>
class TapeT {
 public:
  using Mat = MatT<S>;

  TapeT() = default;
  TapeT(const TapeT&) = delete;
  TapeT& operator=(const TapeT&) = delete;

  /// Leaf that does not receive a gradient.
  TensorId constant(Mat value) { return push(std::move(value), false, nullptr); }

  /// Tracked leaf; grad(id) is defined after backward().
  TensorId variable(Mat value) { return push(std::move(value), true, nullptr); }

  const Mat& value(TensorId id) const { return nodes_.at(id).value; }
  bool requires_grad(TensorId id) const { return nodes_.at(id).requires_grad; }

  const Mat& grad(TensorId id) const {
    const Node& n = nodes_.at(id);
    if (!n.requires_grad)
      throw std::logic_error("grad requested for an untracked tensor");
    if (!ran_backward_)
      throw std::logic_error("grad requested before backward()");
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  TensorId matmul(TensorId a, TensorId b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.cols() != B.rows())
      throw std::invalid_argument(shape_msg("matmul", A, B));
    Mat out = A * B;
    return push(std::move(out), needs(a) || needs(b), [this, a, b](const Mat& g) {
      if (needs(a)) grad_ref(a).noalias() += g * value(b).transpose();
      if (needs(b)) grad_ref(b).noalias() += value(a).transpose() * g;
    });
  }

  TensorId add(TensorId a, TensorId b) {
    require_same_shape("add", a, b);
    Mat out = value(a) + value(b);
    return push(std::move(out), needs(a) || needs(b), [this, a, b](const Mat& g) {
      if (needs(a)) grad_ref(a) += g;
      if (needs(b)) grad_ref(b) += g;
    });
  }

  TensorId sub(TensorId a, TensorId b) {
    require_same_shape("sub", a, b);
    Mat out = value(a) - value(b);
    return push(std::move(out), needs(a) || needs(b), [this, a, b](const Mat& g) {
      if (needs(a)) grad_ref(a) += g;
      if (needs(b)) grad_ref(b) -= g;
    });
  }

  /// X + broadcast row vector b (1 x cols).
  TensorId add_rowvec_bias(TensorId x, TensorId b) {
    const Mat& X = value(x);
    const Mat& B = value(b);
    if (B.rows() != 1 || B.cols() != X.cols())
      throw std::invalid_argument(shape_msg("add_rowvec_bias", X, B));
    Mat out = X.rowwise() + B.row(0);
    return push(std::move(out), needs(x) || needs(b), [this, x, b](const Mat& g) {
      if (needs(x)) grad_ref(x) += g;
      if (needs(b)) grad_ref(b).row(0) += g.colwise().sum();
    });
  }

  TensorId relu(TensorId x) {
    Mat out = value(x).cwiseMax(S(0));
    return push(std::move(out), needs(x), [this, x](const Mat& g) {
      if (!needs(x)) return;
      // Mask from the input: entries at exactly 0 get 0.
      grad_ref(x).array() += g.array() * (value(x).array() > S(0)).template cast<S>();
    });
  }

  TensorId concat_cols(TensorId a, TensorId b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.rows() != B.rows())
      throw std::invalid_argument(shape_msg("concat_cols", A, B));
    Mat out(A.rows(), A.cols() + B.cols());
    out.leftCols(A.cols()) = A;
    out.rightCols(B.cols()) = B;
    const Eigen::Index ca = A.cols(), cb = B.cols();
    return push(std::move(out), needs(a) || needs(b),
                [this, a, b, ca, cb](const Mat& g) {
                  if (needs(a)) grad_ref(a) += g.leftCols(ca);
                  if (needs(b)) grad_ref(b) += g.rightCols(cb);
                });
  }

  /// Output row j = X row rows[j]; duplicate indices accumulate on backward.
  TensorId gather_rows(TensorId x, std::vector<std::uint32_t> rows) {
    const Mat& X = value(x);
    for (auto r : rows)
      if (r >= X.rows())
        throw std::invalid_argument("gather_rows: index " + std::to_string(r) +
                                    " out of range");
    Mat out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t j = 0; j < rows.size(); ++j) out.row(j) = X.row(rows[j]);
    return push(std::move(out), needs(x),
                [this, x, rows = std::move(rows)](const Mat& g) {
                  if (!needs(x)) return;
                  Mat& gx = grad_ref(x);
                  for (std::size_t j = 0; j < rows.size(); ++j)
                    gx.row(rows[j]) += g.row(j);
                });
  }

  /// Row v of the output is the mean of X over N(v); zero row when isolated.
  TensorId csr_mean_neighbors(TensorId x, const Graph& g) {
    const Mat& X = value(x);
    require_graph_rows("csr_mean_neighbors", X, g);
    Mat out = Mat::Zero(X.rows(), X.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const auto nb = g.neighbors(v);
      if (nb.empty()) continue;
      for (NodeId u : nb) out.row(v) += X.row(u);
      out.row(v) /= static_cast<S>(nb.size());
    }
    return push(std::move(out), needs(x), [this, x, &g](const Mat& gr) {
      if (!needs(x)) return;
      Mat& gx = grad_ref(x);
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto nb = g.neighbors(v);
        if (nb.empty()) continue;
        const S inv = S(1) / static_cast<S>(nb.size());
        for (NodeId u : nb) gx.row(u) += gr.row(v) * inv;
      }
    });
  }

  /// Row v of the output is the sum of X over N(v).
  TensorId csr_sum_neighbors(TensorId x, const Graph& g) {
    const Mat& X = value(x);
    require_graph_rows("csr_sum_neighbors", X, g);
    Mat out = Mat::Zero(X.rows(), X.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      for (NodeId u : g.neighbors(v)) out.row(v) += X.row(u);
    return push(std::move(out), needs(x), [this, x, &g](const Mat& gr) {
      if (!needs(x)) return;
      Mat& gx = grad_ref(x);
      for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (NodeId u : g.neighbors(v)) gx.row(u) += gr.row(v);
    });
  }

  /// Per-row Euclidean distance, n x 1.
  TensorId row_l2_distance(TensorId x, TensorId y) {
    require_same_shape("row_l2_distance", x, y);
    const Mat& X = value(x);
    const Mat& Y = value(y);
    Mat out(X.rows(), 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out(i, 0) = (X.row(i) - Y.row(i)).norm();
    return push(std::move(out), needs(x) || needs(y),
                [this, x, y, out_id = nodes_.size()](const Mat& g) {
                  const Mat& X = value(x);
                  const Mat& Y = value(y);
                  const Mat& D = value(out_id);
                  for (Eigen::Index i = 0; i < X.rows(); ++i) {
                    if (D(i, 0) <= S(0)) continue;  // subgradient 0 at distance 0
                    const S scale = g(i, 0) / D(i, 0);
                    if (needs(x)) grad_ref(x).row(i) += scale * (X.row(i) - Y.row(i));
                    if (needs(y)) grad_ref(y).row(i) -= scale * (X.row(i) - Y.row(i));
                  }
                });
  }

  TensorId add_scalar(TensorId x, S c) {
    Mat out = value(x).array() + c;
    return push(std::move(out), needs(x), [this, x](const Mat& g) {
      if (needs(x)) grad_ref(x) += g;
    });
  }

  TensorId scale(TensorId x, S c) {
    Mat out = value(x) * c;
    return push(std::move(out), needs(x), [this, x, c](const Mat& g) {
      if (needs(x)) grad_ref(x) += g * c;
    });
  }

  /// Mean over all entries, 1 x 1.
  TensorId mean_all(TensorId x) {
    const Mat& X = value(x);
    Mat out(1, 1);
    out(0, 0) = X.sum() / static_cast<S>(X.size());
    const S inv = S(1) / static_cast<S>(X.size());
    return push(std::move(out), needs(x), [this, x, inv](const Mat& g) {
      if (needs(x)) grad_ref(x).array() += g(0, 0) * inv;
    });
  }

  /// Accumulates gradients of `output` (must be 1x1) into every tracked
  /// node. May be called once per tape.
  void backward(TensorId output) {
    const Node& out = nodes_.at(output);
    if (out.value.rows() != 1 || out.value.cols() != 1)
      throw std::invalid_argument("backward: output must be a 1x1 scalar");
    if (ran_backward_) throw std::logic_error("backward already ran on this tape");
    ran_backward_ = true;
    for (auto& n : nodes_)
      if (n.requires_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    if (!out.requires_grad) return;  // nothing tracked feeds the output
    nodes_[output].grad(0, 0) = S(1);
    for (std::size_t i = output + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.backprop) n.backprop(n.grad);
    }
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void(const Mat&)> backprop;  // null for leaves
  };

  bool needs(TensorId id) const { return nodes_[id].requires_grad; }
  Mat& grad_ref(TensorId id) { return nodes_[id].grad; }

  TensorId push(Mat value, bool requires_grad, std::function<void(const Mat&)> backprop) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(backprop)});
    return nodes_.size() - 1;
  }

  void require_same_shape(const char* op, TensorId a, TensorId b) const {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols())
      throw std::invalid_argument(shape_msg(op, A, B));
  }

  void require_graph_rows(const char* op, const Mat& X, const Graph& g) const {
    if (X.rows() != static_cast<Eigen::Index>(g.num_nodes()))
      throw std::invalid_argument(std::string(op) + ": matrix has " +
                                  std::to_string(X.rows()) + " rows, graph has " +
                                  std::to_string(g.num_nodes()) + " nodes");
  }

  static std::string shape_msg(const char* op, const Mat& A, const Mat& B) {
    return std::string(op) + ": incompatible shapes (" + std::to_string(A.rows()) +
           "x" + std::to_string(A.cols()) + ", " + std::to_string(B.rows()) + "x" +
           std::to_string(B.cols()) + ")";
  }

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

using Tape = TapeT<float>;

}  // namespace artsim
