#include <doctest.h>

#include <cmath>

#include "artsim/tape.hpp"
#include "test_support.hpp"

using namespace artsim;
using namespace artsim::testing;

TEST_CASE("matmul with identity is the identity") {
  TapeT<double> tape;
  MatD I = MatD::Identity(2, 2);
  Rng rng(1);
  MatD B = random_mat(rng, 2, 3);
  auto out = tape.matmul(tape.constant(I), tape.constant(B));
  CHECK(tape.value(out) == B);
}

TEST_CASE("csr_mean_neighbors: identical neighbor rows reproduce the row") {
  // star: 0 connected to 1,2,3; rows 1..3 identical
  Graph g = Graph::from_edges(4, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {0, 2}, {0, 3}});
  MatD x(4, 2);
  x << 9, 9, 2.5, -1, 2.5, -1, 2.5, -1;
  TapeT<double> tape;
  auto out = tape.csr_mean_neighbors(tape.constant(x), g);
  CHECK(tape.value(out)(0, 0) == doctest::Approx(2.5));
  CHECK(tape.value(out)(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("csr_mean_neighbors: isolated node gets the zero row") {
  Graph g = Graph::from_edges(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
  MatD x = MatD::Ones(3, 2);
  TapeT<double> tape;
  auto out = tape.csr_mean_neighbors(tape.constant(x), g);
  CHECK(tape.value(out)(2, 0) == 0.0);
  CHECK(tape.value(out)(2, 1) == 0.0);
}

TEST_CASE("row_l2_distance: the 3-4-5 triangle") {
  MatD a(1, 2), b(1, 2);
  a << 3, 4;
  b << 0, 0;
  TapeT<double> tape;
  auto d = tape.row_l2_distance(tape.constant(a), tape.constant(b));
  CHECK(tape.value(d)(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("relu gradient: 1 where positive, 0 elsewhere including exactly 0") {
  MatD x(1, 3);
  x << -2.0, 0.0, 3.0;
  TapeT<double> tape;
  auto xid = tape.variable(x);
  auto out = tape.mean_all(tape.scale(tape.relu(xid), 3.0));
  tape.backward(out);
  const MatD& g = tape.grad(xid);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 0.0);  // subgradient at the kink is 0
  CHECK(g(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("row_l2_distance gradient is 0 at distance 0") {
  MatD a(2, 2), b(2, 2);
  a << 1, 2, 5, 5;
  b << 1, 2, 3, 3;  // row 0 coincides
  TapeT<double> tape;
  auto aid = tape.variable(a);
  auto out = tape.mean_all(tape.row_l2_distance(aid, tape.constant(b)));
  tape.backward(out);
  CHECK(tape.grad(aid)(0, 0) == 0.0);
  CHECK(tape.grad(aid)(0, 1) == 0.0);
  CHECK(tape.grad(aid)(1, 0) != 0.0);
}

TEST_CASE("fan-out accumulates gradients additively") {
  MatD x(1, 1);
  x << 2.0;
  TapeT<double> tape;
  auto xid = tape.variable(x);
  auto out = tape.mean_all(tape.add(xid, xid));  // d/dx (2x) = 2
  tape.backward(out);
  CHECK(tape.grad(xid)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("gather_rows accumulates over duplicate indices") {
  MatD x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  TapeT<double> tape;
  auto xid = tape.variable(x);
  auto g = tape.gather_rows(xid, {1, 1, 2});
  auto out = tape.mean_all(g);  // each gathered entry weighs 1/6
  tape.backward(out);
  CHECK(tape.grad(xid)(1, 0) == doctest::Approx(2.0 / 6.0));
  CHECK(tape.grad(xid)(2, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(tape.grad(xid)(0, 0) == 0.0);
}

TEST_CASE("every primitive passes a finite-difference check") {
  Graph g = random_graph(11, 6, 0.4);
  Rng rng(2);
  const MatD X = random_mat(rng, 6, 3);
  const MatD W = random_mat(rng, 3, 3);
  const MatD B = random_mat(rng, 1, 3);
  const MatD Y = random_mat(rng, 6, 3);

  auto check1 = [&](auto&& build) {
    const double err = gradient_check({X, W, B, Y}, build);
    CHECK(err < 1e-6);
  };

  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.matmul(v[0], v[1]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.add_rowvec_bias(v[0], v[2]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.add(v[0], v[3]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.sub(v[0], v[3]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.concat_cols(v[0], v[3]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.gather_rows(v[0], {0, 2, 2, 5}));
  });
  check1([&g](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.csr_mean_neighbors(v[0], g));
  });
  check1([&g](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.csr_sum_neighbors(v[0], g));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.row_l2_distance(v[0], v[3]));
  });
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.scale(t.add_scalar(v[0], 0.4), -1.7));
  });
  // relu away from kinks
  check1([](TapeT<double>& t, const std::vector<TensorId>& v) {
    return t.mean_all(t.relu(t.add_scalar(t.scale(v[0], 2.0), 0.011)));
  });
}

TEST_CASE("random compositions pass finite differences (sampled)") {
  Graph g = random_graph(5, 8, 0.35);
  int done = 0;
  std::uint64_t seed = 0;
  while (done < 20 && seed < 500) {
    CompositionCase cc;
    if (make_random_composition(seed++, g, cc)) {
      const double err = gradient_check(cc.inputs, cc.build);
      CHECK(err < 1e-4);
      ++done;
    }
  }
  CHECK(done == 20);
}

TEST_CASE("csr_mean_neighbors gradient matches the dense averaging-matrix oracle") {
  // 4-node path 0-1-2-3
  Graph g = Graph::from_edges(4, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {2, 3}});
  Rng rng(3);
  MatD X = random_mat(rng, 4, 3);

  TapeT<double> tape;
  auto xid = tape.variable(X);
  auto out = tape.mean_all(tape.csr_mean_neighbors(xid, g));
  tape.backward(out);

  // Dense oracle: mean_all(M X) with M the row-normalized adjacency, so
  // d/dX = M^T * ones / (rows*cols).
  MatD M = MatD::Zero(4, 4);
  for (NodeId v = 0; v < 4; ++v)
    for (NodeId u : g.neighbors(v)) M(v, u) = 1.0 / static_cast<double>(g.degree(v));
  MatD expected = M.transpose() * MatD::Constant(4, 3, 1.0 / (4 * 3));
  CHECK((tape.grad(xid) - expected).cwiseAbs().maxCoeff() < 1e-12);

  // Forward agrees with the dense product too.
  TapeT<double> t2;
  auto fwd = t2.csr_mean_neighbors(t2.constant(X), g);
  CHECK((t2.value(fwd) - M * X).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("csr_mean_neighbors rows stay in the neighbor convex hull") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g = random_graph(seed + 40, 12, 0.3);
    Rng rng(seed);
    MatD X = random_mat(rng, 12, 4);
    TapeT<double> tape;
    auto out = tape.value(tape.csr_mean_neighbors(tape.constant(X), g));
    for (NodeId v = 0; v < 12; ++v) {
      auto nb = g.neighbors(v);
      if (nb.empty()) continue;
      for (Eigen::Index c = 0; c < 4; ++c) {
        double lo = 1e300, hi = -1e300;
        for (NodeId u : nb) {
          lo = std::min(lo, X(u, c));
          hi = std::max(hi, X(u, c));
        }
        CHECK(out(v, c) >= lo - 1e-12);
        CHECK(out(v, c) <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("tape replay is bit-identical") {
  Graph g = random_graph(6, 8, 0.3);
  Rng rng(4);
  MatD X = random_mat(rng, 8, 3);
  MatD W = random_mat(rng, 3, 3);
  auto run = [&](MatD& grad_out) {
    TapeT<double> tape;
    auto x = tape.variable(X);
    auto w = tape.variable(W);
    auto out = tape.mean_all(tape.relu(tape.matmul(tape.csr_mean_neighbors(x, g), w)));
    tape.backward(out);
    grad_out = tape.grad(w);
    return tape.value(out)(0, 0);
  };
  MatD g1, g2;
  const double v1 = run(g1);
  const double v2 = run(g2);
  CHECK(v1 == v2);
  CHECK(g1 == g2);
}

TEST_CASE("tape contract violations throw") {
  TapeT<double> tape;
  auto a = tape.variable(MatD::Ones(2, 3));
  auto b = tape.variable(MatD::Ones(2, 3));
  CHECK_THROWS_AS(tape.matmul(a, b), std::invalid_argument);  // 2x3 * 2x3
  CHECK_THROWS_AS(tape.add_rowvec_bias(a, b), std::invalid_argument);
  auto sum = tape.add(a, b);
  CHECK_THROWS_AS(tape.backward(sum), std::invalid_argument);  // not 1x1
  auto scalar = tape.mean_all(sum);
  tape.backward(scalar);
  CHECK_THROWS_AS(tape.backward(scalar), std::logic_error);  // second backward
  CHECK_THROWS_AS(tape.grad(scalar + 100), std::out_of_range);
}

TEST_CASE("grad access rules") {
  TapeT<double> tape;
  auto c = tape.constant(MatD::Ones(1, 1));
  auto v = tape.variable(MatD::Ones(1, 1));
  CHECK_THROWS_AS(tape.grad(v), std::logic_error);  // before backward
  auto out = tape.mean_all(tape.add(c, v));
  tape.backward(out);
  CHECK_THROWS_AS(tape.grad(c), std::logic_error);  // untracked
  CHECK(tape.grad(v)(0, 0) == doctest::Approx(1.0));
}
