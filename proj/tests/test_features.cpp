#include <doctest.h>

#include <cmath>
#include <sstream>

#include "artsim/features.hpp"
#include "test_support.hpp"

using namespace artsim;
using namespace artsim::testing;

namespace {

SplitAssignment thirds_split(NodeId n) {
  std::vector<Split> labels(n, Split::Train);
  for (NodeId v = 0; v < n; ++v)
    labels[v] = v % 10 == 8 ? Split::Val : (v % 10 == 9 ? Split::Test : Split::Train);
  return SplitAssignment(std::move(labels));
}

}  // namespace

TEST_CASE("Random spec is seed-deterministic and bounded") {
  auto split = thirds_split(50);
  auto a = materialize(FeatureSpec::random(4, 7), 50, split);
  auto b = materialize(FeatureSpec::random(4, 7), 50, split);
  CHECK(a == b);
  CHECK((a.array().abs() <= 1.0f).all());
  auto c = materialize(FeatureSpec::random(4, 8), 50, split);
  CHECK(a != c);
}

TEST_CASE("Concat appends columns in child order") {
  auto split = thirds_split(20);
  auto spec = FeatureSpec::concat({FeatureSpec::random(8, 1), FeatureSpec::random(24, 2)});
  auto m = materialize(spec, 20, split);
  CHECK(m.cols() == 32);
  auto left = materialize(FeatureSpec::random(8, 1), 20, split);
  CHECK(m.leftCols(8) == left);
}

TEST_CASE("Concat is associative in produced columns") {
  auto split = thirds_split(15);
  auto a = FeatureSpec::random(3, 10);
  auto b = FeatureSpec::random(5, 11);
  auto c = FeatureSpec::random(2, 12);
  auto left = materialize(FeatureSpec::concat({a, FeatureSpec::concat({b, c})}), 15, split);
  auto right = materialize(FeatureSpec::concat({FeatureSpec::concat({a, b}), c}), 15, split);
  CHECK(left == right);
}

TEST_CASE("standardize: constant column collapses to zero") {
  auto split = thirds_split(30);
  MatF m = MatF::Zero(30, 2);
  for (int i = 0; i < 30; ++i) {
    m(i, 0) = 3.25f;                         // constant
    m(i, 1) = static_cast<float>(i % 7) - 3; // varying
  }
  MatF z = standardize(m, split);
  CHECK((z.col(0).array() == 0.0f).all());
  CHECK((z.col(1).array() != 0.0f).any());
}

TEST_CASE("standardize: Train-row statistics hit zero mean, unit std") {
  auto split = thirds_split(200);
  Rng rng(5);
  MatF m(200, 6);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = static_cast<float>(rng.uniform(-3.0, 9.0) * (j + 1));
  MatF z = standardize(m, split);
  const auto& train = split.nodes(Split::Train);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    double mean = 0, var = 0;
    for (NodeId v : train) mean += z(v, c);
    mean /= static_cast<double>(train.size());
    for (NodeId v : train) var += (z(v, c) - mean) * (z(v, c) - mean);
    var /= static_cast<double>(train.size());
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-3);
  }
}

TEST_CASE("Standardized spec wrapping equals direct standardization") {
  auto split = thirds_split(40);
  auto inner = FeatureSpec::random(5, 3);
  auto direct = standardize(materialize(inner, 40, split), split);
  auto wrapped = materialize(FeatureSpec::standardized(inner), 40, split);
  CHECK(direct == wrapped);
}

TEST_CASE("FTRX round-trips bit-exactly") {
  MatF m(3, 2);
  m << 1.5f, -2.25f, 0.0f, 3.75f, -0.125f, 1e-20f;
  std::ostringstream out1(std::ios::binary);
  save_ftrx(out1, m);
  std::istringstream in(out1.str(), std::ios::binary);
  MatF back = load_ftrx(in);
  CHECK(back == m);
  std::ostringstream out2(std::ios::binary);
  save_ftrx(out2, back);
  CHECK(out1.str() == out2.str());
}

TEST_CASE("FTRX loader rejects bad magic and truncation") {
  MatF m = MatF::Ones(4, 3);
  std::ostringstream out(std::ios::binary);
  save_ftrx(out, m);
  std::string bytes = out.str();

  std::string bad = bytes;
  bad[1] = 'X';
  std::istringstream badin(bad, std::ios::binary);
  CHECK_THROWS_WITH_AS(load_ftrx(badin), doctest::Contains("magic"), std::runtime_error);

  std::istringstream trunc(bytes.substr(0, bytes.size() - 5), std::ios::binary);
  CHECK_THROWS_WITH_AS(load_ftrx(trunc), doctest::Contains("truncated"),
                       std::runtime_error);
}

TEST_CASE("FTRX loader rejects non-finite payloads") {
  MatF m(1, 2);
  m << 1.0f, std::numeric_limits<float>::infinity();
  std::ostringstream out(std::ios::binary);
  save_ftrx(out, m);
  std::istringstream in(out.str(), std::ios::binary);
  CHECK_THROWS_WITH_AS(load_ftrx(in), doctest::Contains("non-finite"),
                       std::runtime_error);
}

TEST_CASE("feature CSV: permuted rows are reordered by id") {
  std::istringstream in("id,f0,f1\n2,20,21\n0,0,1\n1,10,11\n");
  MatF m = load_feature_csv(in);
  REQUIRE(m.rows() == 3);
  CHECK(m(0, 0) == 0.0f);
  CHECK(m(1, 0) == 10.0f);
  CHECK(m(2, 1) == 21.0f);
}

TEST_CASE("feature CSV errors: header, duplicate id, out-of-range id") {
  std::istringstream h("f0,f1\n0,1,2\n");
  CHECK_THROWS_AS(load_feature_csv(h), std::runtime_error);
  std::istringstream dup("id,f0\n0,1\n0,2\n");
  CHECK_THROWS_WITH_AS(load_feature_csv(dup), doctest::Contains("duplicate"),
                       std::runtime_error);
  std::istringstream range("id,f0\n0,1\n5,2\n");
  CHECK_THROWS_WITH_AS(load_feature_csv(range), doctest::Contains("out of range"),
                       std::runtime_error);
}

TEST_CASE("materialize validates row counts for file specs") {
  auto split = thirds_split(10);
  const std::string path = "/tmp/artsim_test_rows.ftrx";
  save_ftrx_file(path, MatF::Ones(7, 2));  // 7 rows, need 10
  CHECK_THROWS_WITH_AS(materialize(FeatureSpec::file(path), 10, split),
                       doctest::Contains("expected 10"), std::runtime_error);
}
