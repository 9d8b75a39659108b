#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pdvox/error.hpp"
#include "pdvox/resample.hpp"
#include "support/synthetic.hpp"

using namespace pdvox;
using pdvox::testing::make_dataset;

namespace {

// Recovers the interpolation weight from every coordinate that moved and
// checks they agree. Returns the shared u, or -1 if none fits.
double common_u(std::span<const double> base, std::span<const double> nb, std::span<const double> synth) {
  double u = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < base.size(); ++c) {
    const double span = nb[c] - base[c];
    if (std::abs(span) < 1e-12) {
      if (std::abs(synth[c] - base[c]) > 1e-9) return -1.0;
      continue;
    }
    const double uc = (synth[c] - base[c]) / span;
    if (std::isnan(u)) u = uc;
    else if (std::abs(uc - u) > 1e-9) return -1.0;
  }
  return std::isnan(u) ? 0.0 : u;
}

}  // namespace

TEST_CASE("interpolate endpoints and midpoint") {
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{1.0, 1.0};
  CHECK(interpolate(a, b, 0.5) == std::vector<double>{0.5, 0.5});
  const std::vector<double> base{3.25, -1.5};
  CHECK(interpolate(base, b, 0.0) == base);
}

TEST_CASE("two minority points, k=1: synthetic rows lie on their segment") {
  const Dataset d = make_dataset({{0, 0}, {1, 1}, {5, 5}, {6, 5}, {5, 6}, {7, 7}}, {0, 0, 1, 1, 1, 1});
  const SmoteResult r = smote(d, {1, 7});
  CHECK(r.minority_label == 0);
  CHECK(r.k_used == 1);
  REQUIRE(r.data.size() == 8);
  for (std::size_t s = 6; s < 8; ++s) {
    const auto row = r.data.row(s);
    CHECK(row[0] == row[1]);
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 1.0);
    CHECK(r.data.label(s) == 0);
  }
  CHECK(r.data.id(6) == "synth-0");
  CHECK(r.data.id(7) == "synth-1");
}

TEST_CASE("nearest neighbours break distance ties by lower index") {
  Matrix m(0, 1);
  for (double v : {0.0, -1.0, 1.0, 2.0}) m.append_row(std::vector<double>{v});
  const auto nn = nearest_neighbors(m, 2);
  CHECK(nn[0] == std::vector<std::size_t>{1, 2});
  CHECK(nn[3] == std::vector<std::size_t>{2, 0});
}

TEST_CASE("SMOTE counts on the post-split training shape (118 PD / 38 healthy)") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Rng rng(5);
  for (int i = 0; i < 156; ++i) {
    rows.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    labels.push_back(i < 118 ? 1 : 0);
  }
  const Dataset train = make_dataset(rows, labels);
  const SmoteResult r = smote(train, {5, 42});
  CHECK(r.origins.size() == 80);
  CHECK(r.data.size() == 236);
  CHECK(r.data.count_label(1) == 118);
  CHECK(r.data.count_label(0) == 118);
}

TEST_CASE("SMOTE properties on random datasets") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Rng rng(seed);
    const std::size_t n = 10 + rng.below(60);
    const std::size_t d = 1 + rng.below(6);
    const Dataset train = pdvox::testing::random_blobs(seed, n, d, 1.0, 0.15 + 0.7 * rng.uniform());
    const std::size_t k = 1 + rng.below(7);
    const SmoteResult r = smote(train, {k, seed});
    const int minority = r.minority_label;

    // Balanced, original rows untouched and first.
    CHECK(r.data.count_label(0) == r.data.count_label(1));
    for (std::size_t i = 0; i < train.size(); ++i) {
      CHECK(r.data.id(i) == train.id(i));
      CHECK(std::equal(train.row(i).begin(), train.row(i).end(), r.data.row(i).begin()));
    }

    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.label(i) != minority) continue;
      for (std::size_t c = 0; c < d; ++c) {
        lo[c] = std::min(lo[c], train.row(i)[c]);
        hi[c] = std::max(hi[c], train.row(i)[c]);
      }
    }
    for (std::size_t s = 0; s < r.origins.size(); ++s) {
      const std::size_t idx = train.size() + s;
      const auto& o = r.origins[s];
      CHECK(train.label(o.base) == minority);
      CHECK(train.label(o.neighbor) == minority);
      CHECK(o.base != o.neighbor);
      CHECK(r.data.label(idx) == minority);
      const double u = common_u(train.row(o.base), train.row(o.neighbor), r.data.row(idx));
      CHECK(u >= 0.0);
      CHECK(u <= 1.0);
      for (std::size_t c = 0; c < d; ++c) {
        CHECK(r.data.row(idx)[c] >= lo[c] - 1e-12);
        CHECK(r.data.row(idx)[c] <= hi[c] + 1e-12);
      }
    }

    const SmoteResult again = smote(train, {k, seed});
    CHECK(again.data == r.data);
  }
}

TEST_CASE("SMOTE errors and no-op") {
  CHECK_THROWS_AS(smote(make_dataset({{0}, {1}, {2}}, {1, 1, 0}), {5, 1}), CannotInterpolateError);
  CHECK_THROWS_AS(smote(make_dataset({{0}, {1}}, {1, 1}), {5, 1}), DegenerateTargetError);
  const Dataset balanced = make_dataset({{0}, {1}, {2}, {3}}, {1, 0, 1, 0});
  const SmoteResult r = smote(balanced, {5, 1});
  CHECK(r.data == balanced);
  CHECK(r.origins.empty());
}
