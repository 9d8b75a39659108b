#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pdvox/dataset.hpp"
#include "pdvox/error.hpp"
#include "support/synthetic.hpp"

using namespace pdvox;
using pdvox::testing::make_dataset;

namespace {

std::string header_line() {
  std::string h;
  for (std::size_t c = 0; c < kCanonicalHeader.size(); ++c) h += (c ? "," : "") + std::string(kCanonicalHeader[c]);
  return h;
}

std::string data_line(const std::string& id, int status, double base) {
  std::string line = id;
  for (std::size_t c = 1; c < kCanonicalHeader.size(); ++c) {
    line += ',';
    line += c == 17 ? std::to_string(status) : format_double(base + static_cast<double>(c));
  }
  return line;
}

// Two-pass Pearson in long double, independent of the library path.
double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

Dataset labelled(std::size_t positives, std::size_t negatives) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < positives ? 1 : 0);
  }
  return make_dataset(rows, labels);
}

}  // namespace

TEST_CASE("load_dataset keeps ids, order and values") {
  std::istringstream in(header_line() + "\n" + data_line("phon_a", 1, 0.5) + "\r\n" + data_line("phon_b", 0, 7.25) +
                        "\n\n");
  const Dataset d = read_dataset(in);
  REQUIRE(d.size() == 2);
  CHECK(d.feature_count() == kFeatureCount);
  CHECK(d.has_canonical_schema());
  CHECK(d.id(0) == "phon_a");
  CHECK(d.id(1) == "phon_b");
  CHECK(d.label(0) == 1);
  CHECK(d.label(1) == 0);
  // Column 1 is MDVP:Fo(Hz); status (file column 17) is skipped, so RPDE is feature 16.
  CHECK(d.row(0)[0] == 1.5);
  CHECK(d.row(1)[16] == 7.25 + 18.0);
  CHECK(d.feature_names()[16] == "RPDE");
}

TEST_CASE("schema errors name the first mismatched column") {
  SUBCASE("missing PPE") {
    std::string h = header_line();
    h = h.substr(0, h.rfind(','));
    std::istringstream in(h + "\n");
    try {
      read_dataset(in);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.column() == "PPE");
    }
  }
  SUBCASE("permuted columns") {
    std::string h = header_line();
    const auto a = h.find("MDVP:RAP");
    const auto b = h.find("MDVP:PPQ");
    h = h.substr(0, a) + "MDVP:PPQ,MDVP:RAP" + h.substr(b + std::string("MDVP:PPQ").size());
    std::istringstream in(h + "\n");
    try {
      read_dataset(in);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.column() == "MDVP:RAP");
    }
  }
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_dataset(in), SchemaError);
  }
}

TEST_CASE("parse errors report the line number") {
  SUBCASE("non-numeric feature") {
    std::string bad = data_line("x", 1, 0.0);
    bad.replace(bad.find(",1,") + 1, 1, "abc");
    std::istringstream in(header_line() + "\n" + data_line("ok", 0, 0.0) + "\n" + bad + "\n");
    try {
      read_dataset(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
    }
  }
  SUBCASE("status outside {0,1}") {
    std::istringstream in(header_line() + "\n" + data_line("x", 2, 0.0) + "\n");
    try {
      read_dataset(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
    }
  }
  SUBCASE("short row") {
    std::istringstream in(header_line() + "\nid,1,2,3\n");
    CHECK_THROWS_AS(read_dataset(in), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset("/nonexistent/parkinsons.data"), IoError); }
}

TEST_CASE("dataset CSV round-trip is bit-exact") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset d = pdvox::testing::synthetic_vocal(seed, 40);
    std::vector<double> odd(kFeatureCount, 0.1 + 0.2);
    odd[0] = 1e-300;
    odd[1] = -123456.789012345678;
    odd[2] = 5e-324;
    d.append("odd", odd, 0);
    std::stringstream buf;
    write_dataset(buf, d);
    const Dataset back = read_dataset(buf);
    CHECK(back == d);
  }
}

TEST_CASE("correlation_matrix basics") {
  SUBCASE("perfect dependence") {
    const Dataset d = make_dataset({{1, 2, 6}, {2, 4, 4}, {3, 6, 2}}, {0, 1, 0});
    const auto c = correlation_matrix(d);
    CHECK(c.matrix(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.matrix(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(c.matrix(1, 1) == 1.0);
    CHECK(c.warnings.empty());
  }
  SUBCASE("constant column gives 0 and a warning") {
    const Dataset d = make_dataset({{1, 5}, {2, 5}, {3, 5}}, {0, 1, 0});
    const auto c = correlation_matrix(d);
    CHECK(c.matrix(0, 1) == 0.0);
    CHECK(c.matrix(1, 1) == 1.0);
    CHECK(c.constant_columns == std::vector<std::size_t>{1});
    CHECK(c.warnings.size() == 1);
  }
  SUBCASE("fewer than two records") {
    CHECK_THROWS_AS(correlation_matrix(make_dataset({{1, 2}}, {1})), InsufficientDataError);
  }
}

TEST_CASE("correlation_matrix matches a naive oracle and is row-order invariant") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Dataset d = pdvox::testing::synthetic_vocal(seed, 60);
    const auto c = correlation_matrix(d);
    for (std::size_t a = 0; a < d.feature_count(); ++a) {
      for (std::size_t b = 0; b < d.feature_count(); ++b) {
        CHECK(c.matrix(a, b) == c.matrix(b, a));
        CHECK(c.matrix(a, b) >= -1.0);
        CHECK(c.matrix(a, b) <= 1.0);
      }
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < d.size(); ++i) {
      x.push_back(d.row(i)[3]);
      y.push_back(d.row(i)[5]);
    }
    CHECK(std::abs(c.matrix(3, 5) - naive_pearson(x, y)) < 1e-12);

    std::vector<std::size_t> perm(d.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const auto cp = correlation_matrix(d.subset(perm));
    CHECK(cp.matrix == c.matrix);
  }
}

TEST_CASE("stratified split counts follow the rounding rule") {
  CHECK(stratum_test_count(147, 0.2) == 29);
  CHECK(stratum_test_count(48, 0.2) == 10);
  CHECK(stratum_test_count(5, 0.5) == 3);

  const Dataset d = labelled(147, 48);
  const SplitPair s = stratified_split(d, 0.2, 42);
  CHECK(s.train.size() == 156);
  CHECK(s.test.size() == 39);
  CHECK(s.test.count_label(1) == 29);
  CHECK(s.train.count_label(1) == 118);
  CHECK(s.test.count_label(0) == 10);
  CHECK(s.train.count_label(0) == 38);

  const SplitPair again = stratified_split(d, 0.2, 42);
  CHECK(again.test.ids() == s.test.ids());
  CHECK(again.train.ids() == s.train.ids());
  const SplitPair other = stratified_split(d, 0.2, 43);
  CHECK(other.test.ids() != s.test.ids());
}

TEST_CASE("stratified split is a partition for random sizes, fractions and seeds") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t pos = 1 + rng.below(40);
    const std::size_t neg = 1 + rng.below(40);
    const double fraction = 0.05 + 0.9 * rng.uniform();
    const Dataset d = labelled(pos, neg);
    const SplitPair s = stratified_split(d, fraction, rng.next());
    REQUIRE(s.train.size() + s.test.size() == d.size());
    std::set<std::string> ids(s.train.ids().begin(), s.train.ids().end());
    for (const auto& id : s.test.ids()) CHECK(ids.insert(id).second);
    CHECK(ids.size() == d.size());
    CHECK(s.test.count_label(1) == std::min(pos, stratum_test_count(pos, fraction)));
    CHECK(s.test.count_label(0) == std::min(neg, stratum_test_count(neg, fraction)));
  }
}

TEST_CASE("stratified split errors") {
  CHECK_THROWS_AS(stratified_split(labelled(5, 0), 0.2, 1), StratificationError);
  CHECK_THROWS_AS(stratified_split(labelled(5, 5), 0.0, 1), ContractError);
  CHECK_THROWS_AS(stratified_split(labelled(5, 5), 1.0, 1), ContractError);
}

TEST_CASE("standardizer") {
  SUBCASE("closed form on [1,2,3]") {
    const Dataset d = make_dataset({{1}, {2}, {3}}, {0, 1, 0});
    const Standardizer s = fit_standardizer(d);
    CHECK(s.means()[0] == 2.0);
    CHECK(s.standard_deviations()[0] == 1.0);
    const Dataset z = apply_standardizer(s, d);
    CHECK(z.row(0)[0] == -1.0);
    CHECK(z.row(1)[0] == 0.0);
    CHECK(z.row(2)[0] == 1.0);
  }
  SUBCASE("constant column becomes zeros with a warning") {
    const Dataset d = make_dataset({{5, 1}, {5, 2}, {5, 4}}, {0, 1, 0});
    const Standardizer s = fit_standardizer(d);
    CHECK(s.constant()[0]);
    CHECK_FALSE(s.constant()[1]);
    CHECK(s.warnings().size() == 1);
    const Dataset z = s.apply(d);
    for (std::size_t i = 0; i < 3; ++i) CHECK(z.row(i)[0] == 0.0);
  }
  SUBCASE("fit data has mean 0 and sd 1") {
    const Dataset d = pdvox::testing::synthetic_vocal(3, 80);
    const Dataset z = Standardizer::fit(d).apply(d);
    for (std::size_t c = 0; c < z.feature_count(); ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) mean += z.row(i)[c];
      mean /= static_cast<double>(z.size());
      double ss = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) ss += (z.row(i)[c] - mean) * (z.row(i)[c] - mean);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(ss / static_cast<double>(z.size() - 1)) - 1.0) < 1e-9);
    }
  }
  SUBCASE("perturbing test rows does not change the fitted statistics") {
    const Dataset d = pdvox::testing::synthetic_vocal(4, 100);
    const SplitPair s1 = stratified_split(d, 0.2, 9);
    std::set<std::string> test_ids(s1.test.ids().begin(), s1.test.ids().end());
    Dataset perturbed(d.feature_names(), {}, Matrix(0, d.feature_count()), {});
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> row(d.row(i).begin(), d.row(i).end());
      if (test_ids.count(d.id(i))) {
        for (double& v : row) v = v * 1000.0 + 7.0;
      }
      perturbed.append(d.id(i), row, d.label(i));
    }
    const SplitPair s2 = stratified_split(perturbed, 0.2, 9);
    const Standardizer a = fit_standardizer(s1.train);
    const Standardizer b = fit_standardizer(s2.train);
    CHECK(a.means() == b.means());
    CHECK(a.standard_deviations() == b.standard_deviations());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_standardizer(Dataset{}), ContractError);
    const Standardizer s = fit_standardizer(make_dataset({{1, 2}, {3, 4}}, {0, 1}));
    CHECK_THROWS_AS(s.apply(std::vector<double>{1.0}), ContractError);
  }
}
