#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "covspec/panel.hpp"
#include "test_util.hpp"

using namespace covspec;
using Catch::Matchers::WithinAbs;
using testutil::TempDir;

namespace {

const char* kBasicCsv =
    "date,AAA,BBB,CCC\n"
    "2021-01-04,100,50,20\n"
    "2021-01-05,102,49,20.4\n"
    "2021-01-06,101,51,19.8\n"
    "2021-01-07,105,52,20.1\n";

}  // namespace

TEST_CASE("comma panel loads with auto-detected delimiter") {
    TempDir tmp;
    PricePanel p = load_price_panel(tmp.write("prices.csv", kBasicCsv));
    REQUIRE(p.asset_ids == std::vector<std::string>{"AAA", "BBB", "CCC"});
    REQUIRE(p.timestamps.size() == 4);
    REQUIRE(p.prices.rows() == 4);
    REQUIRE(p.prices.cols() == 3);
    REQUIRE(p.prices(1, 0) == 102.0);
    REQUIRE(p.prices(2, 2) == 19.8);
    REQUIRE(p.dropped_assets.empty());
}

TEST_CASE("tab and semicolon delimiters are recognized") {
    TempDir tmp;
    const std::string tabbed = tmp.write("p.tsv",
                                         "t\tX\tY\n"
                                         "1\t10\t5\n"
                                         "2\t11\t6\n"
                                         "3\t12\t7\n");
    REQUIRE(load_price_panel(tabbed).asset_ids == std::vector<std::string>{"X", "Y"});

    const std::string semi = tmp.write("p2.csv",
                                       "t;X;Y\n"
                                       "1;10;5\n"
                                       "2;11;6\n");
    REQUIRE(load_price_panel(semi).prices(1, 1) == 6.0);

    // explicit delimiter wins over detection
    LoadOptions opt;
    opt.delimiter = ';';
    REQUIRE(load_price_panel(semi, opt).asset_ids.size() == 2);
}

TEST_CASE("incomplete assets are dropped and reported") {
    TempDir tmp;
    const std::string path = tmp.write("gaps.csv",
                                       "t,GOOD,GAP,NEG,TEXTGAP\n"
                                       "1,10,5,3,7\n"
                                       "2,11,,0,NA\n"
                                       "3,12,6,2,7.5\n");
    PricePanel p = load_price_panel(path);
    REQUIRE(p.asset_ids == std::vector<std::string>{"GOOD"});
    // empty cell, nonpositive quote, and NA token all disqualify
    REQUIRE(p.dropped_assets == std::vector<std::string>{"GAP", "NEG", "TEXTGAP"});

    LoadOptions strict;
    strict.drop_incomplete = false;
    REQUIRE_THROWS_WITH(load_price_panel(path, strict),
                        Catch::Matchers::ContainsSubstring("GAP"));
}

TEST_CASE("every asset incomplete is an error") {
    TempDir tmp;
    const std::string path = tmp.write("bad.csv",
                                       "t,A,B\n"
                                       "1,,1\n"
                                       "2,2,-\n");
    REQUIRE_THROWS_WITH(load_price_panel(path),
                        Catch::Matchers::ContainsSubstring("zero surviving assets"));
}

TEST_CASE("malformed panels are rejected") {
    TempDir tmp;
    SECTION("ragged row") {
        const std::string p = tmp.write("r.csv", "t,A,B\n1,1,2\n2,3\n");
        REQUIRE_THROWS_WITH(load_price_panel(p), Catch::Matchers::ContainsSubstring("fields"));
    }
    SECTION("unparseable number") {
        const std::string p = tmp.write("n.csv", "t,A\n1,1.0\n2,12x\n");
        REQUIRE_THROWS_WITH(load_price_panel(p), Catch::Matchers::ContainsSubstring("12x"));
    }
    SECTION("timestamps must strictly increase") {
        const std::string p = tmp.write("ts.csv", "t,A\n2021-02,1\n2021-01,2\n");
        REQUIRE_THROWS_WITH(load_price_panel(p), Catch::Matchers::ContainsSubstring("increasing"));
        const std::string dup = tmp.write("ts2.csv", "t,A\n5,1\n5,2\n");
        REQUIRE_THROWS(load_price_panel(dup));
    }
    SECTION("numeric labels compare numerically, not lexicographically") {
        const std::string p = tmp.write("num.csv", "t,A\n2,1\n10,2\n100,3\n");
        REQUIRE(load_price_panel(p).timestamps.size() == 3);
    }
    SECTION("empty or header-only files") {
        REQUIRE_THROWS(load_price_panel(tmp.write("e.csv", "")));
        REQUIRE_THROWS(load_price_panel(tmp.write("h.csv", "t,A\n")));
        REQUIRE_THROWS(load_price_panel(tmp.file("missing.csv")));
    }
}

TEST_CASE("log returns difference adjacent rows") {
    TempDir tmp;
    PricePanel p = load_price_panel(tmp.write("prices.csv", kBasicCsv));
    Eigen::MatrixXd g = compute_log_returns(p);
    REQUIRE(g.rows() == 3);  // one fewer than prices
    REQUIRE(g.cols() == 3);
    REQUIRE_THAT(g(0, 0), WithinAbs(std::log(102.0 / 100.0), 1e-15));
    REQUIRE_THAT(g(2, 0), WithinAbs(std::log(105.0 / 101.0), 1e-15));
    REQUIRE_THAT(g(1, 1), WithinAbs(std::log(51.0 / 49.0), 1e-15));

    PricePanel tiny;
    tiny.prices.resize(1, 1);
    tiny.prices(0, 0) = 1.0;
    REQUIRE_THROWS(compute_log_returns(tiny));
}

TEST_CASE("normalization yields exact zero mean and unit population variance") {
    Eigen::MatrixXd g(5, 2);
    g << 0.1, -0.3, 0.2, 0.4, -0.1, 0.0, 0.05, 0.2, -0.25, -0.3;
    ReturnPanel rp = normalize_returns(g, {"a", "b"});
    const double t = 5.0;
    for (int j = 0; j < 2; ++j) {
        REQUIRE_THAT(rp.X.col(j).mean(), WithinAbs(0.0, 1e-14));
        const double var = rp.X.col(j).squaredNorm() / t;
        REQUIRE_THAT(var, WithinAbs(1.0, 1e-12));
        // recorded moments invert the transform
        Eigen::VectorXd back = rp.X.col(j) * rp.per_asset_sigma(j);
        back.array() += rp.per_asset_mean(j);
        REQUIRE_THAT((back - g.col(j)).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-14));
    }
    REQUIRE(rp.asset_ids == std::vector<std::string>{"a", "b"});
}

TEST_CASE("constant return series is rejected by name") {
    Eigen::MatrixXd g(3, 2);
    g << 0.1, 0.5, 0.2, 0.5, 0.3, 0.5;
    REQUIRE_THROWS_WITH(normalize_returns(g, {"ok", "flat"}),
                        Catch::Matchers::ContainsSubstring("flat"));
    REQUIRE_THROWS(normalize_returns(g, {"only-one-id"}));  // id count mismatch
}

TEST_CASE("ingest runs the full path") {
    TempDir tmp;
    ReturnPanel rp = ingest(tmp.write("prices.csv", kBasicCsv));
    REQUIRE(rp.X.rows() == 3);
    REQUIRE(rp.X.cols() == 3);
    REQUIRE(rp.asset_ids == std::vector<std::string>{"AAA", "BBB", "CCC"});
    for (int j = 0; j < 3; ++j) REQUIRE_THAT(rp.X.col(j).mean(), WithinAbs(0.0, 1e-14));
}
