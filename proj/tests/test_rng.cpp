#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "covspec/rng.hpp"

using covspec::Rng;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.raw() == b.raw());
    Rng c = Rng::substream(7, 3), d = Rng::substream(7, 3);
    for (int i = 0; i < 100; ++i) REQUIRE(c.uniform() == d.uniform());
}

TEST_CASE("substreams with different indices differ") {
    Rng a = Rng::substream(7, 0), b = Rng::substream(7, 1);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.raw() == b.raw()) ++same;
    REQUIRE(same == 0);

    // different master seeds also diverge at the same index
    Rng c = Rng::substream(7, 5), d = Rng::substream(8, 5);
    REQUIRE(c.raw() != d.raw());
}

TEST_CASE("uniform lies in [0,1) and is centered") {
    Rng r(1);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // sd of the mean is 1/sqrt(12 n) ~ 9.1e-4; 5 sigma gate
    REQUIRE(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("normal deviates have standard moments") {
    Rng r(123);
    const int n = 200000;
    double s1 = 0, s2 = 0, s3 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    // sampling sd: mean 1/sqrt(n)=2.2e-3, second moment sqrt(2/n)=3.2e-3,
    // third moment sqrt(15/n)=8.7e-3; gates sit at roughly 5 sigma
    REQUIRE(std::abs(s1 / n) < 0.012);
    REQUIRE(std::abs(s2 / n - 1.0) < 0.016);
    REQUIRE(std::abs(s3 / n) < 0.045);
}

TEST_CASE("gamma deviates match shape in mean and variance") {
    const int n = 200000;
    for (double shape : {0.7, 4.2}) {  // one below the Marsaglia-Tsang boost cutoff, one above
        Rng r(77);
        double s1 = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = r.gamma(shape);
            REQUIRE(x > 0.0);
            s1 += x;
            s2 += x * x;
        }
        const double mean = s1 / n;
        const double var = s2 / n - mean * mean;
        REQUIRE(std::abs(mean - shape) < 6.0 * std::sqrt(shape / n));
        // var of the sample variance for gamma: (2 shape^2 + 6 shape)/n
        REQUIRE(std::abs(var - shape) < 6.0 * std::sqrt((2 * shape * shape + 6 * shape) / n));
    }
    Rng r(1);
    REQUIRE_THROWS_AS(r.gamma(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(r.gamma(-1.0), std::invalid_argument);
}

TEST_CASE("uniform_below is bounded and roughly flat") {
    Rng r(9);
    const std::uint64_t m = 6;
    std::vector<int> counts(m, 0);
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = r.uniform_below(m);
        REQUIRE(v < m);
        ++counts[v];
    }
    for (int c : counts) REQUIRE(std::abs(c - n / 6) < 500);  // sd ~ 91
    REQUIRE_THROWS_AS(r.uniform_below(0), std::invalid_argument);
}

TEST_CASE("shuffle permutes and is seed-stable") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    Rng r(11);
    r.shuffle(v);

    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) REQUIRE(sorted[i] == i);

    std::vector<int> w(50);
    std::iota(w.begin(), w.end(), 0);
    Rng r2(11);
    r2.shuffle(w);
    REQUIRE(v == w);

    // a different seed should actually move something
    std::vector<int> u(50);
    std::iota(u.begin(), u.end(), 0);
    Rng r3(12);
    r3.shuffle(u);
    REQUIRE(u != v);
}
