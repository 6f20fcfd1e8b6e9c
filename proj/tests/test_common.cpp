#include <catch2/catch_amalgamated.hpp>

#include "altcite/common.hpp"

using namespace altcite;

TEST_CASE("rng streams are deterministic and seed-sensitive") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
    bool differs = false;
    Rng a2(42);
    for (int i = 0; i < 100; ++i) differs |= (a2.next() != c.next());
    REQUIRE(differs);
}

TEST_CASE("mix64 is stable and argument-order sensitive") {
    REQUIRE(mix64(42, 7) == mix64(42, 7));
    REQUIRE(mix64(42, 7) != mix64(7, 42));
    REQUIRE(mix64(0, 0) != 0);
}

TEST_CASE("bounded draws stay in range and permutations are valid") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) REQUIRE(rng.below(13) < 13);
    auto perm = rng.permutation(257);
    std::vector<bool> seen(257, false);
    for (auto v : perm) {
        REQUIRE(v < 257);
        REQUIRE(!seen[v]);
        seen[v] = true;
    }
}

TEST_CASE("uniform and normal draws look sane") {
    Rng rng(11);
    double sum = 0, sumsq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    REQUIRE(std::fabs(sum / n) < 0.05);
    REQUIRE(std::fabs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("quantiles interpolate between closest ranks") {
    std::vector<double> v{0, 1, 2, 3, 4};
    REQUIRE(quantile_sorted(v, 0.25) == 1.0);
    REQUIRE(quantile_sorted(v, 0.5) == 2.0);
    REQUIRE(quantile_sorted(v, 0.75) == 3.0);
    std::vector<double> two{1, 2};
    REQUIRE(quantile_sorted(two, 0.5) == Catch::Approx(1.5));
    REQUIRE(quantile_sorted(two, 0.0) == 1.0);
    REQUIRE(quantile_sorted(two, 1.0) == 2.0);
}

TEST_CASE("round_half_up rounds .5 toward positive infinity") {
    REQUIRE(round_half_up(2.5) == 3.0);
    REQUIRE(round_half_up(2.49) == 2.0);
    REQUIRE(round_half_up(0.5) == 1.0);
    REQUIRE(round_half_up(-0.4) == 0.0);
}

TEST_CASE("std helpers distinguish sample and population forms") {
    std::vector<double> v{0, 2};
    REQUIRE(population_std(v) == Catch::Approx(1.0));
    REQUIRE(sample_std(v) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("fmt3 renders three decimals") {
    REQUIRE(fmt3(0.8793) == "0.879");
    REQUIRE(fmt3(1.0) == "1.000");
}
