#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "wealth/rng.hpp"

using namespace wealth::rng;

TEST_CASE("philox4x32-10 known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter draws are pure functions of their address") {
    const CounterRng a(42), b(42), c(43);
    CHECK(a.normal(1, 7, 3) == b.normal(1, 7, 3));
    CHECK(a.normal(1, 7, 3) != c.normal(1, 7, 3));
    CHECK(a.normal(1, 7, 3) != a.normal(2, 7, 3));
    CHECK(a.normal(1, 7, 3) != a.normal(1, 8, 3));
    CHECK(a.normal(1, std::uint64_t{1} << 33, 0) != a.normal(1, 0, 0));
}

TEST_CASE("uniform draws stay inside the open unit interval") {
    CHECK(to_open_unit(0, 0) > 0.0);
    CHECK(to_open_unit(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("normal draws have unit variance") {
    const CounterRng rng(2024);
    const int n = 1'000'000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(5, static_cast<std::uint64_t>(i), 0);
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("engine bounded draws are uniform") {
    PhiloxEngine eng(9, 0);
    std::vector<int> counts(7, 0);
    const int n = 700'000;
    for (int i = 0; i < n; ++i) ++counts[eng.below(7)];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
    CHECK(chi2 < 22.46);  // 0.999 quantile, 6 degrees of freedom
    CHECK(eng.below(1) == 0);
}

TEST_CASE("shuffle permutes and is reproducible") {
    std::vector<int> v(1000), w;
    std::iota(v.begin(), v.end(), 0);
    w = v;
    PhiloxEngine e1(3, 4), e2(3, 4);
    shuffle(v.begin(), v.end(), e1);
    shuffle(w.begin(), w.end(), e2);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 1000; ++i) REQUIRE(sorted[i] == i);
    int fixed_points = 0;
    for (int i = 0; i < 1000; ++i) fixed_points += v[i] == i;
    CHECK(fixed_points < 10);
}
