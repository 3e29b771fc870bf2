#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "hotype/common.hpp"

using namespace hotype;

TEST_CASE("fmt_double round-trips exactly") {
    for (std::uint64_t t = 0; t < 200; ++t) {
        auto r = gen::stream(1, t);
        const double x = (r.uniform() - 0.5) * std::pow(10.0, r.uniform(-300, 300));
        CHECK(std::strtod(fmt_double(x).c_str(), nullptr) == x);
    }
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(2.0) == "2");
    CHECK(std::strtod(fmt_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
          std::numeric_limits<double>::denorm_min());
}

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a(std::string("")) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a(std::string("a")) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a(std::string("foobar")) == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("Rng streams are reproducible and seed-separated") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    Rng r(5);
    double lo = 1, hi = 0, mean = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u / 20000;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
    for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("derive_seed separates its arguments") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(1, a, b));
    CHECK(seen.size() == 400);
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("ls_slope recovers a noiseless line") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        auto r = gen::stream(2, t);
        const double m = r.uniform(-5, 5), q = r.uniform(-5, 5);
        auto x = gen::uniform_vec(r, 10, -3, 3);
        std::vector<double> y;
        for (double xi : x) y.push_back(m * xi + q);
        CHECK(ls_slope(x, y) == doctest::Approx(m).epsilon(1e-9));
    }
}

TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
}
