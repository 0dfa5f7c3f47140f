#include <doctest.h>

#include "kklab/util/rng.hpp"
#include "kklab/util/sha256.hpp"
#include "kklab/util/stats.hpp"
#include "kklab/util/vecmath.hpp"
#include "oracles.hpp"

using namespace kklab;

TEST_CASE("sha256 matches FIPS 180-4 vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // exercise multi-block input
    std::string million(1000000, 'a');
    CHECK(sha256_hex(million) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("nearest-rank quantile agrees with the sort oracle") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values;
        const int n = 1 + int(rng.uniform_int(40));
        for (int i = 0; i < n; ++i) values.push_back(rng.normal());
        for (double q : {0.01, 0.1, 0.25, 0.5}) {
            CHECK(stats::quantile_nearest_rank(values, q) ==
                  oracles::brute_quantile(values, q));
        }
    }
}

TEST_CASE("spearman rho on known data") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> inc{2, 4, 6, 8, 10};
    std::vector<double> dec{5, 4, 3, 2, 1};
    CHECK(stats::spearman_rho(x, inc) == doctest::Approx(1.0));
    CHECK(stats::spearman_rho(x, dec) == doctest::Approx(-1.0));
    std::vector<double> one_swap{1, 3, 2, 4, 5};
    CHECK(stats::spearman_rho(x, one_swap) == doctest::Approx(0.9));
}

TEST_CASE("chi-square tail at known points") {
    // chi2(1): P(X >= 3.841) ~ 0.05
    CHECK(stats::chi_square_upper_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
    // chi2(10): P(X >= 18.307) ~ 0.05
    CHECK(stats::chi_square_upper_tail(18.30703805327515, 10) ==
          doctest::Approx(0.05).epsilon(1e-6));
    CHECK(stats::chi_square_upper_tail(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("confidence interval basics") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto ci = stats::mean_ci95(x);
    CHECK(ci.contains(2.5));
    CHECK(ci.lo < 2.5);
    CHECK(ci.hi > 2.5);
}

TEST_CASE("rng streams are deterministic and decorrelated") {
    Rng a(derive_seed(7, 1));
    Rng b(derive_seed(7, 1));
    Rng c(derive_seed(7, 2));
    bool same_ab = true, same_ac = true;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        same_ab = same_ab && va == b.next_u64();
        same_ac = same_ac && va == c.next_u64();
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
}

TEST_CASE("categorical sampling respects weights") {
    Rng rng(99);
    std::vector<double> w{0.0, 1.0, 3.0};
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 40000; ++i) counts[rng.categorical(w)] += 1;
    CHECK(counts[0] == 0);
    CHECK(double(counts[2]) / double(counts[1]) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("vec helpers") {
    std::vector<double> a{1.0, 2.0}, b{3.0, -1.0};
    CHECK(vec::dot(a, b) == doctest::Approx(1.0));
    const auto mid = vec::lerp(a, b, 0.5);
    CHECK(mid[0] == doctest::Approx(2.0));
    CHECK(mid[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)vec::dot(a, std::vector<double>{1.0}), std::invalid_argument);
}
