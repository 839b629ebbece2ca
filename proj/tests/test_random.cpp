#include <catch2/catch_amalgamated.hpp>

#include "omr/random.hpp"

using omr::Mat;

TEST_CASE("random_gaussian is bit-identical for identical seeds") {
    omr::Rng a(42), b(42);
    const Mat ma = omr::random_gaussian(7, 5, a);
    const Mat mb = omr::random_gaussian(7, 5, b);
    REQUIRE(ma == mb);  // exact, not approximate

    omr::Rng c(43);
    const Mat mc = omr::random_gaussian(7, 5, c);
    REQUIRE((ma - mc).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("random_gaussian matches N(0,1) moments") {
    omr::Rng rng(2024);
    const Mat m = omr::random_gaussian(100, 100, rng);
    const double mean = m.mean();
    const double var = (m.array() - mean).square().sum() / (m.size() - 1);
    REQUIRE(std::abs(mean) < 0.05);
    REQUIRE(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("random_gaussian rejects bad dimensions") {
    omr::Rng rng(1);
    REQUIRE_THROWS_AS(omr::random_gaussian(0, 3, rng), std::invalid_argument);
}

TEST_CASE("random_orthogonal produces orthogonal matrices") {
    omr::Rng rng(7);
    for (int d : {1, 2, 3, 8}) {
        const Mat q = omr::random_orthogonal(d, rng);
        REQUIRE((q.transpose() * q - Mat::Identity(d, d)).norm() <= 1e-10);
    }
}

TEST_CASE("random_orthogonal at d=1 is a sign") {
    omr::Rng rng(19);
    bool saw_plus = false, saw_minus = false;
    for (int i = 0; i < 64; ++i) {
        const double v = omr::random_orthogonal(1, rng)(0, 0);
        REQUIRE(std::abs(std::abs(v) - 1.0) <= 1e-14);
        (v > 0 ? saw_plus : saw_minus) = true;
    }
    REQUIRE(saw_plus);
    REQUIRE(saw_minus);
}

TEST_CASE("random_orthogonal trace is centered at d=2 (Haar)") {
    omr::Rng rng(123);
    double trace_sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) trace_sum += omr::random_orthogonal(2, rng).trace();
    REQUIRE(std::abs(trace_sum / draws) < 0.05);
}

TEST_CASE("splitmix64 seed derivation separates nearby inputs") {
    REQUIRE(omr::splitmix64(1) != omr::splitmix64(2));
    REQUIRE(omr::hash_combine(1, 2) != omr::hash_combine(2, 1));
}
