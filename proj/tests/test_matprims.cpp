#include <catch2/catch_amalgamated.hpp>

#include "omr/matrix.hpp"
#include "omr/random.hpp"

using omr::Mat;
using omr::Vec;

TEST_CASE("sym_eig on identity and diagonal matrices") {
    const auto eig_id = omr::sym_eig(Mat::Identity(3, 3));
    REQUIRE(eig_id.values.size() == 3);
    for (int i = 0; i < 3; ++i) REQUIRE(eig_id.values(i) == Catch::Approx(1.0).margin(1e-12));

    Mat d(2, 2);
    d << 2, 0, 0, -1;
    const auto eig_d = omr::sym_eig(d);
    REQUIRE(eig_d.values(0) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(eig_d.values(1) == Catch::Approx(-1.0).margin(1e-12));
    // axis eigenvectors up to sign
    REQUIRE(std::abs(eig_d.vectors(0, 0)) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(eig_d.vectors(1, 1)) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sym_eig reconstructs random symmetric matrices") {
    omr::Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Mat g = omr::random_gaussian(5, 5, rng);
        const Mat s = 0.5 * (g + g.transpose());
        const auto eig = omr::sym_eig(s);
        const Mat recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        REQUIRE((s - recon).norm() <= 1e-8 * (1.0 + s.norm()));
        REQUIRE((eig.vectors.transpose() * eig.vectors - Mat::Identity(5, 5)).norm() <= 1e-10);
        for (int i = 1; i < 5; ++i) REQUIRE(eig.values(i - 1) >= eig.values(i));
    }
}

TEST_CASE("sym_eig rejects bad input") {
    REQUIRE_THROWS_AS(omr::sym_eig(Mat::Zero(2, 3)), std::invalid_argument);
    Mat asym(2, 2);
    asym << 0, 1, 0, 0;
    REQUIRE_THROWS_AS(omr::sym_eig(asym), std::invalid_argument);
}

TEST_CASE("svd on simple matrices") {
    const auto id = omr::svd(Mat::Identity(2, 2));
    REQUIRE(id.singulars(0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(id.singulars(1) == Catch::Approx(1.0).margin(1e-12));

    Mat d(2, 2);
    d << 3, 0, 0, 0;
    const auto sd = omr::svd(d);
    REQUIRE(sd.singulars(0) == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(sd.singulars(1) == Catch::Approx(0.0).margin(1e-12));

    Mat col(2, 1);
    col << 3, 4;
    REQUIRE(omr::svd(col).singulars(0) == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("svd factors are orthonormal and reconstruct") {
    omr::Rng rng(7);
    const Mat z = omr::random_gaussian(6, 4, rng);
    const auto d = omr::svd(z);
    REQUIRE((d.left.transpose() * d.left - Mat::Identity(4, 4)).norm() <= 1e-10);
    REQUIRE((d.right.transpose() * d.right - Mat::Identity(4, 4)).norm() <= 1e-10);
    const Mat recon = d.left * d.singulars.asDiagonal() * d.right.transpose();
    REQUIRE((z - recon).norm() <= 1e-8 * (1.0 + z.norm()));
    for (int i = 0; i < 4; ++i) REQUIRE(d.singulars(i) >= 0.0);
}

TEST_CASE("polar_round hand-checked values") {
    REQUIRE((omr::polar_round(Mat::Identity(4, 4)) - Mat::Identity(4, 4)).norm() <= 1e-12);

    Mat d(2, 2);
    d << 2, 0, 0, 0.5;
    REQUIRE((omr::polar_round(d) - Mat::Identity(2, 2)).norm() <= 1e-12);

    // Z = [[0,-2],[1,0]]: Z (Z^T Z)^{-1/2} = [[0,-1],[1,0]]
    Mat z(2, 2);
    z << 0, -2, 1, 0;
    Mat expected(2, 2);
    expected << 0, -1, 1, 0;
    REQUIRE((omr::polar_round(z) - expected).norm() <= 1e-12);
}

TEST_CASE("polar_round flags rank-deficient input") {
    Mat z(2, 2);
    z << 1, 0, 0, 0;
    bool degenerate = false;
    const Mat q = omr::polar_round(z, &degenerate);
    REQUIRE(degenerate);
    REQUIRE((q.transpose() * q - Mat::Identity(2, 2)).norm() <= 1e-10);

    omr::Rng rng(3);
    degenerate = true;
    omr::polar_round(omr::random_orthogonal(3, rng), &degenerate);
    REQUIRE_FALSE(degenerate);
}

TEST_CASE("polar_round properties: orthogonality, idempotence, optimality") {
    omr::Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const Mat z = omr::random_gaussian(4, 4, rng);
        const Mat q = omr::polar_round(z);
        REQUIRE((q.transpose() * q - Mat::Identity(4, 4)).norm() <= 1e-10);
        REQUIRE((omr::polar_round(q) - q).norm() <= 1e-9);
        const Mat other = omr::random_orthogonal(4, rng);
        REQUIRE((z - q).norm() <= (z - other).norm() + 1e-9);
    }
}

TEST_CASE("psd_project hand-checked values") {
    Mat d(2, 2);
    d << 1, 0, 0, -1;
    Mat expected(2, 2);
    expected << 1, 0, 0, 0;
    REQUIRE((omr::psd_project(d) - expected).norm() <= 1e-12);

    Mat flip(2, 2);
    flip << 0, 1, 1, 0;
    Mat half(2, 2);
    half << 0.5, 0.5, 0.5, 0.5;
    REQUIRE((omr::psd_project(flip) - half).norm() <= 1e-12);
}

TEST_CASE("psd_project properties: fixed point, idempotence, nearest point") {
    omr::Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Mat g = omr::random_gaussian(4, 4, rng);
        const Mat psd = g * g.transpose();
        REQUIRE((omr::psd_project(psd) - psd).norm() <= 1e-9 * (1.0 + psd.norm()));

        const Mat s = 0.5 * (g + g.transpose());
        const Mat p = omr::psd_project(s);
        REQUIRE(omr::sym_eig(p).values.minCoeff() >= -1e-9);
        REQUIRE((omr::psd_project(p) - p).norm() <= 1e-9 * (1.0 + p.norm()));
        // no sampled PSD matrix may be closer
        const Mat g2 = omr::random_gaussian(4, 4, rng);
        const Mat sample = g2 * g2.transpose();
        REQUIRE((s - p).norm() <= (s - sample).norm() + 1e-9);
    }
}

TEST_CASE("spectral_ball_project clips the operator norm") {
    omr::Rng rng(9);
    const Mat q = omr::random_orthogonal(3, rng);
    REQUIRE((omr::spectral_ball_project(q) - q).norm() <= 1e-10);
    REQUIRE((omr::spectral_ball_project(2.0 * q) - q).norm() <= 1e-10);

    Mat d(2, 2);
    d << 3, 0, 0, 0.5;
    Mat expected(2, 2);
    expected << 1, 0, 0, 0.5;
    REQUIRE((omr::spectral_ball_project(d) - expected).norm() <= 1e-12);

    for (int rep = 0; rep < 50; ++rep) {
        const Mat m = 3.0 * omr::random_gaussian(4, 3, rng);
        const Mat p = omr::spectral_ball_project(m);
        REQUIRE(omr::operator_norm(p) <= 1.0 + 1e-9);
        REQUIRE((omr::spectral_ball_project(p) - p).norm() <= 1e-9);
    }
}

TEST_CASE("product norm bounds sigma_n ||A||_F <= ||AB||_F <= sigma_1 ||A||_F") {
    omr::Rng rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 2 + static_cast<int>(rng.next_u64() % 4);
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        const int l = n + static_cast<int>(rng.next_u64() % 4);  // l >= n
        const Mat a = omr::random_gaussian(m, n, rng);
        const Mat b = omr::random_gaussian(n, l, rng);
        const auto sv = omr::svd(b).singulars;
        const double hi = sv(0), lo = sv(n - 1);
        const double prod = (a * b).norm();
        const double scale = 1.0 + prod;
        REQUIRE(prod >= lo * a.norm() - 1e-9 * scale);
        REQUIRE(prod <= hi * a.norm() + 1e-9 * scale);
    }
}
