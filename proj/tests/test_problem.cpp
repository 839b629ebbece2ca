#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "omr/problem.hpp"

using omr::Mat;

namespace {

std::string temp_path(const char* name) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
}

}  // namespace

TEST_CASE("generate_instance satisfies the defining linear system") {
    for (std::uint64_t seed : {1ull, 17ull, 923ull}) {
        auto [inst, truth] = omr::generate_instance(4, 9, 3, seed);
        Mat sum = Mat::Zero(9, 3);
        for (int i = 0; i < 3; ++i) sum += inst.X[i] * truth.matrices[i];
        REQUIRE((inst.X[3] - sum).norm() <= 1e-12 * (1.0 + inst.X[3].norm()));
        for (const Mat& v : truth.matrices)
            REQUIRE((v.transpose() * v - Mat::Identity(3, 3)).norm() <= 1e-8);
    }
}

TEST_CASE("generate_instance at D=1 uses signs") {
    auto [inst, truth] = omr::generate_instance(3, 2, 1, 5);
    const double v1 = truth.matrices[0](0, 0);
    const double v2 = truth.matrices[1](0, 0);
    REQUIRE(std::abs(std::abs(v1) - 1.0) <= 1e-14);
    REQUIRE(std::abs(std::abs(v2) - 1.0) <= 1e-14);
    REQUIRE((inst.X[2] - v1 * inst.X[0] - v2 * inst.X[1]).norm() <= 1e-14);
}

TEST_CASE("generate_instance dimensions and determinism") {
    auto [inst, truth] = omr::generate_instance(3, 22, 10, 77);
    REQUIRE(inst.X.size() == 3);
    for (const Mat& x : inst.X) {
        REQUIRE(x.rows() == 22);
        REQUIRE(x.cols() == 10);
    }
    REQUIRE(truth.matrices.size() == 2);
    REQUIRE(truth.matrices[0].rows() == 10);

    auto [inst2, truth2] = omr::generate_instance(3, 22, 10, 77);
    REQUIRE(inst.X[2] == inst2.X[2]);
    REQUIRE(truth.matrices[1] == truth2.matrices[1]);

    REQUIRE_THROWS_AS(omr::generate_instance(2, 5, 2, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(omr::generate_instance(3, 0, 2, 1), std::invalid_argument);
}

TEST_CASE("add_noise with sigma zero is the identity") {
    auto [inst, truth] = omr::generate_instance(3, 6, 2, 9);
    omr::NoiseSpec spec;
    spec.sigma = 0.0;
    const auto noisy = omr::add_noise(inst, spec, 123);
    for (int i = 0; i < 3; ++i) REQUIRE(noisy.X[i] == inst.X[i]);
}

TEST_CASE("add_noise targets and records sigma") {
    auto [inst, truth] = omr::generate_instance(3, 6, 2, 9);
    omr::NoiseSpec spec;
    spec.sigma = 0.5;
    const auto noisy = omr::add_noise(inst, spec, 123);
    REQUIRE(noisy.X[0] == inst.X[0]);
    REQUIRE(noisy.X[1] == inst.X[1]);
    REQUIRE((noisy.X[2] - inst.X[2]).norm() > 0.0);
    REQUIRE(noisy.sigma == 0.5);

    spec.target = omr::NoiseSpec::Target::All;
    const auto all = omr::add_noise(inst, spec, 123);
    for (int i = 0; i < 3; ++i) REQUIRE((all.X[i] - inst.X[i]).norm() > 0.0);
}

TEST_CASE("add_noise magnitude matches the chi-square expectation") {
    auto [inst, truth] = omr::generate_instance(3, 22, 10, 31);
    omr::NoiseSpec spec;
    spec.sigma = 0.01;
    double sq_sum = 0.0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        const auto noisy = omr::add_noise(inst, spec, 1000 + r);
        sq_sum += (noisy.X[2] - inst.X[2]).squaredNorm();
    }
    const double expected = spec.sigma * spec.sigma * 22 * 10;
    REQUIRE(sq_sum / reps >= 0.8 * expected);
    REQUIRE(sq_sum / reps <= 1.2 * expected);
}

TEST_CASE("assemble_cost builds the Gram blocks") {
    // all X_i = I: every block of C is I
    omr::ProblemInstance inst;
    inst.K = 3;
    inst.N = 4;
    inst.D = 4;
    for (int i = 0; i < 3; ++i) inst.X.push_back(Mat::Identity(4, 4));
    const auto c = omr::assemble_cost(inst);
    REQUIRE(c.blocks.rows() == 12);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            REQUIRE((c.blocks.block(4 * i, 4 * j, 4, 4) - Mat::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("assemble_cost is symmetric PSD on random instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto [inst, truth] = omr::generate_instance(3, 5, 3, seed);
        const auto c = omr::assemble_cost(inst);
        REQUIRE(omr::is_symmetric(c.blocks));
        const auto eig = omr::sym_eig(c.blocks);
        REQUIRE(eig.values.minCoeff() >= -1e-8 * c.blocks.trace());
    }
}

TEST_CASE("assemble_cost trace identity against the stacked sum") {
    auto [inst, truth] = omr::generate_instance(3, 7, 2, 44);
    const auto c = omr::assemble_cost(inst);
    // H with every D x D block = I corresponds to tr(CH) = ||sum_i X_i||_F^2
    Mat ones = Mat::Zero(6, 6);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ones.block(2 * i, 2 * j, 2, 2) = Mat::Identity(2, 2);
    Mat sum = Mat::Zero(7, 2);
    for (const Mat& x : inst.X) sum += x;
    REQUIRE((c.blocks * ones).trace() ==
            Catch::Approx(sum.squaredNorm()).margin(1e-8 * (1.0 + sum.squaredNorm())));
}

TEST_CASE("homogenized consistency of the generated ground truth") {
    for (std::uint64_t seed : {3ull, 8ull}) {
        auto [inst, truth] = omr::generate_instance(4, 8, 3, seed);
        Mat resid = inst.X[3];  // V_K = I contribution
        double xnorm = inst.X[3].squaredNorm();
        for (int i = 0; i < 3; ++i) {
            resid += inst.X[i] * (-truth.matrices[i]);
            xnorm += inst.X[i].squaredNorm();
        }
        REQUIRE(resid.norm() <= 1e-10 * std::sqrt(xnorm));
    }
}

TEST_CASE("save/load round trip is bit exact") {
    auto [inst, truth] = omr::generate_instance(3, 5, 2, 2718);
    omr::NoiseSpec spec;
    spec.sigma = 0.25;
    const auto noisy = omr::add_noise(inst, spec, 99);

    const std::string path = temp_path("omr_roundtrip.txt");
    omr::save_instance(noisy, path, &truth);
    const auto loaded = omr::load_instance(path);

    REQUIRE(loaded.instance.K == 3);
    REQUIRE(loaded.instance.N == 5);
    REQUIRE(loaded.instance.D == 2);
    REQUIRE(loaded.instance.sigma == 0.25);
    REQUIRE(loaded.instance.seed == 2718);
    for (int i = 0; i < 3; ++i) REQUIRE(loaded.instance.X[i] == noisy.X[i]);
    REQUIRE(loaded.truth.has_value());
    for (int i = 0; i < 2; ++i) REQUIRE(loaded.truth->matrices[i] == truth.matrices[i]);

    // without truth section
    omr::save_instance(noisy, path);
    REQUIRE_FALSE(omr::load_instance(path).truth.has_value());
    std::remove(path.c_str());
}

TEST_CASE("load_instance parses a hand-written file") {
    const std::string path = temp_path("omr_hand.txt");
    {
        std::ofstream out(path);
        out << "ODMP1 3 2 1 0 7\nX 1\n1\n2\nX 2\n3\n4\nX 3\n-2\n-2\n";
    }
    const auto loaded = omr::load_instance(path);
    REQUIRE(loaded.instance.K == 3);
    REQUIRE(loaded.instance.X[0](1, 0) == 2.0);
    REQUIRE(loaded.instance.X[2](0, 0) == -2.0);
    std::remove(path.c_str());
}

TEST_CASE("load_instance names the missing block on truncation") {
    const std::string path = temp_path("omr_trunc.txt");
    {
        std::ofstream out(path);
        out << "ODMP1 3 2 1 0 7\nX 1\n1\n2\nX 2\n3\n";
    }
    REQUIRE_THROWS_WITH(omr::load_instance(path), Catch::Matchers::ContainsSubstring("X 2"));
    {
        std::ofstream out(path);
        out << "ODMP1 3 2 1 0 7\nX 1\n1\n2\n";
    }
    REQUIRE_THROWS_WITH(omr::load_instance(path), Catch::Matchers::ContainsSubstring("X 2"));
    std::remove(path.c_str());
}

TEST_CASE("load_instance rejects malformed input") {
    const std::string path = temp_path("omr_bad.txt");
    {
        std::ofstream out(path);
        out << "NOPE 3 2 1 0 7\n";
    }
    REQUIRE_THROWS_WITH(omr::load_instance(path), Catch::Matchers::ContainsSubstring("header"));
    {
        std::ofstream out(path);
        out << "ODMP1 3 2 1 0 7\nX 1\n1\nnan\nX 2\n3\n4\nX 3\n-2\n-2\n";
    }
    REQUIRE_THROWS_WITH(omr::load_instance(path), Catch::Matchers::ContainsSubstring("non-finite"));
    REQUIRE_THROWS_AS(omr::load_instance(temp_path("omr_does_not_exist.txt")),
                      std::runtime_error);
    std::remove(path.c_str());
}
