#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "omr/matrix.hpp"
#include "omr/random.hpp"

namespace omr {

/// Known matrices X_1..X_K of the linear system X_K = sum_{i<K} X_i V_i.
struct ProblemInstance {
    int K = 0;       // matrix count, >= 3
    int N = 0;       // rows of each X_i
    int D = 0;       // orthogonal dimension
    std::vector<Mat> X;
    double sigma = 0.0;       // noise stddev applied to this instance (0 = clean)
    std::uint64_t seed = 0;   // generation seed
};

/// K-1 orthogonal D x D matrices (ground truth or a recovered solution).
struct OrthogonalSet {
    std::vector<Mat> matrices;
};

/// KD x KD Gram cost with D x D blocks C_ij = X_i^T X_j.
struct CostMatrix {
    int K = 0;
    int D = 0;
    Mat blocks;
};

struct NoiseSpec {
    enum class Target { LastOnly, All };
    double sigma = 0.0;
    Target target = Target::LastOnly;
};

/// Clean random instance: X_1..X_{K-1} i.i.d. Gaussian, V_i Haar orthogonal,
/// X_K = sum X_i V_i exactly. Deterministic per seed.
inline std::pair<ProblemInstance, OrthogonalSet> generate_instance(int K, int N, int D,
                                                                   std::uint64_t seed) {
    if (K < 3) throw std::invalid_argument("generate_instance: K must be >= 3");
    if (N < 1 || D < 1) throw std::invalid_argument("generate_instance: N, D must be >= 1");

    Rng rng(seed);
    ProblemInstance inst;
    inst.K = K;
    inst.N = N;
    inst.D = D;
    inst.seed = seed;
    inst.X.reserve(K);
    for (int i = 0; i + 1 < K; ++i) inst.X.push_back(random_gaussian(N, D, rng));

    OrthogonalSet truth;
    truth.matrices.reserve(K - 1);
    for (int i = 0; i + 1 < K; ++i) truth.matrices.push_back(random_orthogonal(D, rng));

    Mat xk = Mat::Zero(N, D);
    for (int i = 0; i + 1 < K; ++i) xk += inst.X[i] * truth.matrices[i];
    inst.X.push_back(std::move(xk));
    return {std::move(inst), std::move(truth)};
}

/// Additive elementwise N(0, sigma^2) noise on the designated matrices.
/// Default target is the measurement matrix X_K only.
inline ProblemInstance add_noise(const ProblemInstance& inst, const NoiseSpec& spec,
                                 std::uint64_t seed) {
    if (spec.sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
    ProblemInstance out = inst;
    if (spec.sigma == 0.0) return out;

    Rng rng(seed);
    const int first = spec.target == NoiseSpec::Target::All ? 0 : inst.K - 1;
    for (int i = first; i < inst.K; ++i)
        out.X[i] += spec.sigma * random_gaussian(inst.N, inst.D, rng);
    out.sigma = spec.sigma;
    return out;
}

/// Gram cost C = X^T X for the stacked X = (X_1, ..., X_K).
inline CostMatrix assemble_cost(const ProblemInstance& inst) {
    const int kd = inst.K * inst.D;
    Mat stacked(inst.N, kd);
    for (int i = 0; i < inst.K; ++i) stacked.middleCols(i * inst.D, inst.D) = inst.X[i];
    CostMatrix c;
    c.K = inst.K;
    c.D = inst.D;
    c.blocks = stacked.transpose() * stacked;
    return c;
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Instance file format (text, whitespace separated):
//   line 1:  ODMP1 K N D sigma seed
//   K blocks "X i" each followed by N lines of D numbers
//   optional K-1 blocks "V i" each followed by D lines of D numbers
// ---------------------------------------------------------------------------

inline void save_instance(const ProblemInstance& inst, const std::string& path,
                          const OrthogonalSet* truth = nullptr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_instance: cannot open " + path);
    out << "ODMP1 " << inst.K << ' ' << inst.N << ' ' << inst.D << ' '
        << format_double(inst.sigma) << ' ' << inst.seed << '\n';
    const auto write_block = [&out](const char* tag, int index, const Mat& m) {
        out << tag << ' ' << index << '\n';
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) out << ' ';
                out << format_double(m(r, c));
            }
            out << '\n';
        }
    };
    for (int i = 0; i < inst.K; ++i) write_block("X", i + 1, inst.X[i]);
    if (truth) {
        if (static_cast<int>(truth->matrices.size()) != inst.K - 1)
            throw std::invalid_argument("save_instance: ground truth must have K-1 matrices");
        for (int i = 0; i + 1 < inst.K; ++i) write_block("V", i + 1, truth->matrices[i]);
    }
    if (!out) throw std::runtime_error("save_instance: write failed for " + path);
}

struct LoadedInstance {
    ProblemInstance instance;
    std::optional<OrthogonalSet> truth;
};

namespace detail {

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    bool next(std::string& tok) { return static_cast<bool>(in_ >> tok); }

    std::string expect(const std::string& what) {
        std::string tok;
        if (!next(tok)) throw std::runtime_error("load_instance: unexpected end of file, expected " + what);
        return tok;
    }

    long expect_int(const std::string& what) {
        const std::string tok = expect(what);
        long v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw std::runtime_error("load_instance: bad integer for " + what + ": '" + tok + "'");
        return v;
    }

    double expect_double(const std::string& what) {
        const std::string tok = expect(what);
        double v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw std::runtime_error("load_instance: bad number for " + what + ": '" + tok + "'");
        return v;
    }

private:
    std::istream& in_;
};

inline Mat read_block(TokenReader& r, const std::string& tag, int index, int rows, int cols) {
    const std::string label = tag + " " + std::to_string(index);
    const std::string got_tag = r.expect("block '" + label + "'");
    if (got_tag != tag)
        throw std::runtime_error("load_instance: missing block " + label + ", found '" + got_tag + "'");
    const long got_index = r.expect_int("index of block " + label);
    if (got_index != index)
        throw std::runtime_error("load_instance: missing block " + label + ", found index " +
                                 std::to_string(got_index));
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double v = r.expect_double("entry (" + std::to_string(i) + "," +
                                             std::to_string(j) + ") of block " + label);
            if (!std::isfinite(v))
                throw std::runtime_error("load_instance: non-finite entry in block " + label);
            m(i, j) = v;
        }
    return m;
}

}  // namespace detail

inline LoadedInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    detail::TokenReader r(in);

    const std::string magic = r.expect("header magic");
    if (magic != "ODMP1")
        throw std::runtime_error("load_instance: malformed header in " + path +
                                 ": expected ODMP1, got '" + magic + "'");
    LoadedInstance loaded;
    ProblemInstance& inst = loaded.instance;
    inst.K = static_cast<int>(r.expect_int("K"));
    inst.N = static_cast<int>(r.expect_int("N"));
    inst.D = static_cast<int>(r.expect_int("D"));
    inst.sigma = r.expect_double("sigma");
    inst.seed = static_cast<std::uint64_t>(r.expect_int("seed"));
    if (inst.K < 3 || inst.N < 1 || inst.D < 1)
        throw std::runtime_error("load_instance: invalid dimensions in header of " + path);

    for (int i = 0; i < inst.K; ++i)
        inst.X.push_back(detail::read_block(r, "X", i + 1, inst.N, inst.D));

    std::string tok;
    if (r.next(tok)) {
        if (tok != "V")
            throw std::runtime_error("load_instance: unexpected token '" + tok + "' after X blocks");
        const long idx = r.expect_int("index of block V 1");
        if (idx != 1)
            throw std::runtime_error("load_instance: missing block V 1, found index " +
                                     std::to_string(idx));
        OrthogonalSet truth;
        // First V tag already consumed; read its payload, then the remaining blocks.
        Mat first(inst.D, inst.D);
        for (int i = 0; i < inst.D; ++i)
            for (int j = 0; j < inst.D; ++j) {
                const double v = r.expect_double("entry of block V 1");
                if (!std::isfinite(v)) throw std::runtime_error("load_instance: non-finite entry in block V 1");
                first(i, j) = v;
            }
        truth.matrices.push_back(std::move(first));
        for (int i = 1; i + 1 < inst.K; ++i)
            truth.matrices.push_back(detail::read_block(r, "V", i + 1, inst.D, inst.D));
        loaded.truth = std::move(truth);
        if (r.next(tok))
            throw std::runtime_error("load_instance: trailing content '" + tok + "' in " + path);
    }
    return loaded;
}

}  // namespace omr
