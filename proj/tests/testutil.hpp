#ifndef STYLEFUSE_TESTS_TESTUTIL_HPP
#define STYLEFUSE_TESTS_TESTUTIL_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stylefuse/rng.hpp"
#include "stylefuse/tensor.hpp"

namespace testutil {

// Naive attention oracle: explicit per-pair exp/sum loops, no shared code
// with the library kernels. Shapes follow the library conventions.
struct NaiveAttention {
    stylefuse::Tensor weights;  // (batch, heads, nq, nk)
    stylefuse::Tensor output;   // (batch, nq, channels)
};

inline NaiveAttention naive_attention(const stylefuse::Tensor& q, const stylefuse::Tensor& k,
                                      const stylefuse::Tensor& v, int64_t heads) {
    const int64_t batch = q.dim(0);
    const int64_t nq = q.dim(1);
    const int64_t nk = k.dim(1);
    const int64_t head_dim = q.dim(2) / heads;
    const int64_t v_dim = v.dim(2) / heads;

    NaiveAttention r{stylefuse::Tensor({batch, heads, nq, nk}),
                     stylefuse::Tensor({batch, nq, v.dim(2)})};
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t h = 0; h < heads; ++h) {
            for (int64_t i = 0; i < nq; ++i) {
                double denom = 0.0;
                for (int64_t j = 0; j < nk; ++j) {
                    double dot = 0.0;
                    for (int64_t c = 0; c < head_dim; ++c) {
                        dot += q.at3(b, i, h * head_dim + c) * k.at3(b, j, h * head_dim + c);
                    }
                    double e = std::exp(dot / std::sqrt(static_cast<double>(head_dim)));
                    r.weights.at4(b, h, i, j) = e;
                    denom += e;
                }
                for (int64_t j = 0; j < nk; ++j) {
                    r.weights.at4(b, h, i, j) /= denom;
                }
                for (int64_t c = 0; c < v_dim; ++c) {
                    double acc = 0.0;
                    for (int64_t j = 0; j < nk; ++j) {
                        acc += r.weights.at4(b, h, i, j) * v.at3(b, j, h * v_dim + c);
                    }
                    r.output.at3(b, i, h * v_dim + c) = acc;
                }
            }
        }
    }
    return r;
}

inline stylefuse::Tensor random_map(std::vector<int64_t> shape, stylefuse::Rng& rng,
                                    double scale = 1.0) {
    stylefuse::Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.gaussian() * scale;
    return t;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("stylefuse_" + tag + "_" + std::to_string(counter_++));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("TempDir: cannot create scratch directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

#ifdef STYLEFUSE_FIXTURES_DIR
inline std::string fixture(const std::string& name) {
    return std::string(STYLEFUSE_FIXTURES_DIR) + "/" + name;
}
#endif

}  // namespace testutil

#endif
