// Regenerates the checked-in test fixtures. Run manually from the repo root:
//
//   ./build/tests/gen_fixtures tests/fixtures
//
// The golden baseline images pin the all-mechanisms-off output; regenerating
// them is only legitimate after an intentional change to the toy backend,
// the scheduler, or the PNG encoder.

#include <cstdio>
#include <filesystem>
#include <string>

#include "stylefuse/config.hpp"
#include "stylefuse/image.hpp"
#include "stylefuse/pipeline.hpp"
#include "stylefuse/toy_backend.hpp"

using namespace stylefuse;

namespace {

Image pattern_image(int width, int height, uint64_t seed) {
    Rng rng(seed);
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(static_cast<size_t>(width) * height * 3);
    for (auto& b : img.rgb) {
        b = static_cast<uint8_t>(rng.next_u64() % 256);
    }
    return img;
}

GenerationConfig baseline_config(const std::string& style_path, uint64_t seed) {
    GenerationConfig cfg;
    cfg.prompt = "A red apple";
    cfg.style_image_path = style_path;
    cfg.seed = seed;
    cfg.steps = 10;
    cfg.guidance_scale = 5.0;
    cfg.lambda = 1.0;
    cfg.fusion_mode = FusionMode::weighted_sum;
    cfg.teacher_enabled = false;
    cfg.teacher_cutoff = 0;
    cfg.scfg_mode = GuidanceMode::text_cfg;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "tests/fixtures";
    std::filesystem::create_directories(dir);

    // Style reference inputs; the toy style encoder hashes their bytes.
    auto ref = encode_png(pattern_image(8, 8, 1001));
    auto neg = encode_png(pattern_image(8, 8, 2002));
    write_file_bytes(dir + "/style_ref.png", ref.data(), ref.size());
    write_file_bytes(dir + "/style_neg.png", neg.data(), neg.size());

    // Bias response of the zero-seeded toy denoiser on all-zero inputs.
    {
        auto backend = build_toy(0);
        Tensor z({1, 4, 8, 8});
        Conditioning cond{Tensor({1, 1, ToyTextEncoder::kDim}),
                          Tensor({1, 1, ToyStyleEncoder::kDim})};
        Tensor out = backend->denoiser().predict(z, 500, cond, FusionConfig{}, nullptr);
        write_file_bytes(dir + "/toy_bias_response.f64", out.data(),
                         static_cast<size_t>(out.numel()) * sizeof(double));
    }

    // Golden baseline images: all mechanisms off, three seeds.
    for (uint64_t seed : {42ull, 7ull, 123ull}) {
        GenerationResult result = generate(baseline_config(dir + "/style_ref.png", seed));
        std::string path = dir + "/baseline_seed" + std::to_string(seed) + ".png";
        write_file_bytes(path, result.png.data(), result.png.size());
        std::printf("wrote %s (crc32 %08x)\n", path.c_str(), crc32_of(result.png));
    }
    std::printf("fixtures written to %s\n", dir.c_str());
    return 0;
}
