#ifndef STYLEFUSE_EVALUATION_HPP
#define STYLEFUSE_EVALUATION_HPP

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylefuse/config.hpp"
#include "stylefuse/image.hpp"

namespace stylefuse {

// Text/image embedding pair used for alignment scoring. Implementations must
// return unit vectors (norm 1 +- 1e-5). The mock below keeps the harness
// verifiable at desk scale; a real CLIP model plugs in behind the same
// interface (see docs/integration.md).
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed_text(const std::string& text) const = 0;
    virtual std::vector<double> embed_image(const Image& image) const = 0;
};

// Deterministic hash-based unit vectors.
class MockEmbedder final : public Embedder {
public:
    explicit MockEmbedder(int dim = 16) : dim_(dim) {}
    std::vector<double> embed_text(const std::string& text) const override;
    std::vector<double> embed_image(const Image& image) const override;

private:
    std::vector<double> from_seed(uint64_t seed) const;
    int dim_;
};

struct AlignmentScore {
    double value = 0.0;  // cosine, in [-1, 1]
    std::string prompt;
    std::string image_id;
};

// Cosine similarity of the unit embeddings; rejects non-unit vectors.
AlignmentScore text_alignment(const Image& image, const std::string& prompt,
                              const Embedder& embedder, const std::string& image_id = "");

struct CellOverride {
    int prompt_index = -1;  // -1 matches every prompt
    int style_index = -1;
    std::map<std::string, std::string> set;
};

// prompts x style images, a shared base config, and optional per-cell
// config overrides.
struct BenchmarkGrid {
    std::vector<std::string> prompts;
    std::vector<std::string> style_images;
    ConfigMap base;
    std::vector<CellOverride> overrides;

    static BenchmarkGrid from_json(const nlohmann::json& j);
    static BenchmarkGrid load_file(const std::string& path);
};

struct BenchmarkCell {
    int prompt_index = 0;
    int style_index = 0;
    std::string prompt;
    std::string style_image;
    bool ok = false;
    double score = 0.0;
    double seconds = 0.0;  // wall clock; excluded from deterministic artifacts
    std::string error;
};

struct BenchmarkRow {
    std::string label;
    nlohmann::ordered_json config;  // resolved row configuration
    std::vector<BenchmarkCell> cells;
    double mean = 0.0;  // over scored cells
    bool incomplete = false;

    void finalize();  // recompute mean/incomplete from cells
};

struct ResultTable {
    std::vector<BenchmarkRow> rows;

    // Full serialization including wall-clock values; round-trips exactly.
    nlohmann::ordered_json to_json() const;
    static ResultTable from_json(const nlohmann::json& j);
    bool operator==(const ResultTable& other) const;

    // Deterministic artifacts (scores only, no wall clock).
    std::string cells_jsonl() const;
    nlohmann::ordered_json summary_json() const;
    std::string csv(bool ablation_layout) const;

    // Wall-clock companion.
    nlohmann::ordered_json timing_json() const;

    bool any_failures() const;
};

// Scores every grid cell in row-major order (cell (i, j) before (i, j+1))
// and keeps going past per-cell failures, which are recorded on the cell.
// `jobs` > 1 parallelizes cells only when the backend declares itself
// stateless; outputs are keyed, so the table is identical either way.
ResultTable run_benchmark(const BenchmarkGrid& grid, const Embedder& embedder, int jobs = 1);

// Four-row mechanism toggle table: baseline, +teacher, +adain, +both.
ResultTable run_ablation(const BenchmarkGrid& grid, const Embedder& embedder, int jobs = 1);

// Vote-count CSV ("name,votes" per line) to percentage shares.
std::map<std::string, double> vote_percentages(std::istream& in);

}  // namespace stylefuse

#endif
