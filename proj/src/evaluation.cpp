#include "stylefuse/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "stylefuse/errors.hpp"
#include "stylefuse/pipeline.hpp"

namespace stylefuse {

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void require_unit(const std::vector<double>& v, const char* what) {
    if (std::fabs(norm(v) - 1.0) > 1e-5) {
        throw NumericError(std::string(what) + ": embedder returned a non-unit vector");
    }
}

std::string json_number(double v) {
    return nlohmann::json(v).dump();  // shortest round-trip representation
}

// Backends reused across cells; cells may override the backend key.
class BackendCache {
public:
    std::shared_ptr<Backend> get(const std::string& name) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(name);
        if (it != cache_.end()) return it->second;
        auto backend = make_backend(name);
        cache_.emplace(name, backend);
        return backend;
    }

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Backend>> cache_;
};

BenchmarkCell run_cell(const BenchmarkGrid& grid, const ConfigMap& row_config, int i, int j,
                       const Embedder& embedder, BackendCache& backends) {
    BenchmarkCell cell;
    cell.prompt_index = i;
    cell.style_index = j;
    cell.prompt = grid.prompts[static_cast<size_t>(i)];
    cell.style_image = grid.style_images[static_cast<size_t>(j)];

    const auto started = std::chrono::steady_clock::now();
    try {
        ConfigMap m = row_config;
        m.set("prompt", cell.prompt);
        m.set("style_image_path", cell.style_image);
        for (const auto& ovr : grid.overrides) {
            if ((ovr.prompt_index == -1 || ovr.prompt_index == i) &&
                (ovr.style_index == -1 || ovr.style_index == j)) {
                for (const auto& [k, v] : ovr.set) m.set(k, v);
            }
        }
        GenerationConfig cfg = m.resolve();
        auto backend = backends.get(cfg.backend);
        GenerationResult result = generate(cfg, backend.get());
        cell.score = text_alignment(result.image, cfg.prompt, embedder, cell.style_image).value;
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return cell;
}

BenchmarkRow run_row(const BenchmarkGrid& grid, const ConfigMap& row_config,
                     const std::string& label, const Embedder& embedder, int jobs) {
    BackendCache backends;
    BenchmarkRow row;
    row.label = label;
    {
        // Row configuration snapshot: resolve with a placeholder cell so the
        // emitted config reflects the row's toggles.
        ConfigMap m = row_config;
        m.set("prompt", grid.prompts.front());
        m.set("style_image_path", grid.style_images.front());
        try {
            row.config = m.resolve().to_json();
        } catch (const std::exception&) {
            row.config = nlohmann::ordered_json::object();
        }
    }

    const int np = static_cast<int>(grid.prompts.size());
    const int ns = static_cast<int>(grid.style_images.size());
    row.cells.resize(static_cast<size_t>(np) * static_cast<size_t>(ns));

    bool parallel = jobs > 1;
    if (parallel) {
        // Parallel cells require a stateless backend; fall back to serial
        // when the row's backend cannot be resolved or declares otherwise.
        try {
            std::string backend_name = row.config.value("backend", "toy");
            parallel = backends.get(backend_name)->stateless();
        } catch (const std::exception&) {
            parallel = false;
        }
    }

    auto work = [&](int k) {
        int i = k / ns;
        int j = k % ns;
        row.cells[static_cast<size_t>(k)] = run_cell(grid, row_config, i, j, embedder, backends);
    };

    const int total = np * ns;
    if (!parallel) {
        for (int k = 0; k < total; ++k) work(k);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min(jobs, total);
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int k = next.fetch_add(1); k < total; k = next.fetch_add(1)) work(k);
            });
        }
        for (auto& t : pool) t.join();
    }

    row.finalize();
    return row;
}

}  // namespace

std::vector<double> MockEmbedder::from_seed(uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(dim_));
    for (auto& x : v) x = rng.gaussian();
    double n = norm(v);
    for (auto& x : v) x /= n;
    return v;
}

std::vector<double> MockEmbedder::embed_text(const std::string& text) const {
    return from_seed(fnv1a64("text:" + text));
}

std::vector<double> MockEmbedder::embed_image(const Image& image) const {
    uint64_t h = fnv1a64("image:");
    h ^= fnv1a64(image.rgb.data(), image.rgb.size()) + 0x9e3779b97f4a7c15ull;
    h ^= static_cast<uint64_t>(image.width) * 31u + static_cast<uint64_t>(image.height);
    return from_seed(h);
}

AlignmentScore text_alignment(const Image& image, const std::string& prompt,
                              const Embedder& embedder, const std::string& image_id) {
    const auto vi = embedder.embed_image(image);
    const auto vt = embedder.embed_text(prompt);
    if (vi.size() != vt.size()) {
        throw ShapeError("text_alignment: embedding dimension mismatch");
    }
    require_unit(vi, "image embedding");
    require_unit(vt, "text embedding");
    double dot = 0.0;
    for (size_t i = 0; i < vi.size(); ++i) dot += vi[i] * vt[i];
    dot = std::min(1.0, std::max(-1.0, dot));
    return {dot, prompt, image_id};
}

BenchmarkGrid BenchmarkGrid::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("grid", "expected a JSON object");
    BenchmarkGrid grid;
    if (j.contains("prompts")) {
        for (const auto& p : j["prompts"]) grid.prompts.push_back(p.get<std::string>());
    }
    if (j.contains("style_images")) {
        for (const auto& s : j["style_images"]) grid.style_images.push_back(s.get<std::string>());
    }
    if (grid.prompts.empty()) throw ConfigError("prompts", "grid needs at least one prompt");
    if (grid.style_images.empty()) {
        throw ConfigError("style_images", "grid needs at least one style image");
    }
    if (j.contains("config")) grid.base.load_json(j["config"]);
    if (j.contains("cell_overrides")) {
        for (const auto& o : j["cell_overrides"]) {
            CellOverride ovr;
            ovr.prompt_index = o.value("prompt", -1);
            ovr.style_index = o.value("style", -1);
            if (o.contains("set")) {
                for (const auto& [k, v] : o["set"].items()) {
                    ovr.set[k] = v.is_string() ? v.get<std::string>() : v.dump();
                }
            }
            grid.overrides.push_back(std::move(ovr));
        }
    }
    return grid;
}

BenchmarkGrid BenchmarkGrid::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("grid", "cannot read file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("grid", std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

void BenchmarkRow::finalize() {
    double sum = 0.0;
    int ok = 0;
    incomplete = false;
    for (const auto& cell : cells) {
        if (cell.ok) {
            sum += cell.score;
            ++ok;
        } else {
            incomplete = true;
        }
    }
    mean = ok > 0 ? sum / ok : 0.0;
}

nlohmann::ordered_json ResultTable::to_json() const {
    nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json cells = nlohmann::ordered_json::array();
        for (const auto& c : row.cells) {
            cells.push_back({{"prompt_index", c.prompt_index},
                             {"style_index", c.style_index},
                             {"prompt", c.prompt},
                             {"style_image", c.style_image},
                             {"ok", c.ok},
                             {"score", c.score},
                             {"seconds", c.seconds},
                             {"error", c.error}});
        }
        rows_json.push_back({{"label", row.label},
                             {"config", row.config},
                             {"mean", row.mean},
                             {"incomplete", row.incomplete},
                             {"cells", std::move(cells)}});
    }
    return {{"rows", std::move(rows_json)}};
}

ResultTable ResultTable::from_json(const nlohmann::json& j) {
    ResultTable table;
    for (const auto& rj : j.at("rows")) {
        BenchmarkRow row;
        row.label = rj.at("label").get<std::string>();
        row.config = rj.at("config");
        row.mean = rj.at("mean").get<double>();
        row.incomplete = rj.at("incomplete").get<bool>();
        for (const auto& cj : rj.at("cells")) {
            BenchmarkCell c;
            c.prompt_index = cj.at("prompt_index").get<int>();
            c.style_index = cj.at("style_index").get<int>();
            c.prompt = cj.at("prompt").get<std::string>();
            c.style_image = cj.at("style_image").get<std::string>();
            c.ok = cj.at("ok").get<bool>();
            c.score = cj.at("score").get<double>();
            c.seconds = cj.at("seconds").get<double>();
            c.error = cj.at("error").get<std::string>();
            row.cells.push_back(std::move(c));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

bool ResultTable::operator==(const ResultTable& other) const {
    return to_json() == other.to_json();
}

std::string ResultTable::cells_jsonl() const {
    std::string out;
    for (const auto& row : rows) {
        for (const auto& c : row.cells) {
            nlohmann::ordered_json line;
            line["row"] = row.label;
            line["prompt_index"] = c.prompt_index;
            line["style_index"] = c.style_index;
            line["prompt"] = c.prompt;
            line["style_image"] = c.style_image;
            line["status"] = c.ok ? "ok" : "error";
            if (c.ok) {
                line["text_alignment"] = c.score;
            } else {
                line["error"] = c.error;
            }
            out += line.dump();
            out += '\n';
        }
    }
    return out;
}

nlohmann::ordered_json ResultTable::summary_json() const {
    nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        int ok = 0;
        for (const auto& c : row.cells) ok += c.ok ? 1 : 0;
        rows_json.push_back({{"label", row.label},
                             {"config", row.config},
                             {"cells_total", row.cells.size()},
                             {"cells_ok", ok},
                             {"incomplete", row.incomplete},
                             {"mean_text_alignment", row.mean}});
    }
    return {{"rows", std::move(rows_json)}};
}

std::string ResultTable::csv(bool ablation_layout) const {
    std::string out;
    if (ablation_layout) {
        out = "cross_modal_adain,teacher_model,text_alignment\n";
        for (const auto& row : rows) {
            const auto& cfg = row.config;
            bool adain = cfg.value("fusion_mode", "") == std::string("cross_modal_adain");
            bool teacher = cfg.value("teacher_enabled", false);
            out += std::string(adain ? "yes" : "no") + "," + (teacher ? "yes" : "no") + "," +
                   json_number(row.mean) + "\n";
        }
    } else {
        out = "configuration,text_alignment\n";
        for (const auto& row : rows) {
            out += row.label + "," + json_number(row.mean) + "\n";
        }
    }
    return out;
}

nlohmann::ordered_json ResultTable::timing_json() const {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    double total = 0.0;
    for (const auto& row : rows) {
        for (const auto& c : row.cells) {
            cells.push_back({{"row", row.label},
                             {"prompt_index", c.prompt_index},
                             {"style_index", c.style_index},
                             {"seconds", c.seconds}});
            total += c.seconds;
        }
    }
    return {{"total_seconds", total}, {"cells", std::move(cells)}};
}

bool ResultTable::any_failures() const {
    for (const auto& row : rows) {
        if (row.incomplete) return true;
    }
    return false;
}

ResultTable run_benchmark(const BenchmarkGrid& grid, const Embedder& embedder, int jobs) {
    ResultTable table;
    table.rows.push_back(run_row(grid, grid.base, "benchmark", embedder, jobs));
    return table;
}

ResultTable run_ablation(const BenchmarkGrid& grid, const Embedder& embedder, int jobs) {
    struct Toggle {
        const char* label;
        const char* fusion;
        const char* teacher;
    };
    static constexpr Toggle kToggles[] = {
        {"baseline", "weighted_sum", "false"},
        {"+teacher", "weighted_sum", "true"},
        {"+adain", "cross_modal_adain", "false"},
        {"+both", "cross_modal_adain", "true"},
    };

    ResultTable table;
    for (const auto& toggle : kToggles) {
        ConfigMap row_config = grid.base;
        row_config.set("fusion_mode", toggle.fusion);
        row_config.set("teacher_enabled", toggle.teacher);
        table.rows.push_back(run_row(grid, row_config, toggle.label, embedder, jobs));
    }
    return table;
}

std::map<std::string, double> vote_percentages(std::istream& in) {
    std::map<std::string, double> counts;
    double total = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw ConfigError("votes", "expected 'name,count' lines");
        }
        std::string name = line.substr(0, comma);
        double votes = 0.0;
        try {
            votes = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("votes", "bad count in line: " + line);
        }
        counts[name] += votes;
        total += votes;
    }
    if (total > 0.0) {
        for (auto& [name, v] : counts) v = 100.0 * v / total;
    }
    return counts;
}

}  // namespace stylefuse
