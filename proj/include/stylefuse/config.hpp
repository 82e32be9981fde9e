#ifndef STYLEFUSE_CONFIG_HPP
#define STYLEFUSE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylefuse/backend.hpp"
#include "stylefuse/guidance.hpp"

namespace stylefuse {

// Fully resolved generation settings. Defaults follow the reference
// protocol: seed 42, 50 steps, guidance scale 5 (s-convention), teacher
// active for the first 20 steps, cross-modal AdaIN fusion.
struct GenerationConfig {
    std::string prompt;
    std::string negative_prompt;
    std::string style_image_path;
    std::string negative_style_image_path;
    uint64_t seed = 42;
    int steps = 50;
    double guidance_scale = 5.0;  // s-convention; combination weight w = s - 1
    double lambda = 1.0;          // weighted_sum fusion only
    FusionMode fusion_mode = FusionMode::cross_modal_adain;
    bool teacher_enabled = true;
    int teacher_cutoff = 20;
    GuidanceMode scfg_mode = GuidanceMode::text_cfg;
    double scfg_weight = 4.0;  // w-convention weight of the style_cfg combination
    std::string backend = "toy";
    std::string dump_attn_dir;

    // Deterministic validation notes (ignored lambda, negative weights, ...).
    std::vector<std::string> warnings;

    double guidance_w() const { return guidance_scale - 1.0; }

    // Combination weight the student branches use.
    double student_w() const {
        return scfg_mode == GuidanceMode::style_cfg ? scfg_weight : guidance_w();
    }

    GuidanceConfig student_guidance() const { return {scfg_mode, student_w()}; }
    FusionConfig fusion() const { return {fusion_mode, lambda}; }

    // Flat object with a fixed key order; valid as a config file.
    nlohmann::ordered_json to_json() const;
};

const char* fusion_mode_name(FusionMode mode);
const char* guidance_mode_name(GuidanceMode mode);
FusionMode parse_fusion_mode(const std::string& s);      // throws ConfigError
GuidanceMode parse_guidance_mode(const std::string& s);  // throws ConfigError

// Raw key-value settings with flag-over-file precedence: later assignments
// overwrite earlier ones, so callers load the config file first and apply
// command-line flags on top. Defaults fill in at resolve() time.
class ConfigMap {
public:
    // Throws ConfigError for keys outside the schema.
    void set(const std::string& key, const std::string& value);

    // Flat JSON object of config keys. A generation sidecar is also
    // accepted: its "config" member is loaded, so a run can be replayed by
    // pointing --config at the sidecar.
    void load_file(const std::string& path);
    void load_json(const nlohmann::json& j);

    bool is_set(const std::string& key) const { return values_.count(key) != 0; }

    // Raw value if set; nullptr otherwise.
    const std::string* get_raw(const std::string& key) const {
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    // Validates and produces the resolved config. ConfigError names the
    // offending key.
    GenerationConfig resolve() const;

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

}  // namespace stylefuse

#endif
