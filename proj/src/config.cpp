#include "stylefuse/config.hpp"

#include <algorithm>
#include <fstream>

#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

int64_t parse_integer(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + value + "'");
    }
}

bool parse_flag(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError(key, "expected a boolean, got '" + value + "'");
}

}  // namespace

const char* fusion_mode_name(FusionMode mode) {
    return mode == FusionMode::weighted_sum ? "weighted_sum" : "cross_modal_adain";
}

const char* guidance_mode_name(GuidanceMode mode) {
    return mode == GuidanceMode::text_cfg ? "text_cfg" : "style_cfg";
}

FusionMode parse_fusion_mode(const std::string& s) {
    if (s == "weighted_sum") return FusionMode::weighted_sum;
    if (s == "cross_modal_adain") return FusionMode::cross_modal_adain;
    throw ConfigError("fusion_mode", "expected weighted_sum or cross_modal_adain, got '" + s + "'");
}

GuidanceMode parse_guidance_mode(const std::string& s) {
    if (s == "text_cfg") return GuidanceMode::text_cfg;
    if (s == "style_cfg") return GuidanceMode::style_cfg;
    throw ConfigError("scfg_mode", "expected text_cfg or style_cfg, got '" + s + "'");
}

nlohmann::ordered_json GenerationConfig::to_json() const {
    nlohmann::ordered_json j;
    j["prompt"] = prompt;
    j["negative_prompt"] = negative_prompt;
    j["style_image_path"] = style_image_path;
    j["negative_style_image_path"] = negative_style_image_path;
    j["seed"] = seed;
    j["steps"] = steps;
    j["guidance_scale"] = guidance_scale;
    j["lambda"] = lambda;
    j["fusion_mode"] = fusion_mode_name(fusion_mode);
    j["teacher_enabled"] = teacher_enabled;
    j["teacher_cutoff"] = teacher_cutoff;
    j["scfg_mode"] = guidance_mode_name(scfg_mode);
    j["scfg_weight"] = scfg_weight;
    j["backend"] = backend;
    j["dump_attn_dir"] = dump_attn_dir;
    return j;
}

const std::vector<std::string>& ConfigMap::known_keys() {
    static const std::vector<std::string> keys = {
        "prompt",          "negative_prompt", "style_image_path", "negative_style_image_path",
        "seed",            "steps",           "guidance_scale",   "lambda",
        "fusion_mode",     "teacher_enabled", "teacher_cutoff",   "scfg_mode",
        "scfg_weight",     "backend",         "dump_attn_dir",
    };
    return keys;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError(key, "unknown config key");
    }
    values_[key] = value;
}

void ConfigMap::load_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("config", "expected a JSON object");
    }
    // Sidecar replay: unwrap the resolved config it records.
    if (j.contains("config") && j["config"].is_object()) {
        load_json(j["config"]);
        return;
    }
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
            set(key, value.get<std::string>());
        } else if (value.is_boolean()) {
            set(key, value.get<bool>() ? "true" : "false");
        } else if (value.is_number() || value.is_null()) {
            set(key, value.is_null() ? "" : value.dump());
        } else {
            throw ConfigError(key, "expected a scalar value");
        }
    }
}

void ConfigMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot read file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    load_json(j);
}

GenerationConfig ConfigMap::resolve() const {
    GenerationConfig cfg;
    auto get = [&](const char* key) -> const std::string* {
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("prompt")) cfg.prompt = *v;
    if (cfg.prompt.empty()) throw ConfigError("prompt", "required");

    if (const auto* v = get("negative_prompt")) cfg.negative_prompt = *v;
    if (const auto* v = get("style_image_path")) cfg.style_image_path = *v;
    if (const auto* v = get("negative_style_image_path")) cfg.negative_style_image_path = *v;

    if (const auto* v = get("seed")) {
        int64_t s = parse_integer("seed", *v);
        if (s < 0) throw ConfigError("seed", "must be >= 0");
        cfg.seed = static_cast<uint64_t>(s);
    }
    if (const auto* v = get("steps")) {
        int64_t s = parse_integer("steps", *v);
        if (s < 1) throw ConfigError("steps", "must be >= 1");
        cfg.steps = static_cast<int>(s);
    }
    if (const auto* v = get("guidance_scale")) cfg.guidance_scale = parse_real("guidance_scale", *v);
    if (const auto* v = get("lambda")) cfg.lambda = parse_real("lambda", *v);
    if (const auto* v = get("fusion_mode")) cfg.fusion_mode = parse_fusion_mode(*v);
    if (const auto* v = get("teacher_enabled")) cfg.teacher_enabled = parse_flag("teacher_enabled", *v);
    if (const auto* v = get("teacher_cutoff")) {
        int64_t c = parse_integer("teacher_cutoff", *v);
        if (c < 0) throw ConfigError("teacher_cutoff", "must be >= 0");
        cfg.teacher_cutoff = static_cast<int>(c);
    }
    if (const auto* v = get("scfg_mode")) cfg.scfg_mode = parse_guidance_mode(*v);
    if (const auto* v = get("scfg_weight")) cfg.scfg_weight = parse_real("scfg_weight", *v);
    if (const auto* v = get("backend")) cfg.backend = *v;
    if (const auto* v = get("dump_attn_dir")) cfg.dump_attn_dir = *v;

    if (cfg.teacher_enabled && cfg.teacher_cutoff > cfg.steps) {
        throw ConfigError("teacher_cutoff", "exceeds steps (" + std::to_string(cfg.teacher_cutoff) +
                                                " > " + std::to_string(cfg.steps) + ")");
    }
    if (cfg.scfg_mode == GuidanceMode::style_cfg) {
        if (cfg.style_image_path.empty()) {
            throw ConfigError("style_image_path", "required in style_cfg mode");
        }
        if (cfg.negative_style_image_path.empty()) {
            throw ConfigError("negative_style_image_path", "required in style_cfg mode");
        }
    }

    if (cfg.fusion_mode == FusionMode::cross_modal_adain && is_set("lambda")) {
        cfg.warnings.push_back("lambda: unused with fusion_mode=cross_modal_adain, ignoring");
    }
    if (cfg.scfg_mode == GuidanceMode::text_cfg && !cfg.negative_style_image_path.empty()) {
        cfg.warnings.push_back("negative_style_image_path: unused in text_cfg mode");
    }
    if (cfg.guidance_w() < 0.0) {
        cfg.warnings.push_back("guidance_scale: below 1 implies a negative guidance weight");
    }
    if (cfg.scfg_mode == GuidanceMode::style_cfg && cfg.scfg_weight < 0.0) {
        cfg.warnings.push_back("scfg_weight: negative weight");
    }
    return cfg;
}

}  // namespace stylefuse
