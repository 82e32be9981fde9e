#include "stylefuse/backend.hpp"

#include <map>
#include <mutex>

#include "stylefuse/errors.hpp"
#include "stylefuse/toy_backend.hpp"

namespace stylefuse {

namespace {

std::mutex g_registry_mutex;

std::map<std::string, BackendFactory>& registry() {
    static std::map<std::string, BackendFactory> r = {
        {"toy", [] { return std::static_pointer_cast<Backend>(
                         build_toy(ToyBackend::kDefaultBuildSeed)); }},
    };
    return r;
}

}  // namespace

void register_backend(const std::string& name, BackendFactory factory) {
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    registry()[name] = std::move(factory);
}

std::shared_ptr<Backend> make_backend(const std::string& name) {
    BackendFactory factory;
    {
        std::lock_guard<std::mutex> lock(g_registry_mutex);
        auto it = registry().find(name);
        if (it == registry().end()) {
            throw ConfigError("backend",
                              "unknown backend '" + name + "' (no adapter registered)");
        }
        factory = it->second;
    }
    return factory();
}

}  // namespace stylefuse
