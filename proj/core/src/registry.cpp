#include "lab/registry.hpp"

#include <charconv>
#include <mutex>

#include <fmt/format.h>

#include "lab/errors.hpp"

namespace lab {

std::pair<std::string, std::optional<std::size_t>> split_versioned_id(std::string_view id) {
    auto at = id.rfind("@v");
    if (at == std::string_view::npos) return {std::string(id), std::nullopt};
    std::size_t version = 0;
    auto digits = id.substr(at + 2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), version);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || version == 0) {
        return {std::string(id), std::nullopt};
    }
    return {std::string(id.substr(0, at)), version};
}

ProblemPtr ProblemRegistry::resolve(std::string_view id, std::optional<std::size_t> n_obj,
                                    std::optional<std::size_t> n_var) const {
    if (is_benchmark(id)) return make_benchmark(id, n_obj, n_var);

    auto [name, version] = split_versioned_id(id);
    std::shared_lock lock(mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end() || it->second.empty()) {
        throw UnsupportedError(fmt::format("unknown problem '{}'", id));
    }
    const auto& versions = it->second;
    std::size_t v = version.value_or(versions.size());
    if (v == 0 || v > versions.size()) {
        throw UnsupportedError(fmt::format("problem '{}' has no version {}", name, v));
    }
    const auto& instance = versions[v - 1].instance;
    if (n_obj && *n_obj != instance->n_obj) {
        throw ConfigurationError(
            fmt::format("problem '{}' declares M={}, requested {}", instance->id, instance->n_obj, *n_obj), "M");
    }
    if (n_var && *n_var != instance->n_var) {
        throw ConfigurationError(
            fmt::format("problem '{}' declares D={}, requested {}", instance->id, instance->n_var, *n_var), "D");
    }
    return instance;
}

bool ProblemRegistry::contains(std::string_view id) const {
    if (is_benchmark(id)) return true;
    auto [name, version] = split_versioned_id(id);
    std::shared_lock lock(mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end()) return false;
    return !version || (*version >= 1 && *version <= it->second.size());
}

std::string ProblemRegistry::add(const std::string& name, ProblemInstance instance, nlohmann::json source) {
    if (name.empty() || name.find('@') != std::string::npos) {
        throw ConfigurationError("problem names must be non-empty and must not contain '@'", "name");
    }
    if (is_benchmark(name)) {
        throw ConfigurationError(fmt::format("'{}' is a built-in benchmark name", name), "name");
    }
    std::unique_lock lock(mutex_);
    auto& versions = entries_[name];
    std::string versioned = fmt::format("{}@v{}", name, versions.size() + 1);
    instance.id = versioned;
    if (instance.name.empty()) instance.name = name;
    validate_problem(instance);
    versions.push_back({std::make_shared<const ProblemInstance>(std::move(instance)), std::move(source)});
    return versioned;
}

std::optional<nlohmann::json> ProblemRegistry::source_of(std::string_view versioned_id) const {
    auto [name, version] = split_versioned_id(versioned_id);
    std::shared_lock lock(mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end() || it->second.empty()) return std::nullopt;
    std::size_t v = version.value_or(it->second.size());
    if (v == 0 || v > it->second.size()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, it->second[v - 1].source);
}

std::vector<std::string> ProblemRegistry::versions(std::string_view name) const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    auto it = entries_.find(name);
    if (it == entries_.end()) return out;
    for (const auto& entry : it->second) out.push_back(entry.instance->id);
    return out;
}

std::vector<CatalogEntry> ProblemRegistry::catalog() const {
    auto out = benchmark_catalog();
    std::shared_lock lock(mutex_);
    for (const auto& [name, versions] : entries_) {
        for (const auto& entry : versions) {
            const auto& p = *entry.instance;
            out.push_back({p.id, p.name, p.tags, p.n_obj, p.n_var, false, "dsl"});
        }
    }
    return out;
}

}  // namespace lab
