#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/benchmarks.hpp"
#include "lab/problem.hpp"

namespace lab {

/// Problem lookup shared by the orchestrator, formulation pipeline and service.
/// Built-in benchmarks are always present; user problems are added at runtime
/// and versioned: registering `name` again yields `name@v2` while `name@v1`
/// stays resolvable. Reads are concurrent, writes are serialized.
class ProblemRegistry {
public:
    ProblemRegistry() = default;

    /// Resolves a built-in id, a versioned id (`name@vK`) or a bare registered
    /// name (latest version). Dimension overrides are only accepted for
    /// built-ins; registered problems must match their declared sizes.
    ProblemPtr resolve(std::string_view id, std::optional<std::size_t> n_obj = std::nullopt,
                       std::optional<std::size_t> n_var = std::nullopt) const;

    bool contains(std::string_view id) const;

    /// Adds a new version of `name`. The stored instance gets the versioned id.
    std::string add(const std::string& name, ProblemInstance instance, nlohmann::json source = {});

    /// Source document a registered version was compiled from.
    std::optional<nlohmann::json> source_of(std::string_view versioned_id) const;

    std::vector<std::string> versions(std::string_view name) const;

    /// Built-ins followed by registered problems (one entry per version), in a stable order.
    std::vector<CatalogEntry> catalog() const;

private:
    struct Registered {
        ProblemPtr instance;
        nlohmann::json source;
    };

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::vector<Registered>, std::less<>> entries_;
};

std::pair<std::string, std::optional<std::size_t>> split_versioned_id(std::string_view id);

}  // namespace lab
