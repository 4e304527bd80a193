#pragma once

#include "shellflow/basis.hpp"
#include "shellflow/mesh.hpp"

#include <map>
#include <memory>

namespace shellflow::test {

// Basis construction is the slow part of the suite; share instances per
// (rings, segments, pairs) within the process.
inline const GalerkinBasis& cached_basis(int rings, int segments, int pairs) {
    static std::map<std::tuple<int, int, int>, std::unique_ptr<GalerkinBasis>> cache;
    auto key = std::make_tuple(rings, segments, pairs);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto mesh = std::make_shared<Mesh>(Mesh::build_onion(rings, segments));
        auto basis = std::make_unique<GalerkinBasis>(GalerkinBasis::build(mesh, pairs));
        it = cache.emplace(key, std::move(basis)).first;
    }
    return *it->second;
}

inline std::shared_ptr<const Mesh> cached_mesh(int rings, int segments) {
    static std::map<std::pair<int, int>, std::shared_ptr<const Mesh>> cache;
    auto key = std::make_pair(rings, segments);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_shared<Mesh>(Mesh::build_onion(rings, segments))).first;
    return it->second;
}

} // namespace shellflow::test
