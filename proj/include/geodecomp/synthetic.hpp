#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "extension.hpp"
#include "funcspace.hpp"
#include "poset.hpp"
#include "simplicial.hpp"

namespace geodecomp {

struct PresheafSample {
    FunctionSpace space;
    ExtensionFamily family;
};

/// Deterministic random restriction presheaf: a subset-closed collection of
/// vertex tuples ordered by inclusion, the space on each tuple spanned by
/// one coordinate per vertex, traces restricting coordinates, and the
/// consistent family extending vertex coordinates by zero. Draws use raw
/// generator words only, so a seed reproduces exactly everywhere.
inline PresheafSample synthesize_presheaf(std::uint64_t seed, std::size_t max_elements = 20,
                                          std::size_t carrier_size = 6) {
    if (max_elements == 0)
        throw ValidationError("max_elements must be positive");
    if (carrier_size == 0)
        throw ValidationError("carrier_size must be positive");

    std::mt19937_64 rng(seed);
    auto draw = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    std::set<std::vector<unsigned>> faces;
    faces.insert({static_cast<unsigned>(draw(carrier_size))});
    const std::size_t attempts = 4 * max_elements + 8;
    for (std::size_t a = 0; a < attempts; ++a) {
        std::size_t want = 1 + draw(std::min<std::size_t>(carrier_size, 4));
        std::set<unsigned> pick;
        while (pick.size() < want) pick.insert(static_cast<unsigned>(draw(carrier_size)));
        std::vector<unsigned> tuple(pick.begin(), pick.end());
        std::set<std::vector<unsigned>> closure = faces;
        const std::size_t n = tuple.size();
        for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
            std::vector<unsigned> sub;
            for (std::size_t b = 0; b < n; ++b)
                if (mask & (std::size_t(1) << b)) sub.push_back(tuple[b]);
            closure.insert(std::move(sub));
        }
        if (closure.size() <= max_elements) faces = std::move(closure);
    }

    std::vector<std::vector<unsigned>> ordered(faces.begin(), faces.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });

    std::vector<std::string> names;
    for (const auto& f : ordered) names.push_back(SimplicialComplex::face_name(f));
    std::vector<std::pair<std::string, std::string>> covers;
    for (std::size_t a = 0; a < ordered.size(); ++a)
        for (std::size_t b = 0; b < ordered.size(); ++b) {
            if (ordered[a].size() + 1 != ordered[b].size()) continue;
            if (std::includes(ordered[b].begin(), ordered[b].end(), ordered[a].begin(),
                              ordered[a].end()))
                covers.emplace_back(names[a], names[b]);
        }
    Poset poset = Poset::from_covers(names, covers);

    std::map<std::string, std::size_t> dims;
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::pair<std::string, std::string>, RatMatrix> traces;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        dims[names[i]] = ordered[i].size();
        std::vector<std::string> l;
        for (unsigned v : ordered[i]) l.push_back("@" + std::to_string(v));
        labels[names[i]] = std::move(l);
        for (std::size_t j = 0; j < ordered.size(); ++j) {
            if (i == j || !poset.leq(names[i], names[j])) continue;
            RatMatrix t(ordered[i].size(), ordered[j].size());
            for (std::size_t a = 0; a < ordered[i].size(); ++a)
                for (std::size_t b = 0; b < ordered[j].size(); ++b)
                    if (ordered[i][a] == ordered[j][b]) t(a, b) = 1;
            traces[{names[i], names[j]}] = std::move(t);
        }
    }
    FunctionSpace space(poset, dims, labels, traces);

    // Zero-extension family: each vertex coordinate extends to its indicator
    // on every face containing it.
    std::map<std::pair<std::string, std::string>, RatMatrix> ops;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (ordered[i].size() != 1) continue;
        unsigned v = ordered[i][0];
        for (std::size_t j = 0; j < ordered.size(); ++j) {
            if (!poset.leq(names[i], names[j])) continue;
            RatMatrix e(ordered[j].size(), 1);
            for (std::size_t b = 0; b < ordered[j].size(); ++b)
                if (ordered[j][b] == v) e(b, 0) = 1;
            ops[{names[i], names[j]}] = std::move(e);
        }
    }
    ExtensionFamily family(space, ops);
    return PresheafSample{std::move(space), std::move(family)};
}

} // namespace geodecomp
