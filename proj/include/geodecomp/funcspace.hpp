#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "poset.hpp"

namespace geodecomp {

/// A finite-dimensional function space attached to each poset element,
/// together with a trace matrix for every comparable pair. Each element F
/// carries a coordinate space of dimension dim(F) whose axes are named by
/// labels(F); trace(K, F) maps F-coordinates to K-coordinates for K <= F.
class FunctionSpace {
public:
    FunctionSpace() = default;

    FunctionSpace(Poset poset,
                  std::map<std::string, std::size_t> dims,
                  std::map<std::string, std::vector<std::string>> labels,
                  std::map<std::pair<std::string, std::string>, RatMatrix> traces)
        : poset_(std::move(poset)) {
        dims_.resize(poset_.size());
        labels_.resize(poset_.size());
        for (std::size_t i = 0; i < poset_.size(); ++i) {
            const std::string& name = poset_.name_of(i);
            auto d = dims.find(name);
            if (d == dims.end())
                throw ShapeMismatch("no dimension given for element '" + name + "'");
            dims_[i] = d->second;
            auto l = labels.find(name);
            if (l == labels.end()) {
                for (std::size_t t = 0; t < dims_[i]; ++t)
                    labels_[i].push_back("b" + std::to_string(t));
            } else {
                if (l->second.size() != dims_[i])
                    throw ShapeMismatch("label count for '" + name + "' does not match dimension");
                labels_[i] = l->second;
            }
        }
        for (auto& [key, m] : traces) {
            std::size_t k = poset_.index_of(key.first);
            std::size_t f = poset_.index_of(key.second);
            if (!poset_.leq(k, f))
                throw ShapeMismatch("trace given for incomparable pair ('" + key.first +
                                    "', '" + key.second + "')");
            if (m.rows() != dims_[k] || m.cols() != dims_[f])
                throw ShapeMismatch("trace ('" + key.first + "', '" + key.second +
                                    "') has shape " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
            traces_.emplace(std::make_pair(k, f), std::move(m));
        }
        for (std::size_t k = 0; k < poset_.size(); ++k)
            for (std::size_t f = 0; f < poset_.size(); ++f) {
                if (!poset_.leq(k, f)) continue;
                if (traces_.count({k, f})) continue;
                if (k == f)
                    traces_.emplace(std::make_pair(k, k), RatMatrix::identity(dims_[k]));
                else
                    throw MissingTrace("no trace for pair ('" + poset_.name_of(k) + "', '" +
                                       poset_.name_of(f) + "')");
            }
    }

    const Poset& poset() const { return poset_; }

    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t dim(const std::string& name) const { return dims_.at(poset_.index_of(name)); }

    const std::vector<std::string>& labels(const std::string& name) const {
        return labels_.at(poset_.index_of(name));
    }

    const RatMatrix& trace(std::size_t k, std::size_t f) const {
        auto it = traces_.find({k, f});
        if (it == traces_.end())
            throw MissingTrace("no trace for pair ('" + poset_.name_of(k) + "', '" +
                               poset_.name_of(f) + "')");
        return it->second;
    }
    const RatMatrix& trace(const std::string& k, const std::string& f) const {
        return trace(poset_.index_of(k), poset_.index_of(f));
    }

    /// Element order offsets into the product of all per-element spaces.
    std::size_t product_offset(std::size_t i) const {
        std::size_t off = 0;
        for (std::size_t t = 0; t < i; ++t) off += dims_[t];
        return off;
    }
    std::size_t product_dim() const { return product_offset(poset_.size()); }

private:
    Poset poset_;
    std::vector<std::size_t> dims_;
    std::vector<std::vector<std::string>> labels_;
    std::map<std::pair<std::size_t, std::size_t>, RatMatrix> traces_;
};

struct TraceViolation {
    std::string kind; // "identity" or "composition"
    std::string k, g, f;
};

struct SpaceVerifyResult {
    bool valid = true;
    std::vector<TraceViolation> violations;
};

/// Exhaustively check the identity traces and functoriality of composition
/// over every chain K <= G <= F.
inline SpaceVerifyResult verify_function_space(const FunctionSpace& fs) {
    const Poset& p = fs.poset();
    SpaceVerifyResult res;
    for (std::size_t f = 0; f < p.size(); ++f)
        if (fs.trace(f, f) != RatMatrix::identity(fs.dim(f)))
            res.violations.push_back({"identity", p.name_of(f), p.name_of(f), p.name_of(f)});
    for (std::size_t k = 0; k < p.size(); ++k)
        for (std::size_t g = 0; g < p.size(); ++g) {
            if (!p.leq(k, g)) continue;
            for (std::size_t f = 0; f < p.size(); ++f) {
                if (!p.leq(g, f)) continue;
                if (fs.trace(k, g) * fs.trace(g, f) != fs.trace(k, f))
                    res.violations.push_back(
                        {"composition", p.name_of(k), p.name_of(g), p.name_of(f)});
            }
        }
    res.valid = res.violations.empty();
    return res;
}

struct Subspace {
    std::string element;
    RatMatrix basis; // dim(element) x subspace dimension, canonical kernel basis
};

/// Subspace of F-functions whose trace to every strictly smaller element
/// vanishes. Minimal elements get the full space.
inline Subspace vanishing_trace(const FunctionSpace& fs, const std::string& f) {
    const Poset& p = fs.poset();
    std::size_t fi = p.index_of(f);
    std::vector<RatMatrix> stack;
    for (std::size_t k = 0; k < p.size(); ++k)
        if (k != fi && p.leq(k, fi)) stack.push_back(fs.trace(k, fi));
    RatMatrix m = stack.empty() ? RatMatrix(0, fs.dim(fi)) : vstack(stack);
    return Subspace{f, kernel_basis(m)};
}

/// The limit space: compatible tuples in the product of all per-element
/// spaces, cut out by the cover-pair trace constraints.
struct GlobalSpace {
    std::vector<std::string> element_order;
    std::map<std::string, std::size_t> offsets; // into the product layout
    std::size_t product_dim = 0;
    RatMatrix basis; // product_dim x dim()

    std::size_t dim() const { return basis.cols(); }

    /// Component of the global basis at one element: dim(F) x dim().
    RatMatrix projection(const FunctionSpace& fs, const std::string& f) const {
        return row_slice(basis, offsets.at(f), fs.dim(f));
    }
};

inline GlobalSpace assemble_global(const FunctionSpace& fs) {
    const Poset& p = fs.poset();
    GlobalSpace g;
    g.element_order = p.elements();
    for (std::size_t i = 0; i < p.size(); ++i)
        g.offsets[p.name_of(i)] = fs.product_offset(i);
    g.product_dim = fs.product_dim();

    auto covers = p.cover_pairs();
    std::size_t rows = 0;
    for (const auto& [k, f] : covers) rows += fs.dim(k);
    RatMatrix c(rows, g.product_dim);
    std::size_t band = 0;
    for (const auto& [kn, fn] : covers) {
        std::size_t k = p.index_of(kn), f = p.index_of(fn);
        const RatMatrix& tr = fs.trace(k, f);
        std::size_t ko = fs.product_offset(k), fo = fs.product_offset(f);
        for (std::size_t i = 0; i < fs.dim(k); ++i) {
            for (std::size_t j = 0; j < fs.dim(f); ++j) c(band + i, fo + j) = tr(i, j);
            c(band + i, ko + i) = -1;
        }
        band += fs.dim(k);
    }
    g.basis = kernel_basis(c);
    return g;
}

/// Functions on the top element whose traces vanish on every member of a
/// lower set. The poset must have a unique maximal element.
inline Subspace vanish_on_lower_set(const FunctionSpace& fs, const LowerSet& s) {
    const Poset& p = fs.poset();
    auto top = p.top();
    if (!top)
        throw NoTopElement("poset has no unique maximal element");
    if (!p.is_lower_set(s.members))
        throw NotLowerSet("member list is not downward closed");
    std::size_t ti = p.index_of(*top);
    std::vector<RatMatrix> stack;
    for (const auto& m : s.members) stack.push_back(fs.trace(p.index_of(m), ti));
    RatMatrix mat = stack.empty() ? RatMatrix(0, fs.dim(ti)) : vstack(stack);
    return Subspace{*top, kernel_basis(mat)};
}

/// Restriction of the whole structure to the down-set of one element.
inline FunctionSpace restrict_to_down_set(const FunctionSpace& fs, const std::string& t) {
    const Poset& p = fs.poset();
    auto members = p.down_set(t);
    Poset sub = p.restrict_to(members);
    std::map<std::string, std::size_t> dims;
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::pair<std::string, std::string>, RatMatrix> traces;
    for (const auto& a : members) {
        dims[a] = fs.dim(a);
        labels[a] = fs.labels(a);
        for (const auto& b : members)
            if (p.leq(a, b)) traces[{a, b}] = fs.trace(a, b);
    }
    return FunctionSpace(std::move(sub), std::move(dims), std::move(labels), std::move(traces));
}

struct SpaceWithTop {
    FunctionSpace space;
    std::string top;
};

/// Adjoin a new top element carrying the limit space itself; its traces are
/// the component projections of the global basis.
inline SpaceWithTop adjoin_global_top(const FunctionSpace& fs, const GlobalSpace& g,
                                      const std::string& hint = "top") {
    const Poset& p = fs.poset();
    auto wt = p.adjoin_top(hint);
    std::map<std::string, std::size_t> dims;
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::pair<std::string, std::string>, RatMatrix> traces;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const std::string& an = p.name_of(a);
        dims[an] = fs.dim(a);
        labels[an] = fs.labels(an);
        for (std::size_t b = 0; b < p.size(); ++b)
            if (p.leq(a, b)) traces[{an, p.name_of(b)}] = fs.trace(a, b);
        traces[{an, wt.top}] = g.projection(fs, an);
    }
    dims[wt.top] = g.dim();
    for (std::size_t t = 0; t < g.dim(); ++t)
        labels[wt.top].push_back("g" + std::to_string(t));
    return SpaceWithTop{FunctionSpace(std::move(wt.poset), std::move(dims), std::move(labels),
                                      std::move(traces)),
                        std::move(wt.top)};
}

} // namespace geodecomp
