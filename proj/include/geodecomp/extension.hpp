#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "funcspace.hpp"
#include "matrix.hpp"
#include "poset.hpp"

namespace geodecomp {

/// A family of extension operators E(K, F) mapping the vanishing-trace
/// subspace of K into the space on F. Operators are stored against the
/// canonical vanishing-trace bases; pairs without a stored matrix are the
/// zero operator. Consistency of the family is checked separately by
/// verify_consistent_family.
class ExtensionFamily {
public:
    ExtensionFamily() = default;

    ExtensionFamily(FunctionSpace space,
                    const std::map<std::pair<std::string, std::string>, RatMatrix>& ops)
        : space_(std::move(space)) {
        const Poset& p = space_.poset();
        vanishing_.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            vanishing_.push_back(vanishing_trace(space_, p.name_of(i)).basis);
        for (const auto& [key, m] : ops) {
            std::size_t k = p.index_of(key.first);
            std::size_t f = p.index_of(key.second);
            if (m.rows() != space_.dim(f) || m.cols() != vdim(k))
                throw ShapeMismatch("operator ('" + key.first + "', '" + key.second +
                                    "') has shape " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
            ops_.emplace(std::make_pair(k, f), m);
        }
    }

    const FunctionSpace& space() const { return space_; }

    const RatMatrix& vanishing_basis(std::size_t i) const { return vanishing_.at(i); }
    const RatMatrix& vanishing_basis(const std::string& name) const {
        return vanishing_.at(space_.poset().index_of(name));
    }
    std::size_t vdim(std::size_t i) const { return vanishing_.at(i).cols(); }
    std::size_t vdim(const std::string& name) const {
        return vdim(space_.poset().index_of(name));
    }

    bool has_stored_op(std::size_t k, std::size_t f) const { return ops_.count({k, f}) != 0; }

    /// The operator matrix for (K, F); absent pairs materialize as zero.
    RatMatrix op(std::size_t k, std::size_t f) const {
        auto it = ops_.find({k, f});
        if (it != ops_.end()) return it->second;
        return RatMatrix(space_.dim(f), vdim(k));
    }
    RatMatrix op(const std::string& k, const std::string& f) const {
        return op(space_.poset().index_of(k), space_.poset().index_of(f));
    }

    /// Restriction of space and operators to the down-set of one element.
    ExtensionFamily restrict_to_down_set(const std::string& t) const {
        const Poset& p = space_.poset();
        FunctionSpace sub = geodecomp::restrict_to_down_set(space_, t);
        std::map<std::pair<std::string, std::string>, RatMatrix> ops;
        for (const auto& [key, m] : ops_) {
            const std::string& kn = p.name_of(key.first);
            const std::string& fn = p.name_of(key.second);
            if (sub.poset().contains(kn) && sub.poset().contains(fn))
                ops[{kn, fn}] = m;
        }
        return ExtensionFamily(std::move(sub), ops);
    }

private:
    FunctionSpace space_;
    std::vector<RatMatrix> vanishing_;
    std::map<std::pair<std::size_t, std::size_t>, RatMatrix> ops_;
};

struct FamilyViolation {
    int condition; // 1 = self-extension, 2 = support, 3 = trace compatibility
    std::string k, g, f;
};

struct FamilyVerifyResult {
    bool valid = true;
    std::vector<FamilyViolation> violations;
};

/// Check the three conditions of a consistent extension family:
///   1. E(K, K) is the inclusion of the vanishing-trace subspace,
///   2. E(K, F) = 0 whenever K is not below F,
///   3. trace(G, F) * E(K, F) = E(K, G) for every G <= F and every K.
inline FamilyVerifyResult verify_consistent_family(const ExtensionFamily& e) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    FamilyVerifyResult res;
    for (std::size_t k = 0; k < p.size(); ++k)
        if (e.op(k, k) != e.vanishing_basis(k))
            res.violations.push_back({1, p.name_of(k), "", ""});
    for (std::size_t k = 0; k < p.size(); ++k)
        for (std::size_t f = 0; f < p.size(); ++f)
            if (!p.leq(k, f) && e.has_stored_op(k, f) && !e.op(k, f).is_zero())
                res.violations.push_back({2, p.name_of(k), "", p.name_of(f)});
    for (std::size_t k = 0; k < p.size(); ++k)
        for (std::size_t g = 0; g < p.size(); ++g)
            for (std::size_t f = 0; f < p.size(); ++f) {
                if (g == f || !p.leq(g, f)) continue;
                if (fs.trace(g, f) * e.op(k, f) != e.op(k, g))
                    res.violations.push_back({3, p.name_of(k), p.name_of(g), p.name_of(f)});
            }
    res.valid = res.violations.empty();
    return res;
}

/// Build a consistent family on a poset with unique top T from one local
/// operator per element: L(K) maps the vanishing-trace subspace of K into
/// the top space, and the family is E(K, F) = trace(F, T) * L(K). Each L(K)
/// must restrict to the inclusion on K itself and to zero on every element
/// not above K; elements with trivial vanishing-trace subspace may be
/// omitted. The top's own operator defaults to the inclusion.
inline ExtensionFamily consistent_from_local(const FunctionSpace& fs,
                                             const std::map<std::string, RatMatrix>& locals) {
    const Poset& p = fs.poset();
    auto top = p.top();
    if (!top)
        throw NoTopElement("poset has no unique maximal element");
    std::size_t ti = p.index_of(*top);

    std::vector<RatMatrix> vanishing;
    for (std::size_t i = 0; i < p.size(); ++i)
        vanishing.push_back(vanishing_trace(fs, p.name_of(i)).basis);

    std::map<std::pair<std::string, std::string>, RatMatrix> ops;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const std::string& kn = p.name_of(k);
        RatMatrix l;
        auto it = locals.find(kn);
        if (it != locals.end()) {
            l = it->second;
            if (l.rows() != fs.dim(ti) || l.cols() != vanishing[k].cols())
                throw ShapeMismatch("local operator for '" + kn + "' has shape " +
                                    std::to_string(l.rows()) + "x" + std::to_string(l.cols()));
        } else if (k == ti) {
            l = vanishing[k];
        } else if (vanishing[k].cols() == 0) {
            l = RatMatrix(fs.dim(ti), 0);
        } else {
            throw NotLocalOperator("no local operator given for '" + kn + "'");
        }
        if (fs.trace(k, ti) * l != vanishing[k])
            throw NotLocalOperator("local operator for '" + kn +
                                   "' does not restrict to the inclusion");
        for (std::size_t f = 0; f < p.size(); ++f) {
            if (p.leq(k, f)) {
                ops[{kn, p.name_of(f)}] = fs.trace(f, ti) * l;
            } else if (!(fs.trace(f, ti) * l).is_zero()) {
                throw NotLocalOperator("local operator for '" + kn +
                                       "' is nonzero on '" + p.name_of(f) + "'");
            }
        }
    }
    return ExtensionFamily(fs, ops);
}

/// Recover local operators from a consistent family by expressing each
/// element's stacked operator tuple in global-basis coordinates. Throws
/// NotCompatible if some operator image is not a compatible tuple.
inline std::map<std::string, RatMatrix> local_from_consistent(const ExtensionFamily& e,
                                                              const GlobalSpace& g) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    std::map<std::string, RatMatrix> locals;
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::vector<RatMatrix> stack;
        for (std::size_t f = 0; f < p.size(); ++f) stack.push_back(e.op(k, f));
        RatMatrix rhs = stack.empty() ? RatMatrix(0, e.vdim(k)) : vstack(stack);
        auto sol = solve(g.basis, rhs);
        if (std::holds_alternative<Infeasible>(sol))
            throw NotCompatible("operator tuple for '" + p.name_of(k) +
                                "' is not a compatible tuple");
        locals[p.name_of(k)] = std::get<Solution>(sol).x;
    }
    return locals;
}

struct HatFamily {
    ExtensionFamily family;
    std::string top;
};

/// Lift a consistent family on a top-free poset to the poset with the limit
/// space adjoined as top element.
inline HatFamily extend_family_to_hat(const ExtensionFamily& e, const GlobalSpace& g) {
    auto hat = adjoin_global_top(e.space(), g);
    auto locals = local_from_consistent(e, g);
    ExtensionFamily lifted = consistent_from_local(hat.space, locals);
    return HatFamily{std::move(lifted), std::move(hat.top)};
}

} // namespace geodecomp
