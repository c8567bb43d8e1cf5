#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "extension.hpp"
#include "funcspace.hpp"
#include "matrix.hpp"
#include "poset.hpp"

namespace geodecomp {

/// Direct-sum decomposition of the top space: one block per element, the
/// block for F spanned by the extended vanishing-trace functions of F. The
/// certificate is the concatenation of all blocks in element order; it is
/// square and invertible whenever construction succeeded.
struct Decomposition {
    std::string top;
    std::size_t ambient_dim = 0;
    std::vector<std::pair<std::string, RatMatrix>> blocks; // element order
    RatMatrix certificate;

    const RatMatrix& block(const std::string& name) const {
        for (const auto& [n, b] : blocks)
            if (n == name) return b;
        throw UnknownIdentifier("no block for element '" + name + "'");
    }

    std::size_t block_offset(const std::string& name) const {
        std::size_t off = 0;
        for (const auto& [n, b] : blocks) {
            if (n == name) return off;
            off += b.cols();
        }
        throw UnknownIdentifier("no block for element '" + name + "'");
    }
};

struct StepSplit {
    RatMatrix whole; // basis of functions vanishing on s minus t
    RatMatrix kept;  // basis of functions vanishing on all of s
    RatMatrix block; // extended vanishing-trace functions of t
};

/// One peeling step: removing a maximal element t from the lower set s
/// splits the functions vanishing on s-minus-t into those vanishing on all
/// of s plus the extension of t's vanishing-trace space. Every claim in the
/// split is certified exactly; violations raise DecompositionFailure.
inline StepSplit decompose_step(const ExtensionFamily& e, const LowerSet& s,
                                const std::string& t) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    auto top = p.top();
    if (!top)
        throw NoTopElement("poset has no unique maximal element");
    std::size_t ti = p.index_of(*top);
    std::size_t tsel = p.index_of(t);

    if (std::find(s.members.begin(), s.members.end(), t) == s.members.end())
        throw NotMaximal("'" + t + "' is not a member of the lower set");
    for (const auto& m : s.members)
        if (m != t && p.leq(tsel, p.index_of(m)))
            throw NotMaximal("'" + t + "' is not maximal: below '" + m + "'");

    LowerSet rest;
    for (const auto& m : s.members)
        if (m != t) rest.members.push_back(m);

    StepSplit out;
    out.whole = vanish_on_lower_set(fs, rest).basis;
    out.kept = vanish_on_lower_set(fs, s).basis;
    out.block = e.op(tsel, ti);

    // The block must itself vanish on every other member of s.
    for (const auto& m : rest.members)
        if (!(fs.trace(p.index_of(m), ti) * out.block).is_zero())
            throw DecompositionFailure("extension of '" + t + "' does not vanish on '" + m + "'");

    // Independence and dimension count.
    if (rank(hstack({out.kept, out.block})) != out.kept.cols() + out.block.cols())
        throw DecompositionFailure("split of '" + t + "' is not direct");
    if (out.kept.cols() + out.block.cols() != out.whole.cols())
        throw DecompositionFailure("split of '" + t + "' does not fill the space");

    // Replay the splitting formula on every basis vector: phi minus the
    // extension of its own trace must vanish on all of s.
    const RatMatrix& v = e.vanishing_basis(tsel);
    for (std::size_t j = 0; j < out.whole.cols(); ++j) {
        RatMatrix phi = column(out.whole, j);
        auto w = solve(v, fs.trace(tsel, ti) * phi);
        if (std::holds_alternative<Infeasible>(w))
            throw DecompositionFailure("trace of a basis vector on '" + t +
                                       "' has nonvanishing lower traces");
        RatMatrix residual = phi - out.block * std::get<Solution>(w).x;
        if (std::holds_alternative<Infeasible>(solve(out.kept, residual)))
            throw DecompositionFailure("residual of a basis vector does not vanish on s");
    }
    return out;
}

/// Decompose the top space of a consistent family by peeling the poset. A
/// custom peel order may be supplied; it must list every element once and
/// each entry must be maximal among the not-yet-peeled elements.
inline Decomposition geometric_decomposition(
    const ExtensionFamily& e,
    const std::optional<std::vector<std::string>>& peel = std::nullopt) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    auto top = p.top();
    if (!top)
        throw NoTopElement("poset has no unique maximal element");

    auto famcheck = verify_consistent_family(e);
    if (!famcheck.valid)
        throw InvalidFamily("family violates " + std::to_string(famcheck.violations.size()) +
                            " consistency condition(s)");

    std::vector<std::string> order =
        peel ? *peel : p.peel_sequence(Poset::PeelDirection::down);
    {
        std::vector<bool> seen(p.size(), false);
        for (const auto& name : order) {
            std::size_t i = p.index_of(name);
            if (seen[i])
                throw DuplicateIdentifier("peel repeats '" + name + "'");
            seen[i] = true;
        }
        if (order.size() != p.size())
            throw NotMaximal("peel does not cover every element");
    }

    LowerSet s{p.elements()};
    std::map<std::string, RatMatrix> by_name;
    for (const auto& t : order) {
        StepSplit split = decompose_step(e, s, t);
        by_name[t] = split.block;
        std::vector<std::string> rest;
        for (const auto& m : s.members)
            if (m != t) rest.push_back(m);
        s.members = std::move(rest);
    }

    Decomposition d;
    d.top = *top;
    d.ambient_dim = fs.dim(p.index_of(*top));
    std::vector<RatMatrix> ordered;
    for (const auto& name : p.elements()) {
        d.blocks.emplace_back(name, by_name.at(name));
        ordered.push_back(by_name.at(name));
    }
    auto check = direct_sum_check(ordered, d.ambient_dim);
    if (std::holds_alternative<DependencyWitness>(check))
        throw DecompositionFailure("blocks are not independent");
    d.certificate = std::get<Certified>(check).combined;
    if (d.certificate.cols() != d.ambient_dim)
        throw DecompositionFailure("blocks do not fill the top space");
    return d;
}

/// Decomposition of one element's own space, using the family restricted to
/// its down-set.
inline Decomposition local_decomposition(const ExtensionFamily& e, const std::string& t) {
    return geometric_decomposition(e.restrict_to_down_set(t));
}

inline std::map<std::string, Decomposition> all_local_decompositions(const ExtensionFamily& e) {
    std::map<std::string, Decomposition> out;
    for (const auto& name : e.space().poset().elements())
        out.emplace(name, local_decomposition(e, name));
    return out;
}

// ---------------------------------------------------------------------------
// Dual side
// ---------------------------------------------------------------------------

/// One functional matrix per element: columns are functionals on the
/// element's space (coordinates in the dual basis), as many as the
/// vanishing-trace dimension, pairing invertibly with it.
struct DaggerChoice {
    std::map<std::string, RatMatrix> functionals;
};

struct DaggerVerifyResult {
    bool valid = true;
    std::string reason;
};

/// A valid dagger for F must pair invertibly with the vanishing-trace
/// subspace of F (square pairing, full rank).
inline DaggerVerifyResult verify_dagger(const FunctionSpace& fs, const std::string& f,
                                        const RatMatrix& dagger) {
    RatMatrix v = vanishing_trace(fs, f).basis;
    if (dagger.rows() != v.rows())
        return {false, "functional length does not match the space dimension"};
    if (dagger.cols() != v.cols())
        return {false, "functional count does not match the vanishing-trace dimension"};
    RatMatrix pairing = transpose(dagger) * v;
    if (rank(pairing) != v.cols())
        return {false, "pairing with the vanishing-trace subspace is singular"};
    return {true, ""};
}

/// Euclidean choice: the vanishing-trace basis vectors themselves, paired by
/// the coordinate dot product. The pairing is a Gram matrix of independent
/// columns, hence always invertible.
inline RatMatrix dagger_euclidean(const FunctionSpace& fs, const std::string& f) {
    return vanishing_trace(fs, f).basis;
}

/// Projection choice: functionals reading off the F-block coordinates of the
/// local decomposition of F, i.e. they annihilate every other local block.
inline RatMatrix dagger_projection(const ExtensionFamily& e, const std::string& f) {
    Decomposition d = local_decomposition(e, f);
    RatMatrix minv = inverse(d.certificate);
    std::size_t off = d.block_offset(f);
    std::size_t cnt = d.block(f).cols();
    RatMatrix dag = transpose(row_slice(minv, off, cnt));
    auto check = verify_dagger(e.space(), f, dag);
    if (!check.valid)
        throw InvalidDagger("projection functionals for '" + f + "': " + check.reason);
    return dag;
}

inline DaggerChoice euclidean_daggers(const ExtensionFamily& e) {
    DaggerChoice c;
    for (const auto& name : e.space().poset().elements())
        c.functionals[name] = dagger_euclidean(e.space(), name);
    return c;
}

inline DaggerChoice projection_daggers(const ExtensionFamily& e) {
    DaggerChoice c;
    for (const auto& name : e.space().poset().elements())
        c.functionals[name] = dagger_projection(e, name);
    return c;
}

/// Decomposition of the dual of the top space: one block per element, the
/// block for F spanned by the trace-pullbacks of F's chosen functionals.
struct DualDecomposition {
    std::string top;
    std::size_t ambient_dim = 0;
    std::vector<std::pair<std::string, RatMatrix>> blocks; // element order
    RatMatrix certificate;

    const RatMatrix& block(const std::string& name) const {
        for (const auto& [n, b] : blocks)
            if (n == name) return b;
        throw UnknownIdentifier("no dual block for element '" + name + "'");
    }
};

/// Build and certify the dual decomposition by peeling upward: adding the
/// functionals of a minimal-next element t exactly extends the annihilator
/// of the shrunk lower set, which is replayed column by column.
inline DualDecomposition dual_decomposition(const ExtensionFamily& e, const DaggerChoice& c) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    auto top = p.top();
    if (!top)
        throw NoTopElement("poset has no unique maximal element");
    std::size_t ti = p.index_of(*top);
    const std::size_t n = fs.dim(ti);

    auto famcheck = verify_consistent_family(e);
    if (!famcheck.valid)
        throw InvalidFamily("family violates " + std::to_string(famcheck.violations.size()) +
                            " consistency condition(s)");
    for (const auto& name : p.elements()) {
        auto it = c.functionals.find(name);
        if (it == c.functionals.end())
            throw InvalidDagger("no functionals given for '" + name + "'");
        auto check = verify_dagger(fs, name, it->second);
        if (!check.valid)
            throw InvalidDagger("functionals for '" + name + "': " + check.reason);
    }

    std::map<std::string, RatMatrix> by_name;
    std::vector<RatMatrix> accumulated;
    std::size_t accumulated_cols = 0;
    LowerSet grown{{}};
    for (const auto& t : p.peel_sequence(Poset::PeelDirection::up)) {
        std::size_t tsel = p.index_of(t);
        const RatMatrix& dag = c.functionals.at(t);
        RatMatrix bt = transpose(fs.trace(tsel, ti)) * dag;

        LowerSet before = grown;
        grown.members.push_back(t);
        std::sort(grown.members.begin(), grown.members.end(),
                  [&](const std::string& a, const std::string& b) {
                      return p.index_of(a) < p.index_of(b);
                  });

        RatMatrix vanish_after = vanish_on_lower_set(fs, grown).basis;
        if (!(transpose(bt) * vanish_after).is_zero())
            throw DecompositionFailure("functionals of '" + t +
                                       "' do not annihilate the shrunk lower set");

        // Every annihilator of the grown set splits as one of these
        // functionals plus an annihilator of the previous set.
        RatMatrix vanish_before = vanish_on_lower_set(fs, before).basis;
        RatMatrix annihilators = kernel_basis(transpose(vanish_after));
        const RatMatrix& v = e.vanishing_basis(tsel);
        RatMatrix lt = e.op(tsel, ti);
        RatMatrix pairing_t = transpose(transpose(dag) * v); // functionals vs extensions
        for (std::size_t j = 0; j < annihilators.cols(); ++j) {
            RatMatrix alpha = column(annihilators, j);
            auto w = solve(pairing_t, transpose(lt) * alpha);
            if (std::holds_alternative<Infeasible>(w))
                throw DecompositionFailure("pairing of '" + t + "' failed to match a functional");
            RatMatrix residual = alpha - bt * std::get<Solution>(w).x;
            if (!(transpose(residual) * vanish_before).is_zero())
                throw DecompositionFailure("residual functional of '" + t +
                                           "' does not annihilate the previous lower set");
        }

        accumulated.push_back(bt);
        accumulated_cols += bt.cols();
        if (rank(hstack(accumulated)) != accumulated_cols ||
            accumulated_cols != n - vanish_after.cols())
            throw DecompositionFailure("dual blocks through '" + t +
                                       "' do not span the annihilator");
        by_name[t] = std::move(bt);
    }

    DualDecomposition d;
    d.top = *top;
    d.ambient_dim = n;
    std::vector<RatMatrix> ordered;
    for (const auto& name : p.elements()) {
        d.blocks.emplace_back(name, by_name.at(name));
        ordered.push_back(by_name.at(name));
    }
    auto check = direct_sum_check(ordered, n);
    if (std::holds_alternative<DependencyWitness>(check))
        throw DecompositionFailure("dual blocks are not independent");
    d.certificate = std::get<Certified>(check).combined;
    if (d.certificate.cols() != n)
        throw DecompositionFailure("dual blocks do not fill the dual space");
    return d;
}

struct UnisolvenceCertified {
    RatMatrix pairing; // transpose(dual certificate) * primal certificate, invertible
};
struct UnisolvenceFailure {
    RatMatrix witness; // nonzero primal coefficient vector annihilated by all functionals
};
using UnisolvenceResult = std::variant<UnisolvenceCertified, UnisolvenceFailure>;

/// Pair the dual blocks against the primal blocks; unisolvence holds exactly
/// when the full pairing matrix is invertible.
inline UnisolvenceResult unisolvence_check(const Decomposition& d, const DualDecomposition& dd) {
    if (d.top != dd.top || d.ambient_dim != dd.ambient_dim)
        throw DimensionMismatch("decompositions live on different top spaces");
    RatMatrix pairing = transpose(dd.certificate) * d.certificate;
    RatMatrix k = kernel_basis(pairing);
    if (k.cols() == 0)
        return UnisolvenceCertified{std::move(pairing)};
    return UnisolvenceFailure{column(k, 0)};
}

// ---------------------------------------------------------------------------
// Extension between full spaces
// ---------------------------------------------------------------------------

/// Extension operators between the full per-element spaces, one matrix per
/// comparable pair, induced blockwise from a consistent family and the local
/// decompositions.
class FullExtension {
public:
    explicit FullExtension(std::map<std::pair<std::string, std::string>, RatMatrix> ops)
        : ops_(std::move(ops)) {}

    const RatMatrix& op(const std::string& g, const std::string& f) const {
        auto it = ops_.find({g, f});
        if (it == ops_.end())
            throw UnknownIdentifier("no full-space operator for ('" + g + "', '" + f + "')");
        return it->second;
    }

    const std::map<std::pair<std::string, std::string>, RatMatrix>& ops() const { return ops_; }

private:
    std::map<std::pair<std::string, std::string>, RatMatrix> ops_;
};

/// For each pair G <= F, map the local decomposition of G blockwise: the
/// block of K extended into G goes to the extension of K into F. Each
/// operator is checked to be a right inverse of the trace.
inline FullExtension extend_to_full_space(const ExtensionFamily& e,
                                          const std::map<std::string, Decomposition>& locals) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    std::map<std::pair<std::string, std::string>, RatMatrix> ops;
    for (std::size_t g = 0; g < p.size(); ++g) {
        const std::string& gn = p.name_of(g);
        auto it = locals.find(gn);
        if (it == locals.end())
            throw MissingDecomposition("no local decomposition for '" + gn + "'");
        const Decomposition& dg = it->second;
        for (std::size_t f = 0; f < p.size(); ++f) {
            if (!p.leq(g, f)) continue;
            const std::string& fn = p.name_of(f);
            std::vector<RatMatrix> cols;
            for (const auto& [kn, blk] : dg.blocks)
                cols.push_back(e.op(p.index_of(kn), f));
            RatMatrix ext = hstack(cols) * inverse(dg.certificate);
            if (fs.trace(g, f) * ext != RatMatrix::identity(fs.dim(g)))
                throw DecompositionFailure("full-space operator ('" + gn + "', '" + fn +
                                           "') is not a right inverse of the trace");
            ops[{gn, fn}] = std::move(ext);
        }
    }
    return FullExtension(std::move(ops));
}

struct FullExtensionViolation {
    int bullet; // 1 = right inverse, 2 = rectangle compatibility
    std::string k, f, g, t;
};

struct FullExtensionVerifyResult {
    bool valid = true;
    std::vector<FullExtensionViolation> violations;
};

/// Certify the full-space operators: every one is a right inverse of its
/// trace, and the compatibility rectangle commutes on each admissible
/// quadruple K <= F <= T, K <= G <= T where every common lower bound of F
/// and G lies below K.
inline FullExtensionVerifyResult verify_full_extension(const FullExtension& fe,
                                                       const ExtensionFamily& e) {
    const FunctionSpace& fs = e.space();
    const Poset& p = fs.poset();
    FullExtensionVerifyResult res;
    for (const auto& [key, ext] : fe.ops())
        if (fs.trace(key.first, key.second) * ext != RatMatrix::identity(fs.dim(key.first)))
            res.violations.push_back({1, "", "", key.first, key.second});

    for (std::size_t t = 0; t < p.size(); ++t)
        for (std::size_t f = 0; f < p.size(); ++f) {
            if (!p.leq(f, t)) continue;
            for (std::size_t g = 0; g < p.size(); ++g) {
                if (!p.leq(g, t)) continue;
                for (std::size_t k = 0; k < p.size(); ++k) {
                    if (!p.leq(k, f) || !p.leq(k, g)) continue;
                    bool admissible = true;
                    for (std::size_t l = 0; l < p.size(); ++l)
                        if (p.leq(l, f) && p.leq(l, g) && !p.leq(l, k)) {
                            admissible = false;
                            break;
                        }
                    if (!admissible) continue;
                    const std::string &kn = p.name_of(k), &fn = p.name_of(f),
                                      &gn = p.name_of(g), &tn = p.name_of(t);
                    if (fs.trace(g, t) * fe.op(fn, tn) != fe.op(kn, gn) * fs.trace(k, f))
                        res.violations.push_back({2, kn, fn, gn, tn});
                }
            }
        }
    res.valid = res.violations.empty();
    return res;
}

} // namespace geodecomp
