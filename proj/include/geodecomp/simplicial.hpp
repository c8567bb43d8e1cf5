#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "extension.hpp"
#include "forms.hpp"
#include "funcspace.hpp"
#include "matrix.hpp"
#include "poset.hpp"

namespace geodecomp {

/// Finite simplicial complex: all nonempty subsets of the given cells, with
/// the face poset ordered by inclusion. Faces are named by their sorted
/// vertex lists ("0-2-5") and listed by dimension, then lexicographically.
struct SimplicialComplex {
    std::size_t vertex_count = 0;
    std::vector<std::vector<unsigned>> faces;
    Poset poset; // one element per face, same order
    unsigned dimension = 0;

    static std::string face_name(const std::vector<unsigned>& face) {
        std::string s;
        for (std::size_t i = 0; i < face.size(); ++i) {
            if (i) s += "-";
            s += std::to_string(face[i]);
        }
        return s;
    }

    const std::vector<unsigned>& face_by_name(const std::string& name) const {
        return faces.at(poset.index_of(name));
    }

    unsigned face_dim(std::size_t i) const {
        return static_cast<unsigned>(faces[i].size()) - 1;
    }
};

inline SimplicialComplex build_complex(std::size_t vertex_count,
                                       const std::vector<std::vector<unsigned>>& cells) {
    if (cells.empty())
        throw ValidationError("complex has no cells");
    std::set<std::vector<unsigned>> subsets;
    for (const auto& cell : cells) {
        if (cell.empty())
            throw ValidationError("empty cell");
        std::vector<unsigned> sorted = cell;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] >= vertex_count)
                throw IndexOutOfRange("cell " + SimplicialComplex::face_name(sorted) +
                                      " references vertex " + std::to_string(sorted[i]));
            if (i > 0 && sorted[i] == sorted[i - 1])
                throw DuplicateVertexInCell("cell " + SimplicialComplex::face_name(sorted) +
                                            " repeats vertex " + std::to_string(sorted[i]));
        }
        // All nonempty subsets, by bitmask.
        const std::size_t n = sorted.size();
        for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
            std::vector<unsigned> sub;
            for (std::size_t b = 0; b < n; ++b)
                if (mask & (std::size_t(1) << b)) sub.push_back(sorted[b]);
            subsets.insert(std::move(sub));
        }
    }

    SimplicialComplex c;
    c.vertex_count = vertex_count;
    c.faces.assign(subsets.begin(), subsets.end());
    std::sort(c.faces.begin(), c.faces.end(),
              [](const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    for (const auto& f : c.faces)
        c.dimension = std::max<unsigned>(c.dimension, static_cast<unsigned>(f.size()) - 1);

    std::vector<std::string> names;
    for (const auto& f : c.faces) names.push_back(SimplicialComplex::face_name(f));
    std::vector<std::pair<std::string, std::string>> covers;
    for (std::size_t a = 0; a < c.faces.size(); ++a)
        for (std::size_t b = 0; b < c.faces.size(); ++b) {
            if (c.faces[a].size() + 1 != c.faces[b].size()) continue;
            if (std::includes(c.faces[b].begin(), c.faces[b].end(), c.faces[a].begin(),
                              c.faces[a].end()))
                covers.emplace_back(names[a], names[b]);
        }
    c.poset = Poset::from_covers(std::move(names), covers);
    return c;
}

/// Basis of one polynomial form space on an abstract reference simplex,
/// with coordinate extraction through canonicalization.
struct SimplexSpaceBasis {
    unsigned dim = 0;
    std::vector<BarycentricForm> forms;
    std::vector<std::string> labels;
    std::vector<CanonicalForm> canon;

    std::size_t size() const { return forms.size(); }

    void finish() {
        for (const auto& f : forms) canon.push_back(f.canonical());
    }

    /// Rank of the canonicalized generators; equals size() exactly when the
    /// basis is linearly independent.
    std::size_t canon_rank() const {
        std::map<FormKey, std::size_t> keyidx;
        for (const auto& m : canon)
            for (const auto& [key, v] : m) keyidx.emplace(key, keyidx.size());
        RatMatrix m(keyidx.size(), size());
        for (std::size_t j = 0; j < canon.size(); ++j)
            for (const auto& [key, v] : canon[j]) m(keyidx.at(key), j) = v;
        return rank(m);
    }

    /// Coordinates of the inputs in this basis (columns). The inputs must
    /// lie in the span; anything else is a usage error.
    RatMatrix coords_of(const std::vector<BarycentricForm>& inputs) const {
        std::map<FormKey, std::size_t> keyidx;
        std::vector<CanonicalForm> incanon;
        incanon.reserve(inputs.size());
        for (const auto& f : inputs) incanon.push_back(f.canonical());
        for (const auto& m : canon)
            for (const auto& [key, v] : m) keyidx.emplace(key, keyidx.size());
        for (const auto& m : incanon)
            for (const auto& [key, v] : m) keyidx.emplace(key, keyidx.size());
        RatMatrix m(keyidx.size(), size());
        for (std::size_t j = 0; j < canon.size(); ++j)
            for (const auto& [key, v] : canon[j]) m(keyidx.at(key), j) = v;
        RatMatrix b(keyidx.size(), inputs.size());
        for (std::size_t j = 0; j < incanon.size(); ++j)
            for (const auto& [key, v] : incanon[j]) b(keyidx.at(key), j) = v;
        auto sol = solve(m, b);
        if (std::holds_alternative<Infeasible>(sol))
            throw Error("internal: form outside the basis span");
        return std::get<Solution>(sol).x;
    }
};

struct ReferenceExtension {
    unsigned m = 0;   // source simplex dimension
    RatMatrix matrix; // cone-space coordinates x vanishing-trace dimension
};

/// A polynomial form space assignable to every simplex dimension.
class SimplicialSpace {
public:
    virtual ~SimplicialSpace() = default;
    virtual std::string name() const = 0;
    virtual SimplexSpaceBasis basis_on(unsigned m) const = 0;

    /// Closed-form reference extension for dimension m, when one is known.
    virtual std::optional<ReferenceExtension> builtin_extension(unsigned m) const {
        (void)m;
        return std::nullopt;
    }
};

namespace detail {

/// Labels like "l0^2*l1 dl0^dl2".
inline std::string monomial_label(const std::vector<unsigned>& exps,
                                  const std::vector<unsigned>& wedge) {
    return BarycentricForm::monomial(static_cast<unsigned>(exps.size()) - 1, exps, wedge)
        .to_string();
}

} // namespace detail

inline ReferenceExtension bubble_extension(unsigned r, unsigned m);

/// Polynomials of total degree r, written as homogeneous degree-r monomials
/// in the barycentric symbols.
class LagrangeSpace final : public SimplicialSpace {
public:
    explicit LagrangeSpace(unsigned r) : r_(r) {}
    unsigned r() const { return r_; }

    std::string name() const override { return "lagrange:" + std::to_string(r_); }

    SimplexSpaceBasis basis_on(unsigned m) const override {
        SimplexSpaceBasis b;
        b.dim = m;
        for (const auto& exps : detail::homogeneous_exponents(m + 1, r_)) {
            b.forms.push_back(BarycentricForm::monomial(m, exps, {}));
            b.labels.push_back(detail::monomial_label(exps, {}));
        }
        b.finish();
        return b;
    }

    std::optional<ReferenceExtension> builtin_extension(unsigned m) const override {
        if (r_ == 0) return std::nullopt;
        return bubble_extension(r_, m);
    }

private:
    unsigned r_;
};

/// Differential k-forms with homogeneous degree-r polynomial coefficients;
/// the differential tuples omit the last symbol so the generators stay
/// independent after canonicalization.
class PolyFormSpace final : public SimplicialSpace {
public:
    PolyFormSpace(unsigned r, unsigned k) : r_(r), k_(k) {}
    unsigned r() const { return r_; }
    unsigned k() const { return k_; }

    std::string name() const override {
        return "plambda:" + std::to_string(r_) + ":" + std::to_string(k_);
    }

    SimplexSpaceBasis basis_on(unsigned m) const override {
        SimplexSpaceBasis b;
        b.dim = m;
        if (k_ <= m) {
            for (const auto& exps : detail::homogeneous_exponents(m + 1, r_))
                for (const auto& wedge : detail::increasing_tuples(m > 0 ? m - 1 : 0, k_)) {
                    b.forms.push_back(BarycentricForm::monomial(m, exps, wedge));
                    b.labels.push_back(detail::monomial_label(exps, wedge));
                }
        }
        b.finish();
        return b;
    }

private:
    unsigned r_, k_;
};

inline ReferenceExtension whitney_extension(unsigned k, unsigned m);

/// The classical lowest-order k-form spaces, one generator per
/// (k+1)-subset of the vertices.
class WhitneySpace final : public SimplicialSpace {
public:
    explicit WhitneySpace(unsigned k) : k_(k) {}
    unsigned k() const { return k_; }

    std::string name() const override { return "whitney:" + std::to_string(k_); }

    static BarycentricForm generator(unsigned m, const std::vector<unsigned>& sigma) {
        BarycentricForm f(m, static_cast<unsigned>(sigma.size()) - 1);
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            std::vector<unsigned> exps(m + 1, 0);
            exps[sigma[i]] = 1;
            std::vector<unsigned> wedge;
            for (std::size_t j = 0; j < sigma.size(); ++j)
                if (j != i) wedge.push_back(sigma[j]);
            f.add_term(i % 2 ? -1 : 1, std::move(exps), std::move(wedge));
        }
        return f;
    }

    SimplexSpaceBasis basis_on(unsigned m) const override {
        SimplexSpaceBasis b;
        b.dim = m;
        if (k_ <= m) {
            for (const auto& sigma : detail::increasing_tuples(m, k_ + 1)) {
                b.forms.push_back(generator(m, sigma));
                b.labels.push_back("w" + SimplicialComplex::face_name(sigma));
            }
        }
        b.finish();
        return b;
    }

    std::optional<ReferenceExtension> builtin_extension(unsigned m) const override {
        return whitney_extension(k_, m);
    }

private:
    unsigned k_;
};

/// The reference simplex of dimension m as a one-cell complex.
inline SimplicialComplex simplex_complex(unsigned m) {
    std::vector<unsigned> cell(m + 1);
    for (unsigned i = 0; i <= m; ++i) cell[i] = i;
    return build_complex(m + 1, {cell});
}

/// The cone over the reference m-simplex: one cell of dimension m + 1,
/// with the base simplex sitting as the face {1, ..., m+1} and the apex
/// vertex 0.
inline SimplicialComplex cone_complex(unsigned m) {
    std::vector<unsigned> cell(m + 2);
    for (unsigned i = 0; i <= m + 1; ++i) cell[i] = i;
    return build_complex(m + 2, {cell});
}

/// Attach the space to every face of the complex; traces are pullbacks
/// along the face inclusions, expressed in the per-dimension bases.
inline FunctionSpace instantiate_space(const SimplicialComplex& c, const SimplicialSpace& sp) {
    std::map<unsigned, SimplexSpaceBasis> bases;
    for (std::size_t i = 0; i < c.faces.size(); ++i) {
        unsigned d = c.face_dim(i);
        if (!bases.count(d)) bases.emplace(d, sp.basis_on(d));
    }

    std::map<std::string, std::size_t> dims;
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::pair<std::string, std::string>, RatMatrix> traces;
    for (std::size_t i = 0; i < c.faces.size(); ++i) {
        const std::string& name = c.poset.name_of(i);
        const SimplexSpaceBasis& b = bases.at(c.face_dim(i));
        dims[name] = b.size();
        labels[name] = b.labels;
    }
    for (std::size_t a = 0; a < c.faces.size(); ++a)
        for (std::size_t f = 0; f < c.faces.size(); ++f) {
            if (a == f || !c.poset.leq(a, f)) continue;
            const auto& kface = c.faces[a];
            const auto& fface = c.faces[f];
            std::vector<unsigned> images(kface.size());
            for (std::size_t j = 0; j < kface.size(); ++j)
                images[j] = static_cast<unsigned>(
                    std::find(fface.begin(), fface.end(), kface[j]) - fface.begin());
            const SimplexSpaceBasis& fb = bases.at(c.face_dim(f));
            const SimplexSpaceBasis& kb = bases.at(c.face_dim(a));
            std::vector<BarycentricForm> pulled;
            for (const auto& form : fb.forms)
                pulled.push_back(pullback(form, static_cast<unsigned>(kface.size()) - 1, images));
            traces[{c.poset.name_of(a), c.poset.name_of(f)}] = kb.coords_of(pulled);
        }
    return FunctionSpace(c.poset, std::move(dims), std::move(labels), std::move(traces));
}

namespace detail {

/// Vanishing-trace basis of the space on the reference m-simplex, in
/// basis_on(m) coordinates.
inline RatMatrix reference_vanishing_basis(const SimplicialSpace& sp, unsigned m) {
    SimplicialComplex c = simplex_complex(m);
    FunctionSpace fs = instantiate_space(c, sp);
    return vanishing_trace(fs, c.poset.name_of(c.faces.size() - 1)).basis;
}

/// Name of the base face {1..m+1} inside the cone complex.
inline std::string cone_base_name(unsigned m) {
    std::vector<unsigned> base(m + 1);
    for (unsigned i = 0; i <= m; ++i) base[i] = i + 1;
    return SimplicialComplex::face_name(base);
}

} // namespace detail

struct ReferenceCertifyResult {
    bool valid = true;
    std::string reason;
};

/// Check the two defining conditions of a reference extension: composing
/// with the trace back to the base face gives the vanishing-trace inclusion,
/// and the trace to every other proper face of the cone is zero.
inline ReferenceCertifyResult certify_reference_extension(const SimplicialSpace& sp,
                                                          const ReferenceExtension& ext) {
    SimplicialComplex c = cone_complex(ext.m);
    FunctionSpace fs = instantiate_space(c, sp);
    const std::string base = detail::cone_base_name(ext.m);
    const std::string apex_cell = c.poset.name_of(c.faces.size() - 1);
    RatMatrix v = detail::reference_vanishing_basis(sp, ext.m);
    if (ext.matrix.rows() != fs.dim(apex_cell) || ext.matrix.cols() != v.cols())
        return {false, "matrix has the wrong shape"};
    if (fs.trace(base, apex_cell) * ext.matrix != v)
        return {false, "trace back to the base face is not the identity"};
    for (const auto& name : c.poset.elements()) {
        if (name == base || name == apex_cell) continue;
        if (!(fs.trace(name, apex_cell) * ext.matrix).is_zero())
            return {false, "trace to face " + name + " is nonzero"};
    }
    return {true, ""};
}

/// Degree-preserving extension for the polynomial spaces: a homogeneous
/// monomial on the base simplex is reread as the same monomial on the cone,
/// with exponent zero on the apex symbol. Vanishing-trace polynomials are
/// divisible by the product of all base symbols, which makes every other
/// trace vanish.
inline ReferenceExtension bubble_extension(unsigned r, unsigned m) {
    if (r == 0)
        throw MissingExtension("degree-0 polynomials have no reference extension");
    RatMatrix v = detail::reference_vanishing_basis(LagrangeSpace(r), m);
    auto texps = detail::homogeneous_exponents(m + 1, r);
    auto qexps = detail::homogeneous_exponents(m + 2, r);
    std::map<std::vector<unsigned>, std::size_t> qindex;
    for (std::size_t i = 0; i < qexps.size(); ++i) qindex[qexps[i]] = i;
    RatMatrix e(qexps.size(), v.cols());
    for (std::size_t t = 0; t < texps.size(); ++t) {
        std::vector<unsigned> lifted(m + 2, 0);
        for (unsigned i = 0; i <= m; ++i) lifted[i + 1] = texps[t][i];
        std::size_t q = qindex.at(lifted);
        for (std::size_t j = 0; j < v.cols(); ++j) e(q, j) = v(t, j);
    }
    return ReferenceExtension{m, std::move(e)};
}

/// Extension for the lowest-order form spaces: the only dimension with a
/// nonzero vanishing-trace space is m = k, whose generator goes to the
/// generator of the lifted vertex tuple.
inline ReferenceExtension whitney_extension(unsigned k, unsigned m) {
    WhitneySpace sp(k);
    SimplexSpaceBasis cone_basis = sp.basis_on(m + 1);
    RatMatrix v = detail::reference_vanishing_basis(sp, m);
    RatMatrix e(cone_basis.size(), v.cols());
    if (v.cols() > 0) {
        // v is the single generator on all of {0..m}; its lift uses {1..m+1}.
        auto tuples = detail::increasing_tuples(m + 1, k + 1);
        std::vector<unsigned> lifted(k + 1);
        for (unsigned i = 0; i <= k; ++i) lifted[i] = i + 1;
        std::size_t pos =
            std::find(tuples.begin(), tuples.end(), lifted) - tuples.begin();
        e(pos, 0) = v(0, 0);
    }
    return ReferenceExtension{m, std::move(e)};
}

struct ExtensionInfeasible {
    RatMatrix certificate; // transpose(y) * system == 0, transpose(y) * rhs != 0
    RatMatrix system;
    RatMatrix rhs;
    std::vector<std::pair<std::string, std::size_t>> row_blocks; // face name, row count
};
using ExtensionSolveResult = std::variant<ReferenceExtension, ExtensionInfeasible>;

/// Solve for a reference extension in dimension m directly from its defining
/// trace conditions on the cone. Returns the operator or an exact
/// infeasibility certificate.
inline ExtensionSolveResult solve_simpext(const SimplicialSpace& sp, unsigned m) {
    SimplicialComplex c = cone_complex(m);
    FunctionSpace fs = instantiate_space(c, sp);
    const std::string base = detail::cone_base_name(m);
    const std::string apex_cell = c.poset.name_of(c.faces.size() - 1);
    RatMatrix v = vanishing_trace(fs, base).basis;

    std::vector<RatMatrix> sys, rhs;
    std::vector<std::pair<std::string, std::size_t>> row_blocks;
    sys.push_back(fs.trace(base, apex_cell));
    rhs.push_back(v);
    row_blocks.emplace_back(base, fs.dim(base));
    for (const auto& name : c.poset.elements()) {
        if (name == base || name == apex_cell) continue;
        sys.push_back(fs.trace(name, apex_cell));
        rhs.push_back(RatMatrix(fs.dim(name), v.cols()));
        row_blocks.emplace_back(name, fs.dim(name));
    }
    RatMatrix system = vstack(sys);
    RatMatrix b = vstack(rhs);
    auto sol = solve(system, b);
    if (std::holds_alternative<Infeasible>(sol))
        return ExtensionInfeasible{std::get<Infeasible>(sol).certificate, std::move(system),
                                   std::move(b), std::move(row_blocks)};
    return ReferenceExtension{m, std::get<Solution>(sol).x};
}

/// Build the lifted consistent family on a complex from reference extensions:
/// a face of full dimension extends by zero, a face K of dimension q < n
/// extends through the collapse map onto the cone over K. Only dimensions
/// where some face has a nonzero vanishing-trace space need an entry in ems.
inline HatFamily local_ops_from_simplicial(const SimplicialComplex& c,
                                           const SimplicialSpace& sp, const FunctionSpace& fs,
                                           const GlobalSpace& g,
                                           const std::map<unsigned, RatMatrix>& ems) {
    const unsigned n = c.dimension;
    std::map<unsigned, SimplexSpaceBasis> bases;
    auto basis_for = [&](unsigned d) -> const SimplexSpaceBasis& {
        auto it = bases.find(d);
        if (it == bases.end()) it = bases.emplace(d, sp.basis_on(d)).first;
        return it->second;
    };

    std::map<std::string, RatMatrix> locals;
    for (std::size_t ki = 0; ki < c.faces.size(); ++ki) {
        const std::string& kname = c.poset.name_of(ki);
        RatMatrix v = vanishing_trace(fs, kname).basis;
        if (v.cols() == 0) continue;
        const auto& kface = c.faces[ki];
        const unsigned q = c.face_dim(ki);

        RatMatrix stacked(g.product_dim, v.cols());
        if (q == n) {
            // Extend by zero off the face itself.
            std::size_t off = g.offsets.at(kname);
            for (std::size_t i = 0; i < v.rows(); ++i)
                for (std::size_t j = 0; j < v.cols(); ++j)
                    stacked(off + i, j) = v(i, j);
        } else {
            auto it = ems.find(q);
            if (it == ems.end())
                throw MissingExtension("no reference extension for dimension " +
                                       std::to_string(q));
            const RatMatrix& em = it->second;
            const SimplexSpaceBasis& qbasis = basis_for(q + 1);
            if (em.rows() != qbasis.size() || em.cols() != v.cols())
                throw ShapeMismatch("reference extension for dimension " + std::to_string(q) +
                                    " has shape " + std::to_string(em.rows()) + "x" +
                                    std::to_string(em.cols()));
            for (std::size_t fi = 0; fi < c.faces.size(); ++fi) {
                const auto& fface = c.faces[fi];
                // Collapse of F onto the cone over K: vertices of K keep
                // their positions (shifted past the apex), all others go to
                // the apex vertex 0.
                std::vector<unsigned> images(fface.size());
                for (std::size_t j = 0; j < fface.size(); ++j) {
                    auto pos = std::find(kface.begin(), kface.end(), fface[j]);
                    images[j] = pos == kface.end()
                                    ? 0
                                    : static_cast<unsigned>(pos - kface.begin()) + 1;
                }
                std::vector<BarycentricForm> pulled;
                for (const auto& form : qbasis.forms)
                    pulled.push_back(pullback(
                        form, static_cast<unsigned>(fface.size()) - 1, images));
                RatMatrix comp = basis_for(c.face_dim(fi)).coords_of(pulled) * em;
                std::size_t off = g.offsets.at(c.poset.name_of(fi));
                for (std::size_t i = 0; i < comp.rows(); ++i)
                    for (std::size_t j = 0; j < comp.cols(); ++j)
                        stacked(off + i, j) = comp(i, j);
            }
        }
        auto sol = solve(g.basis, stacked);
        if (std::holds_alternative<Infeasible>(sol))
            throw NotCompatible("extension of '" + kname + "' is not a compatible tuple");
        locals[kname] = std::get<Solution>(sol).x;
    }

    auto hat = adjoin_global_top(fs, g);
    ExtensionFamily family = consistent_from_local(hat.space, locals);
    return HatFamily{std::move(family), std::move(hat.top)};
}

/// Recover the reference extension in dimension m from a consistent family
/// on a complex, using the smallest (m+1)-face and its smallest m-subface.
inline ReferenceExtension simplicial_from_local(const SimplicialComplex& c,
                                                const SimplicialSpace& sp,
                                                const ExtensionFamily& family, unsigned m) {
    std::optional<std::size_t> tsel;
    for (std::size_t i = 0; i < c.faces.size(); ++i)
        if (c.face_dim(i) == m + 1) {
            tsel = i;
            break;
        }
    if (!tsel)
        throw NoSuitableFacePair("complex has no face of dimension " + std::to_string(m + 1));
    const auto& tface = c.faces[*tsel];
    std::vector<unsigned> kface(tface.begin(), tface.end() - 1);
    const std::string tname = SimplicialComplex::face_name(tface);
    const std::string kname = SimplicialComplex::face_name(kface);

    std::vector<unsigned> images(tface.size());
    for (std::size_t j = 0; j < tface.size(); ++j) {
        auto pos = std::find(kface.begin(), kface.end(), tface[j]);
        images[j] = pos == kface.end() ? 0
                                       : static_cast<unsigned>(pos - kface.begin()) + 1;
    }
    SimplexSpaceBasis cone_basis = sp.basis_on(m + 1);
    std::vector<BarycentricForm> pulled;
    for (const auto& form : cone_basis.forms)
        pulled.push_back(pullback(form, m + 1, images));
    RatMatrix p = cone_basis.coords_of(pulled);
    ReferenceExtension ext{m, inverse(p) * family.op(kname, tname)};
    auto check = certify_reference_extension(sp, ext);
    if (!check.valid)
        throw DecompositionFailure("recovered reference extension is invalid: " + check.reason);
    return ext;
}

} // namespace geodecomp
