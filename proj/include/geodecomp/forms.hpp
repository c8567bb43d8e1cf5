#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace geodecomp {

/// Key of a canonicalized term: exponents of the first n barycentric symbols
/// and a strictly increasing differential index tuple drawn from {0..n-1}.
using FormKey = std::pair<std::vector<unsigned>, std::vector<unsigned>>;
using CanonicalForm = std::map<FormKey, Rational>;

namespace detail {

/// Sort a differential index tuple, tracking the permutation sign; nullopt
/// when an index repeats (the term vanishes).
inline std::optional<std::pair<std::vector<unsigned>, int>> sort_wedge(
    std::vector<unsigned> w) {
    int sign = 1;
    for (std::size_t i = 1; i < w.size(); ++i)
        for (std::size_t j = i; j > 0 && w[j] <= w[j - 1]; --j) {
            if (w[j] == w[j - 1]) return std::nullopt;
            std::swap(w[j], w[j - 1]);
            sign = -sign;
        }
    return std::make_pair(std::move(w), sign);
}

/// All length-`slots` exponent vectors with the given sum, first entry
/// largest first.
inline void enumerate_exponents(unsigned slots, unsigned total,
                                std::vector<unsigned>& prefix,
                                std::vector<std::vector<unsigned>>& out) {
    if (slots == 1) {
        prefix.push_back(total);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (unsigned e = total + 1; e-- > 0;) {
        prefix.push_back(e);
        enumerate_exponents(slots - 1, total - e, prefix, out);
        prefix.pop_back();
    }
}

inline std::vector<std::vector<unsigned>> homogeneous_exponents(unsigned slots, unsigned total) {
    std::vector<std::vector<unsigned>> out;
    if (slots == 0) return out;
    std::vector<unsigned> prefix;
    enumerate_exponents(slots, total, prefix, out);
    return out;
}

/// All strictly increasing k-tuples from {0..limit}, lexicographic.
inline std::vector<std::vector<unsigned>> increasing_tuples(unsigned limit_inclusive, unsigned k) {
    std::vector<std::vector<unsigned>> out;
    if (k > limit_inclusive + 1) return out;
    std::vector<unsigned> cur(k);
    for (unsigned i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        if (k == 0) break;
        int i = static_cast<int>(k) - 1;
        while (i >= 0 && cur[i] == limit_inclusive - (k - 1 - i)) --i;
        if (i < 0) break;
        ++cur[i];
        for (unsigned j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

} // namespace detail

/// A differential form on the reference simplex of dimension n, written in
/// the n+1 barycentric symbols: a sum of terms
///   coeff * l^exps * dl_{w_1} ^ ... ^ dl_{w_k}.
/// Terms are kept as written; equality and zero tests go through the
/// canonical representative obtained by eliminating the last symbol via
/// l_n = 1 - sum of the others and dl_n = -sum of the others.
class BarycentricForm {
public:
    struct Term {
        Rational coeff;
        std::vector<unsigned> exps;  // size dim+1
        std::vector<unsigned> wedge; // strictly increasing, entries <= dim
    };

    BarycentricForm(unsigned dim, unsigned degree) : dim_(dim), degree_(degree) {}

    unsigned dim() const { return dim_; }
    unsigned degree() const { return degree_; }
    const std::vector<Term>& terms() const { return terms_; }

    BarycentricForm& add_term(Rational coeff, std::vector<unsigned> exps,
                              std::vector<unsigned> wedge) {
        if (exps.size() != dim_ + 1)
            throw ShapeMismatch("term has wrong exponent count");
        if (wedge.size() != degree_)
            throw ShapeMismatch("term has wrong differential arity");
        for (std::size_t i = 0; i < wedge.size(); ++i) {
            if (wedge[i] > dim_)
                throw IndexOutOfRange("differential index out of range");
            if (i > 0 && wedge[i] <= wedge[i - 1])
                throw ShapeMismatch("differential indices must be strictly increasing");
        }
        if (coeff != 0)
            terms_.push_back({std::move(coeff), std::move(exps), std::move(wedge)});
        return *this;
    }

    static BarycentricForm monomial(unsigned dim, std::vector<unsigned> exps,
                                    std::vector<unsigned> wedge, Rational coeff = 1) {
        BarycentricForm f(dim, static_cast<unsigned>(wedge.size()));
        f.add_term(std::move(coeff), std::move(exps), std::move(wedge));
        return f;
    }

    BarycentricForm scaled(const Rational& c) const {
        BarycentricForm f(dim_, degree_);
        for (const auto& t : terms_)
            if (c != 0) f.terms_.push_back({c * t.coeff, t.exps, t.wedge});
        return f;
    }

    BarycentricForm plus(const BarycentricForm& other) const {
        if (other.dim_ != dim_ || other.degree_ != degree_)
            throw ShapeMismatch("forms live on different simplices or have different degrees");
        BarycentricForm f = *this;
        f.terms_.insert(f.terms_.end(), other.terms_.begin(), other.terms_.end());
        return f;
    }

    /// Canonical representative: substitute the last symbol away, collect,
    /// and drop zero coefficients.
    CanonicalForm canonical() const {
        CanonicalForm out;
        for (const auto& t : terms_) {
            // (1 - l_0 - ... - l_{n-1})^e, one summand per composition.
            std::vector<unsigned> base(t.exps.begin(), t.exps.end() - 1);
            unsigned e = t.exps[dim_];
            auto split = detail::homogeneous_exponents(dim_ + 1, e); // last slot = constant 1
            for (const auto& comp : split) {
                Integer multi = 1;
                {
                    // multinomial(e; comp)
                    Integer num = 1;
                    unsigned used = 0;
                    for (unsigned part : comp)
                        for (unsigned s = 1; s <= part; ++s) {
                            ++used;
                            num *= used;
                            num /= s; // binomial product stays integral
                        }
                    multi = num;
                }
                unsigned negs = 0;
                std::vector<unsigned> exps = base;
                for (unsigned i = 0; i < dim_; ++i) {
                    exps[i] += comp[i];
                    negs += comp[i];
                }
                Rational coeff = t.coeff * Rational(multi) * (negs % 2 ? -1 : 1);

                // Expand any trailing differential: dl_n = -sum dl_i.
                if (!t.wedge.empty() && t.wedge.back() == dim_) {
                    std::vector<unsigned> rest(t.wedge.begin(), t.wedge.end() - 1);
                    for (unsigned i = 0; i < dim_; ++i) {
                        std::vector<unsigned> w = rest;
                        w.push_back(i);
                        auto sorted = detail::sort_wedge(std::move(w));
                        if (!sorted) continue;
                        accumulate(out, exps, sorted->first, -coeff * sorted->second);
                    }
                } else {
                    accumulate(out, exps, t.wedge, coeff);
                }
            }
        }
        for (auto it = out.begin(); it != out.end();)
            it = it->second == 0 ? out.erase(it) : std::next(it);
        return out;
    }

    bool is_zero() const { return canonical().empty(); }

    bool operator==(const BarycentricForm& other) const {
        return dim_ == other.dim_ && degree_ == other.degree_ && canonical() == other.canonical();
    }

    /// Human-readable rendering of the written terms.
    std::string to_string(const std::string& symbol = "l") const {
        if (terms_.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const Term& t = terms_[i];
            if (i) s += " + ";
            std::string body;
            for (unsigned v = 0; v <= dim_; ++v) {
                if (t.exps[v] == 0) continue;
                if (!body.empty()) body += "*";
                body += symbol + std::to_string(v);
                if (t.exps[v] > 1) body += "^" + std::to_string(t.exps[v]);
            }
            for (std::size_t j = 0; j < t.wedge.size(); ++j) {
                if (!body.empty()) body += j == 0 ? " " : "^";
                body += "d" + symbol + std::to_string(t.wedge[j]);
            }
            if (body.empty()) body = "1";
            if (t.coeff == 1) s += body;
            else if (t.coeff == -1) s += "-" + body;
            else s += rational_to_string(t.coeff) + "*" + body;
        }
        return s;
    }

private:
    static void accumulate(CanonicalForm& out, const std::vector<unsigned>& exps,
                           const std::vector<unsigned>& wedge, const Rational& coeff) {
        if (coeff == 0) return;
        out[{exps, wedge}] += coeff;
    }

    unsigned dim_;
    unsigned degree_;
    std::vector<Term> terms_;
};

/// Pull a form back along the affine map of simplices sending domain vertex
/// v to codomain vertex vertex_images[v]: each codomain symbol becomes the
/// sum of the domain symbols mapped onto it, and likewise for the
/// differentials.
inline BarycentricForm pullback(const BarycentricForm& omega, unsigned domain_dim,
                                const std::vector<unsigned>& vertex_images) {
    if (vertex_images.size() != domain_dim + 1)
        throw ShapeMismatch("vertex image list does not match the domain dimension");
    for (unsigned img : vertex_images)
        if (img > omega.dim())
            throw IndexOutOfRange("vertex image out of range");

    std::vector<std::vector<unsigned>> preimages(omega.dim() + 1);
    for (unsigned v = 0; v <= domain_dim; ++v)
        preimages[vertex_images[v]].push_back(v);

    BarycentricForm out(domain_dim, omega.degree());
    for (const auto& t : omega.terms()) {
        // Polynomial part: expand each (sum of preimage symbols)^e factor.
        std::vector<std::pair<std::vector<unsigned>, Rational>> monos;
        monos.emplace_back(std::vector<unsigned>(domain_dim + 1, 0), t.coeff);
        bool dead = false;
        for (unsigned w = 0; w <= omega.dim() && !dead; ++w) {
            unsigned e = t.exps[w];
            if (e == 0) continue;
            if (preimages[w].empty()) {
                dead = true;
                break;
            }
            auto parts = detail::homogeneous_exponents(
                static_cast<unsigned>(preimages[w].size()), e);
            std::vector<std::pair<std::vector<unsigned>, Rational>> next;
            for (const auto& [mexps, mcoeff] : monos)
                for (const auto& comp : parts) {
                    Integer multi = 1;
                    {
                        Integer num = 1;
                        unsigned used = 0;
                        for (unsigned part : comp)
                            for (unsigned s = 1; s <= part; ++s) {
                                ++used;
                                num *= used;
                                num /= s;
                            }
                        multi = num;
                    }
                    auto exps = mexps;
                    for (std::size_t i = 0; i < comp.size(); ++i)
                        exps[preimages[w][i]] += comp[i];
                    next.emplace_back(std::move(exps), mcoeff * Rational(multi));
                }
            monos = std::move(next);
        }
        if (dead) continue;

        // Differential part: distribute over the preimages of each index.
        std::vector<std::pair<std::vector<unsigned>, int>> wedges;
        wedges.emplace_back(std::vector<unsigned>{}, 1);
        for (unsigned idx : t.wedge) {
            std::vector<std::pair<std::vector<unsigned>, int>> next;
            for (const auto& [w, sign] : wedges)
                for (unsigned v : preimages[idx]) {
                    auto grown = w;
                    grown.push_back(v);
                    next.emplace_back(std::move(grown), sign);
                }
            wedges = std::move(next);
        }

        for (const auto& [mexps, mcoeff] : monos)
            for (const auto& [w, sign] : wedges) {
                auto sorted = detail::sort_wedge(w);
                if (!sorted) continue;
                Rational c = mcoeff * (sign * sorted->second);
                if (c != 0)
                    out.add_term(std::move(c), mexps, sorted->first);
            }
    }
    return out;
}

} // namespace geodecomp
