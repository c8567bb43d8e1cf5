#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace geodecomp {

/// Finite partially ordered set over string identifiers. Built from cover
/// pairs; the full order relation is precomputed as a transitive closure and
/// held as per-element bitsets, so leq queries are O(1).
class Poset {
public:
    Poset() = default;

    /// elements: distinct identifiers, in the order they will be reported.
    /// covers: (lower, upper) pairs; the reflexive-transitive closure is
    /// taken. Throws CycleDetected if antisymmetry would fail.
    static Poset from_covers(std::vector<std::string> elements,
                             const std::vector<std::pair<std::string, std::string>>& covers) {
        Poset p;
        p.names_ = std::move(elements);
        for (std::size_t i = 0; i < p.names_.size(); ++i) {
            if (!p.index_.emplace(p.names_[i], i).second)
                throw DuplicateIdentifier("duplicate element '" + p.names_[i] + "'");
        }
        const std::size_t n = p.names_.size();
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
        for (const auto& [lo, hi] : covers)
            reach[p.index_of(lo)][p.index_of(hi)] = true;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (reach[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (reach[k][j]) reach[i][j] = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && reach[i][j] && reach[j][i])
                    throw CycleDetected("cycle through '" + p.names_[i] + "' and '" +
                                        p.names_[j] + "'");
        p.up_ = std::move(reach);
        return p;
    }

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& elements() const { return names_; }
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw UnknownIdentifier("unknown element '" + name + "'");
        return it->second;
    }
    const std::string& name_of(std::size_t i) const { return names_.at(i); }

    bool leq(std::size_t a, std::size_t b) const { return up_[a][b]; }
    bool leq(const std::string& a, const std::string& b) const {
        return leq(index_of(a), index_of(b));
    }

    /// Number of (a, b) pairs with a <= b, reflexive pairs included.
    std::size_t relation_count() const {
        std::size_t c = 0;
        for (const auto& row : up_)
            for (bool v : row) c += v ? 1 : 0;
        return c;
    }

    std::vector<std::string> maximal_elements() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < size(); ++i) {
            bool maximal = true;
            for (std::size_t j = 0; j < size(); ++j)
                if (j != i && up_[i][j]) { maximal = false; break; }
            if (maximal) out.push_back(names_[i]);
        }
        return out;
    }

    std::vector<std::string> minimal_elements() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < size(); ++i) {
            bool minimal = true;
            for (std::size_t j = 0; j < size(); ++j)
                if (j != i && up_[j][i]) { minimal = false; break; }
            if (minimal) out.push_back(names_[i]);
        }
        return out;
    }

    /// The unique maximal element, if there is exactly one.
    std::optional<std::string> top() const {
        auto m = maximal_elements();
        if (m.size() == 1) return m.front();
        return std::nullopt;
    }

    /// Cover pairs (a, b): a < b with nothing strictly between.
    std::vector<std::pair<std::string, std::string>> cover_pairs() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (std::size_t a = 0; a < size(); ++a)
            for (std::size_t b = 0; b < size(); ++b) {
                if (a == b || !up_[a][b]) continue;
                bool covered = true;
                for (std::size_t m = 0; m < size(); ++m)
                    if (m != a && m != b && up_[a][m] && up_[m][b]) { covered = false; break; }
                if (covered) out.emplace_back(names_[a], names_[b]);
            }
        return out;
    }

    /// True if the named members are downward closed.
    bool is_lower_set(const std::vector<std::string>& members) const {
        std::vector<bool> in(size(), false);
        for (const auto& m : members) in[index_of(m)] = true;
        for (std::size_t b = 0; b < size(); ++b)
            if (in[b])
                for (std::size_t a = 0; a < size(); ++a)
                    if (up_[a][b] && !in[a]) return false;
        return true;
    }

    /// All elements <= t, in element order.
    std::vector<std::string> down_set(const std::string& t) const {
        std::size_t ti = index_of(t);
        std::vector<std::string> out;
        for (std::size_t a = 0; a < size(); ++a)
            if (up_[a][ti]) out.push_back(names_[a]);
        return out;
    }

    /// Induced subposet on the given members (order among them preserved
    /// from this poset's element order).
    Poset restrict_to(const std::vector<std::string>& members) const {
        std::vector<bool> keep(size(), false);
        for (const auto& m : members) keep[index_of(m)] = true;
        Poset p;
        std::vector<std::size_t> old_index;
        for (std::size_t i = 0; i < size(); ++i)
            if (keep[i]) {
                p.index_.emplace(names_[i], p.names_.size());
                p.names_.push_back(names_[i]);
                old_index.push_back(i);
            }
        const std::size_t n = p.names_.size();
        p.up_.assign(n, std::vector<bool>(n, false));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                p.up_[a][b] = up_[old_index[a]][old_index[b]];
        return p;
    }

    struct WithTop;

    /// Fresh poset with one new element adjoined above everything. The new
    /// identifier starts from hint and is suffixed until it is unused.
    WithTop adjoin_top(const std::string& hint = "top") const;

    enum class PeelDirection { down, up };

    /// Deterministic linear order on the elements. Direction down repeatedly
    /// removes a maximal element of what remains, so every suffix of the
    /// result is (the peel of) a lower set and the first entry is maximal in
    /// the whole poset. Direction up removes minimal elements instead, so
    /// every prefix spans a lower set. Ties are broken by identifier.
    std::vector<std::string> peel_sequence(PeelDirection dir) const {
        std::vector<bool> alive(size(), true);
        std::vector<std::string> out;
        for (std::size_t step = 0; step < size(); ++step) {
            std::optional<std::size_t> pick;
            for (std::size_t i = 0; i < size(); ++i) {
                if (!alive[i]) continue;
                bool extreme = true;
                for (std::size_t j = 0; j < size(); ++j) {
                    if (j == i || !alive[j]) continue;
                    const bool beyond = dir == PeelDirection::down ? up_[i][j] : up_[j][i];
                    if (beyond) { extreme = false; break; }
                }
                if (extreme && (!pick || names_[i] < names_[*pick])) pick = i;
            }
            alive[*pick] = false;
            out.push_back(names_[*pick]);
        }
        return out;
    }

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<bool>> up_; // up_[a][b] == true iff a <= b
};

struct Poset::WithTop {
    Poset poset;
    std::string top;
};

inline Poset::WithTop Poset::adjoin_top(const std::string& hint) const {
    std::string name = hint;
    while (contains(name)) name += "+";
    Poset p;
    p.names_ = names_;
    p.names_.push_back(name);
    p.index_ = index_;
    p.index_.emplace(name, size());
    const std::size_t n = size() + 1;
    p.up_.assign(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a + 1 < n; ++a)
        for (std::size_t b = 0; b + 1 < n; ++b)
            p.up_[a][b] = up_[a][b];
    for (std::size_t a = 0; a < n; ++a) p.up_[a][n - 1] = true;
    return WithTop{std::move(p), std::move(name)};
}

/// A downward-closed selection of poset elements, kept in element order.
struct LowerSet {
    std::vector<std::string> members;
};

/// Validate and normalize a member list into a LowerSet (sorted by element
/// order, duplicates rejected).
inline LowerSet make_lower_set(const Poset& p, std::vector<std::string> members) {
    std::vector<bool> seen(p.size(), false);
    for (const auto& m : members) {
        std::size_t i = p.index_of(m);
        if (seen[i])
            throw DuplicateIdentifier("repeated member '" + m + "'");
        seen[i] = true;
    }
    if (!p.is_lower_set(members))
        throw NotLowerSet("member list is not downward closed");
    std::sort(members.begin(), members.end(),
              [&](const std::string& a, const std::string& b) {
                  return p.index_of(a) < p.index_of(b);
              });
    return LowerSet{std::move(members)};
}

} // namespace geodecomp
