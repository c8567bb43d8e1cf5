#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <geodecomp/poset.hpp>
#include <geodecomp/simplicial.hpp>

using namespace geodecomp;

namespace {

// Reachability closure computed straight from the cover list, as a check on
// the library's closure.
std::set<std::pair<std::string, std::string>>
brute_closure(const std::vector<std::string>& names,
              const std::vector<std::pair<std::string, std::string>>& covers) {
    std::map<std::string, std::vector<std::string>> above;
    for (const auto& [a, b] : covers) above[a].push_back(b);
    std::set<std::pair<std::string, std::string>> rel;
    for (const auto& start : names) {
        std::vector<std::string> stack{start};
        std::set<std::string> seen{start};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            rel.emplace(start, cur);
            for (const auto& next : above[cur])
                if (seen.insert(next).second) stack.push_back(next);
        }
    }
    return rel;
}

} // namespace

TEST_CASE("diamond order") {
    Poset p = Poset::from_covers({"a", "b", "c", "d"},
                                 {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
    CHECK(p.size() == 4);
    CHECK(p.leq("a", "d"));
    CHECK(p.leq("a", "a"));
    CHECK(!p.leq("b", "c"));
    CHECK(!p.leq("d", "a"));
    CHECK(p.relation_count() == 9); // 4 reflexive + a<b, a<c, a<d, b<d, c<d
    CHECK(p.maximal_elements() == std::vector<std::string>{"d"});
    CHECK(p.minimal_elements() == std::vector<std::string>{"a"});
    REQUIRE(p.top().has_value());
    CHECK(*p.top() == "d");
}

TEST_CASE("two maximal elements means no top") {
    Poset p = Poset::from_covers({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}});
    CHECK(!p.top().has_value());
    CHECK(p.maximal_elements() == std::vector<std::string>{"b", "c"});
}

TEST_CASE("triangle face poset has 19 relations") {
    SimplicialComplex c = simplex_complex(2);
    const Poset& p = c.poset;
    CHECK(p.size() == 7); // 3 vertices, 3 edges, 1 triangle
    CHECK(p.relation_count() == 19); // 7 reflexive + 6 vertex<edge + 3 vertex<tri + 3 edge<tri

    auto rel = brute_closure(p.elements(), p.cover_pairs());
    std::size_t count = 0;
    for (const auto& a : p.elements())
        for (const auto& b : p.elements())
            if (p.leq(a, b)) {
                ++count;
                CHECK(rel.count({a, b}) == 1);
            }
    CHECK(count == rel.size());
    CHECK(count == 19);
}

TEST_CASE("cycles and duplicates are rejected") {
    CHECK_THROWS_AS(Poset::from_covers({"a", "b"}, {{"a", "b"}, {"b", "a"}}), CycleDetected);
    CHECK_THROWS_AS(
        Poset::from_covers({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}),
        CycleDetected);
    CHECK_NOTHROW(Poset::from_covers({"a"}, {{"a", "a"}})); // reflexive cover is a no-op
    CHECK_THROWS_AS(Poset::from_covers({"a", "a"}, {}), DuplicateIdentifier);
    CHECK_THROWS_AS(Poset::from_covers({"a"}, {{"a", "zzz"}}), UnknownIdentifier);
}

TEST_CASE("random cover relations agree with brute-force reachability") {
    std::mt19937_64 rng(999);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 2 + rng() % 8;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
        std::vector<std::pair<std::string, std::string>> covers;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 3 == 0) covers.emplace_back(names[i], names[j]);
        Poset p = Poset::from_covers(names, covers);
        auto rel = brute_closure(names, covers);
        for (const auto& a : names)
            for (const auto& b : names)
                CHECK(p.leq(a, b) == (rel.count({a, b}) == 1));
    }
}

TEST_CASE("down sets are lower sets") {
    std::mt19937_64 rng(4242);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 2 + rng() % 7;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
        std::vector<std::pair<std::string, std::string>> covers;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 3 == 0) covers.emplace_back(names[i], names[j]);
        Poset p = Poset::from_covers(names, covers);

        for (const auto& x : names) {
            auto down = p.down_set(x);
            CHECK(p.is_lower_set(down));
            std::set<std::string> got(down.begin(), down.end());
            for (const auto& a : names) CHECK(got.count(a) == (p.leq(a, x) ? 1u : 0u));
        }

        std::vector<std::string> subset;
        for (const auto& a : names)
            if (rng() % 2 == 0) subset.push_back(a);
        bool expect = true;
        std::set<std::string> in(subset.begin(), subset.end());
        for (const auto& b : subset)
            for (const auto& a : names)
                if (p.leq(a, b) && !in.count(a)) expect = false;
        CHECK(p.is_lower_set(subset) == expect);
    }
}

TEST_CASE("adjoin_top renames on collision") {
    Poset p = Poset::from_covers({"a", "top"}, {{"a", "top"}});
    auto wt = p.adjoin_top();
    CHECK(wt.top == "top+");
    CHECK(wt.poset.size() == 3);
    REQUIRE(wt.poset.top().has_value());
    CHECK(*wt.poset.top() == "top+");
    for (const auto& e : p.elements()) CHECK(wt.poset.leq(e, wt.top));
}

TEST_CASE("peel sequences remove extremes and are deterministic") {
    SimplicialComplex c = simplex_complex(2);
    const Poset& p = c.poset;

    auto down = p.peel_sequence(Poset::PeelDirection::down);
    REQUIRE(down.size() == p.size());
    std::set<std::string> remaining(down.begin(), down.end());
    for (const auto& e : down) {
        for (const auto& other : remaining)
            if (other != e) CHECK(!p.leq(e, other)); // e is maximal among remaining
        remaining.erase(e);
    }

    auto up = p.peel_sequence(Poset::PeelDirection::up);
    REQUIRE(up.size() == p.size());
    std::set<std::string> rem2(up.begin(), up.end());
    for (const auto& e : up) {
        for (const auto& other : rem2)
            if (other != e) CHECK(!p.leq(other, e)); // e is minimal among remaining
        rem2.erase(e);
    }

    CHECK(down == p.peel_sequence(Poset::PeelDirection::down));
    CHECK(up == p.peel_sequence(Poset::PeelDirection::up));
}

TEST_CASE("restrict_to keeps the induced order") {
    Poset p = Poset::from_covers({"a", "b", "c", "d"},
                                 {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
    Poset q = p.restrict_to({"a", "b", "d"});
    CHECK(q.size() == 3);
    CHECK(q.leq("a", "d"));
    CHECK(q.leq("b", "d"));
    CHECK(!q.leq("d", "b"));
    CHECK(q.elements() == std::vector<std::string>{"a", "b", "d"});
}

TEST_CASE("make_lower_set validates membership") {
    Poset p = Poset::from_covers({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    auto s = make_lower_set(p, {"b", "a"});
    CHECK(s.members == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(make_lower_set(p, {"b"}), NotLowerSet);
    CHECK_THROWS_AS(make_lower_set(p, {"a", "a"}), DuplicateIdentifier);
}
