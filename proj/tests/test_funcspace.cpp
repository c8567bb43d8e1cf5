#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include <geodecomp/funcspace.hpp>
#include <geodecomp/simplicial.hpp>
#include <geodecomp/synthetic.hpp>

#include "oracle_linalg.hpp"

using namespace geodecomp;

namespace {

// Linear functions on one segment, stored by endpoint values.
FunctionSpace segment_space() {
    Poset p = Poset::from_covers({"v0", "v1", "e"}, {{"v0", "e"}, {"v1", "e"}});
    std::map<std::string, std::size_t> dims{{"v0", 1}, {"v1", 1}, {"e", 2}};
    std::map<std::string, std::vector<std::string>> labels;
    std::map<std::pair<std::string, std::string>, RatMatrix> traces{
        {{"v0", "e"}, RatMatrix::from_rows({{1, 0}})},
        {{"v1", "e"}, RatMatrix::from_rows({{0, 1}})},
    };
    return FunctionSpace(p, dims, labels, traces);
}

} // namespace

TEST_CASE("construction validates dimensions and traces") {
    Poset p = Poset::from_covers({"v", "e"}, {{"v", "e"}});
    std::map<std::string, std::vector<std::string>> no_labels;

    CHECK_THROWS_AS(FunctionSpace(p, {{"v", 1}}, no_labels, {}), ShapeMismatch);
    CHECK_THROWS_AS(FunctionSpace(p, {{"v", 1}, {"e", 2}}, no_labels, {}), MissingTrace);
    CHECK_THROWS_AS(FunctionSpace(p, {{"v", 1}, {"e", 2}}, no_labels,
                                  {{{"v", "e"}, RatMatrix(2, 2)}}),
                    ShapeMismatch);
    CHECK_THROWS_AS(FunctionSpace(p, {{"v", 1}, {"e", 2}}, no_labels,
                                  {{{"e", "v"}, RatMatrix(2, 1)}}),
                    ShapeMismatch); // trace points the wrong way
    CHECK_THROWS_AS(FunctionSpace(p, {{"v", 1}, {"e", 2}},
                                  {{"v", {"a", "b"}}, {"e", {"x", "y"}}},
                                  {{{"v", "e"}, RatMatrix(1, 2)}}),
                    ShapeMismatch); // label count off

    FunctionSpace fs = segment_space();
    CHECK(fs.dim("e") == 2);
    CHECK(fs.trace("e", "e") == RatMatrix::identity(2)); // diagonal filled in
    CHECK(fs.labels("e") == std::vector<std::string>{"b0", "b1"});
    CHECK(fs.product_dim() == 4);
}

TEST_CASE("verify_function_space accepts valid spaces") {
    CHECK(verify_function_space(segment_space()).valid);
    for (std::uint64_t seed : {1, 2, 3}) {
        PresheafSample s = synthesize_presheaf(seed);
        auto res = verify_function_space(s.space);
        CHECK(res.valid);
        CHECK(res.violations.empty());
    }
}

TEST_CASE("verify_function_space flags a broken composition") {
    Poset p = Poset::from_covers({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    std::map<std::string, std::vector<std::string>> no_labels;
    FunctionSpace fs(p, {{"a", 1}, {"b", 1}, {"c", 1}}, no_labels,
                     {{{"a", "b"}, RatMatrix::from_rows({{1}})},
                      {{"b", "c"}, RatMatrix::from_rows({{1}})},
                      {{"a", "c"}, RatMatrix::from_rows({{2}})}});
    auto res = verify_function_space(fs);
    REQUIRE(!res.valid);
    REQUIRE(res.violations.size() == 1);
    CHECK(res.violations[0].kind == "composition");
    CHECK(res.violations[0].k == "a");
    CHECK(res.violations[0].g == "b");
    CHECK(res.violations[0].f == "c");
}

TEST_CASE("vanishing_trace dimensions") {
    FunctionSpace fs = segment_space();
    CHECK(vanishing_trace(fs, "v0").basis == RatMatrix::identity(1)); // minimal: full space
    CHECK(vanishing_trace(fs, "e").basis.cols() == 0); // a linear function with two zero ends

    for (std::uint64_t seed : {4, 5, 6, 7}) {
        PresheafSample s = synthesize_presheaf(seed);
        const Poset& p = s.space.poset();
        for (const auto& f : p.elements()) {
            Subspace v = vanishing_trace(s.space, f);
            std::vector<RatMatrix> stack;
            for (const auto& k : p.elements())
                if (k != f && p.leq(k, f)) stack.push_back(s.space.trace(k, f));
            if (stack.empty()) {
                CHECK(v.basis == RatMatrix::identity(s.space.dim(f)));
            } else {
                RatMatrix m = vstack(stack);
                CHECK(v.basis.cols() == oracle::nullity(m));
                CHECK((m * v.basis).is_zero());
            }
        }
    }
}

TEST_CASE("assemble_global computes the inverse limit") {
    FunctionSpace fs = segment_space();
    GlobalSpace g = assemble_global(fs);
    CHECK(g.dim() == 2); // a compatible tuple is determined by the edge function
    CHECK(g.product_dim == 4);

    // Components must agree under every trace, not just covers.
    const Poset& p = fs.poset();
    for (const auto& k : p.elements())
        for (const auto& f : p.elements())
            if (p.leq(k, f))
                CHECK(fs.trace(k, f) * g.projection(fs, f) == g.projection(fs, k));

    SECTION("matches the independent all-pairs kernel on synthetic spaces") {
        for (std::uint64_t seed : {8, 9, 10, 11, 12}) {
            PresheafSample s = synthesize_presheaf(seed);
            GlobalSpace gs = assemble_global(s.space);
            CHECK(gs.dim() == oracle::inverse_limit_dim(s.space));
            const Poset& q = s.space.poset();
            for (const auto& k : q.elements())
                for (const auto& f : q.elements())
                    if (q.leq(k, f))
                        CHECK(s.space.trace(k, f) * gs.projection(s.space, f) ==
                              gs.projection(s.space, k));
        }
    }

    SECTION("disconnected meshes multiply") {
        SimplicialComplex c = build_complex(4, {{0, 1}, {2, 3}});
        FunctionSpace two = instantiate_space(c, LagrangeSpace(1));
        CHECK(assemble_global(two).dim() == 4);
    }
}

TEST_CASE("vanish_on_lower_set needs a top and a lower set") {
    FunctionSpace fs = segment_space();
    LowerSet boundary = make_lower_set(fs.poset(), {"v0", "v1"});
    CHECK(vanish_on_lower_set(fs, boundary).basis.cols() == 0);
    CHECK(vanish_on_lower_set(fs, LowerSet{{}}).basis.cols() == 2);

    SimplicialComplex tri = simplex_complex(2);
    FunctionSpace cubic = instantiate_space(tri, LagrangeSpace(3));
    std::vector<std::string> proper;
    for (const auto& f : tri.poset.elements())
        if (f != "0-1-2") proper.push_back(f);
    LowerSet bd = make_lower_set(tri.poset, proper);
    CHECK(vanish_on_lower_set(cubic, bd).basis.cols() == 1); // the cubic bubble

    FunctionSpace linear = instantiate_space(tri, LagrangeSpace(1));
    CHECK(vanish_on_lower_set(linear, bd).basis.cols() == 0);

    Poset topless = Poset::from_covers({"x", "y"}, {});
    std::map<std::string, std::vector<std::string>> no_labels;
    FunctionSpace flat(topless, {{"x", 1}, {"y", 1}}, no_labels, {});
    CHECK_THROWS_AS(vanish_on_lower_set(flat, LowerSet{{"x"}}), NoTopElement);
    CHECK_THROWS_AS(vanish_on_lower_set(segment_space(), LowerSet{{"e"}}), NotLowerSet);
}

TEST_CASE("restrict_to_down_set keeps a valid space") {
    for (std::uint64_t seed : {13, 14}) {
        PresheafSample s = synthesize_presheaf(seed);
        const Poset& p = s.space.poset();
        for (const auto& t : p.maximal_elements()) {
            FunctionSpace sub = restrict_to_down_set(s.space, t);
            CHECK(sub.poset().size() == p.down_set(t).size());
            CHECK(verify_function_space(sub).valid);
            REQUIRE(sub.poset().top().has_value());
            CHECK(*sub.poset().top() == t);
            for (const auto& f : sub.poset().elements()) CHECK(sub.dim(f) == s.space.dim(f));
        }
    }
}

TEST_CASE("adjoin_global_top carries the limit space") {
    for (std::uint64_t seed : {15, 16}) {
        PresheafSample s = synthesize_presheaf(seed);
        GlobalSpace g = assemble_global(s.space);
        SpaceWithTop wt = adjoin_global_top(s.space, g);
        CHECK(verify_function_space(wt.space).valid);
        CHECK(wt.space.dim(wt.top) == g.dim());
        for (const auto& f : s.space.poset().elements())
            CHECK(wt.space.trace(f, wt.top) == g.projection(s.space, f));
    }
}
