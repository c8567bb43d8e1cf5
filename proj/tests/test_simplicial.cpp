#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <geodecomp/decomp.hpp>
#include <geodecomp/forms.hpp>
#include <geodecomp/simplicial.hpp>

using namespace geodecomp;

namespace {

unsigned long long binom(unsigned n, unsigned k) {
    if (k > n) return 0;
    unsigned long long r = 1;
    for (unsigned i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

HatFamily simplicial_hat(const SimplicialComplex& c, const SimplicialSpace& sp,
                         const FunctionSpace& fs, const GlobalSpace& g) {
    std::map<unsigned, RatMatrix> ems;
    for (unsigned m = 0; m < c.dimension; ++m) {
        if (auto built = sp.builtin_extension(m)) {
            ems[m] = built->matrix;
        } else {
            auto res = solve_simpext(sp, m);
            REQUIRE(std::holds_alternative<ReferenceExtension>(res));
            ems[m] = std::get<ReferenceExtension>(res).matrix;
        }
    }
    return local_ops_from_simplicial(c, sp, fs, g, ems);
}

} // namespace

TEST_CASE("build_complex closes cells downward") {
    SimplicialComplex sq = build_complex(4, {{0, 1, 2}, {0, 2, 3}});
    CHECK(sq.vertex_count == 4);
    CHECK(sq.faces.size() == 11); // 4 vertices, 5 edges, 2 triangles
    CHECK(sq.dimension == 2);
    CHECK(sq.face_by_name("0-2") == std::vector<unsigned>{0, 2});
    CHECK_THROWS_AS(sq.face_by_name("1-3"), UnknownIdentifier);
    CHECK(sq.poset.leq("0", "0-1-2"));
    CHECK(!sq.poset.leq("3", "0-1-2"));

    SimplicialComplex mixed = build_complex(5, {{0, 1, 2}, {2, 3}, {4}});
    CHECK(mixed.faces.size() == 5 + 4 + 1); // vertices 0..4, edges 01 02 12 23, tri
    CHECK(mixed.dimension == 2);

    CHECK_THROWS_AS(build_complex(4, {}), ValidationError);
    CHECK_THROWS_AS(build_complex(4, {{}}), ValidationError);
    CHECK_THROWS_AS(build_complex(3, {{0, 3}}), IndexOutOfRange);
    CHECK_THROWS_AS(build_complex(4, {{0, 1, 1}}), DuplicateVertexInCell);
}

TEST_CASE("simplex and cone reference complexes") {
    SimplicialComplex tri = simplex_complex(2);
    CHECK(tri.faces.size() == 7);
    CHECK(tri.dimension == 2);
    REQUIRE(tri.poset.top().has_value());
    CHECK(*tri.poset.top() == "0-1-2");

    SimplicialComplex cone = cone_complex(1); // Q^2: triangle over an edge
    CHECK(cone.faces.size() == 7);
    CHECK(cone.dimension == 2);
    CHECK(detail::cone_base_name(1) == "1-2");
}

TEST_CASE("barycentric identities hold canonically") {
    // l0 + l1 + l2 == 1 on the triangle
    BarycentricForm sum(2, 0);
    sum.add_term(1, {1, 0, 0}, {});
    sum.add_term(1, {0, 1, 0}, {});
    sum.add_term(1, {0, 0, 1}, {});
    BarycentricForm one(2, 0);
    one.add_term(1, {0, 0, 0}, {});
    CHECK(sum == one);

    // dl0 + dl1 + dl2 == 0
    BarycentricForm dsum(2, 1);
    dsum.add_term(1, {0, 0, 0}, {0});
    dsum.add_term(1, {0, 0, 0}, {1});
    dsum.add_term(1, {0, 0, 0}, {2});
    CHECK(dsum.is_zero());

    // wedge antisymmetry: terms with a repeated differential drop out of the
    // canonical form rather than being representable at all
    BarycentricForm w(2, 2);
    w.add_term(1, {0, 0, 0}, {0, 1});
    BarycentricForm w2(2, 2);
    w2.add_term(-1, {0, 0, 0}, {0, 1});
    CHECK(w.plus(w2).is_zero());

    CHECK(BarycentricForm::monomial(2, {2, 1, 0}, {}).to_string() == "l0^2*l1");
    CHECK(BarycentricForm::monomial(2, {0, 0, 0}, {0, 2}).to_string() == "dl0^dl2");
    CHECK(BarycentricForm(2, 0).to_string() == "0");
}

TEST_CASE("pullback respects composition") {
    std::mt19937_64 rng(55);
    for (int t = 0; t < 40; ++t) {
        unsigned dim_c = 1 + rng() % 3;            // codomain simplex T^dim_c
        unsigned dim_b = 1 + rng() % 3;            // middle
        unsigned dim_a = 1 + rng() % 3;            // domain
        std::vector<unsigned> f(dim_a + 1), g(dim_b + 1);
        for (auto& v : f) v = rng() % (dim_b + 1); // a -> b
        for (auto& v : g) v = rng() % (dim_c + 1); // b -> c

        BarycentricForm omega(dim_c, std::min(1u, dim_c));
        std::vector<unsigned> exps(dim_c + 1, 0);
        exps[rng() % (dim_c + 1)] = 1;
        exps[rng() % (dim_c + 1)] += 1;
        std::vector<unsigned> wedge;
        if (omega.degree() == 1) wedge.push_back(rng() % (dim_c + 1));
        omega.add_term(Rational(1 + (long)(rng() % 5), 1 + (long)(rng() % 3)), exps, wedge);

        std::vector<unsigned> gf(dim_a + 1);
        for (unsigned v = 0; v <= dim_a; ++v) gf[v] = g[f[v]];
        BarycentricForm via_two = pullback(pullback(omega, dim_b, g), dim_a, f);
        BarycentricForm direct = pullback(omega, dim_a, gf);
        CHECK(via_two == direct);
    }
}

TEST_CASE("pullback to a face is substitution") {
    // Restricting l1^2 on the triangle to edge {0, 1} (identity embedding on
    // vertices 0, 1) keeps l1^2; restricting to edge {0, 2} kills it.
    BarycentricForm q = BarycentricForm::monomial(2, {0, 2, 0}, {});
    BarycentricForm on01 = pullback(q, 1, {0, 1});
    CHECK(on01 == BarycentricForm::monomial(1, {0, 2}, {}));
    BarycentricForm on02 = pullback(q, 1, {0, 2});
    CHECK(on02.is_zero());
}

TEST_CASE("space dimensions on reference simplices") {
    for (unsigned r = 0; r <= 3; ++r) {
        LagrangeSpace sp(r);
        for (unsigned m = 0; m <= 3; ++m) {
            SimplexSpaceBasis b = sp.basis_on(m);
            CHECK(b.size() == binom(m + r, m));
            CHECK(b.canon_rank() == b.size());
        }
    }
    for (unsigned r = 0; r <= 2; ++r)
        for (unsigned k = 0; k <= 3; ++k) {
            PolyFormSpace sp(r, k);
            for (unsigned m = 0; m <= 3; ++m) {
                SimplexSpaceBasis b = sp.basis_on(m);
                CHECK(b.size() == binom(m + r, m) * binom(m, k));
                CHECK(b.canon_rank() == b.size());
            }
        }
    for (unsigned k = 0; k <= 2; ++k) {
        WhitneySpace sp(k);
        for (unsigned m = 0; m <= 3; ++m) {
            SimplexSpaceBasis b = sp.basis_on(m);
            CHECK(b.size() == binom(m + 1, k + 1));
            CHECK(b.canon_rank() == b.size());
        }
    }
}

TEST_CASE("instantiated spaces are functorial") {
    SimplicialComplex sq = build_complex(4, {{0, 1, 2}, {0, 2, 3}});
    SimplicialComplex mixed = build_complex(4, {{0, 1, 2}, {2, 3}});
    for (const SimplicialComplex* c : {&sq, &mixed}) {
        for (unsigned r = 1; r <= 3; ++r)
            CHECK(verify_function_space(instantiate_space(*c, LagrangeSpace(r))).valid);
        for (unsigned k = 0; k <= 2; ++k)
            CHECK(verify_function_space(instantiate_space(*c, WhitneySpace(k))).valid);
        CHECK(verify_function_space(instantiate_space(*c, PolyFormSpace(1, 1))).valid);
        CHECK(verify_function_space(instantiate_space(*c, PolyFormSpace(0, 1))).valid);
    }
}

TEST_CASE("vanishing-trace dimensions match the combinatorial counts") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned m = 0; m <= 2; ++m) {
            SimplicialComplex c = simplex_complex(m);
            FunctionSpace fs = instantiate_space(c, LagrangeSpace(r));
            const std::string top = *c.poset.top();
            CHECK(vanishing_trace(fs, top).basis.cols() == binom(r - 1, m));
        }
    for (unsigned k = 0; k <= 2; ++k)
        for (unsigned m = k; m <= 2; ++m) {
            SimplicialComplex c = simplex_complex(m);
            FunctionSpace fs = instantiate_space(c, WhitneySpace(k));
            const std::string top = *c.poset.top();
            CHECK(vanishing_trace(fs, top).basis.cols() == (m == k ? 1 : 0));
        }
}

TEST_CASE("interior polynomials are divisible by every barycentric symbol") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned m = 0; m <= 2; ++m) {
            LagrangeSpace sp(r);
            SimplicialComplex c = simplex_complex(m);
            FunctionSpace fs = instantiate_space(c, sp);
            RatMatrix v = vanishing_trace(fs, *c.poset.top()).basis;
            SimplexSpaceBasis basis = sp.basis_on(m);
            for (std::size_t row = 0; row < v.rows(); ++row) {
                bool all_positive = true;
                for (unsigned e : basis.forms[row].terms()[0].exps)
                    if (e == 0) all_positive = false;
                if (all_positive) continue;
                for (std::size_t col = 0; col < v.cols(); ++col)
                    CHECK(v(row, col) == 0);
            }
        }
}

TEST_CASE("built-in extensions certify") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned m = 0; m <= 2; ++m) {
            auto ext = bubble_extension(r, m);
            auto res = certify_reference_extension(LagrangeSpace(r), ext);
            INFO("lagrange r=" << r << " m=" << m << ": " << res.reason);
            CHECK(res.valid);
        }
    for (unsigned k = 0; k <= 2; ++k)
        for (unsigned m = k; m <= 2; ++m) {
            auto ext = whitney_extension(k, m);
            auto res = certify_reference_extension(WhitneySpace(k), ext);
            INFO("whitney k=" << k << " m=" << m << ": " << res.reason);
            CHECK(res.valid);
        }
    CHECK_THROWS_AS(bubble_extension(0, 1), MissingExtension);
}

TEST_CASE("solved extensions certify and match unique built-ins") {
    for (unsigned r = 1; r <= 3; ++r)
        for (unsigned m = 0; m <= 2; ++m) {
            auto res = solve_simpext(LagrangeSpace(r), m);
            REQUIRE(std::holds_alternative<ReferenceExtension>(res));
            const auto& ext = std::get<ReferenceExtension>(res);
            CHECK(certify_reference_extension(LagrangeSpace(r), ext).valid);
            // When the cone carries no interior polynomials the extension is
            // unique, so the solver must land exactly on the built-in.
            if (binom(r - 1, m + 1) == 0)
                CHECK(ext.matrix == bubble_extension(r, m).matrix);
        }
    for (unsigned k = 0; k <= 2; ++k)
        for (unsigned m = k; m <= 2; ++m) {
            auto res = solve_simpext(WhitneySpace(k), m);
            REQUIRE(std::holds_alternative<ReferenceExtension>(res));
            const auto& ext = std::get<ReferenceExtension>(res);
            CHECK(certify_reference_extension(WhitneySpace(k), ext).valid);
            CHECK(ext.matrix == whitney_extension(k, m).matrix);
        }
}

TEST_CASE("constant forms on the cone cannot satisfy the trace conditions") {
    for (unsigned k = 0; k <= 2; ++k) {
        auto res = solve_simpext(PolyFormSpace(0, k), k);
        REQUIRE(std::holds_alternative<ExtensionInfeasible>(res));
        const auto& inf = std::get<ExtensionInfeasible>(res);
        CHECK((transpose(inf.certificate) * inf.system).is_zero());
        CHECK(!(transpose(inf.certificate) * inf.rhs).is_zero());
        std::size_t rows = 0;
        for (const auto& [name, count] : inf.row_blocks) rows += count;
        CHECK(rows == inf.system.rows());
    }
}

TEST_CASE("lifted families decompose mesh spaces") {
    SimplicialComplex sq = build_complex(4, {{0, 1, 2}, {0, 2, 3}});
    FunctionSpace fs = instantiate_space(sq, LagrangeSpace(2));
    GlobalSpace g = assemble_global(fs);
    CHECK(g.dim() == 9);

    HatFamily hat = simplicial_hat(sq, LagrangeSpace(2), fs, g);
    CHECK(verify_consistent_family(hat.family).valid);
    Decomposition d = geometric_decomposition(hat.family);
    std::size_t total = 0;
    for (const auto& [name, block] : d.blocks) {
        if (name == hat.top) continue;
        std::size_t dim = sq.face_dim(sq.poset.index_of(name));
        CHECK(block.cols() == (dim <= 1 ? 1u : 0u));
        total += block.cols();
    }
    CHECK(total == 9);

    SECTION("mixed-dimension complexes work the same way") {
        SimplicialComplex mixed = build_complex(4, {{0, 1, 2}, {2, 3}});
        FunctionSpace mfs = instantiate_space(mixed, LagrangeSpace(2));
        GlobalSpace mg = assemble_global(mfs);
        CHECK(mg.dim() == 8); // 4 vertex values + 4 edge bubbles
        HatFamily mhat = simplicial_hat(mixed, LagrangeSpace(2), mfs, mg);
        Decomposition md = geometric_decomposition(mhat.family);
        std::size_t mtotal = 0;
        for (const auto& [name, block] : md.blocks) mtotal += block.cols();
        CHECK(mtotal == 8);
    }
}

TEST_CASE("reference extensions round trip through a complex") {
    for (unsigned r = 1; r <= 2; ++r)
        for (unsigned m = 0; m <= 1; ++m) {
            SimplicialComplex c = simplex_complex(m + 1);
            LagrangeSpace sp(r);
            FunctionSpace fs = instantiate_space(c, sp);
            GlobalSpace g = assemble_global(fs);
            std::map<unsigned, RatMatrix> ems;
            for (unsigned j = 0; j <= m; ++j) ems[j] = bubble_extension(r, j).matrix;
            HatFamily hat = local_ops_from_simplicial(c, sp, fs, g, ems);
            ReferenceExtension back = simplicial_from_local(c, sp, hat.family, m);
            CHECK(back.matrix == ems.at(m));
        }

    SimplicialComplex tri = simplex_complex(2);
    WhitneySpace w1(1);
    FunctionSpace fs = instantiate_space(tri, w1);
    GlobalSpace g = assemble_global(fs);
    std::map<unsigned, RatMatrix> ems{{1, whitney_extension(1, 1).matrix}};
    HatFamily hat = local_ops_from_simplicial(tri, w1, fs, g, ems);
    ReferenceExtension back = simplicial_from_local(tri, w1, hat.family, 1);
    CHECK(back.matrix == ems.at(1));

    CHECK_THROWS_AS(simplicial_from_local(tri, w1, hat.family, 2), NoSuitableFacePair);
}
