#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "decomp.hpp"
#include "errors.hpp"
#include "extension.hpp"
#include "funcspace.hpp"
#include "matrix.hpp"
#include "poset.hpp"
#include "simplicial.hpp"
#include "synthetic.hpp"

namespace geodecomp::cli {

struct MeshFile {
    std::size_t vertex_count = 0;
    std::vector<std::vector<unsigned>> cells;
};

/// Read and validate a mesh file: a JSON object {"vertices": N,
/// "cells": [[i, ...], ...]}. Mixed cell dimensions are fine; the cells must
/// build a valid complex.
inline MeshFile parse_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open mesh file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("mesh file '" + path + "': " + e.what());
    }
    if (!j.is_object())
        throw ParseError("mesh file '" + path + "': top level must be an object");
    if (!j.contains("vertices") || !j["vertices"].is_number_unsigned())
        throw ParseError("mesh file '" + path + "': field 'vertices' must be a non-negative integer");
    if (!j.contains("cells") || !j["cells"].is_array())
        throw ParseError("mesh file '" + path + "': field 'cells' must be an array");
    MeshFile m;
    m.vertex_count = j["vertices"].get<std::size_t>();
    for (const auto& cell : j["cells"]) {
        if (!cell.is_array())
            throw ParseError("mesh file '" + path + "': each cell must be an array");
        std::vector<unsigned> c;
        for (const auto& v : cell) {
            if (!v.is_number_unsigned())
                throw ParseError("mesh file '" + path +
                                 "': cell entries must be non-negative integers");
            c.push_back(v.get<unsigned>());
        }
        m.cells.push_back(std::move(c));
    }
    try {
        build_complex(m.vertex_count, m.cells); // structural validation
    } catch (const Error& e) {
        throw ValidationError(std::string("mesh file '") + path + "': " + e.what());
    }
    return m;
}

struct SpaceSpec {
    std::string text;
    std::shared_ptr<SimplicialSpace> simplicial; // null when presheaf
    bool is_presheaf = false;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t parse_number(const std::string& s, const std::string& what) {
    if (s.empty())
        throw ParseError(what + " must be a non-negative integer");
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9')
            throw ParseError(what + " must be a non-negative integer, got '" + s + "'");
        if (v > (UINT64_MAX - (c - '0')) / 10)
            throw ParseError(what + " is too large: '" + s + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

} // namespace detail

/// Grammar: lagrange:<r> | plambda:<r>:<k> | p0lambda:<k> | whitney:<k> |
/// presheaf:<seed>.
inline SpaceSpec parse_space_spec(const std::string& text) {
    auto parts = detail::split(text, ':');
    SpaceSpec spec;
    spec.text = text;
    const std::string& kind = parts[0];
    auto arity = [&](std::size_t n) {
        if (parts.size() != n + 1)
            throw ParseError("space '" + text + "': expected " + std::to_string(n) +
                             " parameter(s) after '" + kind + "'");
    };
    if (kind == "lagrange") {
        arity(1);
        spec.simplicial = std::make_shared<LagrangeSpace>(
            static_cast<unsigned>(detail::parse_number(parts[1], "polynomial degree")));
    } else if (kind == "plambda") {
        arity(2);
        spec.simplicial = std::make_shared<PolyFormSpace>(
            static_cast<unsigned>(detail::parse_number(parts[1], "polynomial degree")),
            static_cast<unsigned>(detail::parse_number(parts[2], "form degree")));
    } else if (kind == "p0lambda") {
        arity(1);
        spec.simplicial = std::make_shared<PolyFormSpace>(
            0, static_cast<unsigned>(detail::parse_number(parts[1], "form degree")));
    } else if (kind == "whitney") {
        arity(1);
        spec.simplicial = std::make_shared<WhitneySpace>(
            static_cast<unsigned>(detail::parse_number(parts[1], "form degree")));
    } else if (kind == "presheaf") {
        arity(1);
        spec.is_presheaf = true;
        spec.seed = detail::parse_number(parts[1], "seed");
    } else {
        throw ParseError("unknown space kind '" + kind + "'");
    }
    return spec;
}

/// GEODECOMP_SEED, when set, overrides the seed in a presheaf spec.
inline std::uint64_t effective_seed(std::uint64_t from_spec) {
    const char* env = std::getenv("GEODECOMP_SEED");
    if (!env) return from_spec;
    return detail::parse_number(env, "GEODECOMP_SEED");
}

namespace detail {

inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (width.size() <= c) width.resize(c + 1, 0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string cell = row[c];
            if (c == 0)
                cell += std::string(width[c] - cell.size(), ' ');
            else
                cell = std::string(width[c] - cell.size(), ' ') + cell;
            out += cell;
            if (c + 1 < row.size()) out += "  ";
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    return out;
}

inline std::vector<std::vector<std::string>> matrix_strings(const RatMatrix& m) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(rational_to_string(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Per-element report rows shared by decompose/dofs: name, dim (simplicial
/// only), space dim, interior dim, plus one extra column.
struct FaceRow {
    std::string name;
    std::string dim;
    std::size_t space_dim = 0;
    std::size_t interior_dim = 0;
    std::optional<std::size_t> extra;
};

inline std::string render_face_table(const std::vector<FaceRow>& rows,
                                     const std::string& extra_header) {
    std::vector<std::vector<std::string>> t;
    t.push_back({"face", "dim", "space", "interior", extra_header});
    for (const auto& r : rows)
        t.push_back({r.name, r.dim, std::to_string(r.space_dim), std::to_string(r.interior_dim),
                     r.extra ? std::to_string(*r.extra) : "-"});
    return render_table(t);
}

inline nlohmann::json face_rows_json(const std::vector<FaceRow>& rows,
                                     const std::string& extra_key) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j{{"face", r.name},
                         {"space_dim", r.space_dim},
                         {"interior_dim", r.interior_dim}};
        if (r.dim != "-") j["dim"] = std::stoul(r.dim);
        if (r.extra) j[extra_key] = *r.extra;
        a.push_back(std::move(j));
    }
    return a;
}

} // namespace detail

/// Everything the simplicial commands share: the complex, the instantiated
/// space, the limit space, and either a lifted family or the dimension whose
/// reference extension is infeasible.
struct Pipeline {
    SimplicialComplex complex;
    FunctionSpace fs;
    GlobalSpace global;
    std::map<unsigned, RatMatrix> ems;
    std::optional<HatFamily> hat;
    std::optional<unsigned> obstructed_dim;
    std::optional<ExtensionInfeasible> obstruction;
};

inline Pipeline build_pipeline(const MeshFile& mesh, const SimplicialSpace& sp) {
    Pipeline p;
    p.complex = build_complex(mesh.vertex_count, mesh.cells);
    p.fs = instantiate_space(p.complex, sp);
    p.global = assemble_global(p.fs);

    const unsigned n = p.complex.dimension;
    std::vector<bool> needed(n, false);
    for (std::size_t i = 0; i < p.complex.faces.size(); ++i) {
        unsigned d = p.complex.face_dim(i);
        if (d < n && vanishing_trace(p.fs, p.complex.poset.name_of(i)).basis.cols() > 0)
            needed[d] = true;
    }
    for (unsigned m = 0; m < n; ++m) {
        if (!needed[m]) continue;
        if (auto built = sp.builtin_extension(m)) {
            p.ems[m] = built->matrix;
            continue;
        }
        auto solved = solve_simpext(sp, m);
        if (std::holds_alternative<ReferenceExtension>(solved)) {
            p.ems[m] = std::get<ReferenceExtension>(solved).matrix;
        } else {
            p.obstructed_dim = m;
            p.obstruction = std::get<ExtensionInfeasible>(solved);
            return p;
        }
    }
    p.hat = local_ops_from_simplicial(p.complex, sp, p.fs, p.global, p.ems);
    return p;
}

namespace detail {

inline std::vector<FaceRow> simplicial_rows(const Pipeline& p,
                                            const Decomposition* d) {
    std::vector<FaceRow> rows;
    for (std::size_t i = 0; i < p.complex.faces.size(); ++i) {
        const std::string& name = p.complex.poset.name_of(i);
        FaceRow r;
        r.name = name;
        r.dim = std::to_string(p.complex.face_dim(i));
        r.space_dim = p.fs.dim(name);
        r.interior_dim = vanishing_trace(p.fs, name).basis.cols();
        if (d) r.extra = d->block(name).cols();
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::size_t total_interior(const std::vector<FaceRow>& rows) {
    std::size_t t = 0;
    for (const auto& r : rows) t += r.interior_dim;
    return t;
}

inline std::string obstruction_message(const Pipeline& p, std::size_t sum_interior) {
    return "no consistent family: dim F(T) = " + std::to_string(p.global.dim()) +
           " < sum dim F°(F) = " + std::to_string(sum_interior) +
           " (the space does not have a local basis); the reference extension for dimension " +
           std::to_string(*p.obstructed_dim) + " is infeasible";
}

inline nlohmann::json certificate_json(const ExtensionInfeasible& inf) {
    nlohmann::json rows = nlohmann::json::array();
    std::size_t off = 0;
    for (const auto& [face, count] : inf.row_blocks) {
        for (std::size_t i = 0; i < count; ++i) {
            const Rational& v = inf.certificate(off + i, 0);
            if (v != 0)
                rows.push_back({{"face", face}, {"row", i}, {"value", rational_to_string(v)}});
        }
        off += count;
    }
    return rows;
}

inline std::string certificate_human(const ExtensionInfeasible& inf) {
    std::string s;
    std::size_t off = 0;
    for (const auto& [face, count] : inf.row_blocks) {
        for (std::size_t i = 0; i < count; ++i) {
            const Rational& v = inf.certificate(off + i, 0);
            if (v != 0)
                s += "  " + face + "[" + std::to_string(i) + "]: " + rational_to_string(v) + "\n";
        }
        off += count;
    }
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string space;
    std::string mesh;
    std::string format = "human";
};

inline int cmd_decompose(const CommonOpts& o, std::ostream& out) {
    SpaceSpec spec = parse_space_spec(o.space);
    const std::string echo = "decompose " + (o.mesh.empty() ? "" : "--mesh " + o.mesh + " ") +
                             "--space " + o.space;

    std::vector<detail::FaceRow> rows;
    std::optional<Decomposition> dec;
    std::string headline;
    nlohmann::json j{{"command", "decompose"}, {"space", o.space}};
    int code = 0;

    if (spec.is_presheaf) {
        if (!o.mesh.empty())
            throw ParseError("presheaf spaces do not take a mesh");
        std::uint64_t seed = effective_seed(spec.seed);
        PresheafSample sample = synthesize_presheaf(seed);
        GlobalSpace g = assemble_global(sample.space);
        HatFamily hat = extend_family_to_hat(sample.family, g);
        dec = geometric_decomposition(hat.family);
        for (const auto& name : sample.space.poset().elements()) {
            detail::FaceRow r;
            r.name = name;
            r.dim = "-";
            r.space_dim = sample.space.dim(name);
            r.interior_dim = vanishing_trace(sample.space, name).basis.cols();
            r.extra = dec->block(name).cols();
            rows.push_back(std::move(r));
        }
        headline = "presheaf seed " + std::to_string(seed) + ": " +
                   std::to_string(sample.space.poset().size()) + " elements";
        j["seed"] = seed;
        j["elements"] = sample.space.poset().size();
        j["global_dim"] = g.dim();
        if (o.format == "human") {
            out << "command: " << echo << "\n" << headline << "\n";
            out << "global dimension (limit space): " << g.dim() << "\n\n";
        }
    } else {
        if (o.mesh.empty())
            throw ParseError("--mesh is required for simplicial spaces");
        MeshFile mesh = parse_mesh(o.mesh);
        Pipeline p = build_pipeline(mesh, *spec.simplicial);
        j["mesh"] = {{"path", o.mesh},
                     {"vertices", mesh.vertex_count},
                     {"cells", mesh.cells.size()},
                     {"dimension", p.complex.dimension}};
        j["global_dim"] = p.global.dim();
        if (o.format == "human") {
            out << "command: " << echo << "\n";
            out << "mesh: " << mesh.vertex_count << " vertices, " << mesh.cells.size()
                << " cells, dimension " << p.complex.dimension << "\n";
            out << "global dimension (limit space): " << p.global.dim() << "\n\n";
        }
        if (p.obstructed_dim) {
            rows = detail::simplicial_rows(p, nullptr);
            std::size_t sum = detail::total_interior(rows);
            std::string msg = detail::obstruction_message(p, sum);
            j["faces"] = detail::face_rows_json(rows, "block_dim");
            j["sum_interior_dim"] = sum;
            j["result"] = "Obstructed";
            j["message"] = msg;
            j["infeasible_dim"] = *p.obstructed_dim;
            j["certificate"] = detail::certificate_json(*p.obstruction);
            if (o.format == "human") {
                out << detail::render_face_table(rows, "block");
                out << "\nsum of interior dimensions: " << sum << "\n";
                out << msg << "\n";
                out << "infeasibility certificate (nonzero rows):\n"
                    << detail::certificate_human(*p.obstruction);
                out << "result: Obstructed\n";
            } else {
                j["exit"] = 1;
                out << j.dump(2) << "\n";
            }
            return 1;
        }
        dec = geometric_decomposition(p.hat->family);
        rows = detail::simplicial_rows(p, &*dec);
    }

    std::size_t total_block = 0;
    for (const auto& r : rows) total_block += r.extra.value_or(0);
    const std::size_t gdim = dec->ambient_dim;
    const bool match = total_block == gdim;
    code = match ? 0 : 1;

    j["faces"] = detail::face_rows_json(rows, "block_dim");
    j["total_block_dim"] = total_block;
    j["sum_interior_dim"] = detail::total_interior(rows);
    j["result"] = match ? "Certified" : "Failure";
    j["exit"] = code;
    if (o.format == "human") {
        out << detail::render_face_table(rows, "block");
        out << "\ntotal block dimension: " << total_block << "\n";
        out << "cross-check: total blocks (" << total_block << ") "
            << (match ? "==" : "!=") << " global dimension (" << gdim << ")\n";
        out << "certificate: " << dec->certificate.rows() << "x" << dec->certificate.cols()
            << ", full rank\n";
        out << "result: " << (match ? "Certified" : "Failure") << "\n";
    } else {
        out << j.dump(2) << "\n";
    }
    return code;
}

struct DofsOpts : CommonOpts {
    std::string dagger = "projection";
};

inline int cmd_dofs(const DofsOpts& o, std::ostream& out) {
    SpaceSpec spec = parse_space_spec(o.space);
    const std::string echo = "dofs " + (o.mesh.empty() ? "" : "--mesh " + o.mesh + " ") +
                             "--space " + o.space + " --dagger " + o.dagger;

    std::optional<Pipeline> pipe;
    std::optional<HatFamily> hat;
    std::string headline;
    nlohmann::json j{{"command", "dofs"}, {"space", o.space}, {"dagger", o.dagger}};

    if (spec.is_presheaf) {
        if (!o.mesh.empty())
            throw ParseError("presheaf spaces do not take a mesh");
        std::uint64_t seed = effective_seed(spec.seed);
        PresheafSample sample = synthesize_presheaf(seed);
        GlobalSpace g = assemble_global(sample.space);
        hat = extend_family_to_hat(sample.family, g);
        headline = "presheaf seed " + std::to_string(seed) + ": " +
                   std::to_string(sample.space.poset().size()) + " elements";
        j["seed"] = seed;
    } else {
        if (o.mesh.empty())
            throw ParseError("--mesh is required for simplicial spaces");
        MeshFile mesh = parse_mesh(o.mesh);
        pipe = build_pipeline(mesh, *spec.simplicial);
        headline = "mesh: " + std::to_string(mesh.vertex_count) + " vertices, " +
                   std::to_string(mesh.cells.size()) + " cells, dimension " +
                   std::to_string(pipe->complex.dimension);
        if (pipe->obstructed_dim) {
            std::vector<detail::FaceRow> rows = detail::simplicial_rows(*pipe, nullptr);
            std::string msg = detail::obstruction_message(*pipe, detail::total_interior(rows));
            if (o.format == "human") {
                out << "command: " << echo << "\n" << headline << "\n" << msg << "\n";
                out << "result: Obstructed\n";
            } else {
                j["result"] = "Obstructed";
                j["message"] = msg;
                j["exit"] = 1;
                out << j.dump(2) << "\n";
            }
            return 1;
        }
        hat = std::move(pipe->hat);
    }

    const ExtensionFamily& family = hat->family;
    Decomposition d = geometric_decomposition(family);
    DaggerChoice choice =
        o.dagger == "euclidean" ? euclidean_daggers(family) : projection_daggers(family);
    DualDecomposition dd = dual_decomposition(family, choice);
    auto uni = unisolvence_check(d, dd);
    const bool ok = std::holds_alternative<UnisolvenceCertified>(uni);

    std::vector<detail::FaceRow> rows;
    for (const auto& name : family.space().poset().elements()) {
        if (name == hat->top) continue;
        detail::FaceRow r;
        r.name = name;
        r.dim = pipe ? std::to_string(pipe->complex.face_dim(pipe->complex.poset.index_of(name)))
                     : "-";
        r.space_dim = family.space().dim(name);
        r.interior_dim = family.vdim(name);
        r.extra = dd.block(name).cols();
        rows.push_back(std::move(r));
    }
    std::size_t total = 0;
    for (const auto& r : rows) total += *r.extra;

    j["faces"] = detail::face_rows_json(rows, "dof_dim");
    j["total_dofs"] = total;
    j["global_dim"] = d.ambient_dim;
    j["unisolvence"] = ok ? "Certified" : "Failure";
    j["exit"] = ok ? 0 : 1;
    if (o.format == "human") {
        out << "command: " << echo << "\n" << headline << "\n\n";
        out << detail::render_face_table(rows, "dofs");
        out << "\ntotal degrees of freedom: " << total << " (global dimension "
            << d.ambient_dim << ")\n";
        if (ok) {
            const RatMatrix& pairing = std::get<UnisolvenceCertified>(uni).pairing;
            out << "unisolvence: Certified (pairing " << pairing.rows() << "x" << pairing.cols()
                << " invertible)\n";
        } else {
            out << "unisolvence: Failure\n";
        }
    } else {
        out << j.dump(2) << "\n";
    }
    return ok ? 0 : 1;
}

struct ExtensionOpts {
    std::string space;
    int dim = -1;
    bool solve = false;
    std::string format = "human";
};

inline int cmd_extension(const ExtensionOpts& o, std::ostream& out, std::ostream& err) {
    SpaceSpec spec = parse_space_spec(o.space);
    if (spec.is_presheaf)
        throw ParseError("presheaf spaces have no reference extension");
    if (o.dim < 0)
        throw ParseError("--dim is required");
    const unsigned m = static_cast<unsigned>(o.dim);
    nlohmann::json j{{"command", "extension"},
                     {"space", o.space},
                     {"dim", m},
                     {"mode", o.solve ? "solve" : "builtin"}};

    std::optional<ReferenceExtension> ext;
    std::optional<ExtensionInfeasible> inf;
    if (o.solve) {
        auto res = solve_simpext(*spec.simplicial, m);
        if (std::holds_alternative<ReferenceExtension>(res))
            ext = std::get<ReferenceExtension>(res);
        else
            inf = std::get<ExtensionInfeasible>(res);
    } else {
        ext = spec.simplicial->builtin_extension(m);
        if (!ext) {
            err << "no built-in extension for '" << o.space << "'; rerun with --solve\n";
            return 3;
        }
    }

    if (inf) {
        j["result"] = "Infeasible";
        j["certificate"] = detail::certificate_json(*inf);
        j["exit"] = 2;
        if (o.format == "human") {
            out << "command: extension --space " << o.space << " --dim " << m << " --solve\n";
            out << "result: Infeasible\n";
            out << "certificate (nonzero rows, annihilates every candidate, pairs nonzero "
                   "with the requirement):\n"
                << detail::certificate_human(*inf);
        } else {
            out << j.dump(2) << "\n";
        }
        return 2;
    }

    SimplexSpaceBasis cone = spec.simplicial->basis_on(m + 1);
    j["result"] = "Feasible";
    j["rows"] = cone.labels;
    j["matrix"] = detail::matrix_strings(ext->matrix);
    j["exit"] = 0;
    if (o.format == "human") {
        out << "command: extension --space " << o.space << " --dim " << m
            << (o.solve ? " --solve" : "") << "\n";
        out << "result: Feasible (" << ext->matrix.rows() << "x" << ext->matrix.cols() << ")\n";
        std::vector<std::vector<std::string>> t;
        for (std::size_t i = 0; i < ext->matrix.rows(); ++i) {
            std::vector<std::string> row{cone.labels[i]};
            for (std::size_t c = 0; c < ext->matrix.cols(); ++c)
                row.push_back(rational_to_string(ext->matrix(i, c)));
            t.push_back(std::move(row));
        }
        out << detail::render_table(t);
    } else {
        out << j.dump(2) << "\n";
    }
    return 0;
}

inline int cmd_verify_space(const CommonOpts& o, std::ostream& out) {
    SpaceSpec spec = parse_space_spec(o.space);
    std::optional<FunctionSpace> fs;
    std::string headline;
    nlohmann::json j{{"command", "verify-space"}, {"space", o.space}};

    if (spec.is_presheaf) {
        if (!o.mesh.empty())
            throw ParseError("presheaf spaces do not take a mesh");
        std::uint64_t seed = effective_seed(spec.seed);
        fs = synthesize_presheaf(seed).space;
        headline = "presheaf seed " + std::to_string(seed) + ": " +
                   std::to_string(fs->poset().size()) + " elements";
        j["seed"] = seed;
    } else {
        if (o.mesh.empty())
            throw ParseError("--mesh is required for simplicial spaces");
        MeshFile mesh = parse_mesh(o.mesh);
        SimplicialComplex c = build_complex(mesh.vertex_count, mesh.cells);
        fs = instantiate_space(c, *spec.simplicial);
        headline = "mesh: " + std::to_string(mesh.vertex_count) + " vertices, " +
                   std::to_string(mesh.cells.size()) + " cells; " +
                   std::to_string(c.faces.size()) + " faces";
    }

    auto res = verify_function_space(*fs);
    j["elements"] = fs->poset().size();
    j["result"] = res.valid ? "Valid" : "Invalid";
    j["exit"] = res.valid ? 0 : 1;
    nlohmann::json viols = nlohmann::json::array();
    for (const auto& v : res.violations)
        viols.push_back({{"kind", v.kind}, {"k", v.k}, {"g", v.g}, {"f", v.f}});
    j["violations"] = viols;

    if (o.format == "human") {
        out << "command: verify-space --space " << o.space
            << (o.mesh.empty() ? "" : " --mesh " + o.mesh) << "\n";
        out << headline << "\n";
        if (res.valid) {
            out << "result: Valid (every trace identity and composition holds exactly)\n";
        } else {
            out << "violations:\n";
            std::vector<std::vector<std::string>> t{{"kind", "K", "G", "F"}};
            for (const auto& v : res.violations) t.push_back({v.kind, v.k, v.g, v.f});
            out << detail::render_table(t);
            out << "result: Invalid\n";
        }
    } else {
        out << j.dump(2) << "\n";
    }
    return res.valid ? 0 : 1;
}

struct DemoOpts {
    std::string which;
    unsigned k = 1;
    std::string format = "human";
};

inline int cmd_demo(const DemoOpts& o, std::ostream& out) {
    if (o.which == "p0-lagrange") {
        if (o.format == "human") {
            out << "demo: piecewise-constant functions on a connected mesh\n";
            out << "Constants on every face must agree across shared subfaces, so the\n"
                   "limit space is one-dimensional; yet every vertex carries its own\n"
                   "one-dimensional interior space. The decomposition is obstructed:\n\n";
        }
        MeshFile mesh;
        mesh.vertex_count = 4;
        mesh.cells = {{0, 1, 2}, {0, 2, 3}};
        Pipeline p = build_pipeline(mesh, LagrangeSpace(0));
        auto rows = detail::simplicial_rows(p, nullptr);
        std::size_t sum = detail::total_interior(rows);
        std::string msg = detail::obstruction_message(p, sum);
        if (o.format == "human") {
            out << detail::render_face_table(rows, "block");
            out << "\n" << msg << "\n";
            out << "result: Obstructed\n";
        } else {
            nlohmann::json j{{"command", "demo"},       {"which", o.which},
                             {"global_dim", p.global.dim()}, {"sum_interior_dim", sum},
                             {"message", msg},          {"result", "Obstructed"},
                             {"exit", 1}};
            out << j.dump(2) << "\n";
        }
        return 1;
    }
    if (o.which == "p0-forms") {
        if (o.format == "human") {
            out << "demo: constant " << o.k << "-forms do not extend from the base face\n";
            out << "A reference extension in dimension " << o.k
                << " would be a constant form on the\n"
                   "cone with trace one basis form on the base and zero on the other\n"
                   "facets; the exact certificate below shows no such form exists:\n\n";
        }
        auto res = solve_simpext(PolyFormSpace(0, o.k), o.k);
        if (std::holds_alternative<ExtensionInfeasible>(res)) {
            const auto& inf = std::get<ExtensionInfeasible>(res);
            if (o.format == "human") {
                out << "result: Infeasible\n";
                out << "certificate (nonzero rows):\n" << detail::certificate_human(inf);
            } else {
                nlohmann::json j{{"command", "demo"},
                                 {"which", o.which},
                                 {"k", o.k},
                                 {"result", "Infeasible"},
                                 {"certificate", detail::certificate_json(inf)},
                                 {"exit", 2}};
                out << j.dump(2) << "\n";
            }
            return 2;
        }
        if (o.format == "human")
            out << "result: Feasible (unexpectedly)\n";
        return 0;
    }
    throw ParseError("unknown demo '" + o.which + "'");
}

/// Parse argv (without the program name) and dispatch. All reports go to
/// out; diagnostics go to err. Returns the process exit code.
inline int run_command(const std::vector<std::string>& args, std::ostream& out,
                       std::ostream& err) {
    CLI::App app{"exact geometric decomposition of function spaces on meshes"};
    app.name("geodecomp");
    app.require_subcommand(1);

    CommonOpts dec_o;
    auto* dec = app.add_subcommand("decompose", "decompose the global space into face blocks");
    dec->add_option("--mesh", dec_o.mesh, "mesh JSON file");
    dec->add_option("--space", dec_o.space, "space spec, e.g. lagrange:2")->required();
    dec->add_option("--format", dec_o.format)->check(CLI::IsMember({"human", "json"}));

    DofsOpts dofs_o;
    auto* dofs = app.add_subcommand("dofs", "dual decomposition: degrees of freedom per face");
    dofs->add_option("--mesh", dofs_o.mesh, "mesh JSON file");
    dofs->add_option("--space", dofs_o.space, "space spec")->required();
    dofs->add_option("--dagger", dofs_o.dagger, "functional construction")
        ->check(CLI::IsMember({"projection", "euclidean"}));
    dofs->add_option("--format", dofs_o.format)->check(CLI::IsMember({"human", "json"}));

    ExtensionOpts ext_o;
    auto* ext = app.add_subcommand("extension", "reference extension operator for one dimension");
    ext->add_option("--space", ext_o.space, "space spec")->required();
    ext->add_option("--dim", ext_o.dim, "source simplex dimension")->required();
    ext->add_flag("--solve", ext_o.solve, "solve the trace conditions instead of using a built-in");
    ext->add_option("--format", ext_o.format)->check(CLI::IsMember({"human", "json"}));

    CommonOpts vs_o;
    auto* vs = app.add_subcommand("verify-space", "check trace identities and functoriality");
    vs->add_option("--mesh", vs_o.mesh, "mesh JSON file");
    vs->add_option("--space", vs_o.space, "space spec")->required();
    vs->add_option("--format", vs_o.format)->check(CLI::IsMember({"human", "json"}));

    DemoOpts demo_o;
    auto* demo = app.add_subcommand("demo", "worked obstruction examples");
    demo->add_option("which", demo_o.which, "p0-lagrange or p0-forms")
        ->required()
        ->check(CLI::IsMember({"p0-lagrange", "p0-forms"}));
    demo->add_option("--k", demo_o.k, "form degree for p0-forms");
    demo->add_option("--format", demo_o.format)->check(CLI::IsMember({"human", "json"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 3;
    }

    try {
        if (dec->parsed()) return cmd_decompose(dec_o, out);
        if (dofs->parsed()) return cmd_dofs(dofs_o, out);
        if (ext->parsed()) return cmd_extension(ext_o, out, err);
        if (vs->parsed()) return cmd_verify_space(vs_o, out);
        if (demo->parsed()) return cmd_demo(demo_o, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 3;
}

} // namespace geodecomp::cli
