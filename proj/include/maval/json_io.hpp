#pragma once

// JSON schemas for the file formats consumed and produced by the CLI:
// function.json, functional.json, region.json, measure.json, plus test
// functions, affine functionals, and verification reports. Matrices are
// row-major. Round trips are lossless for finite doubles.

#include <string>

#include <json.hpp>

#include "maval/convexfn.hpp"
#include "maval/functionals.hpp"
#include "maval/measure.hpp"
#include "maval/verify.hpp"

namespace maval {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

inline json vec_to_json(const Vec& v) { return json(v.to_std()); }

inline Vec vec_from_json(const json& j, int expect_dim = 0) {
    auto xs = j.get<std::vector<double>>();
    Vec v(xs);
    if (expect_dim && v.dim() != expect_dim) throw dimension_mismatch("vector length in JSON");
    return v;
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

inline json region_to_json(const Region& r) {
    if (r.is_box()) return json{{"box", {{"lo", vec_to_json(r.lo())}, {"hi", vec_to_json(r.hi())}}}};
    return json{{"ball", {{"center", vec_to_json(r.center())}, {"radius", r.radius()}}}};
}

inline Region region_from_json(const json& j) {
    if (j.contains("box"))
        return Region::box(vec_from_json(j.at("box").at("lo")), vec_from_json(j.at("box").at("hi")));
    if (j.contains("ball"))
        return Region::ball(vec_from_json(j.at("ball").at("center")), j.at("ball").at("radius").get<double>());
    throw json::other_error::create(501, "region JSON needs a 'box' or 'ball' key", &j);
}

// ---------------------------------------------------------------------------
// Test functions and affine functionals
// ---------------------------------------------------------------------------

inline json test_function_to_json(const TestFunction& phi) {
    return json{{"center", vec_to_json(phi.center)},
                {"radius", phi.radius},
                {"power", phi.power},
                {"amplitude", phi.amplitude}};
}

inline TestFunction test_function_from_json(const json& j) {
    return TestFunction(vec_from_json(j.at("center")), j.at("radius").get<double>(),
                        j.at("power").get<int>(), j.at("amplitude").get<double>());
}

inline json affine_to_json(const AffineFunctional& ell) {
    return json{{"s", ell.s}, {"v", vec_to_json(ell.v)}};
}

inline AffineFunctional affine_from_json(const json& j) {
    return AffineFunctional{j.at("s").get<double>(), vec_from_json(j.at("v"))};
}

// ---------------------------------------------------------------------------
// Convex functions
// ---------------------------------------------------------------------------

inline json function_to_json(const ConvexFunction& f);

namespace detail {

inline json pieces_to_json(const std::vector<AffinePiece>& pieces) {
    json arr = json::array();
    for (const auto& p : pieces) arr.push_back(json{{"v", vec_to_json(p.v)}, {"b", p.b}});
    return arr;
}

inline std::vector<AffinePiece> pieces_from_json(const json& arr, int dim) {
    std::vector<AffinePiece> pieces;
    for (const auto& p : arr) pieces.push_back({vec_from_json(p.at("v"), dim), p.at("b").get<double>()});
    return pieces;
}

}  // namespace detail

inline json function_to_json(const ConvexFunction& f) {
    json j;
    j["dim"] = f.dim();
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::Quadratic>) {
                j["kind"] = "quadratic";
                j["A"] = b.A.to_rows();
                j["v"] = vec_to_json(b.v);
                j["s"] = b.s;
            } else if constexpr (std::is_same_v<T, body::MaxAffine>) {
                j["kind"] = "max_affine";
                j["pieces"] = detail::pieces_to_json(b.pieces);
            } else if constexpr (std::is_same_v<T, body::LogSumExp>) {
                j["kind"] = "log_sum_exp";
                j["pieces"] = detail::pieces_to_json(b.pieces);
                j["beta"] = b.beta;
            } else if constexpr (std::is_same_v<T, body::PNorm>) {
                j["kind"] = "pnorm";
                j["p"] = b.p;
                j["scale"] = b.c;
            } else if constexpr (std::is_same_v<T, body::Sum>) {
                j["kind"] = "sum";
                j["left"] = function_to_json(*b.left);
                j["right"] = function_to_json(*b.right);
            } else if constexpr (std::is_same_v<T, body::Max>) {
                j["kind"] = "max";
                j["left"] = function_to_json(*b.left);
                j["right"] = function_to_json(*b.right);
            } else if constexpr (std::is_same_v<T, body::Scale>) {
                j["kind"] = "scale";
                j["t"] = b.t;
                j["inner"] = function_to_json(*b.inner);
            } else if constexpr (std::is_same_v<T, body::Pullback>) {
                j["kind"] = "pullback";
                j["M"] = b.g.matrix();
                j["w"] = vec_to_json(b.g.offset());
                j["inner"] = function_to_json(*b.inner);
            } else {
                throw precondition_error("function kind is internal and not part of the JSON schema");
            }
        },
        f.body_variant());
    return j;
}

inline ConvexFunction function_from_json(const json& j) {
    int dim = j.at("dim").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "quadratic")
        return ConvexFunction::quadratic(SymMatrix::from_rows(dim, j.at("A").get<std::vector<double>>()),
                                         vec_from_json(j.at("v"), dim), j.at("s").get<double>());
    if (kind == "max_affine") return ConvexFunction::max_affine(detail::pieces_from_json(j.at("pieces"), dim));
    if (kind == "log_sum_exp")
        return ConvexFunction::log_sum_exp(detail::pieces_from_json(j.at("pieces"), dim),
                                           j.at("beta").get<double>());
    if (kind == "pnorm") return ConvexFunction::pnorm(dim, j.at("p").get<int>(), j.at("scale").get<double>());
    if (kind == "sum")
        return ConvexFunction::sum(function_from_json(j.at("left")), function_from_json(j.at("right")));
    if (kind == "max")
        return lattice_max(function_from_json(j.at("left")), function_from_json(j.at("right")));
    if (kind == "scale") return ConvexFunction::scale(j.at("t").get<double>(), function_from_json(j.at("inner")));
    if (kind == "pullback") {
        AffineMap g(dim, j.at("M").get<std::vector<double>>(), vec_from_json(j.at("w"), dim));
        return ConvexFunction::pullback(g, function_from_json(j.at("inner")));
    }
    throw json::other_error::create(501, "unknown function kind '" + kind + "'", &j);
}

// ---------------------------------------------------------------------------
// Functional specs
// ---------------------------------------------------------------------------

inline json functional_to_json(const FunctionalSpec& s);

namespace detail {

inline json xsv_terms_to_json(const std::vector<XsvTerm>& terms, int dim) {
    json arr = json::array();
    for (const auto& t : terms) {
        json e;
        e["coeff"] = t.coeff;
        e["xpow"] = std::vector<int>(t.xpow.begin(), t.xpow.begin() + dim);
        e["spow"] = t.spow;
        e["vpow"] = std::vector<int>(t.vpow.begin(), t.vpow.begin() + dim);
        arr.push_back(e);
    }
    return arr;
}

inline std::vector<XsvTerm> xsv_terms_from_json(const json& arr, int dim) {
    std::vector<XsvTerm> terms;
    for (const auto& e : arr) {
        XsvTerm t;
        t.coeff = e.at("coeff").get<double>();
        auto xp = e.at("xpow").get<std::vector<int>>();
        auto vp = e.at("vpow").get<std::vector<int>>();
        if (static_cast<int>(xp.size()) != dim || static_cast<int>(vp.size()) != dim)
            throw dimension_mismatch("power list length in JSON");
        for (int i = 0; i < dim; ++i) {
            t.xpow[i] = xp[i];
            t.vpow[i] = vp[i];
        }
        t.spow = e.at("spow").get<int>();
        terms.push_back(t);
    }
    return terms;
}

}  // namespace detail

inline json functional_to_json(const FunctionalSpec& s) {
    json j;
    j["dim"] = s.dim();
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, spec_body::EFam>) {
                j["kind"] = "e_fam";
                j["a"] = b.a;
                j["b"] = b.b;
                j["c"] = b.c;
            } else if constexpr (std::is_same_v<T, spec_body::FFam>) {
                j["kind"] = "f_fam";
                j["a"] = b.a;
                j["b"] = b.b;
                j["c"] = b.c;
            } else if constexpr (std::is_same_v<T, spec_body::FTilde>) {
                j["kind"] = "f_tilde";
                j["b"] = b.b;
                j["j"] = b.j;
            } else if constexpr (std::is_same_v<T, spec_body::TopDegree>) {
                j["kind"] = "top_degree";
                j["psi"] = detail::xsv_terms_to_json(b.psi.terms, s.dim());
            } else if constexpr (std::is_same_v<T, spec_body::PolyMinor>) {
                j["kind"] = "poly_minor";
                json arr = json::array();
                for (const auto& t : b.terms) {
                    json e;
                    e["coeff"] = t.coeff;
                    e["spow"] = t.spow;
                    e["vpow"] = std::vector<int>(t.vpow.begin(), t.vpow.begin() + s.dim());
                    e["minor"] = json{{"k", t.minor.k}, {"rows", t.minor.rows}, {"cols", t.minor.cols}};
                    arr.push_back(e);
                }
                j["terms"] = arr;
            } else if constexpr (std::is_same_v<T, spec_body::DiscreteMA>) {
                j["kind"] = "discrete_ma";
            } else if constexpr (std::is_same_v<T, spec_body::LinComb>) {
                j["kind"] = "lin_comb";
                json arr = json::array();
                for (const auto& [c, t] : b.terms)
                    arr.push_back(json{{"coeff", c}, {"spec", functional_to_json(t)}});
                j["terms"] = arr;
            } else {
                j["kind"] = "discontinuous_1d";
            }
        },
        s.body());
    return j;
}

inline FunctionalSpec functional_from_json(const json& j) {
    int dim = j.at("dim").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "e_fam")
        return FunctionalSpec::e_fam(dim, j.at("a").get<int>(), j.at("b").get<int>(), j.at("c").get<int>());
    if (kind == "f_fam")
        return FunctionalSpec::f_fam(dim, j.at("a").get<int>(), j.at("b").get<int>(), j.at("c").get<int>());
    if (kind == "f_tilde") return FunctionalSpec::f_tilde(dim, j.at("b").get<int>(), j.at("j").get<int>());
    if (kind == "top_degree") {
        XsvPolynomial psi;
        psi.dim = dim;
        psi.terms = detail::xsv_terms_from_json(j.at("psi"), dim);
        return FunctionalSpec::top_degree(dim, std::move(psi));
    }
    if (kind == "poly_minor") {
        std::vector<MinorTerm> terms;
        for (const auto& e : j.at("terms")) {
            MinorTerm t;
            t.coeff = e.at("coeff").get<double>();
            t.spow = e.at("spow").get<int>();
            auto vp = e.at("vpow").get<std::vector<int>>();
            if (static_cast<int>(vp.size()) != dim) throw dimension_mismatch("vpow length in JSON");
            for (int i = 0; i < dim; ++i) t.vpow[i] = vp[i];
            t.minor = MinorSymbol::canonical(e.at("minor").at("rows").get<std::vector<int>>(),
                                             e.at("minor").at("cols").get<std::vector<int>>());
            terms.push_back(std::move(t));
        }
        return FunctionalSpec::poly_minor(dim, std::move(terms));
    }
    if (kind == "discrete_ma") return FunctionalSpec::discrete_ma(dim);
    if (kind == "lin_comb") {
        std::vector<std::pair<double, FunctionalSpec>> terms;
        for (const auto& e : j.at("terms"))
            terms.emplace_back(e.at("coeff").get<double>(), functional_from_json(e.at("spec")));
        return FunctionalSpec::lin_comb(std::move(terms));
    }
    if (kind == "discontinuous_1d") {
        if (dim != 1) throw dimension_mismatch("discontinuous_1d requires dim 1");
        return FunctionalSpec::discontinuous_1d();
    }
    throw json::other_error::create(501, "unknown functional kind '" + kind + "'", &j);
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

inline json measure_to_json(const RadonMeasure& mu) {
    json j;
    j["dim"] = mu.dim;
    json atoms = json::array();
    for (const auto& a : mu.atoms) atoms.push_back(json{{"x", vec_to_json(a.x)}, {"mass", a.mass}});
    j["atoms"] = atoms;
    if (mu.density) {
        if (!mu.density->standard)
            throw precondition_error("only standard-grid densities are serializable");
        j["density"] = json{{"region", region_to_json(mu.density->grid.region)},
                            {"order", mu.density->order},
                            {"values", mu.density->values}};
    }
    return j;
}

inline RadonMeasure measure_from_json(const json& j) {
    RadonMeasure mu = RadonMeasure::zero(j.at("dim").get<int>());
    for (const auto& a : j.at("atoms"))
        mu.add_atom(vec_from_json(a.at("x"), mu.dim), a.at("mass").get<double>());
    if (j.contains("density")) {
        RadonMeasure::Density d;
        d.order = j.at("density").at("order").get<int>();
        d.grid = make_grid(region_from_json(j.at("density").at("region")), d.order);
        d.values = j.at("density").at("values").get<std::vector<double>>();
        d.standard = true;
        if (d.values.size() != d.grid.size())
            throw precondition_error("density values do not match the grid size");
        mu.density = std::move(d);
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json report_to_json(const SuiteReport& rep) {
    json j;
    j["suite"] = rep.suite;
    j["seed"] = rep.seed;
    json trials = json::array();
    for (const auto& t : rep.trials) {
        json e;
        e["inputs-hash"] = t.inputs_hash;
        e["residual"] = t.residual;
        e["pass"] = t.pass;
        if (t.skipped) e["skipped"] = true;
        if (!t.note.empty()) e["note"] = t.note;
        trials.push_back(e);
    }
    j["trials"] = trials;
    j["pass"] = rep.pass;
    return j;
}

}  // namespace maval
