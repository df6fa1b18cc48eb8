#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poiskern/operators.hpp"

using namespace poiskern;

TEST_CASE("coefficient families evaluate and integrate exactly") {
    auto c = Coefficient::constant(3.0);
    CHECK(c(0.7) == 3.0);
    CHECK(c.integral(1.0, 4.0) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(c.square_integral(0.0, 2.0) == doctest::Approx(18.0).epsilon(1e-15));

    auto p = Coefficient::power(2.0, -2.0 / 3.0);
    CHECK(p(8.0) == doctest::Approx(0.5).epsilon(1e-15));
    // int_0^h 2 y^{-2/3} dy = 6 h^{1/3}
    CHECK(p.integral(0.0, 0.001) == doctest::Approx(0.6).epsilon(1e-14));
    // square has exponent -4/3: not locally integrable
    CHECK_THROWS_AS(p.square_integral(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Coefficient::power(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("power squares integrate exactly when admissible") {
    auto p = Coefficient::power(1.0, 1.0);  // a(y) = y
    CHECK(p.square_integral(0.0, 2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    // first-cell average of y^2 over [0,h] is h^2/3
    auto sq = Coefficient::power(1.0, 2.0);
    double h = 0.25;
    CHECK(sq.integral(0.0, h) / h == doctest::Approx(h * h / 3.0).epsilon(1e-14));
}

TEST_CASE("table coefficients interpolate linearly") {
    auto t = Coefficient::table({{0.0, 1.0}, {1.0, 3.0}, {2.0, 0.0}});
    CHECK(t(0.5) == doctest::Approx(2.0));
    CHECK(t(1.5) == doctest::Approx(1.5));
    CHECK(t(5.0) == doctest::Approx(0.0));  // constant continuation
    CHECK(t.integral(0.0, 2.0) == doctest::Approx(3.5).epsilon(1e-10));
}

TEST_CASE("coefficient transforms compose") {
    auto p = Coefficient::power(1.0, 2.0);  // y^2
    auto r = p.reflected(3.0);              // (3-y)^2
    CHECK(r(1.0) == doctest::Approx(4.0));
    CHECK(r.integral(0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-13));
    auto s = p.shifted(2.0);  // (2+y)^2
    CHECK(s(1.0) == doctest::Approx(9.0));
    CHECK(s.integral(0.0, 1.0) == doctest::Approx((27.0 - 8.0) / 3.0).epsilon(1e-13));
    auto n = p.negated();
    CHECK(n(2.0) == doctest::Approx(-4.0));
    CHECK(n.square_integral(0.0, 1.0) == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("spec validation") {
    OperatorSpec spec = make_strip(1.0, 2.0);
    CHECK_NOTHROW(spec.validate());
    spec.atoms = {{0.5, 1.0}, {0.5, 2.0}};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.atoms = {{0.5, -1.0}};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.atoms = {{2.0, 1.0}};  // at the upper boundary
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.atoms = {{0.0, 2.0}, {1.0, 1.0}};
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.atom_at_zero() == 2.0);
}

TEST_CASE("family constructors") {
    OperatorSpec h = make_homogeneous(2.0, 1.0, 0.5);
    CHECK(h.R == kInfiniteR);
    CHECK(h.a_density(3.0) == doctest::Approx(4.0 * 9.0).epsilon(1e-13));  // p^2 y^2
    CHECK(h.b(2.0) == doctest::Approx(-2.0).epsilon(1e-13));               // -q y^{1/mu - 1} = -y
    OperatorSpec a = make_atom_spec(1.5, 0.75);
    CHECK(a.atoms.size() == 1);
    CHECK(a.a_density.is_zero());
    OperatorSpec hp = make_halfplane();
    CHECK(hp.a_density(9.0) == 1.0);
    CHECK(hp.R == kInfiniteR);
}

TEST_CASE("json round trip preserves the spec") {
    OperatorSpec spec = make_homogeneous(1.0, -0.5, 1.25);
    spec.atoms = {{0.0, 0.5}, {2.0, 1.0}};
    auto j = spec.to_json();
    OperatorSpec back = OperatorSpec::from_json(j);
    CHECK(back.hash() == spec.hash());
    CHECK(back.R == kInfiniteR);
    CHECK(back.a_density(1.7) == doctest::Approx(spec.a_density(1.7)).epsilon(1e-15));
    CHECK(back.b(0.3) == doctest::Approx(spec.b(0.3)).epsilon(1e-15));

    OperatorSpec strip = make_strip(2.0, 1.5);
    CHECK(OperatorSpec::from_json(strip.to_json()).hash() == strip.hash());
}

TEST_CASE("json family shortcuts") {
    auto spec = OperatorSpec::from_json({{"family", "homogeneous"}, {"p", 1.0}, {"q", 0.0}, {"mu", 1.0}});
    CHECK(spec.a_density(5.0) == doctest::Approx(1.0));
    CHECK(spec.b.is_zero());
    auto strip = OperatorSpec::from_json({{"family", "strip"}, {"a0", 1.0}, {"R", 1.0}});
    CHECK(strip.R == 1.0);
    auto atom = OperatorSpec::from_json({{"family", "atom"}, {"w", 1.0}, {"y0", 1.0}});
    CHECK(atom.atoms.size() == 1);
    CHECK_THROWS_AS(OperatorSpec::from_json({{"family", "nope"}}), std::invalid_argument);
}

TEST_CASE("mesh construction: nodes, atoms, averages") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    spec.atoms = {{0.37, 2.0}};
    Mesh m = build_mesh(spec, 1.0, 32, 1.15, {0.61});
    REQUIRE(m.nodes.size() == m.cells.size() + 1);
    REQUIRE(m.node_atom.size() == m.nodes.size());
    CHECK(m.nodes.front() == 0.0);
    CHECK(m.y_max() == 1.0);
    bool atom_node = false, req_node = false;
    double watom = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        if (m.nodes[i] == 0.37) {
            atom_node = true;
            watom = m.node_atom[i];
        }
        if (m.nodes[i] == 0.61) req_node = true;
        if (i) CHECK(m.nodes[i] > m.nodes[i - 1]);
    }
    CHECK(atom_node);
    CHECK(req_node);
    CHECK(watom == 2.0);
    for (const auto& c : m.cells) {
        CHECK(c.a_avg == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(c.b_avg == 0.0);
        CHECK(c.b2_avg == 0.0);
    }
    CHECK(m.cells[m.locate(0.5)].lo <= 0.5);
    CHECK(m.cells[m.locate(0.5)].hi >= 0.5);
}

TEST_CASE("mesh averages are exact for the homogeneous family") {
    OperatorSpec spec = make_homogeneous(1.0, 1.0, 0.5);  // a = y^2, b = -y
    Mesh m = build_mesh(spec, 2.0, 16);
    const MeshCell& c0 = m.cells.front();
    CHECK(c0.lo == 0.0);
    double h = c0.hi;
    CHECK(c0.a_avg == doctest::Approx(h * h / 3.0).epsilon(1e-13));
    CHECK(c0.b_avg == doctest::Approx(-h / 2.0).epsilon(1e-13));
    CHECK(c0.b2_avg == doctest::Approx(h * h / 3.0).epsilon(1e-13));
}

TEST_CASE("mesh refinement nests nodes") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    spec.atoms = {{0.25, 1.0}};
    Mesh m = build_mesh(spec, 1.0, 8);
    Mesh f = refine_mesh(spec, m);
    REQUIRE(f.cells.size() == 2 * m.cells.size());
    for (std::size_t j = 0; j < m.nodes.size(); ++j) {
        CHECK(f.nodes[2 * j] == m.nodes[j]);
        CHECK(f.node_atom[2 * j] == m.node_atom[j]);
    }
}

TEST_CASE("spec hash distinguishes operators") {
    CHECK(make_strip(1.0, 1.0).hash() != make_strip(1.0, 2.0).hash());
    CHECK(make_homogeneous(1, 0, 1).hash() != make_homogeneous(1, 0, 0.99).hash());
    CHECK(make_strip(1.0, 1.0).hash() == make_strip(1.0, 1.0).hash());
}
