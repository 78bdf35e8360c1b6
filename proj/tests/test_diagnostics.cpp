#include <algorithm>
#include <cmath>
#include <string>

#include "angio/cases.hpp"
#include "angio/diagnostics.hpp"
#include "angio/errors.hpp"
#include "angio/model.hpp"
#include "angio/scheme.hpp"
#include "doctest.h"
#include "test_meshes.hpp"

using namespace angio;

TEST_SUITE("diagnostics") {

TEST_CASE("total_mass is the lumped inner product with 1") {
    const SimplicialMesh m = toy::unit_square();
    ModelParams p;
    const MeshOperators ops = make_operators(m, p);

    CHECK(total_mass(ops.w, Vector::Ones(4)) == doctest::Approx(1.0).epsilon(1e-14));

    Vector f(4);
    f << 0.3, -1.2, 0.05, 2.0;
    double brute = 0.0;
    for (int j = 0; j < 4; ++j) brute += ops.w[j] * f[j];
    CHECK(total_mass(ops.w, f) == doctest::Approx(brute).epsilon(1e-14));

    CHECK_THROWS_AS(total_mass(ops.w, Vector::Zero(3)), NumericalAbort);
}

TEST_CASE("ch_energy: constants, the zero state, and the barrier") {
    const SimplicialMesh m = toy::unit_square();
    ModelParams p;
    const MeshOperators ops = make_operators(m, p);

    // constant fields carry no gradient energy, so E = Pi |Omega| psi(const)
    const Vector flat = Vector::Constant(4, p.phi_bar);
    CHECK(ch_energy(ops, p, flat) ==
          doctest::Approx(p.Pi * psi(p.phi_bar, p.phi_bar)).epsilon(1e-12));

    CHECK(ch_energy(ops, p, Vector::Zero(4)) == 0.0);

    Vector hot = Vector::Constant(4, 0.5);
    hot[2] = 1.0;  // exactly at the log barrier
    CHECK_THROWS_AS(ch_energy(ops, p, hot), NumericalAbort);
}

TEST_CASE("ch_energy matches a dense replica on an irregular mesh") {
    const SimplicialMesh m = toy::skewed_quad();
    ModelParams p;
    const MeshOperators ops = make_operators(m, p);

    Vector phi(4);
    phi << 0.61, 0.02, 0.38, 0.80;
    const Vector w = toy::dense_lumped(m);
    const Matrix K = toy::dense_stiffness(m, TensorField::Identity);
    double bulk = 0.0;
    for (int j = 0; j < 4; ++j) bulk += w[j] * p.Pi * psi(phi[j], p.phi_bar);
    const double expected = bulk + 0.5 * p.Pi * p.eps * p.eps * phi.dot(K * phi);

    CHECK(ch_energy(ops, p, phi) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("energy_addends: every weighted term against its closed form") {
    const SimplicialMesh m = toy::unit_square();
    ModelParams p;
    const MeshOperators ops = make_operators(m, p);
    SimulationState s = healthy_state(4);

    SUBCASE("all weights zero") {
        s.phi_a = Vector::Constant(4, 0.3);
        const EnergyAddends out = energy_addends(ops, p, s, {});
        CHECK(out.entropy_a == 0.0);
        CHECK(out.grad_n == 0.0);
        CHECK(out.grad_c == 0.0);
        CHECK(out.chemo_v == 0.0);
        CHECK(out.chemo_a == 0.0);
        CHECK(out.total() == 0.0);
    }

    SUBCASE("vasculature entropy") {
        EnergyWeights wts;
        wts.k_a = 0.5;
        s.phi_a = Vector::Ones(4);  // a (log a - 1) = -1
        CHECK(energy_addends(ops, p, s, wts).entropy_a ==
              doctest::Approx(-p.Pi * 0.5).epsilon(1e-14));

        s.phi_a = Vector::Zero(4);  // the integrand vanishes at a <= 0
        CHECK(energy_addends(ops, p, s, wts).entropy_a == 0.0);

        s.phi_a << 0.5, 0.0, 1.0, 0.25;
        const double e = ops.w[0] * 0.5 * (std::log(0.5) - 1.0) + ops.w[2] * (-1.0) +
                         ops.w[3] * 0.25 * (std::log(0.25) - 1.0);
        CHECK(energy_addends(ops, p, s, wts).entropy_a ==
              doctest::Approx(p.Pi * 0.5 * e).epsilon(1e-14));
    }

    SUBCASE("gradient energies use the diffusion tensor") {
        EnergyWeights wts;
        wts.d_n = 2.0;
        wts.d_c = 4.0;
        s.n = m.nodes().col(0);  // n = x, |grad n|^2 integrates to 1
        s.c = m.nodes().col(1);
        const EnergyAddends out = energy_addends(ops, p, s, wts);
        CHECK(out.grad_n == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.grad_c == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("chemotactic couplings") {
        EnergyWeights wts;
        wts.chi_v = 2.0;
        wts.chi_a = 3.0;
        s.n = Vector::Constant(4, 0.5);
        s.phi_v = Vector::Constant(4, 0.6);
        s.c = Vector::Ones(4);
        s.phi_a = Vector::Constant(4, 0.25);
        const EnergyAddends out = energy_addends(ops, p, s, wts);
        CHECK(out.chemo_v == doctest::Approx(-2.0 * 0.3).epsilon(1e-12));
        CHECK(out.chemo_a == doctest::Approx(-3.0 * 0.25).epsilon(1e-12));
        CHECK(out.total() == out.chemo_v + out.chemo_a);
    }
}

TEST_CASE("step report CSV header and row formatting") {
    const std::string header = StepReport::csv_header();
    CHECK(header ==
          "step,t,dt,outer_iters,halvings,mass_v,mass_d,mass_a,mass_n,mass_c,"
          "min_v,max_v,min_d,max_d,min_a,max_a,min_n,max_n,min_c,max_c,max_solid,energy");
    CHECK(std::count(header.begin(), header.end(), ',') == 21);

    StepReport r;
    r.step = 3;
    r.t = 1.0 / 3.0;
    r.dt = 0.125;
    r.outer_iters = 7;
    r.halvings = 1;
    r.mass_v = 1;
    r.mass_d = 2;
    r.mass_a = 3;
    r.mass_n = 4;
    r.mass_c = 5;
    r.min_v = 0;
    r.max_v = 0.6;
    r.min_d = 0;
    r.max_d = 0.1;
    r.min_a = 0;
    r.max_a = 0.04;
    r.min_n = 0.07;
    r.max_n = 1;
    r.min_c = 0;
    r.max_c = 0.9;
    r.max_solid = 0.64;
    r.energy = -1.75;
    const std::string row = r.csv_row();
    CHECK(row ==
          "3,0.333333333,0.125,7,1,1,2,3,4,5,0,0.6,0,0.1,0,0.04,0.07,1,0,0.9,0.64,-1.75");
    CHECK(std::count(row.begin(), row.end(), ',') == 21);
    CHECK(r.csv_row() == row);  // formatting is deterministic
}

TEST_CASE("make_step_report assembles the diagnostics of the committed state") {
    const SimplicialMesh m = toy::unit_square();
    ModelParams p;
    const MeshOperators ops = make_operators(m, p);

    SimulationState s = healthy_state(4);
    s.t = 0.375;
    s.phi_v << 0.1, 0.2, 0.3, 0.05;
    s.phi_d << 0.0, 0.1, 0.0, 0.02;
    s.phi_a << 0.04, 0.0, 0.0, 0.5;
    s.n << 1.0, 0.9, 0.07, 1.0;
    s.c << 0.0, 0.3, 0.9, 0.01;
    AdvanceReport adv;
    adv.dt = 0.0949712;
    adv.outer_iters = 6;
    adv.halvings = 2;

    const StepReport r = make_step_report(11, s, ops, p, adv);
    CHECK(r.step == 11);
    CHECK(r.t == 0.375);
    CHECK(r.dt == adv.dt);
    CHECK(r.outer_iters == 6);
    CHECK(r.halvings == 2);
    CHECK(r.mass_v == total_mass(ops.w, s.phi_v));
    CHECK(r.mass_d == total_mass(ops.w, s.phi_d));
    CHECK(r.mass_a == total_mass(ops.w, s.phi_a));
    CHECK(r.mass_n == total_mass(ops.w, s.n));
    CHECK(r.mass_c == total_mass(ops.w, s.c));
    CHECK(r.min_v == 0.05);
    CHECK(r.max_v == 0.3);
    CHECK(r.max_d == 0.1);
    CHECK(r.min_n == 0.07);
    CHECK(r.max_c == 0.9);
    CHECK(r.max_solid == (s.phi_v + s.phi_d + s.phi_a).maxCoeff());
    CHECK(r.energy == ch_energy(ops, p, s.phi_v + s.phi_d));

    // the Lyapunov functional tracks the tumor fraction only
    SimulationState s2 = s;
    s2.phi_a = Vector::Constant(4, 0.9);
    const StepReport r2 = make_step_report(11, s2, ops, p, adv);
    CHECK(r2.energy == r.energy);
    CHECK(r2.max_solid > r.max_solid);
}

TEST_CASE("constraint_report verdicts") {
    SimulationState s = healthy_state(4);

    SUBCASE("healthy tissue passes") {
        const ConstraintReport r = constraint_report(s);
        CHECK(r.ok_positivity);
        CHECK(r.ok_saturation);
        CHECK(r.ok_boxes);
        CHECK(r.ok());
        CHECK(r.min_v == 0.0);
        CHECK(r.max_n == 1.0);
    }

    SUBCASE("any negative phase breaks positivity") {
        s.phi_v[0] = -1e-16;
        const ConstraintReport r = constraint_report(s);
        CHECK_FALSE(r.ok_positivity);
        CHECK(r.ok_saturation);
        CHECK(r.ok_boxes);
        CHECK_FALSE(r.ok());
    }

    SUBCASE("the box check has a 1e-12 slack") {
        s.n[1] = -1e-13;
        CHECK(constraint_report(s).ok_boxes);
        s.n[1] = -1e-6;
        CHECK_FALSE(constraint_report(s).ok_boxes);
        s.n[1] = 1.0;
        s.phi_a[2] = 1.0 + 1e-13;
        CHECK(constraint_report(s).ok_boxes);
        s.phi_a[2] = 1.0 + 1e-11;
        CHECK_FALSE(constraint_report(s).ok_boxes);
    }

    SUBCASE("saturation is strict") {
        s.phi_v[3] = 0.6;
        s.phi_d[3] = 0.4;
        CHECK_FALSE(constraint_report(s).ok_saturation);
        s.phi_d[3] = 0.4 - 1e-12;
        const ConstraintReport r = constraint_report(s);
        CHECK(r.ok_saturation);
        CHECK(r.max_T < 1.0);
    }

    SUBCASE("solid overshoot is reported but judged elsewhere") {
        s.phi_v[0] = 0.6;
        s.phi_a[0] = 0.5;
        const ConstraintReport r = constraint_report(s);
        CHECK(r.max_solid == doctest::Approx(1.1).epsilon(1e-14));
        CHECK(r.ok_saturation);  // phi_v + phi_d alone stays below 1
    }
}

TEST_CASE("line_probe reproduces P1 fields along a segment") {
    const SimplicialMesh m = toy::unit_square();
    SimulationState s = healthy_state(4);
    s.phi_v = m.nodes().col(0);                                    // = x
    s.phi_d = m.nodes().col(1);                                    // = y
    s.phi_a = Vector::Constant(4, 0.25);                           // constant
    s.n = ((0.3 * m.nodes().col(0) + 0.4 * m.nodes().col(1)).array() + 0.2).matrix();

    SmallVec from(2), to(2);
    from << 0.0, 0.25;
    to << 1.0, 0.25;
    const auto out = line_probe(m, s, from, to, 5);
    REQUIRE(out.size() == 5);
    for (int i = 0; i < 5; ++i) {
        const double x = 0.25 * i;
        CHECK(out[i].inside);
        CHECK(out[i].s == doctest::Approx(x).epsilon(1e-14));
        CHECK(out[i].phi_v == doctest::Approx(x).epsilon(1e-12).scale(1.0));
        CHECK(out[i].phi_d == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(out[i].phi_a == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(out[i].n == doctest::Approx(0.3 + 0.3 * x).epsilon(1e-12));
        CHECK(out[i].c == 0.0);
    }

    // two samples means exactly the endpoints
    const auto ends = line_probe(m, s, from, to, 2);
    REQUIRE(ends.size() == 2);
    CHECK(ends[0].phi_v == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(ends[1].phi_v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("line_probe flags samples outside the mesh and rejects bad input") {
    const SimplicialMesh m = toy::unit_square();
    SimulationState s = healthy_state(4);
    s.phi_v = Vector::Constant(4, 0.7);

    SmallVec from(2), to(2);
    from << 0.5, 0.5;
    to << 1.5, 0.5;
    const auto out = line_probe(m, s, from, to, 5);
    CHECK(out[0].inside);
    CHECK(out[1].inside);
    CHECK(out[2].inside);  // lands on the boundary, within the slack
    CHECK_FALSE(out[3].inside);
    CHECK_FALSE(out[4].inside);
    CHECK(out[3].phi_v == 0.0);  // outside samples report zeros, not extrapolations
    CHECK(out[4].n == 0.0);
    CHECK(out[4].s == doctest::Approx(1.0).epsilon(1e-14));  // arc length still advances

    from << 5.0, 5.0;
    to << 6.0, 5.0;
    for (const auto& ps : line_probe(m, s, from, to, 3)) CHECK_FALSE(ps.inside);

    from << 0.0, 0.0;
    to << 1.0, 1.0;
    CHECK_THROWS_AS(line_probe(m, s, from, to, 1), ConfigError);
    CHECK_THROWS_AS(line_probe(m, s, from, to, 0), ConfigError);

    SmallVec bad(3);
    bad << 0.0, 0.0, 0.0;
    CHECK_THROWS_AS(line_probe(m, s, bad, bad, 4), ConfigError);
}

TEST_CASE("line_probe across the initial sphere") {
    RunConfig cfg;
    cfg.kind = CaseKind::Sphere;
    cfg.dim = 2;
    cfg.box = 10.0;
    cfg.h = 1.0;
    const CaseSetup cs = generate_sphere_case(cfg);

    SmallVec from(2), to(2);
    from << 5.0, 5.0;  // tumor center
    to << 9.5, 5.0;    // healthy tissue
    const auto out = line_probe(cs.mesh, cs.state, from, to, 10);
    REQUIRE(out.size() == 10);
    CHECK(out.front().inside);
    CHECK(out.front().phi_v == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(out.back().inside);
    CHECK(out.back().phi_v == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    for (const auto& ps : out) CHECK(ps.n == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
