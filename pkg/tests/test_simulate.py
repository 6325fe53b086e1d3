import itertools

import numpy as np
import pytest

from itergauge.abelian import InvalidArgument, ResourceLimit, make_group, subgroup_closure
from itergauge.lattice import square_torus, triangular_torus
from itergauge.pauli import CHAR, GROUP, DenseState, PauliOperator, SiteRegistry, apply_dense, single_site
from itergauge.simulate import (
    ZeroNorm,
    boundary_state,
    charged_boundary_state,
    emergent_state,
    expectation,
    plus_H,
    uniform_H,
)
from itergauge.symmetry import (
    apply_gauging_dense,
    checks_lss,
    checks_sierpinski,
    checks_zero_form,
    emergent_generators,
    primal_spec,
    valid_generators,
)

Z2 = make_group([2])
Z4 = make_group([4])


def _reg(group, kinds):
    return SiteRegistry.build(group, [(f"s{i}", k) for i, k in enumerate(kinds)])


class TestPlusH:
    def test_extremes(self):
        reg = _reg(Z4, [CHAR])
        full = plus_H(reg, "s0", subgroup_closure(Z4, [(1,)]))
        assert np.allclose(full.vector(), [1, 0, 0, 0])
        triv = plus_H(reg, "s0", subgroup_closure(Z4, []))
        assert np.allclose(triv.vector(), np.full(4, 0.5))

    def test_stabilized_by_h(self):
        for orders, gens in (([4], [(2,)]), ([2, 2], [(1, 0)]), ([6], [(3,)]), ([6], [(2,)])):
            g = make_group(orders)
            H = subgroup_closure(g, gens)
            reg = _reg(g, [CHAR])
            st = plus_H(reg, "s0", H)
            for h in H.members:
                out = apply_dense(single_site(st.registry, "s0", g.zero(), h), st)
                assert np.allclose(out.vector(), st.vector())
            assert abs(st.norm() - 1) < 1e-12

    def test_kind_errors(self):
        with pytest.raises(InvalidArgument):
            plus_H(_reg(Z2, [GROUP]), "s0", subgroup_closure(Z2, []))
        with pytest.raises(InvalidArgument):
            uniform_H(_reg(Z2, [CHAR]), "s0", subgroup_closure(Z2, []))


class TestBoundaryState:
    def test_full_group_is_product_of_trivial_characters(self):
        s = checks_zero_form(square_torus(2, 2))
        st = boundary_state(s, None, "matter")
        assert st.dump(1e-12) == [(((0,),) * 4, pytest.approx(1.0))]

    @pytest.mark.parametrize("system,start", [
        (checks_zero_form(square_torus(2, 2), make_group([3])), "matter"),
        (checks_lss(square_torus(2, 2)), "matter"),
        (checks_sierpinski(triangular_torus(3)), "matter"),
        (checks_zero_form(square_torus(2, 2)), "gauge"),
    ])
    def test_symmetric(self, system, start):
        gens = valid_generators(system) if start == "matter" else emergent_generators(system)
        for H in (None, []):
            st = boundary_state(system, H, start)
            for gen in gens:
                op = PauliOperator(st.registry, 0, {i: (system.group.zero(), e) for i, e in enumerate(gen.exponents) if any(e)})
                assert np.allclose(apply_dense(op, st).vector(), st.vector(), atol=1e-12)

    def test_order_parameter(self):
        s = checks_zero_form(square_torus(2, 2), Z4)
        H = subgroup_closure(Z4, [(2,)])
        st = boundary_state(s, H, "matter")
        for chi in range(4):
            op = PauliOperator(st.registry, 0, {0: ((-chi % 4,), (0,)), 1: ((chi,), (0,))})
            val = expectation(st, op)
            if chi in (0, 2):
                assert abs(val - 1) < 1e-12
            else:
                assert abs(val) < 1 - 1e-9

    def test_cap(self):
        with pytest.raises(ResourceLimit):
            boundary_state(checks_zero_form(square_torus(3, 3)), None, "matter", cap=2**8)


class TestEmergentState:
    def test_depth_one_is_single_gauging(self):
        s = checks_zero_form(square_torus(2, 2))
        psi = boundary_state(s, [], "matter")
        _, st = emergent_state(s, 1, "matter", psi, normalize=False)
        direct = apply_gauging_dense(primal_spec(s), psi)
        assert np.allclose(st.vector(), direct.vector(), atol=1e-14)

    @pytest.mark.parametrize("system,start", [
        (checks_zero_form(square_torus(2, 2)), "matter"),
        (checks_zero_form(square_torus(2, 2)), "gauge"),
        (checks_lss(square_torus(2, 2)), "matter"),
        (checks_sierpinski(triangular_torus(3)), "matter"),
    ])
    def test_charged_boundary_vanishes(self, system, start):
        depth = 1 if system.model == "sierpinski" else 2
        psi = charged_boundary_state(system, None, start)
        with pytest.raises(ZeroNorm) as info:
            emergent_state(system, depth, start, psi)
        assert info.value.norm < 1e-12

    def test_wrong_registry(self):
        s = checks_zero_form(square_torus(2, 2))
        with pytest.raises(InvalidArgument):
            emergent_state(s, 2, "gauge", boundary_state(s, None, "matter"))

    def test_cap(self):
        s = checks_zero_form(square_torus(2, 2))
        with pytest.raises(ResourceLimit):
            emergent_state(s, 2, "matter", cap=2**12)

    def test_inner_products_preserved_on_symmetric_sector(self):
        s = checks_zero_form(square_torus(2, 2))
        reg = boundary_state(s).registry
        # basis of the symmetric sector: total character trivial
        basis = []
        for labels in itertools.product(range(2), repeat=4):
            if sum(labels) % 2 == 0:
                vec = np.zeros((2,) * 4, dtype=complex)
                vec[labels] = 1
                basis.append(vec)
        outs = [emergent_state(s, 2, "matter", DenseState(reg, b), normalize=False)[1].vector() for b in basis]
        gram = np.array([[np.vdot(x, y) for y in outs] for x in outs])
        ratio = gram[0, 0]
        assert ratio > 0
        assert np.allclose(gram, ratio * np.eye(len(basis)), atol=1e-12)

    def test_projectors_idempotent(self):
        s = checks_lss(square_torus(2, 2), make_group([3]))
        rng = np.random.default_rng(5)
        spec = primal_spec(s)
        vec = rng.normal(size=3**8) + 1j * rng.normal(size=3**8)
        state = DenseState.from_vector(spec.registry, vec)
        once = state
        for pos in range(len(spec.domain)):
            once = spec.project(once, pos)
        twice = once
        for pos in range(len(spec.domain)):
            twice = spec.project(twice, pos)
        assert np.max(np.abs(once.amplitudes - twice.amplitudes)) < 1e-12


class TestExpectation:
    def test_examples(self):
        reg = _reg(Z2, [GROUP, GROUP])
        st = DenseState.basis(reg, [(0,), (1,)])
        assert expectation(st, PauliOperator(reg, 0, {})) == 1
        assert abs(expectation(st, single_site(reg, "s0", (1,), (0,)))) < 1e-15
        assert abs(expectation(st, single_site(reg, "s1", (0,), (1,))) + 1) < 1e-15

    def test_registry_mismatch(self):
        st = DenseState.basis(_reg(Z2, [GROUP]), [(0,)])
        with pytest.raises(InvalidArgument):
            expectation(st, PauliOperator(_reg(Z2, [GROUP, GROUP]), 0, {}))
