import cmath
import random
from fractions import Fraction

import numpy as np
import pytest

from itergauge.abelian import InvalidArgument, make_group, pair
from itergauge.pauli import (
    CHAR,
    GROUP,
    DenseState,
    SiteRegistry,
    apply_dense,
    commutation_phase,
    compose,
    hadamard_conjugate,
    identity,
    single_site,
)


# -- independent dense oracle -------------------------------------------------

def _site_matrix(group, t, d):
    """Matrix of X_t Z_d on one site, from the defining relations."""
    labels = list(group.elements())
    pos = {x: i for i, x in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for x in labels:
        shifted = tuple((a + b) % n for a, b, n in zip(x, t, group.orders))
        m[pos[shifted], pos[x]] = cmath.exp(2j * cmath.pi * float(pair(group, d, x)))
    return m


def _matrix(op):
    reg = op.registry
    zero = reg.group.zero()
    out = np.array([[1.0 + 0j]])
    for i in range(len(reg)):
        t, d = op.ops.get(i, (zero, zero))
        out = np.kron(out, _site_matrix(reg.group, t, d))
    return cmath.exp(2j * cmath.pi * float(op.phase)) * out


def _hadamard_matrix(group):
    labels = list(group.elements())
    n = len(labels)
    u = np.zeros((n, n), dtype=complex)
    for i, g in enumerate(labels):
        for j, chi in enumerate(labels):
            u[i, j] = cmath.exp(2j * cmath.pi * float(pair(group, chi, g))) / np.sqrt(n)
    return u


def _random_op(reg, rng):
    ops = {}
    for i in range(len(reg)):
        if rng.random() < 0.7:
            t = tuple(rng.randrange(n) for n in reg.group.orders)
            d = tuple(rng.randrange(n) for n in reg.group.orders)
            ops[reg.sites[i].id] = (t, d)
    p = identity(reg)
    for s, (t, d) in ops.items():
        p = compose(p, single_site(reg, s, t, d))
    return p


def _registry(orders, kinds):
    return SiteRegistry.build(make_group(orders), [(f"s{i}", k) for i, k in enumerate(kinds)])


REGISTRIES = [
    ([2], [GROUP, CHAR, GROUP]),
    ([3], [CHAR, GROUP]),
    ([4], [GROUP, CHAR]),
    ([2, 2], [CHAR, GROUP]),
    ([2, 3], [GROUP]),
]


class TestExamples:
    def test_single_site(self):
        reg = _registry([2], [GROUP])
        x = single_site(reg, "s0", (1,), (0,))
        assert x.render() == "phase 0/1; site#0: X[1] Z[0]"
        assert single_site(reg, "s0", (0,), (0,)).support == ()
        reg3 = _registry([3], [CHAR])
        p = single_site(reg3, "s0", (1,), (2,))
        assert p.ops[0] == ((1,), (2,))

    def test_label_mismatch(self):
        reg = _registry([2], [GROUP])
        with pytest.raises(InvalidArgument):
            single_site(reg, "s0", (1, 0), (0,))

    def test_zx_sign(self):
        reg = _registry([2], [GROUP])
        z = single_site(reg, "s0", (0,), (1,))
        x = single_site(reg, "s0", (1,), (0,))
        zx = compose(z, x)
        assert zx.phase == Fraction(1, 2)
        assert zx.ops[0] == ((1,), (1,))
        assert compose(zx, identity(reg)) == zx
        assert commutation_phase(z, x) == Fraction(1, 2)

    def test_z3_and_z4_phases(self):
        reg = _registry([3], [GROUP])
        z = single_site(reg, "s0", (0,), (1,))
        x = single_site(reg, "s0", (1,), (0,))
        assert compose(z, x).phase == Fraction(1, 3)
        reg4 = _registry([4], [GROUP])
        z = single_site(reg4, "s0", (0,), (1,))
        x2 = single_site(reg4, "s0", (2,), (0,))
        assert commutation_phase(z, x2) == Fraction(1, 2)
        assert np.allclose(_matrix(z) @ _matrix(x2), -_matrix(x2) @ _matrix(z))

    def test_disjoint_commute(self):
        reg = _registry([3], [GROUP, GROUP])
        a = single_site(reg, "s0", (1,), (2,))
        b = single_site(reg, "s1", (2,), (1,))
        assert commutation_phase(a, b) == 0

    def test_registry_mismatch(self):
        a = identity(_registry([2], [GROUP]))
        b = identity(_registry([3], [GROUP]))
        with pytest.raises(InvalidArgument):
            compose(a, b)
        with pytest.raises(InvalidArgument):
            commutation_phase(a, b)


class TestDenseOracle:
    @pytest.mark.parametrize("orders,kinds", REGISTRIES)
    def test_compose_matches_matrix_product(self, orders, kinds):
        reg = _registry(orders, kinds)
        rng = random.Random(sum(orders))
        for _ in range(20):
            p, q = _random_op(reg, rng), _random_op(reg, rng)
            assert np.allclose(_matrix(compose(p, q)), _matrix(p) @ _matrix(q), atol=1e-12)

    @pytest.mark.parametrize("orders,kinds", REGISTRIES)
    def test_commutation_phase_matches_matrices(self, orders, kinds):
        reg = _registry(orders, kinds)
        rng = random.Random(1 + sum(orders))
        for _ in range(20):
            p, q = _random_op(reg, rng), _random_op(reg, rng)
            phi = commutation_phase(p, q)
            assert phi == (-commutation_phase(q, p)) % 1
            lhs = _matrix(p) @ _matrix(q)
            rhs = cmath.exp(2j * cmath.pi * float(phi)) * _matrix(q) @ _matrix(p)
            assert np.allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("orders,kinds", REGISTRIES)
    def test_associative(self, orders, kinds):
        reg = _registry(orders, kinds)
        rng = random.Random(2 + sum(orders))
        for _ in range(20):
            a, b, c = (_random_op(reg, rng) for _ in range(3))
            assert compose(compose(a, b), c) == compose(a, compose(b, c))

    @pytest.mark.parametrize("orders,kinds", REGISTRIES)
    def test_apply_dense_matches_matrix(self, orders, kinds):
        reg = _registry(orders, kinds)
        rng = np.random.default_rng(3)
        dim = reg.group.order ** len(reg)
        vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        state = DenseState.from_vector(reg, vec)
        prng = random.Random(4)
        for _ in range(10):
            p = _random_op(reg, prng)
            out = apply_dense(p, state)
            assert np.allclose(out.vector(), _matrix(p) @ vec, atol=1e-12)
            assert abs(np.linalg.norm(out.vector()) - np.linalg.norm(vec)) < 1e-9


class TestHadamard:
    def test_examples(self):
        reg = _registry([2], [CHAR])
        z = single_site(reg, "s0", (0,), (1,))
        h = hadamard_conjugate(z, ["s0"])
        assert h.ops[0] == ((1,), (0,)) and h.phase == 0
        assert h.registry.sites[0].kind == GROUP
        assert hadamard_conjugate(identity(reg), ["s0"]).support == ()
        reg3 = _registry([3], [CHAR])
        z1 = single_site(reg3, "s0", (0,), (1,))
        assert hadamard_conjugate(z1, ["s0"]).ops[0] == ((2,), (0,))

    def test_rejects_group_site(self):
        reg = _registry([2], [GROUP])
        with pytest.raises(InvalidArgument):
            hadamard_conjugate(identity(reg), ["s0"])

    @pytest.mark.parametrize("orders", [[2], [3], [4], [2, 2]])
    def test_dense_conjugation_and_homomorphism(self, orders):
        reg = _registry(orders, [CHAR, GROUP, CHAR])
        u = np.kron(np.kron(_hadamard_matrix(reg.group), np.eye(reg.group.order)), _hadamard_matrix(reg.group))
        rng = random.Random(9)
        for _ in range(15):
            p, q = _random_op(reg, rng), _random_op(reg, rng)
            hp = hadamard_conjugate(p, ["s0", "s2"])
            hq = hadamard_conjugate(q, ["s0", "s2"])
            assert np.allclose(_matrix(hp), u @ _matrix(p) @ u.conj().T, atol=1e-12)
            assert hadamard_conjugate(compose(p, q), ["s0", "s2"]) == compose(hp, hq)
            assert commutation_phase(hp, hq) == commutation_phase(p, q)


def test_uniform_z3_diagonal():
    reg = _registry([3], [GROUP])
    state = DenseState.from_vector(reg, np.ones(3) / np.sqrt(3))
    out = apply_dense(single_site(reg, "s0", (0,), (1,)), state)
    w = cmath.exp(2j * cmath.pi / 3)
    assert np.allclose(out.vector(), np.array([1, w, w * w]) / np.sqrt(3))


def test_x_flips_zero():
    reg = _registry([2], [GROUP])
    state = DenseState.basis(reg, [(0,)])
    out = apply_dense(single_site(reg, "s0", (1,), (0,)), state)
    assert np.allclose(out.vector(), [0, 1])
    assert np.allclose(apply_dense(identity(reg), state).vector(), state.vector())


def test_inverse_and_power():
    from itergauge.pauli import inverse, power

    reg = _registry([4, 2], [GROUP, CHAR])
    rng = random.Random(12)
    for _ in range(20):
        p = _random_op(reg, rng)
        assert compose(p, inverse(p)).is_identity()
        assert power(p, 3) == compose(p, compose(p, p))
        assert np.allclose(_matrix(inverse(p)), np.linalg.inv(_matrix(p)), atol=1e-12)
