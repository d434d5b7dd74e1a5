import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uckl.classes import tau, tau_factorized
from uckl.discretize import (
    DiscreteOperator,
    assemble,
    assemble_kernel,
    dump_matrix,
    one_one_norm,
    p_to_two_lower,
    spectral_norm,
    sup_image_norm,
    thread_count,
)
from uckl.errors import CapacityError, DomainError, NonConvergenceError
from uckl.grid import GridParams, Region
from uckl.kernels import KernelSpec
from uckl.potentials import ConstantBall, Hardy, PotentialPower, sample_on_region

O = (0.0, 0.0, 0.0)
UNIT = Region.ball(O, 1.0)
OMEGA3 = 4 * math.pi / 3
# Bare operator 1_B (-Delta)^{-1} 1_B on the unit ball, pre-run at n = 16.
V_STAR = 0.40874


def ones_kernel(X, Y):
    return np.ones(np.broadcast_shapes(X.shape[:-1], Y.shape[:-1]))


def ones_operator(n=16):
    return assemble_kernel(ones_kernel, lambda p, m: np.ones(len(p)), UNIT, grid=GridParams(n))


def test_constant_kernel_entries_are_cell_volumes():
    op = ones_operator()
    m = (2 / 16) ** 3
    assert op.matrix.shape == (2176, 2176)
    assert np.allclose(op.matrix, m, rtol=0, atol=1e-18)


def test_constant_kernel_spectral_norm_is_volume():
    assert spectral_norm(ones_operator()).value == pytest.approx(OMEGA3, rel=0.05)


def test_constant_kernel_one_one_norm_is_volume():
    assert one_one_norm(ones_operator()).value == pytest.approx(OMEGA3, rel=0.05)


def test_disjoint_regions_skip_diagonal_rule():
    calls = []

    def diag(p, m):
        calls.append(len(p))
        return np.zeros(len(p))

    left = Region.annulus(O, 0.2, 0.5)
    right = Region.annulus(O, 0.5, 0.9)
    op = assemble_kernel(ones_kernel, diag, left, right, grid=GridParams(12))
    assert calls == []
    assert op.matrix.shape[0] > 0 and op.matrix.shape[1] > 0


def test_hardy_multiplier_with_origin_gives_finite_matrix():
    mult = PotentialPower(Hardy(1.0), 0.5)
    op = assemble(KernelSpec(3, 2.0), Region.ball(O, 0.5), left_mult=mult, right_mult=mult,
                  grid=GridParams(9))
    assert np.all(np.isfinite(op.matrix))


def test_assemble_capacity():
    with pytest.raises(CapacityError):
        assemble(KernelSpec(3, 2.0), UNIT, grid=GridParams(40, 5000))


def test_spectral_norm_diagonal():
    est = spectral_norm(np.diag([3.0, 1.0, 2.0]), tol=1e-12)
    assert est.value == pytest.approx(3.0, abs=1e-8)
    assert est.residual <= 1e-12
    assert est.kind == "twoTwo" and not est.lower_bound_only


def test_spectral_norm_rank_one():
    u = np.array([1.0, -2.0, 0.5, 3.0])
    v = np.array([0.3, 0.4, -1.2])
    est = spectral_norm(np.outer(u, v), tol=1e-12)
    assert est.value == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v), abs=1e-8)


def test_spectral_norm_zero_matrix():
    assert spectral_norm(np.zeros((3, 3))).value == 0.0


def test_spectral_norm_nonconvergence_carries_best():
    A = np.diag([1.0, 0.999999, 0.5])
    with pytest.raises(NonConvergenceError) as info:
        spectral_norm(A, tol=1e-15, max_iter=5)
    assert 0.5 < info.value.best.value <= 1.0


def test_spectral_norm_rejects_bad_input():
    with pytest.raises(DomainError):
        spectral_norm(np.eye(2), tol=0)
    with pytest.raises(DomainError):
        spectral_norm(np.array([[np.inf]]))


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-5, 5)))
def test_spectral_norm_matches_svd(A):
    exact = np.linalg.norm(A, 2)
    if exact == 0:
        return
    sv = np.linalg.svd(A, compute_uv=False)
    if len(sv) > 1 and sv[1] > 0.999 * sv[0]:
        return  # near-degenerate top pair converges too slowly for a unit test
    est = spectral_norm(A, tol=1e-12, max_iter=100000)
    assert est.value <= exact * (1 + 1e-12)
    assert est.value == pytest.approx(exact, rel=1e-6)


def test_one_one_norm_examples():
    assert one_one_norm(np.array([[1.0, -2.0], [3.0, 0.5]])).value == 4.0
    op = assemble(KernelSpec(3, 2.0), UNIT, left_mult=lambda x, floor=0: np.zeros(len(x)),
                  grid=GridParams(8))
    assert one_one_norm(op).value == 0.0


def test_one_one_norm_single_point():
    m = 0.01
    op = DiscreteOperator(np.array([[m * 7.0]]), np.zeros((1, 3)), np.zeros((1, 3)),
                          np.array([m]), np.array([m]))
    assert one_one_norm(op).value == pytest.approx(m * 7.0)


def test_sup_image_constant_density():
    rho = 0.25
    B = Region.ball(O, rho)
    dens = sample_on_region(ConstantBall(1.0, 10.0), B, GridParams(24))
    est = sup_image_norm(KernelSpec(3, 2.0), dens, B, GridParams(24))
    assert est.value == pytest.approx(rho**2 / 2, rel=0.05)


def test_sup_image_zero_density():
    B = Region.ball(O, 0.5)
    dens = sample_on_region(ConstantBall(0.0, 10.0), B, GridParams(8))
    assert sup_image_norm(KernelSpec(3, 2.0), dens, B, GridParams(8)).value == 0.0


def test_sup_image_hardy_log_growth():
    B = Region.ball(O, 0.5)
    vals = []
    for n in (8, 16, 32):
        g = GridParams(n, 40000)
        vals.append(sup_image_norm(KernelSpec(3, 2.0), sample_on_region(Hardy(1.0), B, g), B,
                                   g).value)
    steps = np.diff(vals)
    assert np.all(steps == pytest.approx(0.25 * math.log(2), rel=0.2))


def test_p_to_two_examples():
    est = p_to_two_lower(np.diag([2.0, 1.0]), 2.0)
    assert est.value == pytest.approx(2.0, rel=1e-9)
    assert est.lower_bound_only
    c = np.array([[1.0], [-2.0], [2.0]])
    assert p_to_two_lower(c, 1.2).value == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(DomainError):
        p_to_two_lower(c, 1.0)
    with pytest.raises(DomainError):
        p_to_two_lower(c, 2.5)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (4, 3), elements=st.floats(-3, 3)), st.floats(1.05, 2.0))
def test_p_to_two_is_a_lower_bound(A, p):
    """Compare with a brute-force sup over many unit-l^p directions."""
    est = p_to_two_lower(A, p).value
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3, 4000))
    X = np.hstack([X, np.eye(3)])
    X /= np.sum(np.abs(X) ** p, axis=0) ** (1 / p)
    brute = np.max(np.linalg.norm(A @ X, axis=0))
    # |x|_2 <= |x|_p for p <= 2, so the 2->2 norm caps the p->2 norm
    assert est <= np.linalg.norm(A, 2) * (1 + 1e-12) + 1e-12
    assert est >= brute * (1 - 1e-2) - 1e-12


def test_bare_operator_reference_and_refinement():
    spec = KernelSpec(3, 2.0)
    v12 = spectral_norm(assemble(spec, UNIT, grid=GridParams(12))).value
    v16 = spectral_norm(assemble(spec, UNIT, grid=GridParams(16))).value
    v24 = spectral_norm(assemble(spec, UNIT, grid=GridParams(24))).value
    assert v16 == pytest.approx(V_STAR, abs=5e-5)
    assert abs(v24 - v12) / v24 < 0.10


def test_determinism_and_thread_independence(monkeypatch):
    spec = KernelSpec(3, 2.0, 3, 3.0)
    region = Region.annulus(O, 0.1, 0.5)
    monkeypatch.setenv("UCKL_THREADS", "1")
    assert thread_count() == 1
    a = assemble(spec, region, grid=GridParams(16))
    monkeypatch.setenv("UCKL_THREADS", "4")
    assert thread_count() == 4
    b = assemble(spec, region, grid=GridParams(16))
    assert np.array_equal(a.matrix, b.matrix)
    assert spectral_norm(a).value == spectral_norm(b).value


def test_factorization_diagnostic_is_below_tau_and_improves_with_box():
    V = ConstantBall(1.0, 10.0)
    g = GridParams(8, 40000)
    full = tau(V, O, 1.0, 3, g).value
    small = tau_factorized(V, O, 1.0, 3, g, box_factor=2.0).value
    large = tau_factorized(V, O, 1.0, 3, g, box_factor=3.0).value
    assert small < large <= full * (1 + 1e-9)
    assert small > 0.8 * full


def test_half_operator_grid_check():
    with pytest.raises(DomainError):
        tau_factorized(ConstantBall(1.0, 10.0), O, 1.0, 3, GridParams(9))


def test_dump_matrix(tmp_path):
    op = assemble(KernelSpec(3, 2 + 1j), Region.ball(O, 0.5), grid=GridParams(4))
    path = tmp_path / "m.csv"
    dump_matrix(op, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["row", "col", "re", "im"]
    M = np.zeros(op.matrix.shape, complex)
    for r, c, re, im in rows[1:]:
        M[int(r), int(c)] = float(re) + 1j * float(im)
    assert np.array_equal(M, op.matrix)
