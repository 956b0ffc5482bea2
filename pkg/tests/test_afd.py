from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubeafd.afd import (
    Approximant,
    DegenerateElement,
    DictionaryExhausted,
    IllConditionedGram,
    OrthoSystem,
    ResidualState,
    ResidualZero,
    SearchConfig,
    afd_run,
    conjugate_model,
    correlation_objective,
    escalate_order,
    gram_normalized,
    mp_run,
    msp_select,
    order_from_count,
    preorthogonalize,
    project_interpolate,
    rate_harness,
)
from tubeafd.hardy_signal import (
    BoundarySamples,
    OctantSignature,
    boundary_values,
    eval_F,
    from_density,
    hardy_project,
    norm_F,
)
from tubeafd.kernels import ip_phi_phi, phi_eval, phi_norm, psi_eval
from tubeafd.numerics import Grid

BOX = SearchConfig(x_range=(-4.0, 4.0), y_range=(0.05, 8.0))
ZERO1 = np.zeros((1, 1), dtype=int)


def atoms(points, coeffs, dim=1):
    points = np.asarray(points, dtype=complex).reshape(-1, dim)
    return Approximant.from_combination(np.zeros(points.shape, dtype=int), points, coeffs)


def brute_gram(alphas, points):
    m = len(alphas)
    return np.array([[ip_phi_phi(alphas[j], points[j], alphas[k], points[k]) for k in range(m)] for j in range(m)])


# escalation ---------------------------------------------------------------------------


def test_order_bracketing():
    assert [order_from_count(l, 2) for l in (1, 2, 3, 4, 6, 7)] == [0, 1, 1, 2, 2, 3]
    assert [order_from_count(l, 1) for l in range(1, 6)] == [0, 1, 2, 3, 4]


def test_escalation_sequences():
    z = np.array([0.5 + 1j])
    assert escalate_order([], z, 1e-8) == (0,)
    hist, used = [], []
    for k in range(4):
        a = escalate_order(hist, z, 1e-8, used=used)
        assert a == (k,)
        hist.append(z)
        used.append(a)
    z2 = np.array([1j, 2j])
    hist, used, seq = [], [], []
    for _ in range(4):
        a = escalate_order(hist, z2, 1e-8, used=used)
        seq.append(a)
        hist.append(z2)
        used.append(a)
    assert seq == [(0, 0), (1, 0), (0, 1), (2, 0)]


def test_escalation_respects_merge_radius_and_cap():
    z = np.array([1j])
    assert escalate_order([z + 1e-3], z, 1e-8) == (0,)
    assert escalate_order([z + 1e-9], z, 1e-8) == (1,)
    with pytest.raises(DictionaryExhausted):
        escalate_order([z, z], z, 0.0, alpha_cap=1)


def test_escalated_system_matches_brute_gram_schmidt():
    z = np.array([0.3 + 0.9j])
    sys_ = OrthoSystem(1)
    for k in range(4):
        sys_.add((k,), z)
    alphas = np.arange(4)[:, None]
    pts = np.repeat(z[None, :], 4, axis=0)
    g = brute_gram(alphas, pts)
    # B = L^{-1} phi with g = L L^H, so the unnormalized coefficient matrix is L^{-1}
    linv = np.linalg.inv(np.linalg.cholesky(g))
    b_unnorm = sys_.coef / phi_norm(alphas, pts.imag)[None, :]
    assert np.max(np.abs(b_unnorm - linv)) < 1e-8 * np.max(np.abs(linv))


# pre-orthogonalization ------------------------------------------------------------------


def test_first_element_is_normalized_kernel():
    row, beta = preorthogonalize(OrthoSystem(1), (0,), [1j])
    assert np.allclose(row, [1.0])
    assert beta == pytest.approx(float(phi_norm([0], [1.0])))


def test_repeated_element_is_degenerate():
    s = OrthoSystem(1)
    s.add((0,), [1j])
    with pytest.raises(DegenerateElement):
        preorthogonalize(s, (0,), [1j])


def test_second_kernel_gain_against_two_by_two_gram():
    s = OrthoSystem(1)
    s.add((0,), [1j])
    _, beta = preorthogonalize(s, (0,), [2j])
    g = brute_gram(np.zeros((2, 1), int), np.array([[1j], [2j]]))
    schur = g[1, 1] - abs(g[1, 0]) ** 2 / g[0, 0]
    assert beta**2 == pytest.approx(schur.real, rel=1e-12)
    gnorm = ip_phi_phi([0], [2j], [0], [1j]) / math.sqrt(g[0, 0].real) / math.sqrt(g[1, 1].real)
    assert beta**2 == pytest.approx(g[1, 1].real * (1 - abs(gnorm) ** 2), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
@settings(max_examples=25)
def test_system_stays_orthonormal(seed, dim):
    r = np.random.default_rng(seed)
    s = OrthoSystem(dim)
    for _ in range(6):
        z = r.uniform(-3, 3, dim) + 1j * r.uniform(0.3, 3, dim)
        try:
            s.add(tuple(r.integers(0, 3, dim)), z)
        except DegenerateElement:
            pass
    assert s.orthonormality_error() < 1e-8


# objective and selection --------------------------------------------------------------------


def test_objective_examples():
    b = np.array([0.4 + 0.8j])
    F = atoms([b], [1.0])
    state = ResidualState(F, OrthoSystem(1), [])
    assert correlation_objective(state, (0,), b[None, :])[0] == pytest.approx(1.0, rel=1e-12)
    far = np.array([[0.4 + 1j * 2.0**-12]])
    assert correlation_objective(state, (0,), far)[0] < 0.05
    s = OrthoSystem(1)
    row = s.add((0,), b)
    done = ResidualState(F, s, [complex(np.conj(row) @ F.inner_psi((0,), b[None, :]))])
    zs = np.array([[0.1 + 0.3j], [-2 + 1j], [3 + 5j]])
    assert np.max(correlation_objective(done, (0,), zs)) <= 1e-8


def test_objective_matches_explicit_residual():
    r = np.random.default_rng(3)
    F = atoms(r.uniform(-2, 2, 3) + 1j * r.uniform(0.5, 2, 3), r.normal(size=3) + 1j * r.normal(size=3))
    model = afd_run(F, 2, 0.0, BOX)
    state = ResidualState(F, OrthoSystem(1), [])
    for a, z in zip(model.alphas, model.points):
        state.system.add(a, z)
    state.coeffs.extend(model.coeffs)
    z = np.array([[0.7 + 1.3j]])
    # explicit residual g = F - F*, correlated with the orthogonalized candidate
    resid_inner = F.inner_psi((0,), z)[0] - model.inner_psi((0,), z)[0]
    q = state.system.projections((0,), z[0])
    expect = abs(resid_inner) / math.sqrt(1 - np.sum(np.abs(q) ** 2))
    assert correlation_objective(state, (0,), z)[0] == pytest.approx(expect, rel=1e-10)


def test_selection_matches_dense_grid_oracle():
    F = atoms([1j, 1 + 2j, -2 + 1j], [1.0, 0.5, 0.25])
    sel = msp_select(ResidualState(F, OrthoSystem(1), []), BOX)
    x = np.linspace(-3, 3, 1201)
    y = np.geomspace(0.2, 5, 1201)
    grid = (x[:, None] + 1j * y[None, :]).ravel()[:, None]
    vals = np.abs(F.inner_psi((0,), grid))
    best = grid[np.argmax(vals), 0]
    assert abs(sel.z[0] - best) < 1e-2
    assert sel.value >= vals.max() - 1e-9


def test_selection_recovers_a_single_atom():
    b = np.array([0.37 + 0.61j])
    sel = msp_select(ResidualState(atoms([b], [1.0]), OrthoSystem(1), []), BOX)
    assert abs(sel.z[0] - b[0]) < 1e-3


def test_refinement_reaches_atom_off_the_lattice():
    b = np.array([1.23 + 0.77j])
    cfg = SearchConfig(x_range=(-4, 4), y_range=(0.05, 8.0), x_points=5, y_points=4)
    lattice = cfg.lattice_axis()
    assert np.min(np.abs(lattice - b[0])) > 0.5
    sel = msp_select(ResidualState(atoms([b], [1.0]), OrthoSystem(1), []), cfg)
    assert abs(sel.z[0] - b[0]) < 1e-3


def test_zero_residual_is_reported():
    with pytest.raises(ResidualZero):
        msp_select(ResidualState(Approximant.empty(1), OrthoSystem(1), []), BOX)


# greedy runs ---------------------------------------------------------------------------------


def test_single_kernel_is_recovered_in_one_step():
    F = atoms([[-0.6 + 1.4j]], [2.0 - 1.0j])
    m = afd_run(F, 3, 1e-6 * F.norm(), BOX)
    assert m.size == 1
    assert abs(m.points[0, 0] - (-0.6 + 1.4j)) < 1e-3
    assert m.residual_norm(F) < 1e-6 * F.norm()


def test_two_dimensional_single_kernel():
    b = np.array([0.5 + 0.6j, -1 + 1.3j])
    F = atoms(b, [1.0], dim=2)
    m = afd_run(F, 1, 0.0, BOX)
    assert np.max(np.abs(m.points[0] - b)) < 1e-3
    assert m.residual_norm(F) < 1e-4


def test_three_kernels_projection_oracle_is_exact():
    pts = [1j, 1 + 2j, -2 + 1j]
    F = atoms(pts, [1.0, 0.5, 0.25])
    proj = project_interpolate(F, pts)
    assert proj.residual_norm(F) < 1e-9 * F.norm()


def test_three_kernels_greedy_decreases():
    F = atoms([1j, 1 + 2j, -2 + 1j], [1.0, 0.5, 0.25])
    m = afd_run(F, 8, 0.0, BOX)
    h = np.asarray(m.residual_history)
    assert np.all(np.diff(h) < 0)
    assert m.residual_norm(F) == pytest.approx(h[-1], rel=1e-6, abs=1e-12)
    assert h[-1] < 0.01 * h[0]


@pytest.mark.xfail(strict=True, reason="greedy first pick lands between the overlapping atoms, so three steps leave a residual of about 3.8e-2")
def test_three_kernels_within_three_steps():
    F = atoms([1j, 1 + 2j, -2 + 1j], [1.0, 0.5, 0.25])
    m = afd_run(F, 3, 0.0, BOX)
    assert m.residual_norm(F) <= 1e-3


def test_sampled_component_history_matches_explicit_residual():
    rep = from_density(
        lambda t: np.exp(-4 * (t - 0.6) ** 2) * (1 + 0.5j * np.sin(3 * t)),
        OctantSignature((1,)),
        [(0.0, 12.0)],
        [4801],
    )
    hist = []

    def check(m, model):
        explicit = norm_F(rep.with_density(rep.density - model.density_on(rep)))
        hist.append((model.residual_history[-1], explicit))

    # heights >= 0.5 keep the model densities negligible past the sampled band
    m = afd_run(rep, 10, 0.0, SearchConfig(x_range=(-3, 3), y_range=(0.5, 4.0)), callback=check)
    h = np.asarray(m.residual_history)
    assert np.all(np.diff(h) < 0)
    # the tracked value comes from energy subtraction, so compare energies
    for tracked, explicit in hist:
        assert abs(tracked**2 - explicit**2) <= 1e-10 * h[0] ** 2


def test_stop_tolerance_and_zero_terms():
    F = atoms([1j, 2 + 1j], [1.0, 0.3])
    m0 = afd_run(F, 0)
    assert m0.size == 0 and m0.residual_history == [pytest.approx(F.norm())]
    m = afd_run(F, 10, 0.5 * F.norm(), BOX)
    assert m.residual_history[-1] <= 0.5 * F.norm() and m.size < 10
    with pytest.raises(ValueError):
        afd_run(F, -1)


# projection onto given points --------------------------------------------------------------------


def test_interpolation_examples():
    r = np.random.default_rng(7)
    F = atoms(r.uniform(-2, 2, 4) + 1j * r.uniform(0.4, 2, 4), r.normal(size=4) + 1j * r.normal(size=4))
    p = np.array([[0.3 + 0.9j]])
    one = project_interpolate(F, p)
    assert one.evaluate_view(p)[0] == pytest.approx(F.evaluate_view(p)[0], rel=1e-12)
    nodes = r.uniform(-2, 2, 6) + 1j * r.uniform(0.4, 2, 6)
    norms = [project_interpolate(F, nodes[:k]).norm() ** 2 for k in range(1, 7)]
    assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))
    full = project_interpolate(F, nodes)
    assert np.max(np.abs(full.evaluate_view(nodes[:, None]) - F.evaluate_view(nodes[:, None]))) < 1e-8


def test_interpolation_with_repeated_nodes_matches_derivatives():
    F = atoms([1j, 1 + 1.5j], [1.0, -0.4j])
    z = np.array([0.2 + 0.8j])
    p = project_interpolate(F, [z, z], eps=1e-9)
    assert p.alphas.ravel().tolist() == [0, 1]
    for a in (0, 1):
        got = p.weights @ np.array([ip_phi_phi([al], [pt], [a], z) / phi_norm([al], [pt.imag]) for al, pt in zip(p.alphas[:, 0], p.points[:, 0])])
        want = F.weights @ np.array([ip_phi_phi([0], [pt], [a], z) / phi_norm([0], [pt.imag]) for pt in F.points[:, 0]])
        assert got == pytest.approx(want, rel=1e-9)


def test_ill_conditioned_nodes_are_rejected():
    with pytest.raises(IllConditionedGram, match="closest points"):
        project_interpolate(atoms([1j], [1.0]), [1j, 1j + 1e-7, 3 + 1j])


# model files and conjugation ------------------------------------------------------------------------


def test_model_json_roundtrip(tmp_path):
    F = atoms([1j, 1 + 2j, -2 + 1j], [1.0, 0.5, 0.25])
    m = afd_run(F, 3, 0.0, BOX)
    m.save(tmp_path / "m.json")
    back = Approximant.load(tmp_path / "m.json")
    w = np.array([[0.3 + 0.0j], [1.5 + 0.2j]])
    assert np.allclose(back.evaluate(w), m.evaluate(w), rtol=1e-13, atol=0)
    assert back.residual_history == m.residual_history
    (tmp_path / "bad.json").write_text('{"dim": 1}')
    with pytest.raises(ValueError):
        Approximant.load(tmp_path / "bad.json")


def test_model_evaluation_is_rational():
    F = atoms([0.5 + 1j], [1.0])
    w = np.array([[0.0 + 0j], [2.0 + 0j]])
    assert np.allclose(F.evaluate(w), psi_eval([0], [0.5 + 1j], w), rtol=1e-14)
    assert np.allclose(F.evaluate(w), phi_eval([0], [0.5 + 1j], w) / phi_norm([0], [1.0]))
    assert np.all(Approximant.empty(1).evaluate(w) == 0)


def test_conjugate_of_one_atom_model():
    m = atoms([0.7 + 1.1j], [2 - 3j])
    c = conjugate_model(m)
    assert c.sigma == OctantSignature((-1,))
    assert np.allclose(c.natural_points(), [[0.7 - 1.1j]])
    assert np.allclose(c.coeffs, [2 + 3j])
    m2 = Approximant.from_combination([[1, 0]], [[1j, 2j]], [1.0], OctantSignature((1, 1)))
    assert conjugate_model(m2).sigma == OctantSignature((-1, -1))
    with pytest.warns(UserWarning):
        conjugate_model(m, declared_real=False)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
@settings(max_examples=25)
def test_conjugate_model_values(seed, dim):
    r = np.random.default_rng(seed)
    k = 3
    m = Approximant(
        dim,
        OctantSignature(tuple(r.choice([-1, 1], dim))),
        r.integers(0, 3, (k, dim)),
        r.uniform(-2, 2, (k, dim)) + 1j * r.uniform(0.3, 2, (k, dim)),
        r.normal(size=k) + 1j * r.normal(size=k),
        np.eye(k) + 0.1 * np.triu(r.normal(size=(k, k)), 1),
    )
    c = conjugate_model(m)
    w = r.uniform(-3, 3, (5, dim)) + 0j
    assert np.allclose(c.evaluate(w), np.conj(m.evaluate(w)), rtol=1e-12, atol=1e-15)


def test_real_signal_models_sum_to_real_values():
    g = Grid.symmetric(32.0, 1024)
    x = g.axes()[0]
    s = BoundarySamples(g, 2 / (1 + x**2) + 1 / (1 + (x - 2) ** 2) + 0j, True)
    plus = hardy_project(s, OctantSignature((1,)))
    model = afd_run(plus, 4, 0.0, SearchConfig.for_grid(g))
    both = model.evaluate(x[:, None]) + conjugate_model(model).evaluate(x[:, None])
    assert np.max(np.abs(both.imag)) < 1e-10


# matching pursuit ----------------------------------------------------------------------------------------


def test_mp_single_atom():
    F = atoms([[0.2 + 0.9j]], [1.5])
    m = mp_run(F, 3, BOX, alpha_cap=2)
    assert m.residual_norm(F) < 1e-6 * F.norm()


def test_mp_bookkeeping_and_dominance():
    r = np.random.default_rng(11)
    F = atoms(r.uniform(-2, 2, 4) + 1j * r.uniform(0.4, 2, 4), r.normal(size=4) + 1j * r.normal(size=4))
    mp = mp_run(F, 6, BOX, alpha_cap=0)
    assert mp.residual_norm(F) == pytest.approx(mp.residual_history[-1], rel=1e-8)
    afd = afd_run(F, 6, 0.0, BOX)
    for a, b in zip(afd.residual_history, mp.residual_history):
        assert a <= b + 1e-12


# rate harness ---------------------------------------------------------------------------------------------


def test_rate_one_atom():
    rep = rate_harness(1, [1.0], 3, seed=0)
    assert rep.rows[0][1] < 1e-6 and rep.rows[0][2] == pytest.approx(1.0)
    assert not rep.violations


def test_rate_geometric_coefficients_and_scaling():
    mags = [2.0 ** -(j + 1) for j in range(10)]
    a = rate_harness(10, mags, 12, seed=4)
    assert not a.violations
    b = rate_harness(10, [2 * v for v in mags], 12, seed=4)
    for (m1, r1, b1), (m2, r2, b2) in zip(a.rows, b.rows):
        assert b2 == pytest.approx(2 * b1)
        # the simplex stopping rule is absolute, so selections agree only to its tolerance
        assert r2 == pytest.approx(2 * r1, rel=1e-4, abs=1e-12)
    # tabulated residuals agree with an explicit residual of the final model
    assert a.model.residual_norm(a.target) == pytest.approx(a.rows[a.stopped_at - 1][1], rel=1e-6, abs=1e-10)
