"""Angle tailoring: residual conditions, Newton roots, contour tracing.

Root coordinates and leftover residuals were frozen from solver runs that
were cross-checked against a numpy.linalg.eigh reconstruction of the same
dressed words.
"""

import numpy as np
import pytest

from spinqec.codewords import expectation, make_codeword, offdiag_element
from spinqec.linalg import NumericalError, PreconditionError
from spinqec.spin import spin_operators
from spinqec.tailor import (
    EmptyContourError,
    TailoringProblem,
    field_sweep_tailoring,
    find_roots,
    newton_solve,
    scan_common_zero_cells,
    solve_full_tailoring_92,
    solve_partial_tailoring_72,
    trace_zero_contour,
)

# frozen solver roots (eps1, eps2) and the residual left over by design
PARTIAL_72_ROOTS = {
    0.5: (-3.055034798e-05, 2.965443521e-05, 7.770234310e-06),
    1.0: (-7.578501164e-06, 7.467957585e-06, 9.853316278e-07),
    2.0: (-1.887521610e-06, 1.873796714e-06, 1.240443028e-07),
}
BI_ROOT_1T = (-2.396351951977e-03, 1.773512305037e-03)


def test_evaluate_is_vectorised(bi):
    problem = TailoringProblem("tailored-9/2", bi, 1.0)
    grid = np.linspace(-0.01, 0.01, 5)
    e1, e2 = np.meshgrid(grid, grid, indexing="ij")
    vals = problem.evaluate("diag-IZ", e1, e2)
    assert vals.shape == (5, 5)
    one = problem.evaluate("diag-IZ", grid[1], grid[3])
    assert np.isclose(vals[1, 3], one, rtol=1e-12)


def test_conditions_match_direct_expectations(sb, bi):
    # diag-IZ must equal the dressed-word <I_Z> difference, entry for entry
    jx72, _, jz72 = spin_operators(3.5)
    jx92, jy92, jz92 = spin_operators(4.5)
    for system, family, jz, jx in (
        (sb, "distorted-7/2", jz72, jx72),
        (bi, "tailored-9/2", jz92, jx92),
    ):
        problem = TailoringProblem(family, system, 1.0)
        iz = np.kron(np.eye(2), jz)
        ixix = np.kron(np.eye(2), jx @ jx)
        for eps in ((0.0, 0.0), (0.004, -0.003)):
            cw = make_codeword(family, system, 1.0, *eps)
            e0, e1 = expectation(cw, iz)
            assert np.isclose(
                problem.evaluate("diag-IZ", *eps), (e0 - e1).real, atol=1e-12
            )
            got = problem.evaluate("offdiag-IXIX", *eps)
            ref = offdiag_element(cw, ixix)
            assert np.isclose(abs(got), abs(ref), atol=1e-12)


def test_newton_on_linear_system():
    funcs = (lambda x, y: x + y - 0.01, lambda x, y: x - y + 0.002)
    root, converged, iters, res = newton_solve(funcs, (0.0, 0.0))
    assert converged and iters <= 3 and res < 1e-13
    np.testing.assert_allclose(root, (0.004, 0.006), atol=1e-12)


def test_newton_respects_box():
    funcs = (lambda x, y: x - 1.0, lambda x, y: y - 1.0)  # root far outside
    _, converged, _, _ = newton_solve(funcs, (0.0, 0.0), box=0.05)
    assert not converged


def test_find_roots_on_circle_and_line():
    r2 = 2.0e-4
    funcs = (lambda x, y: x * x + y * y - r2, lambda x, y: x - y)
    roots = find_roots(funcs, box=0.05)
    assert len(roots) == 2
    a = np.sqrt(r2 / 2.0)
    got = sorted((round(x[0], 10), round(x[1], 10)) for x, _, _ in roots)
    np.testing.assert_allclose(got[0], (-a, -a), atol=1e-9)
    np.testing.assert_allclose(got[1], (a, a), atol=1e-9)


def test_trace_zero_contour_line_and_circle():
    polys = trace_zero_contour(lambda x, y: x + y - 0.0031, box=0.05, step=0.01)
    assert len(polys) >= 1
    allv = np.vstack(polys)
    assert np.max(np.abs(allv[:, 0] + allv[:, 1] - 0.0031)) < 1e-9
    # the traced set spans the whole box diagonal
    assert allv[:, 0].min() < -0.045 and allv[:, 0].max() > 0.045

    r = 0.0213
    polys = trace_zero_contour(
        lambda x, y: x * x + y * y - r * r, box=0.05, step=0.005
    )
    verts = np.vstack(polys)
    radii = np.hypot(verts[:, 0], verts[:, 1])
    np.testing.assert_allclose(radii, r, atol=1e-8)


def test_trace_zero_contour_errors():
    with pytest.raises(EmptyContourError):
        trace_zero_contour(lambda x, y: x + y + 10.0, box=0.05)
    with pytest.raises(NumericalError):
        trace_zero_contour(lambda x, y: 0.0 * x, box=0.05)


def test_scan_common_zero_cells():
    cells = scan_common_zero_cells(
        (lambda x, y: x, lambda x, y: y), box=0.05, n=100
    )
    assert len(cells) >= 1
    assert all(np.hypot(cx, cy) < 2.0 * 0.05 / 50 for cx, cy in cells)
    # two parallel lines never meet
    none = scan_common_zero_cells(
        (lambda x, y: x - 0.01, lambda x, y: x + 0.01), box=0.05, n=100
    )
    assert none == []


def test_full_tailoring_92_root_frozen(bi):
    sol = solve_full_tailoring_92(bi, 1.0)
    assert sol.converged
    assert np.isclose(sol.eps1, BI_ROOT_1T[0], rtol=1e-6)
    assert np.isclose(sol.eps2, BI_ROOT_1T[1], rtol=1e-6)
    assert sol.kl_max < 1e-10
    assert len(sol.all_roots) == 1  # unique root in the default box
    for name in sol.targets:
        assert abs(sol.residuals[name]) < 1e-12


def test_full_tailoring_92_closes_every_firstorder_pair(bi):
    from spinqec.codewords import kl_residuals, lift_to_electron_nuclear
    from spinqec.codewords import standard_error_sets

    sol = solve_full_tailoring_92(bi, 1.0)
    cw = make_codeword("tailored-9/2", bi, 1.0, sol.eps1, sol.eps2)
    es = lift_to_electron_nuclear(standard_error_sets("firstorder-B", 4.5), bi)
    assert kl_residuals(cw, es).max_residual < 1e-10


@pytest.mark.parametrize("b", sorted(PARTIAL_72_ROOTS))
def test_partial_tailoring_72_roots_frozen(sb, b):
    eps1, eps2, leftover = PARTIAL_72_ROOTS[b]
    sol = solve_partial_tailoring_72(sb, b)
    assert sol.converged
    assert np.isclose(sol.eps1, eps1, rtol=1e-5)
    assert np.isclose(sol.eps2, eps2, rtol=1e-5)
    problem = TailoringProblem("distorted-7/2", sb, b)
    assert abs(problem.evaluate("diag-IZ", sol.eps1, sol.eps2)) < 1e-12
    assert abs(problem.evaluate("offdiag-IXIX", sol.eps1, sol.eps2)) < 1e-12
    # the mixed off-diagonal collapses with offdiag-IXIX, by the family's
    # |<0|IXIX|1>| == |<0|IXIY|1>| identity
    assert abs(problem.evaluate("offdiag-IXIY", sol.eps1, sol.eps2)) < 1e-12
    # what remains is the second-order diagonal imbalance
    assert np.isclose(
        problem.evaluate("diag-IXIX", sol.eps1, sol.eps2), leftover, rtol=1e-4
    )


def test_offdiag_identity_on_grid(sb):
    problem = TailoringProblem("distorted-7/2", sb, 1.0)
    grid = np.linspace(-0.02, 0.02, 7)
    e1, e2 = np.meshgrid(grid, grid, indexing="ij")
    xx = problem.evaluate("offdiag-IXIX", e1, e2)
    xy = problem.evaluate("offdiag-IXIY", e1, e2)
    np.testing.assert_allclose(np.abs(xx), np.abs(xy), atol=1e-12)


def test_field_sweep_modes(sb):
    rows = field_sweep_tailoring(sb, (0.5, 1.0), mode="re-solve")
    assert [r["b_tesla"] for r in rows] == [0.5, 1.0]
    for row in rows:
        assert row["converged"]
        assert abs(row["residual_diag-IZ"]) < 1e-12
        assert abs(row["residual_offdiag-IXIX"]) < 1e-12
    frozen = field_sweep_tailoring(sb, (0.5, 1.0), mode="frozen", freeze_at=1.0)
    # angles frozen at 1 T no longer cancel the 0.5 T conditions
    assert abs(frozen[0]["residual_diag-IZ"]) > 1e-7
    assert abs(frozen[0]["eps1_rad"] - frozen[1]["eps1_rad"]) < 1e-15
    with pytest.raises(PreconditionError):
        field_sweep_tailoring(sb, (1.0,), mode="frozen")
    with pytest.raises(PreconditionError):
        field_sweep_tailoring(sb, (1.0,), mode="bogus")


def test_problem_preconditions(sb, bi):
    with pytest.raises(PreconditionError):
        TailoringProblem("tailored-9/2", sb, 1.0)  # wrong nuclear spin
    problem = TailoringProblem("distorted-7/2", sb, 1.0)
    with pytest.raises(PreconditionError):
        problem.evaluate("diag-bogus", 0.0, 0.0)
    with pytest.raises(PreconditionError):
        solve_full_tailoring_92(sb, 1.0)
    with pytest.raises(PreconditionError):
        solve_partial_tailoring_72(bi, 1.0)
