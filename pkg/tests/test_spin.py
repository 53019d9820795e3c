"""Spin operators, Hamiltonian assembly, dressed-state labelling."""

import numpy as np
import pytest

from spinqec.linalg import PreconditionError, hermitian_eigendecompose
from spinqec.spin import (
    PRESETS,
    LabelingError,
    SpinSystem,
    build_hamiltonian,
    dressed_eigenstates,
    get_system,
    load_system,
    manifold_states,
    nuclear_transition_frequencies,
    product_index,
    spin_operators,
    transition_gradients,
)


@pytest.mark.parametrize("j", [0.5, 1.0, 1.5, 3.5, 4.5, 11.5])
def test_commutators_and_casimir(j):
    jx, jy, jz = spin_operators(j)
    for a, b, c in ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy)):
        assert np.max(np.abs(a @ b - b @ a - 1j * c)) < 1e-12
    dim = round(2 * j) + 1
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.max(np.abs(casimir - j * (j + 1) * np.eye(dim))) < 1e-12


def test_ladder_matrix_elements():
    jx, _, jz = spin_operators(3.5)
    # <m+1| Jx |m> = sqrt(j(j+1) - m(m+1)) / 2
    assert abs(jx[1, 0] - np.sqrt(7.0) / 2.0) < 1e-14
    assert abs(jx[2, 1] - np.sqrt(12.0) / 2.0) < 1e-14
    assert abs(jx[3, 2] - np.sqrt(15.0) / 2.0) < 1e-14
    np.testing.assert_allclose(np.diag(jz), np.arange(-3.5, 4.0), atol=1e-14)
    jx92, _, _ = spin_operators(4.5)
    assert abs(jx92[1, 0] - 1.5) < 1e-14


def test_xx_diagonal_closed_form():
    jx, _, _ = spin_operators(3.5)
    m = np.arange(-3.5, 4.0)
    np.testing.assert_allclose(
        np.diag(jx @ jx).real, (3.5 * 4.5 - m**2) / 2.0, atol=1e-13
    )


def test_spin_preconditions():
    with pytest.raises(PreconditionError):
        spin_operators(0.3)
    with pytest.raises(PreconditionError):
        spin_operators(-1.0)
    with pytest.raises(PreconditionError):
        SpinSystem("bad", 0.4, 3.5, 1.0, 1.0, 1.0)


def test_zeeman_limit_exact():
    sys0 = SpinSystem("zeeman", 0.5, 1.5, 100.0, 2.0, 0.0)
    h = build_hamiltonian(sys0, 1.0)
    assert np.max(np.abs(h - np.diag(np.diag(h)))) < 1e-14
    expect = sorted(
        100.0 * ms + 2.0 * mi
        for ms in (-0.5, 0.5)
        for mi in (-1.5, -0.5, 0.5, 1.5)
    )
    dec = hermitian_eigendecompose(h)
    np.testing.assert_allclose(dec.eigenvalues, expect, atol=1e-12)
    states = dressed_eigenstates(sys0, 1.0)
    for st in states:
        assert st.weight > 1.0 - 1e-12
        k = product_index(sys0, st.m_s, st.m_i)
        assert abs(abs(st.vector[k]) - 1.0) < 1e-12


def test_transverse_field_same_spectrum():
    sys0 = SpinSystem("zeeman", 0.5, 1.5, 100.0, 2.0, 0.0)
    hz = build_hamiltonian(sys0, [0.0, 0.0, 1.0])
    hx = build_hamiltonian(sys0, [1.0, 0.0, 0.0])
    np.testing.assert_allclose(
        np.linalg.eigvalsh(hx), np.linalg.eigvalsh(hz), atol=1e-10
    )
    with pytest.raises(PreconditionError):
        build_hamiltonian(sys0, [1.0, 2.0])


def test_hamiltonian_is_hermitian(sb, bi):
    for system in (sb, bi):
        h = build_hamiltonian(system, 0.7)
        assert np.max(np.abs(h - h.conj().T)) < 1e-12
        assert h.shape == (system.dim, system.dim)


def test_zero_field_hyperfine_multiplets(sb):
    # H = A S.I has eigenvalues A/2 [f(f+1) - s(s+1) - i(i+1)], f = i +- 1/2
    h = build_hamiltonian(sb, 0.0)
    a = sb.a
    low = a / 2.0 * (3.0 * 4.0 - 0.75 - 3.5 * 4.5)
    high = a / 2.0 * (4.0 * 5.0 - 0.75 - 3.5 * 4.5)
    expect = np.concatenate([np.full(7, low), np.full(9, high)])
    dec = hermitian_eigendecompose(h)
    np.testing.assert_allclose(dec.eigenvalues, expect, atol=1e-9)


def test_labeling_fails_at_zero_field(sb):
    with pytest.raises(LabelingError):
        dressed_eigenstates(sb, 0.0)


def test_dressed_weights_high_field(sb, bi):
    for system in (sb, bi):
        states = dressed_eigenstates(system, 1.0)
        assert len(states) == system.dim
        assert all(st.weight > 0.98 for st in states)
        labels = {(st.m_s, st.m_i) for st in states}
        assert len(labels) == system.dim
        man = manifold_states(system, 1.0, m_s=-0.5)
        assert sorted(man) == [
            -system.i + k for k in range(system.dim_n)
        ]


def test_product_index_layout(sb):
    assert product_index(sb, -0.5, -3.5) == 0
    assert product_index(sb, -0.5, 3.5) == 7
    assert product_index(sb, 0.5, -3.5) == 8
    assert product_index(sb, 0.5, 3.5) == 15


def test_transition_frequencies_against_numpy(sb, bi):
    # independent route: numpy.linalg.eigh + overlap labelling
    for system in (sb, bi):
        h = build_hamiltonian(system, 1.0)
        w, v = np.linalg.eigh(h)
        energies = {}
        for k in range(system.dim):
            p = int(np.argmax(np.abs(v[:, k]) ** 2))
            ks, ki = divmod(p, system.dim_n)
            if ks == 0:  # m_S = -1/2 block
                energies[ki] = w[k]
        ordered = [energies[k] for k in sorted(energies)]
        ref = np.diff(ordered)
        got = nuclear_transition_frequencies(system, 1.0)
        assert got.shape == (system.dim_n - 1,)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-8)
        # telescoping: the diffs sum to the manifold's end-to-end splitting
        assert abs(np.sum(got) - (ordered[-1] - ordered[0])) < 1e-8


def test_gradient_spread_decreases_with_field(sb):
    # frozen: spread of df/dB over one manifold, fields 1/2/5/10/50 T
    frozen = {
        1.0: 1.115724945,
        2.0: 0.2774220229,
        5.0: 0.04424306098,
        10.0: 0.01104868716,
        50.0: 4.429602996e-04,
    }
    spreads = []
    for b, expect in frozen.items():
        g = transition_gradients(sb, b)
        spread = float(np.max(g) - np.min(g))
        assert np.isclose(spread, expect, rtol=1e-4)
        spreads.append(spread)
    assert all(s1 > s2 for s1, s2 in zip(spreads, spreads[1:]))


def test_presets_and_aliases():
    assert get_system("si-sb") is PRESETS["Si:Sb-123"]
    assert get_system("Si:Bi-209") is PRESETS["Si:Bi-209"]
    assert get_system("si-bi").i == 4.5
    assert get_system("si-sb").dim == 16
    assert get_system("si-bi").dim == 20
    with pytest.raises(PreconditionError):
        get_system("si-p")


def test_load_system_roundtrip(tmp_path):
    path = tmp_path / "system.cfg"
    path.write_text(
        "# test system\n"
        "name = custom\n"
        "S = 1/2\n"
        "I = 7/2\n"
        "g_e_MHz_per_T = 28020\n"
        "g_n_MHz_per_T = 5.55\n"
        "A_MHz = 101.52\n"
    )
    system = load_system(path)
    assert system == SpinSystem("custom", 0.5, 3.5, 28020.0, 5.55, 101.52)


def test_load_system_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("name = x\nS = 1/2\n")
    with pytest.raises(PreconditionError):
        load_system(path)
    path.write_text("name x\n")
    with pytest.raises(PreconditionError):
        load_system(path)
    path.write_text(
        "name = x\nS = 1/2\nI = 7/2\n"
        "g_e_MHz_per_T = abc\ng_n_MHz_per_T = 1\nA_MHz = 1\n"
    )
    with pytest.raises(PreconditionError):
        load_system(path)
