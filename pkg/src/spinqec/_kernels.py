"""Hot numerical kernels, each in a compiled and a pure-numpy variant.

The compiled variants carry ``@njit`` and operate in-place on contiguous
arrays; the numpy twins have identical signatures and semantics.  Dispatch
happens in the calling modules via :func:`spinqec.backend.use_numba`.

Jacobi kernels
--------------
``_jacobi_numba`` / ``_jacobi_numpy`` run cyclic Jacobi sweeps on a complex
Hermitian matrix ``a`` (destroyed, diagonalised in place) while accumulating
the unitary in ``v``.  They return the number of sweeps used, or ``-1`` when
the off-diagonal norm failed to drop below ``tol`` within ``max_sweeps``.

The elementary step annihilates ``a[p, q]`` with the unitary that acts on the
(p, q) plane as ``[[c, s*u], [-s*conj(u), c]]`` where ``u = a[p,q]/|a[p,q]|``
and ``t = tan(theta)`` is the stable small root of ``t^2 + 2*tau*t - 1 = 0``,
``tau = (a[q,q] - a[p,p]) / (2*|a[p,q]|)``.

Register kernels
----------------
``_two_level_numba`` applies a real Givens rotation between two levels of one
tensor factor of the register amplitude array, optionally gated on control
levels of other factors.  The numpy twin works on the reshaped view.
"""

import numpy as np

from .backend import njit


# ---------------------------------------------------------------------------
# cyclic Jacobi
# ---------------------------------------------------------------------------

@njit(cache=True)
def _jacobi_numba(a, v, tol, max_sweeps):  # pragma: no cover - compiled
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if np.sqrt(off) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                absapq = abs(apq)
                if absapq < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                u = apq / absapq
                tau = (aqq - app) / (2.0 * absapq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * uc * akq
                    a[k, q] = s * u * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * u * aqk
                    a[q, k] = s * uc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = complex(a[p, p].real, 0.0)
                a[q, q] = complex(a[q, q].real, 0.0)
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * uc * vkq
                    v[k, q] = s * u * vkp + c * vkq
    # converged exactly at the sweep cap?
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += abs(a[p, q]) ** 2
    if np.sqrt(off) <= tol:
        return max_sweeps
    return -1


def _jacobi_numpy(a, v, tol, max_sweeps):
    """Pure numpy twin of :func:`_jacobi_numba` (same in-place contract)."""
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2))
        if off <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                absapq = abs(apq)
                if absapq < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                u = apq / absapq
                tau = (aqq - app) / (2.0 * absapq)
                t = np.sign(tau if tau != 0.0 else 1.0) / (
                    abs(tau) + np.sqrt(1.0 + tau * tau)
                )
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * uc * col_q
                a[:, q] = s * u * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * u * row_q
                a[q, :] = s * uc * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * uc * vcol_q
                v[:, q] = s * u * vcol_p + c * vcol_q
    off = np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2))
    if off <= tol:
        return max_sweeps
    return -1


# ---------------------------------------------------------------------------
# two-level rotations on the register
# ---------------------------------------------------------------------------

@njit(cache=True)
def _two_level_numba(amp, dims, axis, lp, lq, c, s,
                     ctrl_axes, ctrl_levels):  # pragma: no cover - compiled
    """Rotate levels (lp, lq) of tensor factor ``axis`` by [[c,-s],[s,c]].

    ``amp`` is the flat complex amplitude array, ``dims`` the factor sizes.
    The rotation acts only where every control axis sits at its control level.
    """
    n = amp.shape[0]
    nax = dims.shape[0]
    strides = np.empty(nax, np.int64)
    acc = 1
    for k in range(nax - 1, -1, -1):
        strides[k] = acc
        acc *= dims[k]
    for idx in range(n):
        # decode the coordinate on the rotated axis
        coord = (idx // strides[axis]) % dims[axis]
        if coord != lp:
            continue
        ok = True
        for m in range(ctrl_axes.shape[0]):
            cax = ctrl_axes[m]
            if (idx // strides[cax]) % dims[cax] != ctrl_levels[m]:
                ok = False
                break
        if not ok:
            continue
        partner = idx + (lq - lp) * strides[axis]
        ap = amp[idx]
        aq = amp[partner]
        amp[idx] = c * ap - s * aq
        amp[partner] = s * ap + c * aq
    return 0


def _two_level_numpy(amp, dims, axis, lp, lq, c, s, ctrl_axes, ctrl_levels):
    """Numpy twin of :func:`_two_level_numba` (reshaped fancy indexing)."""
    view = amp.reshape(tuple(dims))
    idx_p = [slice(None)] * len(dims)
    idx_q = [slice(None)] * len(dims)
    idx_p[axis] = lp
    idx_q[axis] = lq
    for cax, clev in zip(ctrl_axes, ctrl_levels):
        idx_p[cax] = clev
        idx_q[cax] = clev
    tp = tuple(idx_p)
    tq = tuple(idx_q)
    ap = np.array(view[tp], copy=True)
    aq = view[tq]
    view[tp] = c * ap - s * aq
    view[tq] = s * ap + c * aq
    return 0
