"""Three spin-7/2 qudits plus a two-level ancilla: state and pulse gates.

The register amplitude array has shape (8, 8, 8, 2) -- qudits A, B, C and
the ancilla -- flattened C-order to 1024 complex amplitudes.  Qudit levels
are indexed 0..7 with level = m + 7/2 (level 0 is the bottom state).

Gates are individual pulses:

* ``rotation``: a real Givens rotation by angle theta between two levels of
  one factor, [[cos, -sin], [sin, cos]] acting on (level_p, level_q), and
  optionally conditioned on control levels of other factors.  A "pi pulse"
  (full population transfer) is theta = pi/2: |p> -> |q> with amplitude +1,
  |q> -> -|p>.  Cost: one pulse.
* ``ancilla-excitation``: a pi pulse on the ancilla conditioned on a list of
  (A, B, C) product states.  Cost: one pulse per control state.

Gate application mutates the register in place and returns it; trajectories
own their register exclusively.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .backend import use_numba
from .codewords import _single_spin_table
from .linalg import NumericalError, PreconditionError

DIMS = (8, 8, 8, 2)
TOTAL_DIM = 1024
QUDIT_NAMES = {"A": 0, "B": 1, "C": 2}
ANCILLA_AXIS = 3

_DIMS_ARR = np.array(DIMS, dtype=np.int64)


class AnnihilationError(NumericalError):
    """An error operator annihilated the register state (zero norm)."""


class QuditRegister:
    """Mutable pure state of the A/B/C qudits and the ancilla."""

    __slots__ = ("amp",)

    def __init__(self, amp=None):
        if amp is None:
            amp = np.zeros(TOTAL_DIM, dtype=np.complex128)
        amp = np.ascontiguousarray(amp, dtype=np.complex128).reshape(TOTAL_DIM)
        self.amp = amp

    def copy(self):
        return QuditRegister(self.amp.copy())

    def norm(self):
        return float(np.linalg.norm(self.amp))

    def view(self):
        """(8, 8, 8, 2) view of the amplitudes."""
        return self.amp.reshape(DIMS)

    def amplitude(self, la, lb, lc, anc=0):
        return self.amp[((la * 8 + lb) * 8 + lc) * 2 + anc]


def flat_index(la, lb, lc, anc=0):
    return ((la * 8 + lb) * 8 + lc) * 2 + anc


def init_register(alpha, beta):
    """Fresh register: qubit (alpha, beta) on levels {0, 1} of qudit A.

    B, C, and the ancilla start in their bottom states.  The qubit must be
    normalised within 1e-10.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise PreconditionError("qubit amplitudes must satisfy |a|^2 + |b|^2 = 1")
    reg = QuditRegister()
    reg.amp[flat_index(0, 0, 0, 0)] = alpha
    reg.amp[flat_index(1, 0, 0, 0)] = beta
    return reg


def _axis_of(qudit):
    if isinstance(qudit, str):
        try:
            return QUDIT_NAMES[qudit.upper()] if qudit.upper() in QUDIT_NAMES \
                else int(qudit)
        except ValueError:
            raise PreconditionError(f"unknown qudit {qudit!r}") from None
    return int(qudit)


@dataclass(frozen=True)
class Gate:
    """One pulse (see module docstring for the two kinds)."""

    kind: str  # "rotation" | "ancilla-excitation"
    axis: int = 0
    levels: tuple = (0, 1)
    theta: float = 0.0
    controls: tuple = ()  # ((axis, level), ...)
    control_states: tuple = ()  # for excitation: ((la, lb, lc), ...)

    @property
    def pulse_count(self):
        if self.kind == "ancilla-excitation":
            return len(self.control_states)
        return 1


def rotation(qudit, level_p, level_q, theta, controls=()):
    """Build a (controlled) two-level rotation gate."""
    axis = _axis_of(qudit)
    lp, lq = int(level_p), int(level_q)
    dims_ax = DIMS[axis]
    if not (0 <= lp < dims_ax and 0 <= lq < dims_ax) or lp == lq:
        raise PreconditionError(f"bad level pair ({lp}, {lq}) for axis {axis}")
    ctrl = tuple((_axis_of(a), int(l)) for a, l in controls)
    for cax, clev in ctrl:
        if cax == axis:
            raise PreconditionError("control axis coincides with the rotated axis")
        if not 0 <= clev < DIMS[cax]:
            raise PreconditionError(f"control level {clev} out of range on {cax}")
    return Gate("rotation", axis, (lp, lq), float(theta), ctrl)


def pi_pulse(qudit, level_p, level_q, controls=()):
    """Full transfer |p> -> |q> (theta = pi/2 Givens)."""
    return rotation(qudit, level_p, level_q, np.pi / 2.0, controls)


def ancilla_excitation(control_states):
    """Pi pulse on the ancilla for each listed (A, B, C) product state."""
    states = tuple((int(a), int(b), int(c)) for a, b, c in control_states)
    return Gate("ancilla-excitation", control_states=states)


def apply_gate(reg, gate):
    """Apply one gate in place; returns the register for chaining."""
    if gate.kind == "rotation":
        c = float(np.cos(gate.theta))
        s = float(np.sin(gate.theta))
        _apply_two_level(reg.amp, gate.axis, gate.levels[0], gate.levels[1],
                         c, s, gate.controls)
        return reg
    if gate.kind == "ancilla-excitation":
        for la, lb, lc in gate.control_states:
            _apply_two_level(reg.amp, ANCILLA_AXIS, 0, 1, 0.0, 1.0,
                             ((0, la), (1, lb), (2, lc)))
        return reg
    raise PreconditionError(f"unknown gate kind {gate.kind!r}")


def apply_gates(reg, gates):
    for g in gates:
        apply_gate(reg, g)
    return reg


def inverted_gates(gates):
    """Exact inverse pulse sequence (reversed order, rotations negated)."""
    out = []
    for g in reversed(list(gates)):
        if g.kind == "rotation":
            out.append(Gate("rotation", g.axis, g.levels, -g.theta, g.controls))
        else:
            for la, lb, lc in reversed(g.control_states):
                out.append(Gate("rotation", ANCILLA_AXIS, (0, 1), -np.pi / 2.0,
                                ((0, la), (1, lb), (2, lc))))
    return out


def gates_matrix(gates):
    """Dense 1024 x 1024 unitary of a pulse sequence (verification route).

    Rebuilt from plain index arithmetic, sharing no code with the fast
    application kernels, so tests can cross-check the two routes and
    certify unitarity of synthesised blocks.  Cost is O(dim^2) per pulse;
    use for certification, not simulation.
    """
    strides = (128, 16, 2, 1)
    mat = np.eye(TOTAL_DIM, dtype=np.complex128)
    for gate in gates:
        if gate.kind == "rotation":
            steps = [(gate.theta, gate.axis, gate.levels, gate.controls)]
        elif gate.kind == "ancilla-excitation":
            steps = [(np.pi / 2.0, ANCILLA_AXIS, (0, 1),
                      ((0, la), (1, lb), (2, lc)))
                     for la, lb, lc in gate.control_states]
        else:
            raise PreconditionError(f"unknown gate kind {gate.kind!r}")
        for theta, axis, (lp, lq), controls in steps:
            c = np.cos(theta)
            s = np.sin(theta)
            stride = strides[axis]
            shift = (lq - lp) * stride
            for ip in range(TOTAL_DIM):
                if ip // stride % DIMS[axis] != lp:
                    continue
                if any(ip // strides[cax] % DIMS[cax] != clev
                       for cax, clev in controls):
                    continue
                iq = ip + shift
                row_p = mat[ip, :].copy()
                mat[ip, :] = c * row_p - s * mat[iq, :]
                mat[iq, :] = s * row_p + c * mat[iq, :]
    return mat


def _apply_two_level(amp, axis, lp, lq, c, s, controls):
    ctrl_axes = np.array([a for a, _ in controls], dtype=np.int64)
    ctrl_levels = np.array([l for _, l in controls], dtype=np.int64)
    if use_numba():
        _kernels._two_level_numba(amp, _DIMS_ARR, axis, lp, lq, c, s,
                                  ctrl_axes, ctrl_levels)
    else:
        _kernels._two_level_numpy(amp, DIMS, axis, lp, lq, c, s,
                                  ctrl_axes, ctrl_levels)


# ---------------------------------------------------------------------------
# error injection
# ---------------------------------------------------------------------------

_ERROR_TABLE = None


def single_qudit_error(label):
    """8 x 8 spin-7/2 error operator for a label like "X", "ZZ", "XY"."""
    global _ERROR_TABLE
    if _ERROR_TABLE is None:
        _ERROR_TABLE = _single_spin_table(3.5)
    if label not in _ERROR_TABLE:
        raise PreconditionError(f"unknown error label {label!r}")
    return _ERROR_TABLE[label]


def apply_error(reg, label, qudit):
    """Hit one qudit with an error operator and renormalise.

    Returns (register, weight) where ``weight`` is the squared norm before
    renormalisation (the raw detection weight of the error branch).

    Raises
    ------
    AnnihilationError
        If the operator sends the state to zero.
    """
    op = single_qudit_error(label)
    axis = _axis_of(qudit)
    if axis not in (0, 1, 2):
        raise PreconditionError("errors act on qudits A, B, or C")
    view = reg.view()
    new = np.tensordot(op, view, axes=([1], [axis]))
    new = np.moveaxis(new, 0, axis)
    weight = float(np.sum(np.abs(new) ** 2))
    if weight < 1e-24:
        raise AnnihilationError(f"error {label}@{qudit} annihilated the state")
    reg.amp[:] = (new / np.sqrt(weight)).reshape(TOTAL_DIM)
    return reg, weight
