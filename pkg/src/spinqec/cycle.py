"""Syndrome-detection plans and decode-cycle simulation.

A *detection plan* fixes a case order (always starting with the no-error
case "I"), Gram-Schmidt-orthogonalises the corresponding error words of the
two logical branches against everything already detectable, and synthesises
one detection block per case that still carries new weight.  Cases whose
error words are already inside the detected span (e.g. the z-linear words,
which are identical on all three qudits) are *absorbed*: they execute no
pulses and their errors fire at the earlier case that covers them.

Running a plan on an encoded register is a deterministic branching tree:
each case either detects (ancilla reads 1, the state collapses onto the two
product-state targets) or passes (ancilla reads 0, the detected pair is
projected out and the case's pulse sequence is exactly inverted).  The tree
is walked once to produce the full exact outcome distribution; sampling a
trajectory just draws from that distribution.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .blocks import detection_block, enc_block, entangle_block, psi_encoded, \
    recovery_gates
from .codewords import make_codeword, standard_error_sets
from .linalg import PreconditionError
from .register import QuditRegister, apply_error, apply_gates, flat_index

GS_CUTOFF = 1e-12

#: first-order error weight per storage interval used by the break-even model
DEFAULT_ERROR_BUDGET = 0.017

_LINEAR = ("X", "Y", "Z")
_QUADRATIC = ("XX", "YY", "ZZ", "XY", "YZ", "ZX")
_Z_BIASED = ("Z", "ZZ", "ZX", "YZ")


def full_order():
    """All 28 cases: "I", linear errors per qudit, then quadratics per qudit."""
    order = ["I"]
    for q in "ABC":
        order += [f"{op}@{q}" for op in _LINEAR]
    for q in "ABC":
        order += [f"{op}@{q}" for op in _QUADRATIC]
    return tuple(order)


def z_biased_order():
    """13 cases: "I" plus the z-involving errors per qudit."""
    order = ["I"]
    for q in "ABC":
        order += [f"{op}@{q}" for op in _Z_BIASED]
    return tuple(order)


@dataclass(frozen=True)
class PlanCase:
    """One case of a detection plan (absorbed when ``block`` is None)."""

    label: str
    index: int
    block: object = None
    recovery: tuple = ()
    t0: int = -1  # flat index of the branch-0 detection target
    t1: int = -1

    @property
    def absorbed(self):
        return self.block is None


@dataclass(frozen=True)
class DetectionPlan:
    order: tuple
    cases: tuple

    @property
    def emitted(self):
        return tuple(c for c in self.cases if not c.absorbed)

    @property
    def absorbed_labels(self):
        return tuple(c.label for c in self.cases if c.absorbed)

    def case(self, label):
        for c in self.cases:
            if c.label == label:
                return c
        raise PreconditionError(f"no case {label!r} in this plan")


@lru_cache(maxsize=8)
def build_detection_plan(order=None):
    """Synthesise (and cache) the detection blocks for a case order."""
    order = tuple(order) if order is not None else full_order()
    if not order or order[0] != "I":
        raise PreconditionError("a detection order must start with case 'I'")
    if len(set(order)) != len(order):
        raise PreconditionError("duplicate case labels in the detection order")
    ops = standard_error_sets("multiqudit").as_dict()
    unknown = [l for l in order if l not in ops]
    if unknown:
        raise PreconditionError(f"unknown case labels {unknown}")

    word = make_codeword("three-qudit")
    zero = word.zero_l.astype(np.complex128)
    one = word.one_l.astype(np.complex128)
    basis0 = []  # orthonormal branch-0 detection words emitted so far
    basis1 = []
    cases = []
    for idx, label in enumerate(order):
        op = ops[label]
        v0 = op @ zero
        v1 = op @ one
        raw = max(float(np.linalg.norm(v0)), 1.0)
        # the two branches live in disjoint parity sectors, so cross-branch
        # projections vanish identically
        assert all(abs(np.vdot(q, v0)) < 1e-9 * raw for q in basis1)
        assert all(abs(np.vdot(q, v1)) < 1e-9 * raw for q in basis0)
        for q in basis0:
            v0 = v0 - q * np.vdot(q, v0)
        for q in basis1:
            v1 = v1 - q * np.vdot(q, v1)
        n0 = float(np.linalg.norm(v0))
        n1 = float(np.linalg.norm(v1))
        if n0 < GS_CUTOFF or n1 < GS_CUTOFF:
            assert n0 < GS_CUTOFF and n1 < GS_CUTOFF, \
                f"case {label}: branches disagree about absorption"
            cases.append(PlanCase(label, idx))
            continue
        assert abs(n0 - n1) <= 1e-9 * max(n0, n1), \
            f"case {label}: branch norms split ({n0} vs {n1})"
        p0 = v0 / n0
        p1 = v1 / n1
        assert abs(np.vdot(p0, p1)) < 1e-10
        block = detection_block(label, p0, p1)
        cases.append(PlanCase(
            label, idx, block, tuple(recovery_gates(block)),
            flat_index(block.meta["dest0"], 0, 0, 1),
            flat_index(block.meta["dest1"], 0, 0, 1),
        ))
        basis0.append(p0)
        basis1.append(p1)
    return DetectionPlan(order, tuple(cases))


# ---------------------------------------------------------------------------
# running a plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyndromeRecord:
    """One possible outcome of a detection sweep.

    ``detected_case`` is None when the sweep exhausted every case without a
    detection (an uncorrectable residual).  ``ancilla_outcomes`` lists the
    ancilla readings of the executed (non-absorbed) cases, in order.
    ``recovered_amplitudes`` is the unit qubit left on the two detection
    targets, up to a global phase; ``logical_fidelity`` compares it with the
    reference qubit when one was supplied (0.0 for uncorrectable outcomes).
    """

    detected_case: object
    case_index: object
    ancilla_outcomes: tuple
    probability: float
    recovered_amplitudes: object
    logical_fidelity: object


def detection_records(reg, order=None, reference=None):
    """Exact outcome distribution of one full detection sweep.

    The register itself is left untouched.  Probabilities sum to one; an
    uncorrectable record absorbs any weight outside the detectable span.
    """
    plan = build_detection_plan(tuple(order) if order is not None else None)
    work = QuditRegister(reg.amp.copy())
    if abs(work.norm() - 1.0) > 1e-8:
        raise PreconditionError("register state must be normalised")
    records = []
    outcomes = []
    survival = 1.0
    for case in plan.cases:
        if case.absorbed:
            continue
        apply_gates(work, case.block.gates)
        a0 = complex(work.amp[case.t0])
        a1 = complex(work.amp[case.t1])
        w = abs(a0) ** 2 + abs(a1) ** 2
        if w > 1e-24:
            rec = (a0 / np.sqrt(w), a1 / np.sqrt(w))
            fid = None
            if reference is not None:
                alpha, beta = reference
                fid = float(abs(np.conj(alpha) * rec[0]
                                + np.conj(beta) * rec[1]) ** 2)
            records.append(SyndromeRecord(case.label, case.index,
                                          tuple(outcomes) + (1,),
                                          survival * w, rec, fid))
        work.amp[case.t0] = 0.0
        work.amp[case.t1] = 0.0
        rem2 = float(np.real(np.vdot(work.amp, work.amp)))
        survival *= rem2
        if rem2 < 1e-15:
            survival = 0.0
            break
        work.amp /= np.sqrt(rem2)
        apply_gates(work, case.recovery)
        outcomes.append(0)
    if survival > 1e-12:
        records.append(SyndromeRecord(
            None, None, tuple(outcomes), survival, None,
            0.0 if reference is not None else None))
    return tuple(records)


def detection_cycle(reg, order=None, mode="exact-branch", rng=None,
                    reference=None):
    """Run one detection sweep.

    mode "exact-branch" returns every possible :class:`SyndromeRecord`
    (probability-weighted); mode "sampled" draws a single record from that
    exact distribution.
    """
    records = detection_records(reg, order, reference)
    if mode == "exact-branch":
        return records
    if mode != "sampled":
        raise PreconditionError(f"unknown mode {mode!r}")
    return sample_records(records, 1, rng)[0]


def sample_records(records, n_samples, rng=None):
    """Draw trajectory outcomes from an exact record distribution."""
    gen = np.random.default_rng(rng)
    probs = np.array([r.probability for r in records], dtype=float)
    total = float(probs.sum())
    assert abs(total - 1.0) < 1e-9, "outcome probabilities must sum to one"
    idx = gen.choice(len(records), size=int(n_samples), p=probs / total)
    return [records[i] for i in idx]


def case_weights(records):
    """Probability per detected case ("none" for the uncorrectable rest)."""
    out = {}
    for r in records:
        key = r.detected_case if r.detected_case is not None else "none"
        out[key] = out.get(key, 0.0) + r.probability
    return out


def run_detection(alpha, beta, error=None, order=None, mode="exact-branch",
                  rng=None):
    """Encode a qubit, optionally inject one error, and run a sweep.

    ``error`` is None or a (label, qudit) pair such as ("XX", "B").
    Returns (records-or-record, error_weight); the weight is the squared
    norm of the raw error word (None when no error was injected).
    """
    reg = QuditRegister(psi_encoded(alpha, beta))
    weight = None
    if error is not None:
        label, qudit = error
        reg, weight = apply_error(reg, label, qudit)
    out = detection_cycle(reg, order, mode, rng, reference=(alpha, beta))
    return out, weight


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------

def pulse_budget(order=None):
    """Pulse inventory of one full no-detection sweep.

    Each emitted case contributes its detection pulses plus the exact
    inversion that restores the register after an outcome-0 measurement;
    absorbed cases contribute nothing.  Encoding pulses are reported
    separately and are not part of ``total``.
    """
    plan = build_detection_plan(tuple(order) if order is not None else None)
    per_case = {}
    total = 0
    for case in plan.cases:
        if case.absorbed:
            per_case[case.label] = {"detect": 0, "recover": 0, "absorbed": True}
            continue
        det = case.block.pulse_count
        rec = sum(g.pulse_count for g in case.recovery)
        per_case[case.label] = {"detect": det, "recover": rec,
                                "absorbed": False}
        total += det + rec
    encode = enc_block().pulse_count + entangle_block().pulse_count
    return {"order": plan.order, "total": total, "encode": encode,
            "cases": per_case}


def fidelity_threshold(pulse_count, error_budget=DEFAULT_ERROR_BUDGET):
    """Break-even single-pulse infidelity for a decode sequence.

    Solves (1 - q) ** pulse_count = 1 - error_budget: a sweep of
    ``pulse_count`` pulses, each failing with probability q, breaks even
    with the bare-memory error weight the cycle removes per storage
    interval.  Pulses better than the returned q make the protected memory
    win.
    """
    if pulse_count <= 0:
        raise PreconditionError("pulse_count must be positive")
    if not 0.0 < error_budget < 1.0:
        raise PreconditionError("error_budget must lie in (0, 1)")
    return 1.0 - (1.0 - error_budget) ** (1.0 / float(pulse_count))
