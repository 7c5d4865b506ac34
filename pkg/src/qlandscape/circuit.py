"""State-vector simulation of the shared-parameter rotation ansatz.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of the amplitude index, so for an
  n-qubit state the basis states with qubit 0 in |1> occupy the second half
  of the amplitude vector.
* Rotation gates use the half-angle forms
  RX(p) = [[cos(p/2), -i sin(p/2)], [-i sin(p/2), cos(p/2)]],
  RY(p) = [[cos(p/2), -sin(p/2)], [sin(p/2), cos(p/2)]],
  RZ(p) = diag(exp(-i p/2), exp(+i p/2)),
  and CNOT flips the target wherever the control is |1>.
* The circuit loss is the probability of measuring |1> on qubit 0, so it
  always lies in [0, 1] and every angle is 2*pi-periodic up to global phase.

Batch helpers operate on arrays of shape ``(m,) + (2,)*n`` so a whole set of
parameter points can be pushed through the circuit at once; the per-element
arithmetic is identical for any batch size, which keeps single-point and
grid evaluations bit-for-bit consistent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DOMAIN_MAX = 4.0 * np.pi
RX_CONST = 1.0
RZ_CONST = 2.0
ROTATION_KINDS = ("rx", "ry", "rz")
GATE_KINDS = ROTATION_KINDS + ("cnot",)
DENSE_ORACLE_MAX_QUBITS = 4


@dataclass(frozen=True)
class GateOp:
    """A single rotation or CNOT; rotations carry a constant angle or a shared-parameter index."""

    kind: str
    target: int
    control: int | None = None
    angle: float | None = None
    param: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cnot":
            if self.control is None:
                raise ValueError("cnot requires a control qubit")
            if self.control == self.target:
                raise ValueError("cnot control and target must differ")
            if self.angle is not None or self.param is not None:
                raise ValueError("cnot takes no angle")
        else:
            if self.control is not None:
                raise ValueError(f"{self.kind} takes no control qubit")
            if (self.angle is None) == (self.param is None):
                raise ValueError("rotation needs exactly one of angle or param")

    @property
    def is_parameterized(self) -> bool:
        return self.param is not None


@dataclass
class CircuitSpec:
    """An ordered gate program over ``n_qubits`` with ``n_params`` shared angles.

    Treated as immutable after construction; safe to share across threads.
    """

    n_qubits: int
    repetitions: int
    gates: tuple[GateOp, ...]
    n_params: int = 2

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.n_params < 1:
            raise ValueError("n_params must be >= 1")
        self.gates = tuple(self.gates)
        for gate in self.gates:
            if not 0 <= gate.target < self.n_qubits:
                raise ValueError(f"gate target {gate.target} out of range")
            if gate.control is not None and not 0 <= gate.control < self.n_qubits:
                raise ValueError(f"gate control {gate.control} out of range")
            if gate.param is not None and not 0 <= gate.param < self.n_params:
                raise ValueError(f"gate parameter index {gate.param} out of range")

    @cached_property
    def param_gate_indices(self) -> tuple[tuple[int, ...], ...]:
        """For each parameter, the gate positions that use it, in circuit order."""
        occ: list[list[int]] = [[] for _ in range(self.n_params)]
        for i, gate in enumerate(self.gates):
            if gate.param is not None:
                occ[gate.param].append(i)
        return tuple(tuple(o) for o in occ)


@dataclass
class StateVector:
    """Pure-state amplitudes of an n-qubit register (qubit 0 = most significant bit)."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def basis(cls, n_qubits: int, bits: str) -> "StateVector":
        """Computational basis state from a bit string, qubit 0 first."""
        if len(bits) != n_qubits:
            raise ValueError("bit string length must equal n_qubits")
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps, n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability_first_one(self) -> float:
        half = self.amplitudes[2 ** (self.n_qubits - 1):]
        return float(np.sum(half.real**2 + half.imag**2))


def build_default_circuit(n_qubits: int, repetitions: int) -> CircuitSpec:
    """Assemble the two-parameter ansatz: per repeated block, an RX(1) layer,
    an RY(theta_1) + CNOT staircase with cyclic wrap-around, an RZ(2) layer,
    and an RX(theta_2) + CNOT staircase. Both parameters recur in every block.
    """
    if n_qubits < 2:
        raise ValueError("default circuit needs n_qubits >= 2")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    gates: list[GateOp] = []
    for _ in range(repetitions):
        for q in range(n_qubits):
            gates.append(GateOp("rx", q, angle=RX_CONST))
        for q in range(n_qubits):
            gates.append(GateOp("ry", q, param=0))
            gates.append(GateOp("cnot", (q + 1) % n_qubits, control=q))
        for q in range(n_qubits):
            gates.append(GateOp("rz", q, angle=RZ_CONST))
        for q in range(n_qubits):
            gates.append(GateOp("rx", q, param=1))
            gates.append(GateOp("cnot", (q + 1) % n_qubits, control=q))
    return CircuitSpec(n_qubits, repetitions, tuple(gates))


# --- batched gate application -------------------------------------------------

def _apply_2x2(psi, q, u00, u01, u10, u11):
    # psi: (m,) + (2,)*n, acting on axis 1 + q; coefficients scalar or (m,1,...)
    lead = (slice(None),) * (1 + q)
    i0 = lead + (0,)
    i1 = lead + (1,)
    a0 = psi[i0].copy()
    a1 = psi[i1]
    psi[i0] = u00 * a0 + u01 * a1
    psi[i1] = u10 * a0 + u11 * a1


def _apply_diag(psi, q, d0, d1):
    lead = (slice(None),) * (1 + q)
    psi[lead + (0,)] *= d0
    psi[lead + (1,)] *= d1


def _apply_cnot(psi, control, target):
    idx10 = [slice(None)] * psi.ndim
    idx10[1 + control] = 1
    idx10[1 + target] = 0
    idx11 = list(idx10)
    idx11[1 + target] = 1
    i10, i11 = tuple(idx10), tuple(idx11)
    tmp = psi[i10].copy()
    psi[i10] = psi[i11]
    psi[i11] = tmp


class _CoeffCache:
    """Half-angle trig per parameter or constant, broadcast against the batch.

    Shared-parameter circuits hit the same angles many times per pass, so the
    cos/sin (and exp for RZ) arrays are computed once per batch call.
    """

    def __init__(self, thetas: np.ndarray, n_qubits: int):
        self._thetas = thetas
        self._tail = (1,) * (n_qubits - 1)
        # constant angles and parameter indices live in separate maps:
        # a dict keyed by both would conflate angle 1.0 with param 1
        self._const_cs: dict = {}
        self._param_cs: dict = {}
        self._const_eh: dict = {}
        self._param_eh: dict = {}

    def _shape(self, arr):
        return arr.reshape(arr.shape[0:1] + self._tail)

    def cs(self, gate: GateOp, override=None):
        if override is not None:
            h = 0.5 * override
            return math.cos(h), math.sin(h)
        if gate.param is None:
            got = self._const_cs.get(gate.angle)
            if got is None:
                h = 0.5 * gate.angle
                got = self._const_cs[gate.angle] = (math.cos(h), math.sin(h))
            return got
        got = self._param_cs.get(gate.param)
        if got is None:
            half = 0.5 * self._thetas[:, gate.param]
            got = self._param_cs[gate.param] = (
                self._shape(np.cos(half)), self._shape(np.sin(half))
            )
        return got

    def ehalf(self, gate: GateOp, override=None):
        if override is not None:
            return cmath.exp(-0.5j * override)
        if gate.param is None:
            got = self._const_eh.get(gate.angle)
            if got is None:
                got = self._const_eh[gate.angle] = cmath.exp(-0.5j * gate.angle)
            return got
        got = self._param_eh.get(gate.param)
        if got is None:
            got = self._param_eh[gate.param] = self._shape(
                np.exp(-0.5j * self._thetas[:, gate.param])
            )
        return got


def _apply_gate(psi, gate: GateOp, cache: _CoeffCache, mode: str = "fwd", override=None):
    """Apply a gate (mode "fwd"), its adjoint ("adj"), or its angle derivative ("d")."""
    if gate.kind == "cnot":
        _apply_cnot(psi, gate.control, gate.target)
        return
    q = gate.target
    if gate.kind == "rz":
        e = cache.ehalf(gate, override)
        ec = np.conj(e)
        if mode == "fwd":
            _apply_diag(psi, q, e, ec)
        elif mode == "adj":
            _apply_diag(psi, q, ec, e)
        else:
            _apply_diag(psi, q, -0.5j * e, 0.5j * ec)
        return
    c, s = cache.cs(gate, override)
    if gate.kind == "rx":
        if mode == "fwd":
            _apply_2x2(psi, q, c, -1j * s, -1j * s, c)
        elif mode == "adj":
            _apply_2x2(psi, q, c, 1j * s, 1j * s, c)
        else:
            _apply_2x2(psi, q, -0.5 * s, -0.5j * c, -0.5j * c, -0.5 * s)
    else:  # ry
        if mode == "fwd":
            _apply_2x2(psi, q, c, -s, s, c)
        elif mode == "adj":
            _apply_2x2(psi, q, c, s, -s, c)
        else:
            _apply_2x2(psi, q, -0.5 * s, -0.5 * c, 0.5 * c, -0.5 * s)


def _initial_state(n_qubits: int, m: int) -> np.ndarray:
    psi = np.zeros((m,) + (2,) * n_qubits, dtype=np.complex128)
    psi[(slice(None),) + (0,) * n_qubits] = 1.0
    return psi


def _forward(circuit: CircuitSpec, thetas: np.ndarray, override=None,
             cache: _CoeffCache | None = None) -> np.ndarray:
    """Run the full gate program on |0...0> for each row of ``thetas``.

    ``override`` maps gate positions to replacement angles (used by the
    shift rule to nudge one occurrence at a time).
    """
    if cache is None:
        cache = _CoeffCache(thetas, circuit.n_qubits)
    psi = _initial_state(circuit.n_qubits, thetas.shape[0])
    if override:
        for i, gate in enumerate(circuit.gates):
            _apply_gate(psi, gate, cache, "fwd", override.get(i))
    else:
        for gate in circuit.gates:
            _apply_gate(psi, gate, cache, "fwd")
    return psi


def _prob_first_one(psi: np.ndarray) -> np.ndarray:
    m = psi.shape[0]
    upper = psi.reshape(m, 2, -1)[:, 1, :]
    return np.sum(upper.real**2 + upper.imag**2, axis=1)


def _check_theta(circuit: CircuitSpec, theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=np.float64)
    if arr.shape != (circuit.n_params,):
        raise ValueError(
            f"theta must have length {circuit.n_params}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta must be finite")
    return arr


# --- public evaluation --------------------------------------------------------

def apply_gate(state: StateVector, gate: GateOp, theta=()) -> StateVector:
    """Apply one gate to a state, resolving parameterized angles from ``theta``.

    Value semantics: the input state is left untouched.
    """
    n = state.n_qubits
    if not 0 <= gate.target < n:
        raise ValueError(f"gate target {gate.target} out of range for {n} qubits")
    if gate.control is not None and not 0 <= gate.control < n:
        raise ValueError(f"gate control {gate.control} out of range for {n} qubits")
    thetas = np.atleast_1d(np.asarray(theta, dtype=np.float64)).reshape(1, -1)
    if gate.param is not None and gate.param >= thetas.shape[1]:
        raise ValueError(f"parameter index {gate.param} out of range")
    psi = state.amplitudes.reshape((1,) + (2,) * n).copy()
    _apply_gate(psi, gate, _CoeffCache(thetas, n))
    return StateVector(psi.reshape(-1), n)


def batch_evaluate(circuit: CircuitSpec, thetas) -> np.ndarray:
    """Loss for each row of an (m, n_params) array of parameter points."""
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != circuit.n_params:
        raise ValueError(f"thetas must have shape (m, {circuit.n_params})")
    return _prob_first_one(_forward(circuit, thetas))


def evaluate(circuit: CircuitSpec, theta) -> float:
    """Probability of measuring |1> on qubit 0 after running the circuit from |0...0>."""
    arr = _check_theta(circuit, theta)
    return float(batch_evaluate(circuit, arr[None, :])[0])


# --- dense differential-testing oracle ----------------------------------------

def _kron_chain(factors) -> np.ndarray:
    out = np.array([[1.0]], dtype=np.complex128)
    for f in factors:
        out = np.kron(out, f)
    return out


def _dense_gate_matrix(gate: GateOp, theta: np.ndarray, n: int) -> np.ndarray:
    eye = np.eye(2, dtype=np.complex128)
    if gate.kind == "cnot":
        p0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
        p1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
        x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        keep = [p0 if q == gate.control else eye for q in range(n)]
        flip = [p1 if q == gate.control else (x if q == gate.target else eye)
                for q in range(n)]
        return _kron_chain(keep) + _kron_chain(flip)
    phi = gate.angle if gate.param is None else theta[gate.param]
    h = 0.5 * phi
    c, s = np.cos(h), np.sin(h)
    if gate.kind == "rx":
        u = np.array([[c, -1j * s], [-1j * s, c]])
    elif gate.kind == "ry":
        u = np.array([[c, -s], [s, c]], dtype=np.complex128)
    else:
        u = np.array([[np.exp(-1j * h), 0], [0, np.exp(1j * h)]])
    return _kron_chain([u if q == gate.target else eye for q in range(n)])


def evaluate_dense_oracle(circuit: CircuitSpec, theta,
                          max_qubits: int = DENSE_ORACLE_MAX_QUBITS) -> float:
    """Same observable as :func:`evaluate`, via explicit 2^n x 2^n tensor-product
    matrices multiplied into one unitary. Deliberately shares no gate-application
    code with the fast path.
    """
    if circuit.n_qubits > max_qubits:
        raise ValueError(
            f"dense oracle capped at {max_qubits} qubits, got {circuit.n_qubits}"
        )
    arr = _check_theta(circuit, theta)
    dim = 2**circuit.n_qubits
    total = np.eye(dim, dtype=np.complex128)
    for gate in circuit.gates:
        total = _dense_gate_matrix(gate, arr, circuit.n_qubits) @ total
    psi = total[:, 0]
    upper = psi[dim // 2:]
    return float(np.sum(upper.real**2 + upper.imag**2))
