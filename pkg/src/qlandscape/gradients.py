"""Analytic and numeric gradients of the circuit loss.

Three routes to the same vector:

* :func:`parameter_shift_gradient` applies the textbook shift rule one gate
  occurrence at a time, which is exact but costs two circuit runs per
  occurrence.
* :func:`batch_loss_and_gradient` runs adjoint-mode differentiation, one
  forward pass plus one backward sweep per batch regardless of how many
  gates share a parameter. Algebraically identical to the shift rule for
  these rotation gates.
* :func:`finite_difference_gradient` is the slow numeric check.
"""

from __future__ import annotations

import numpy as np

from .circuit import (
    CircuitSpec,
    _apply_gate,
    _check_theta,
    _CoeffCache,
    _forward,
    _prob_first_one,
)

SHIFT = 0.5 * np.pi


def parameter_shift_gradient(circuit: CircuitSpec, theta) -> np.ndarray:
    """Exact gradient via per-occurrence parameter shifts.

    For each gate occurrence of parameter k, the contribution is
    (L(occurrence at theta_k + pi/2) - L(occurrence at theta_k - pi/2)) / 2,
    holding every other occurrence at theta_k.
    """
    arr = _check_theta(circuit, theta)
    row = arr[None, :]
    grad = np.zeros(circuit.n_params)
    for k, occurrences in enumerate(circuit.param_gate_indices):
        for gate_index in occurrences:
            plus = _prob_first_one(_forward(circuit, row, {gate_index: arr[k] + SHIFT}))[0]
            minus = _prob_first_one(_forward(circuit, row, {gate_index: arr[k] - SHIFT}))[0]
            grad[k] += 0.5 * (plus - minus)
    return grad


def finite_difference_gradient(circuit: CircuitSpec, theta, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, (L(theta + h e_k) - L(theta - h e_k)) / 2h."""
    arr = _check_theta(circuit, theta)
    grad = np.zeros(circuit.n_params)
    for k in range(circuit.n_params):
        bumped = np.tile(arr, (2, 1))
        bumped[0, k] += h
        bumped[1, k] -= h
        plus, minus = _prob_first_one(_forward(circuit, bumped))
        grad[k] = (plus - minus) / (2.0 * h)
    return grad


def batch_loss_and_gradient(circuit: CircuitSpec, thetas) -> tuple[np.ndarray, np.ndarray]:
    """Losses (m,) and gradients (m, n_params) for a batch of parameter points.

    Adjoint method: after the forward pass, the bra starts as P|psi> with P
    projecting onto qubit 0 = |1> (loss = <psi|P|psi>), and gates are undone
    last to first. For a gate U(theta_k) with derivative dU, the occurrence
    contributes 2 Re <bra| dU |ket-before-gate>; contributions over shared
    occurrences just add.
    """
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    if thetas.ndim != 2 or thetas.shape[1] != circuit.n_params:
        raise ValueError(f"thetas must have shape (m, {circuit.n_params})")
    m = thetas.shape[0]
    n = circuit.n_qubits
    cache = _CoeffCache(thetas, n)
    ket = _forward(circuit, thetas, cache=cache)
    losses = _prob_first_one(ket)

    bra = ket.copy()
    bra[(slice(None), 0)] = 0.0  # project onto qubit 0 = |1>
    grads = np.zeros((m, circuit.n_params))
    for i in range(len(circuit.gates) - 1, -1, -1):
        gate = circuit.gates[i]
        _apply_gate(ket, gate, cache, "adj")
        if gate.param is not None:
            tmp = ket.copy()
            _apply_gate(tmp, gate, cache, "d")
            # 2 Re <bra|tmp> in real arithmetic, no full complex temporary
            br, ti = bra.reshape(m, -1), tmp.reshape(m, -1)
            re = (np.einsum("mk,mk->m", br.real, ti.real)
                  + np.einsum("mk,mk->m", br.imag, ti.imag))
            grads[:, gate.param] += 2.0 * re
        if i:
            _apply_gate(bra, gate, cache, "adj")
    return losses, grads


def loss_and_gradient(circuit: CircuitSpec, theta) -> tuple[float, np.ndarray]:
    """Single-point convenience wrapper around :func:`batch_loss_and_gradient`."""
    arr = _check_theta(circuit, theta)
    losses, grads = batch_loss_and_gradient(circuit, arr[None, :])
    return float(losses[0]), grads[0]
