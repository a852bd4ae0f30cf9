"""Dense N-qubit statevector and local gate application kernels.

Conventions
-----------
Qubit ``i`` maps to bit ``i`` of the amplitude index, i.e. qubit 0 is the
*least significant* bit.  A ``LocalGate`` or local matrix acting on sites
``(a, b)`` uses the same convention internally: the first listed site is the
least significant bit of the local matrix index.  ``|up>`` is the basis
vector ``(1, 0)`` (eigenvalue +1 of sigma^z).

All operations are pure: they return new arrays and never mutate their
inputs.  Summations use numpy's pairwise reduction, so results are
deterministic for a fixed input regardless of how callers dispatch work.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ATOL_UNITARY = 1e-10

_SQ2 = 1.0 / np.sqrt(2.0)

#: Named single-qubit states usable in ``product_state``.
AXIS_STATES = {
    "z+": np.array([1.0, 0.0], dtype=complex),
    "z-": np.array([0.0, 1.0], dtype=complex),
    "up": np.array([1.0, 0.0], dtype=complex),
    "down": np.array([0.0, 1.0], dtype=complex),
    "x+": np.array([_SQ2, _SQ2], dtype=complex),
    "x-": np.array([_SQ2, -_SQ2], dtype=complex),
    "y+": np.array([_SQ2, 1j * _SQ2], dtype=complex),
    "y-": np.array([_SQ2, -1j * _SQ2], dtype=complex),
}


@dataclass(frozen=True)
class StateVector:
    """An N-qubit pure state as a dense array of 2^N complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude array of shape {amps.shape} does not match "
                f"{self.n_qubits} qubits"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class LocalGate:
    """A 1- or 2-site matrix with the sites it acts on.

    The first support site corresponds to the least significant bit of the
    local matrix index.  When ``unitary`` is set (the default) the matrix is
    checked against U^dag U = 1 at construction.
    """

    support: tuple[int, ...]
    matrix: np.ndarray
    unitary: bool = True

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(support) not in (1, 2):
            raise ValueError("gate support must be 1 or 2 sites")
        if len(set(support)) != len(support):
            raise ValueError("gate support sites must be distinct")
        mat = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** len(support)
        if mat.shape != (dim, dim):
            raise ValueError(f"gate matrix shape {mat.shape} does not match support {support}")
        if self.unitary:
            dev = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
            if dev > _ATOL_UNITARY:
                raise ValueError(f"matrix flagged unitary deviates from unitarity by {dev:.2e}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", mat)


@dataclass
class Circuit:
    """Ordered layers of local gates plus an accumulated log rescale constant.

    Gates within one layer have pairwise-disjoint supports.  ``log_rescale``
    tracks the classical factor ``c`` such that the represented (generally
    non-unitary) operation is ``exp(log_rescale) * (product of layers)``.
    """

    n_qubits: int
    layers: list[list[LocalGate]] = field(default_factory=list)
    log_rescale: float = 0.0

    def __post_init__(self):
        for layer in self.layers:
            sites = [s for g in layer for s in g.support]
            if len(sites) != len(set(sites)):
                raise ValueError("layer contains gates with overlapping supports")

    @property
    def n_layers(self) -> int:
        return len(self.layers)


def _resolve_orientation(spec) -> np.ndarray:
    if isinstance(spec, str):
        key = spec.lower()
        if key not in AXIS_STATES:
            raise ValueError(f"unknown axis state {spec!r}")
        return AXIS_STATES[key].copy()
    vec = np.asarray(spec, dtype=complex).reshape(-1)
    if vec.shape != (2,):
        raise ValueError("orientation must be a named axis state or a 2-component pair")
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"orientation vector has norm {nrm}, expected 1")
    return vec / nrm


def product_state(orientations) -> StateVector:
    """Tensor product of single-qubit states, one orientation per site.

    Each orientation is a name from ``AXIS_STATES`` ("up", "down", "x+", ...)
    or a normalized 2-component complex pair.  Site ``i`` of the list is
    qubit ``i`` (least significant bit of the amplitude index).
    """
    if len(orientations) == 0:
        raise ValueError("zero qubits")
    vecs = [_resolve_orientation(o) for o in orientations]
    amps = vecs[0]
    for vec in vecs[1:]:
        # site k is the LSB of np.kron's second factor
        amps = np.kron(vec, amps)
    return StateVector(len(vecs), amps)


def basis_state(n_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def apply_matrix(state: StateVector, matrix: np.ndarray, sites) -> StateVector:
    """Apply a 2^k x 2^k matrix to ``sites`` of the state (general kernel).

    The first listed site is the least significant bit of the local index.
    Sites must be distinct and in range; ``k`` is not restricted to 2, which
    the controlled-evolution baselines rely on.
    """
    sites = [int(s) for s in sites]
    n = state.n_qubits
    if len(set(sites)) != len(sites):
        raise ValueError("duplicate sites in gate support")
    if any(s < 0 or s >= n for s in sites):
        raise ValueError(f"gate support {sites} out of range for {n} qubits")
    k = len(sites)
    mat = np.asarray(matrix, dtype=complex)
    if mat.shape != (2**k, 2**k):
        raise ValueError("matrix dimension does not match number of sites")

    # reshape to one axis per qubit; axis (n-1-q) holds qubit q
    psi = state.amplitudes.reshape([2] * n)
    site_axes = [n - 1 - s for s in sites]
    rest_axes = [a for a in range(n) if a not in site_axes]
    # move the site axes to the back with site[0] last, so the flattened
    # local index is q_{s0} + 2 q_{s1} + ... as in the matrix convention
    perm = rest_axes + site_axes[::-1]
    psi = np.transpose(psi, perm).reshape(-1, 2**k)
    psi = psi @ mat.T
    psi = np.transpose(psi.reshape([2] * n), np.argsort(perm))
    return StateVector(n, np.ascontiguousarray(psi.reshape(-1)))


def apply_gate(state: StateVector, gate: LocalGate) -> StateVector:
    """Apply a local gate; all sites outside its support are untouched."""
    return apply_matrix(state, gate.matrix, gate.support)


def apply_layer(state: StateVector, layer) -> StateVector:
    for gate in layer:
        state = apply_gate(state, gate)
    return state


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Apply all layers of a circuit.  The classical rescale constant is
    *not* folded into the amplitudes; callers track it separately."""
    for layer in circuit.layers:
        state = apply_layer(state, layer)
    return state


def inner_product(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket> = sum_i conj(bra_i) ket_i."""
    if bra.n_qubits != ket.n_qubits:
        raise ValueError("states act on different numbers of qubits")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def pack_layers(gates, ordered: bool = False) -> list[list[LocalGate]]:
    """Group gates into layers of pairwise-disjoint supports.

    With ``ordered=False`` (commuting gates) each gate goes into the earliest
    layer that has no site conflict, which packs a nearest-neighbour bond
    group into the usual even/odd brickwork.  With ``ordered=True`` the
    relative order of overlapping gates is preserved: a gate is placed after
    the last layer touching any of its sites.
    """
    layers: list[list[LocalGate]] = []
    occupied: list[set[int]] = []
    last_touch: dict[int, int] = {}
    for gate in gates:
        if ordered:
            start = 1 + max((last_touch.get(s, -1) for s in gate.support), default=-1)
            idx = start
        else:
            idx = 0
            while idx < len(layers) and any(s in occupied[idx] for s in gate.support):
                idx += 1
        while idx >= len(layers):
            layers.append([])
            occupied.append(set())
        layers[idx].append(gate)
        occupied[idx].update(gate.support)
        for s in gate.support:
            last_touch[s] = idx
    return [layer for layer in layers if layer]
