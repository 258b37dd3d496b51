"""Probability tables generated by density matrices and POVMs.

Expanding both a state and a POVM element on a trace-orthonormal Hermitian
basis turns ``tr(Pi rho)`` into an ordinary real dot product of their
coefficient vectors; :func:`scalar_product_check` evaluates both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DimensionMismatch, InvalidQuantumModel, NotHermitian, PurityOutOfRange
from .table import FLOAT, ProbabilityTable, build_table

TOL_HERM = 1e-10
TOL_PSD = 1e-10


def _normalize(mat: np.ndarray) -> np.ndarray:
    return mat / np.sqrt(np.trace(mat @ mat).real)


def hermitian_basis(n: int) -> np.ndarray:
    """Generalized Gell-Mann matrices scaled so that ``tr(B_k B_l) = delta_kl``.

    Shape ``(n*n, n, n)``. Order: ``I/sqrt(n)``, the symmetric off-diagonal
    family, the antisymmetric off-diagonal family, then the traceless
    diagonal family.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for k in range(1, n):
        for j in range(k):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            basis.append(_normalize(m))
    for k in range(1, n):
        for j in range(k):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            basis.append(_normalize(m))
    for ell in range(1, n):
        m = np.zeros((n, n), dtype=complex)
        m[np.arange(ell), np.arange(ell)] = 1.0
        m[ell, ell] = -ell
        basis.append(_normalize(m))
    return np.stack(basis)


def gram_matrix(basis: np.ndarray) -> np.ndarray:
    """``G[k, l] = tr(B_k B_l)``."""
    return np.einsum("kij,lji->kl", basis, basis)


def is_hermitian(op: np.ndarray, tol: float = TOL_HERM) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.max(np.abs(op - op.conj().T), initial=0) <= tol


def expand(op, basis: np.ndarray, tol: float = TOL_HERM) -> np.ndarray:
    """Real coefficients ``c_k = tr(op B_k)``, so that ``op = sum c_k B_k``."""
    op = np.asarray(op, dtype=complex)
    if op.shape != basis.shape[1:]:
        raise DimensionMismatch(f"operator shape {op.shape} does not match basis {basis.shape[1:]}")
    if not is_hermitian(op, tol):
        raise NotHermitian("operator is not Hermitian")
    coeffs = np.einsum("ij,kji->k", op, basis)
    if np.max(np.abs(coeffs.imag), initial=0) > tol:
        raise NotHermitian("expansion has imaginary coefficients")
    return coeffs.real


def synthesize(coeffs, basis: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(coeffs), basis)


def trace_probability(povm_element, rho, tol: float = TOL_PSD) -> float:
    """``tr(Pi rho)`` clamped to [0, 1] after checking it lies within ``tol`` of it."""
    pi = np.asarray(povm_element, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if pi.shape != rho.shape:
        raise DimensionMismatch(f"POVM element {pi.shape} and state {rho.shape} differ in size")
    p = np.trace(pi @ rho)
    if abs(p.imag) > tol or not -tol <= p.real <= 1 + tol:
        raise InvalidQuantumModel(f"tr(Pi rho) = {p} is not a probability")
    return float(min(max(p.real, 0.0), 1.0))


@dataclass
class ScalarProductCheck:
    trace_value: float
    dot_value: float
    agree: bool


def scalar_product_check(povm_element, rho, basis: np.ndarray, tol: float = TOL_HERM) -> ScalarProductCheck:
    """Compare ``tr(Pi rho)`` with the dot product of the two expansions.

    Both operators must be expanded on the same ``basis``.
    """
    pi = np.asarray(povm_element, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if pi.shape != rho.shape:
        raise DimensionMismatch(f"POVM element {pi.shape} and state {rho.shape} differ in size")
    trace_value = float(np.trace(pi @ rho).real)
    dot_value = float(expand(pi, basis, tol) @ expand(rho, basis, tol))
    return ScalarProductCheck(trace_value, dot_value, abs(trace_value - dot_value) <= tol)


@dataclass
class QuantumModel:
    """States and POVMs on an ``dimension``-dimensional Hilbert space."""

    dimension: int
    states: list[np.ndarray]
    povms: list[list[np.ndarray]]
    state_labels: list[str] = field(default_factory=list)
    povm_labels: list[str] = field(default_factory=list)
    result_labels: list[list[str]] = field(default_factory=list)

    def __post_init__(self):
        self.states = [np.asarray(s, dtype=complex) for s in self.states]
        self.povms = [[np.asarray(e, dtype=complex) for e in povm] for povm in self.povms]
        if not self.state_labels:
            self.state_labels = [f"S_{j + 1}" for j in range(len(self.states))]
        if not self.povm_labels:
            self.povm_labels = [f"M_{k + 1}" for k in range(len(self.povms))]
        if not self.result_labels:
            self.result_labels = [[f"R_{i + 1}" for i in range(len(p))] for p in self.povms]


def _min_eig(op: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((op + op.conj().T) / 2).min())


def validate_model(model: QuantumModel, tol_herm: float = TOL_HERM, tol_psd: float = TOL_PSD) -> None:
    """Raise :class:`InvalidQuantumModel` naming the first bad state or POVM."""
    n = model.dimension
    if n < 1:
        raise InvalidQuantumModel("dimension must be at least 1")
    if not model.states or not model.povms:
        raise InvalidQuantumModel("model needs at least one state and one POVM")
    if len(model.state_labels) != len(model.states) or len(model.povm_labels) != len(model.povms):
        raise InvalidQuantumModel("label lists do not match the number of states/POVMs")
    for label, rho in zip(model.state_labels, model.states):
        if rho.shape != (n, n):
            raise InvalidQuantumModel(f"state {label!r} has shape {rho.shape}, expected {(n, n)}")
        if not is_hermitian(rho, tol_herm):
            raise InvalidQuantumModel(f"state {label!r} is not Hermitian")
        if _min_eig(rho) < -tol_psd:
            raise InvalidQuantumModel(f"state {label!r} is not positive semidefinite")
        if abs(np.trace(rho) - 1) > tol_herm:
            raise InvalidQuantumModel(f"state {label!r} has trace {np.trace(rho).real:.6g}")
    for label, results, povm in zip(model.povm_labels, model.result_labels, model.povms):
        if not povm or len(results) != len(povm):
            raise InvalidQuantumModel(f"POVM {label!r} has mismatched or empty elements")
        for name, el in zip(results, povm):
            if el.shape != (n, n):
                raise InvalidQuantumModel(f"POVM {label!r} element {name!r} has shape {el.shape}")
            if not is_hermitian(el, tol_herm):
                raise InvalidQuantumModel(f"POVM {label!r} element {name!r} is not Hermitian")
            if _min_eig(el) < -tol_psd:
                raise InvalidQuantumModel(f"POVM {label!r} element {name!r} is not positive semidefinite")
        if np.max(np.abs(sum(povm) - np.eye(n))) > tol_herm:
            raise InvalidQuantumModel(f"POVM {label!r} elements do not sum to the identity")


def quantum_table(model: QuantumModel, tol: float = 1e-9) -> ProbabilityTable:
    """Float table with entry ``tr(Pi_i rho_j)`` per POVM element and state."""
    validate_model(model)
    rows = [
        [trace_probability(el, rho) for rho in model.states]
        for povm in model.povms
        for el in povm
    ]
    interventions = list(zip(model.povm_labels, model.result_labels))
    return build_table(model.state_labels, interventions, rows, FLOAT, tol)


# -- photon polarization ----------------------------------------------------

CIRCULAR = 45.0


def polarization_ket(angle: float, ellipticity: float = 0.0) -> np.ndarray:
    """Jones vector for orientation ``angle`` and ellipticity angle ``ellipticity`` (degrees).

    ``ellipticity = 0`` is linear polarization at ``angle``; ``+45`` is
    circular. Overlaps of linear kets follow Malus's law:
    ``|<a|b>|^2 = cos^2(a - b)``.
    """
    th, chi = np.radians(angle), np.radians(ellipticity)
    return np.array(
        [
            np.cos(th) * np.cos(chi) - 1j * np.sin(th) * np.sin(chi),
            np.sin(th) * np.cos(chi) + 1j * np.cos(th) * np.sin(chi),
        ]
    )


def _parse_polarization(spec) -> tuple[float, float, str]:
    """Accept ``angle``, ``(angle, ellipticity)``, ``"R"``/``"L"`` for circular."""
    if isinstance(spec, str):
        if spec.upper() == "R":
            return 0.0, CIRCULAR, "R"
        if spec.upper() == "L":
            return 0.0, -CIRCULAR, "L"
        spec = float(spec)
    if isinstance(spec, (tuple, list)):
        angle, chi = float(spec[0]), float(spec[1])
        return angle, chi, f"{angle:g}/{chi:g}"
    return float(spec), 0.0, f"{float(spec):g}"


def _projector(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


DEFAULT_PREP_ANGLES = (0, 45, 90, 135, "R")
DEFAULT_PREP_PURITIES = (1, 1, 1, 1, 1)
DEFAULT_FILTER_ANGLES = (0, 30, 45, 60, "R")


def qubit_polarization_preset(
    prep_angles: Sequence = DEFAULT_PREP_ANGLES,
    prep_purities: Sequence[float] | None = DEFAULT_PREP_PURITIES,
    filter_angles: Sequence = DEFAULT_FILTER_ANGLES,
    include_mixed: bool = True,
) -> QuantumModel:
    """Single-photon polarization states and two-outcome filter interventions.

    Preparation ``theta`` with purity ``q`` is ``q |theta><theta| + (1-q) I/2``.
    Filter ``phi`` has results ``out`` (``|phi><phi|``) and ``abs``
    (``I - |phi><phi|``). Angles are polarization angles in degrees, or
    ``"R"``/``"L"`` for circular polarization, or ``(angle, ellipticity)``.
    ``include_mixed`` appends the unpolarized state.

    Linear polarizations alone only reach real density matrices, which give
    rank 3; the defaults add a circular preparation and filter so the table
    reaches the full rank 4.
    """
    if prep_purities is None:
        prep_purities = [1.0] * len(prep_angles)
    if len(prep_purities) != len(prep_angles):
        raise ValueError("need one purity per preparation angle")
    states, labels = [], []
    for spec, q in zip(prep_angles, prep_purities):
        if not 0 <= q <= 1:
            raise PurityOutOfRange(f"purity {q} is outside [0, 1]")
        angle, chi, name = _parse_polarization(spec)
        rho = q * _projector(polarization_ket(angle, chi)) + (1 - q) * np.eye(2) / 2
        states.append(rho)
        labels.append(f"S_{name}" if q == 1 else f"S_{name}@{q:g}")
    if include_mixed:
        states.append(np.eye(2, dtype=complex) / 2)
        labels.append("S_mixed")
    povms, povm_labels, results = [], [], []
    for spec in filter_angles:
        angle, chi, name = _parse_polarization(spec)
        proj = _projector(polarization_ket(angle, chi))
        povms.append([proj, np.eye(2) - proj])
        povm_labels.append(f"M_{name}")
        results.append([f"R_out_{name}", f"R_abs_{name}"])
    return QuantumModel(2, states, povms, labels, povm_labels, results)


def trivial_model() -> QuantumModel:
    """One-dimensional system: a single state and a single one-outcome POVM."""
    return QuantumModel(1, [np.eye(1)], [[np.eye(1)]])


def bloch_vector(rho) -> np.ndarray:
    """Bloch vector ``(tr rho X, tr rho Y, tr rho Z)`` of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    paulis = (
        np.array([[0, 1], [1, 0]]),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]]),
    )
    return np.array([np.trace(rho @ p).real for p in paulis])


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random state ``A A^dagger / tr`` from a complex Gaussian ``n x rank`` matrix."""
    a = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_povm(n: int, outcomes: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random POVM: PSD Gaussian elements conjugated by ``S^(-1/2)``, ``S`` their sum."""
    raw = []
    for _ in range(outcomes):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        raw.append(a @ a.conj().T)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(w ** -0.5) @ v.conj().T
    return [inv_sqrt @ el @ inv_sqrt for el in raw]


def informationally_complete_model(n: int) -> QuantumModel:
    """States and two-outcome filters whose table has the maximal rank ``n*n``.

    Preparations are the basis kets plus ``(|a> + |b>)/sqrt2`` and
    ``(|a> + i|b>)/sqrt2`` for every pair ``a < b``; interventions are a
    filter (projector, complement) on each of those same kets. With ``n = 1``
    this is the trivial model.
    """
    if n == 1:
        return trivial_model()
    kets, names = [], []
    eye = np.eye(n, dtype=complex)
    for a in range(n):
        kets.append(eye[a])
        names.append(f"{a}")
    for a in range(n):
        for b in range(a + 1, n):
            kets.append((eye[a] + eye[b]) / np.sqrt(2))
            names.append(f"{a}+{b}")
            kets.append((eye[a] + 1j * eye[b]) / np.sqrt(2))
            names.append(f"{a}+i{b}")
    states = [_projector(k) for k in kets]
    povms = [[_projector(k), eye - _projector(k)] for k in kets]
    return QuantumModel(
        n,
        states,
        povms,
        [f"S_{m}" for m in names],
        [f"M_{m}" for m in names],
        [[f"R_in_{m}", f"R_out_{m}"] for m in names],
    )
