"""Dense complex linear algebra over small multi-qudit Hilbert spaces.

Amplitude layout: site 0 is the most significant (slowest varying) index,
i.e. the ordering produced by ``np.kron(site0, site1, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import tolerances as tol
from .errors import DimensionError, ZeroProbabilityBranch

__all__ = [
    "StateVector",
    "DensityMatrix",
    "MeasurementBasis",
    "tensor_product",
    "embed_local",
    "apply_local",
    "born_probabilities",
    "project_normalize",
    "partial_trace",
    "trace_distance",
    "purity",
    "same_ray",
    "singlet",
    "ghz",
    "w_state",
    "product_state",
]


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("at least one site is required")
    if any(d < 2 for d in dims):
        raise DimensionError(f"every site dimension must be >= 2, got {dims}")
    total = math.prod(dims)
    if total > tol.MAX_HILBERT_DIM:
        raise DimensionError(
            f"joint dimension {total} exceeds the dense cap {tol.MAX_HILBERT_DIM}"
        )
    return dims


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``len(dims)`` qudits."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"amplitude vector has length {amps.size}, dims {dims} need {math.prod(dims)}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = tol.STRUCTURAL) -> bool:
        return abs(self.norm - 1.0) <= atol

    def normalized(self) -> StateVector:
        n = self.norm
        if n < math.sqrt(tol.ZERO_PROBABILITY):
            raise ZeroProbabilityBranch("cannot normalize a (near) zero vector")
        return StateVector(self.dims, self.amplitudes / n)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per site."""
        return self.amplitudes.reshape(self.dims)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    @classmethod
    def basis_state(cls, dims: Sequence[int], index: int) -> StateVector:
        dims = _check_dims(dims)
        amps = np.zeros(math.prod(dims), dtype=complex)
        amps[index] = 1.0
        return cls(dims, amps)

    def __repr__(self) -> str:
        return f"StateVector(dims={self.dims}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over ``dims``."""

    dims: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        rho = _frozen(self.entries)
        n = math.prod(dims)
        if rho.shape != (n, n):
            raise DimensionError(f"density matrix shape {rho.shape} does not match dims {dims}")
        if not np.allclose(rho, rho.conj().T, atol=tol.STRUCTURAL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > tol.STRUCTURAL:
            raise ValueError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
        if np.linalg.eigvalsh(rho).min() < -tol.STRUCTURAL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", rho)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> DensityMatrix:
        n = math.prod(dims)
        return cls(tuple(dims), np.eye(n) / n)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims}, entries={np.array2string(self.entries, precision=4)})"


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Complete orthonormal basis of one site; outcome ``j`` is ``vectors[j]``."""

    vectors: np.ndarray

    def __post_init__(self):
        vecs = _frozen(self.vectors)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise DimensionError(
                f"a basis needs site_dim vectors of length site_dim, got shape {vecs.shape}"
            )
        if vecs.shape[0] < 2:
            raise DimensionError("site dimension must be >= 2")
        gram = vecs.conj() @ vecs.T
        if not np.allclose(gram, np.eye(vecs.shape[0]), atol=tol.STRUCTURAL, rtol=0):
            raise ValueError("basis vectors are not orthonormal")
        object.__setattr__(self, "vectors", vecs)

    @property
    def site_dim(self) -> int:
        return self.vectors.shape[0]

    def projector(self, outcome: int) -> np.ndarray:
        v = self.vectors[outcome]
        return np.outer(v, v.conj())

    def same_as(self, other: MeasurementBasis, atol: float = tol.EQUALITY) -> bool:
        return self.vectors.shape == other.vectors.shape and np.allclose(
            self.vectors, other.vectors, atol=atol, rtol=0
        )

    @classmethod
    def computational(cls, dim: int = 2) -> MeasurementBasis:
        return cls(np.eye(dim))

    @classmethod
    def pauli_x(cls) -> MeasurementBasis:
        s = 1 / math.sqrt(2)
        return cls([[s, s], [s, -s]])

    @classmethod
    def pauli_y(cls) -> MeasurementBasis:
        s = 1 / math.sqrt(2)
        return cls([[s, 1j * s], [s, -1j * s]])

    @classmethod
    def from_coefficients(cls, c: complex, d: complex) -> MeasurementBasis:
        """Qubit basis ``{c|0> + d|1>, conj(d)|0> - conj(c)|1>}``."""
        c, d = complex(c), complex(d)
        return cls([[c, d], [d.conjugate(), -c.conjugate()]])

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> MeasurementBasis:
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls(q.T)


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def embed_local(op, site: int, dims: Sequence[int]) -> np.ndarray:
    """Return ``I ⊗ ... ⊗ op ⊗ ... ⊗ I`` with ``op`` acting on ``site``."""
    dims = _check_dims(dims)
    op = np.asarray(op, dtype=complex)
    if not 0 <= site < len(dims):
        raise DimensionError(f"site {site} out of range for {len(dims)} sites")
    if op.shape != (dims[site], dims[site]):
        raise DimensionError(f"operator shape {op.shape} does not fit site of dim {dims[site]}")
    left = math.prod(dims[:site])
    right = math.prod(dims[site + 1 :])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def _apply_site(amplitudes: np.ndarray, dims: tuple[int, ...], op: np.ndarray, site: int) -> np.ndarray:
    t = amplitudes.reshape(dims)
    t = np.tensordot(op, t, axes=([1], [site]))
    return np.moveaxis(t, 0, site).reshape(-1)


def apply_local(state: StateVector, op, site: int) -> StateVector:
    """Apply a site operator without materializing the joint matrix (no renormalization)."""
    op = np.asarray(op, dtype=complex)
    if not 0 <= site < state.n_sites:
        raise DimensionError(f"site {site} out of range for {state.n_sites} sites")
    if op.shape != (state.dims[site],) * 2:
        raise DimensionError(f"operator shape {op.shape} does not fit site of dim {state.dims[site]}")
    return StateVector(state.dims, _apply_site(state.amplitudes, state.dims, op, site))


def _site_components(state: StateVector, basis: MeasurementBasis, site: int) -> np.ndarray:
    if not 0 <= site < state.n_sites:
        raise DimensionError(f"site {site} out of range for {state.n_sites} sites")
    if basis.site_dim != state.dims[site]:
        raise DimensionError(
            f"basis of dim {basis.site_dim} cannot measure site {site} of dim {state.dims[site]}"
        )
    t = np.moveaxis(state.tensor(), site, 0).reshape(state.dims[site], -1)
    # row j holds <b_j| applied on the site: the unnormalized conditional remainder
    return basis.vectors.conj() @ t


def born_probabilities(state: StateVector, basis: MeasurementBasis, site: int) -> np.ndarray:
    comps = _site_components(state, basis, site)
    probs = np.sum(np.abs(comps) ** 2, axis=1)
    return probs / (state.norm**2)


def project_normalize(
    state: StateVector, basis: MeasurementBasis, site: int, outcome: int
) -> tuple[StateVector, float]:
    """Project ``site`` onto ``basis`` outcome; return (normalized state, probability)."""
    if not 0 <= outcome < basis.site_dim:
        raise DimensionError(f"outcome {outcome} out of range for basis of dim {basis.site_dim}")
    comps = _site_components(state, basis, site)
    row = comps[outcome]
    prob = float(np.sum(np.abs(row) ** 2) / state.norm**2)
    if prob < tol.ZERO_PROBABILITY:
        raise ZeroProbabilityBranch(
            f"outcome {outcome} on site {site} has probability {prob:.3g}"
        )
    moved = (state.dims[site],) + tuple(d for i, d in enumerate(state.dims) if i != site)
    t = np.outer(basis.vectors[outcome], row).reshape(moved)
    amps = np.moveaxis(t, 0, site).reshape(-1)
    amps = amps / np.linalg.norm(amps)
    return StateVector(state.dims, amps), prob


def _letters(n: int) -> str:
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[:n]


def partial_trace(rho_or_state, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the sites in ``keep`` (returned in increasing site order)."""
    keep = sorted(set(int(k) for k in keep))
    dims = rho_or_state.dims
    n = len(dims)
    if not keep:
        raise DimensionError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"keep set {keep} out of range for {n} sites")
    kept_dims = tuple(dims[k] for k in keep)
    dk = math.prod(kept_dims)

    if isinstance(rho_or_state, StateVector):
        psi = rho_or_state.amplitudes / rho_or_state.norm
        t = psi.reshape(dims)
        rest = [i for i in range(n) if i not in keep]
        m = np.transpose(t, keep + rest).reshape(dk, -1)
        red = m @ m.conj().T
    else:
        # the dimension cap keeps n <= 12, well within einsum's alphabet
        rows = _letters(n)
        cols = [rows[i].upper() if i in keep else rows[i] for i in range(n)]
        spec_in = rows + "".join(cols)
        spec_out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
        red = np.einsum(f"{spec_in}->{spec_out}", rho_or_state.entries.reshape(dims + dims))
        red = red.reshape(dk, dk)
    red = (red + red.conj().T) / 2
    return DensityMatrix(kept_dims, red / np.trace(red).real)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dims != b.dims:
        raise DimensionError(f"dims differ: {a.dims} vs {b.dims}")
    diff = a.entries - b.entries
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.entries @ rho.entries)))


def same_ray(a: StateVector, b: StateVector, atol: float = tol.EQUALITY) -> bool:
    """True when ``a`` and ``b`` differ at most by a global phase."""
    if a.dims != b.dims:
        return False
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes)) / (a.norm * b.norm)
    return abs(1.0 - overlap) <= atol


# named states


def singlet() -> StateVector:
    """(|01> - |10>)/sqrt(2)."""
    s = 1 / math.sqrt(2)
    return StateVector((2, 2), [0, s, -s, 0])


def ghz(n: int = 3) -> StateVector:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector((2,) * n, amps)


def w_state(n: int = 3) -> StateVector:
    amps = np.zeros(2**n, dtype=complex)
    for k in range(n):
        amps[1 << k] = 1 / math.sqrt(n)
    return StateVector((2,) * n, amps)


def product_state(*factors) -> StateVector:
    """Tensor product of single-site amplitude vectors."""
    out = None
    for f in factors:
        f = np.asarray(f, dtype=complex)
        sv = StateVector((f.size,), f)
        out = sv if out is None else tensor_product(out, sv)
    if out is None:
        raise DimensionError("need at least one factor")
    return out
