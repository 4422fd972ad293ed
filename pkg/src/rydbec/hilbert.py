"""Truncated Hilbert space of two impurity qubits and one bosonic mode.

Basis ordering: the impurity pair varies slowest (block order
``|00>, |01>, |10>, |11>``) and the Fock index fastest, so composite index
``k = (2*i + j) * (N + 1) + n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, TruncationError, ValidationError

TOL = 1e-10
TRUNCATION_BUDGET = 1e-10

IMPURITY_BLOCKS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class SystemParams:
    """Model scalars.

    ``omega`` and ``j_coupling`` enter the impurity Hamiltonian,
    ``omega_b`` and ``chi`` the Kerr oscillator, ``lambda_c`` the
    impurity-mode coupling and ``kappa`` the mode loss rate.
    """

    omega: float = 1.0
    j_coupling: float = 0.0
    lambda_c: float = 1.0
    omega_b: float = 0.0
    chi: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("omega", "j_coupling", "lambda_c", "omega_b", "chi", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.kappa < 0:
            raise ValidationError(f"kappa must be >= 0, got {self.kappa!r}")


@dataclass(frozen=True)
class FockSpec:
    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ValidationError(f"cutoff must be a non-negative integer, got {self.cutoff!r}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @classmethod
    def for_coherent(cls, alpha: complex) -> "FockSpec":
        return cls(default_cutoff(alpha))


def default_cutoff(alpha: complex) -> int:
    """Cutoff ``ceil(|a|^2 + 8|a| + 10)`` for a coherent amplitude ``a``."""
    r = abs(alpha)
    return int(math.ceil(r * r + 8.0 * r + 10.0))


@dataclass(frozen=True, eq=False)
class BecState:
    """Fock-basis amplitudes of the oscillator mode.

    ``norm_factor`` is the factor the raw amplitudes were multiplied by to
    reach unit norm (1.0 unless the state came from a truncated series).
    """

    amplitudes: np.ndarray
    norm_factor: float = 1.0
    tail_weight: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValidationError("BEC amplitudes must be a non-empty vector")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise ValidationError(f"BEC state not normalized: norm^2 = {norm!r}")

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def spec(self) -> FockSpec:
        return FockSpec(self.cutoff)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mean_number(self) -> float:
        return float(np.dot(np.arange(self.amplitudes.size), self.populations))


def bec_from_amplitudes(amplitudes, normalize: bool = True) -> BecState:
    """Build a ``BecState`` from an arbitrary amplitude list.

    With ``normalize`` the vector is rescaled to unit norm; otherwise it must
    already be normalized.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.ndim != 1 or amps.size == 0:
        raise ValidationError("BEC amplitudes must be a non-empty vector")
    norm = math.sqrt(float(np.vdot(amps, amps).real))
    if norm == 0.0:
        raise ValidationError("BEC amplitudes are all zero")
    if not normalize:
        return BecState(amps)
    return BecState(amps / norm, norm_factor=1.0 / norm)


def fock_state(m: int, spec: FockSpec) -> BecState:
    if not 0 <= m <= spec.cutoff:
        raise DimensionError(f"Fock index {m} outside [0, {spec.cutoff}]")
    amps = np.zeros(spec.dim, dtype=complex)
    amps[m] = 1.0
    return BecState(amps)


def poisson_log_weights(alpha: complex, nmax: int) -> np.ndarray:
    n = np.arange(nmax + 1)
    r2 = abs(alpha) ** 2
    if r2 == 0.0:
        out = np.full(nmax + 1, -np.inf)
        out[0] = 0.0
        return out
    from scipy.special import gammaln

    return -r2 + n * math.log(r2) - gammaln(n + 1)


def coherent_amplitudes(
    alpha: complex, spec: FockSpec | None = None, budget: float = TRUNCATION_BUDGET
) -> BecState:
    """Truncated, renormalized coherent state.

    Raises ``TruncationError`` when the Poisson weight discarded beyond the
    cutoff exceeds ``budget``.
    """
    if spec is None:
        spec = FockSpec.for_coherent(alpha)
    n = np.arange(spec.dim)
    logw = poisson_log_weights(alpha, spec.cutoff)
    retained = float(np.exp(logw).sum())
    tail = max(0.0, 1.0 - retained)
    if tail > budget:
        raise TruncationError(
            f"cutoff {spec.cutoff} too small for alpha={alpha}: tail weight {tail:.3e} "
            f"exceeds budget {budget:.1e}",
            tail_weight=tail,
        )
    raw = np.exp(0.5 * logw) * np.exp(1j * np.angle(alpha) * n)
    norm = math.sqrt(float(np.sum(np.abs(raw) ** 2)))
    return BecState(raw / norm, norm_factor=1.0 / norm, tail_weight=tail)


@dataclass(frozen=True, eq=False)
class CompositeState:
    amplitudes: np.ndarray
    cutoff: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (4 * (self.cutoff + 1),):
            raise DimensionError(
                f"composite vector length {amps.shape} != 4*(N+1) = {4 * (self.cutoff + 1)}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise ValidationError(f"composite state not normalized: norm^2 = {norm!r}")

    @property
    def dim_labels(self) -> tuple[int, int, int]:
        return (2, 2, self.cutoff + 1)

    def blocks(self) -> np.ndarray:
        """Amplitudes reshaped to ``(4, N+1)``: impurity block by Fock index."""
        return self.amplitudes.reshape(4, self.cutoff + 1)


def basis_index(i: int, j: int, n: int, cutoff: int) -> int:
    if i not in (0, 1) or j not in (0, 1) or not 0 <= n <= cutoff:
        raise DimensionError(f"invalid basis label ({i}, {j}, {n}) for cutoff {cutoff}")
    return (2 * i + j) * (cutoff + 1) + n


def basis_labels(k: int, cutoff: int) -> tuple[int, int, int]:
    nb = cutoff + 1
    if not 0 <= k < 4 * nb:
        raise DimensionError(f"index {k} outside composite space of dim {4 * nb}")
    block, n = divmod(k, nb)
    return block >> 1, block & 1, n


def product_state(theta: float, bec: BecState) -> CompositeState:
    """``(cos(theta)|00> + sin(theta)|11>) (x) bec``."""
    nb = bec.amplitudes.size
    amps = np.zeros((4, nb), dtype=complex)
    amps[0] = math.cos(theta) * bec.amplitudes
    amps[3] = math.sin(theta) * bec.amplitudes
    return CompositeState(amps.ravel(), bec.cutoff)


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray
    dim_labels: tuple[int, ...]

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        labels = tuple(int(d) for d in self.dim_labels)
        d = math.prod(labels)
        if mat.shape != (d, d):
            raise DimensionError(f"matrix shape {mat.shape} inconsistent with dim_labels {labels}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dim_labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def check_physical(self, tol: float = TOL) -> None:
        herm = self.hermiticity_residual()
        if herm > tol:
            raise ValidationError(f"density matrix not Hermitian: residual {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"density matrix trace {tr} != 1")


def density_from_pure(state: CompositeState) -> DensityOp:
    psi = state.amplitudes
    return DensityOp(np.outer(psi, psi.conj()), state.dim_labels)


def _check_labels(rho: DensityOp, subsystems) -> list[int]:
    n = len(rho.dim_labels)
    idx = sorted({int(s) for s in subsystems})
    if not idx or any(s < 0 or s >= n for s in idx):
        raise DimensionError(f"subsystem indices {subsystems!r} invalid for {n} subsystems")
    return idx


def partial_trace(rho: DensityOp, keep) -> DensityOp:
    """Trace out every subsystem not listed in ``keep``."""
    keep = _check_labels(rho, keep)
    labels = rho.dim_labels
    n = len(labels)
    t = rho.matrix.reshape(labels + labels)
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = list(letters[:n])
    bra = list(letters[n : 2 * n])
    for s in range(n):
        if s not in keep:
            bra[s] = ket[s]
    out = "".join(ket[s] for s in keep) + "".join(bra[s] for s in keep)
    reduced = np.einsum("".join(ket) + "".join(bra) + "->" + out, t)
    kept = tuple(labels[s] for s in keep)
    d = math.prod(kept)
    return DensityOp(reduced.reshape(d, d), kept)


def partial_transpose(rho: DensityOp, transposed) -> np.ndarray:
    """Swap ket and bra indices of the listed subsystem(s).

    Returns a bare matrix: the result is Hermitian with unit trace but need
    not be positive, so it is not a ``DensityOp``.
    """
    if isinstance(transposed, (int, np.integer)):
        transposed = [transposed]
    idx = _check_labels(rho, transposed)
    labels = rho.dim_labels
    n = len(labels)
    t = rho.matrix.reshape(labels + labels)
    axes = list(range(2 * n))
    for s in idx:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    d = rho.dim
    return np.ascontiguousarray(t.transpose(axes)).reshape(d, d)


def group_subsystems(rho: DensityOp, groups) -> DensityOp:
    """Relabel ``rho`` by merging consecutive subsystems.

    ``groups`` lists how many original subsystems each new one spans, e.g.
    ``[2, 1]`` turns ``(2, 2, N+1)`` into ``(4, N+1)``.
    """
    labels = rho.dim_labels
    if sum(groups) != len(labels):
        raise DimensionError(f"grouping {groups!r} does not cover {len(labels)} subsystems")
    out, pos = [], 0
    for g in groups:
        out.append(math.prod(labels[pos : pos + g]))
        pos += g
    return DensityOp(rho.matrix, tuple(out))


def annihilation(spec: FockSpec) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, spec.dim, dtype=float)), k=1).astype(complex)
