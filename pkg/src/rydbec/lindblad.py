"""Zero-temperature master equation with loss of condensate quanta.

The Hamiltonian is diagonal in the composite basis, so the commutator is an
elementwise product and the dissipator couples ``(n+1, m+1)`` to ``(n, m)``
within each impurity block pair.  The time stepping lives in
:mod:`rydbec.kernels` (compiled or numpy backend).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import energies
from .errors import DimensionError, IntegrationDiverged, TruncationError, ValidationError
from .hilbert import DensityOp, FockSpec, SystemParams, annihilation
from .measures import negativity, wootters_concurrence

logger = logging.getLogger(__name__)

OBSERVABLES = ("concurrence", "neg_mimi", "neg_mima", "trace", "purity", "leakage")
DEFAULT_OBSERVABLES = ("concurrence", "neg_mimi", "trace", "purity", "leakage")


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``dt`` and ``t_final`` are in units of ``1/lambda`` (i.e. scaled time).
    The step is shrunk slightly if needed so that ``t_final`` is hit exactly.
    """

    dt: float = 1e-3
    t_final: float = 2 * math.pi
    sample_every: int = 10
    trace_tolerance: float = 1e-8
    leakage_warn: float = 1e-6
    leakage_fail: float = 1e-4
    observables: tuple[str, ...] = DEFAULT_OBSERVABLES
    store_snapshots: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be > 0, got {self.dt!r}")
        if not self.t_final >= 0:
            raise ValidationError(f"t_final must be >= 0, got {self.t_final!r}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValidationError(f"sample_every must be a positive integer, got {self.sample_every!r}")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ValidationError(f"unknown observables: {sorted(unknown)}")

    @property
    def nsteps(self) -> int:
        if self.t_final == 0:
            return 0
        return max(1, math.ceil(self.t_final / self.dt - 1e-9))

    @property
    def step(self) -> float:
        n = self.nsteps
        return self.t_final / n if n else self.dt


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    observables: dict[str, np.ndarray]
    rho_snapshots: list[DensityOp] | None = None
    backend: str = field(default=kernels.BACKEND)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.observables[name]


def hamiltonian_matrix(params: SystemParams, spec: FockSpec) -> np.ndarray:
    return np.diag(energies(params, spec)).astype(complex)


def _fock_dim(rho, d: int) -> int:
    if isinstance(rho, DensityOp):
        return rho.dim_labels[-1]
    if d % 4:
        raise DimensionError(f"composite dimension {d} is not a multiple of 4")
    return d // 4


def liouvillian_apply(rho, params: SystemParams, H: np.ndarray) -> np.ndarray:
    """``d rho / dt`` for Hamiltonian ``H`` and loss rate ``params.kappa``.

    A diagonal ``H`` takes the elementwise fast path; a general ``H`` falls
    back to dense products.
    """
    m = rho.matrix if isinstance(rho, DensityOp) else np.asarray(rho, dtype=complex)
    H = np.asarray(H)
    d = m.shape[0]
    if m.shape != (d, d) or H.shape != (d, d):
        raise DimensionError(f"rho {m.shape} and H {H.shape} must be square of equal size")
    nb = _fock_dim(rho, d)
    e = np.real(np.diag(H))
    if np.count_nonzero(H - np.diag(np.diag(H))) == 0:
        return kernels.liouvillian(m, e, nb, params.kappa)
    a = np.kron(np.eye(d // nb), annihilation(FockSpec(nb - 1)))
    ad = a.conj().T
    nop = ad @ a
    out = -1j * (H @ m - m @ H)
    if params.kappa:
        out += params.kappa * (a @ m @ ad - 0.5 * (nop @ m + m @ nop))
    return out


def impurity_block(m: np.ndarray, nb: int) -> np.ndarray:
    """Trace out the mode from a composite matrix (contiguous block sums)."""
    blocks = m.shape[0] // nb
    return np.einsum("anbn->ab", m.reshape(blocks, nb, blocks, nb))


def top_level_population(m: np.ndarray, nb: int) -> float:
    blocks = m.shape[0] // nb
    return float(sum(m[b * nb + nb - 1, b * nb + nb - 1].real for b in range(blocks)))


def _observe(m: np.ndarray, nb: int, names) -> dict[str, float]:
    out = {}
    tr = float(np.trace(m).real)
    rho_r = impurity_block(m, nb) / tr
    rho_r = 0.5 * (rho_r + rho_r.conj().T)
    for name in names:
        if name == "concurrence":
            out[name] = wootters_concurrence(rho_r)
        elif name == "neg_mimi":
            out[name] = negativity(DensityOp(rho_r, (2, 2)), transposed=1)
        elif name == "neg_mima":
            out[name] = negativity(DensityOp(m / tr, (m.shape[0] // nb, nb)), transposed=1)
        elif name == "trace":
            out[name] = tr
        elif name == "purity":
            out[name] = float(np.sum(np.abs(m) ** 2).real)
        elif name == "leakage":
            out[name] = top_level_population(m, nb)
    return out


def evolve(rho0: DensityOp, params: SystemParams, spec: FockSpec, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Integrate from scaled time 0 to ``cfg.t_final`` and record observables.

    Samples are taken every ``cfg.sample_every`` steps and at the final
    step.  At each sample the state is re-Hermitized and checked for trace
    drift and population in the highest retained Fock level.
    """
    if params.lambda_c == 0:
        raise ValidationError("lambda_c must be nonzero: time is measured in units of 1/lambda")
    d = 4 * spec.dim
    if rho0.matrix.shape != (d, d):
        raise DimensionError(f"rho0 has shape {rho0.matrix.shape}, expected {(d, d)} for cutoff {spec.cutoff}")
    nb = spec.dim
    lam = params.lambda_c
    # integrate in scaled time: dividing the generator by lambda
    e = energies(params, spec) / lam
    kappa = params.kappa / lam
    h = cfg.step
    nsteps = cfg.nsteps

    names = list(dict.fromkeys(tuple(cfg.observables) + ("trace", "leakage")))
    rho = np.array(rho0.matrix, dtype=complex, order="C")
    times, rows, snaps = [], [], []

    def record(step: int) -> None:
        nonlocal rho
        rho = np.ascontiguousarray(0.5 * (rho + rho.conj().T))
        tau = step * h
        tr = float(np.trace(rho).real)
        drift = abs(tr - 1.0)
        if not drift <= cfg.trace_tolerance:
            raise IntegrationDiverged(f"trace drift {drift:.3e} at tau={tau:.6g}", time=tau)
        # the generator is trace-free, so an unstable step shows up as growth
        # of the Hilbert-Schmidt norm rather than as trace drift
        hs = float(np.vdot(rho, rho).real)
        if not hs <= 1.0 + cfg.trace_tolerance:
            raise IntegrationDiverged(f"purity {hs:.3e} exceeds 1 at tau={tau:.6g}", time=tau)
        leak = top_level_population(rho, nb)
        if leak > cfg.leakage_fail:
            raise TruncationError(
                f"population {leak:.3e} in Fock level {spec.cutoff} at tau={tau:.6g}; raise the cutoff",
                time=tau,
            )
        if leak > cfg.leakage_warn:
            warnings.warn(
                f"population {leak:.3e} in Fock level {spec.cutoff} at tau={tau:.6g}", TruncationWarning
            )
        times.append(tau)
        rows.append(_observe(rho, nb, names))
        if cfg.store_snapshots:
            snaps.append(DensityOp(rho.copy(), (2, 2, nb)))

    logger.debug("evolve: d=%d steps=%d h=%g backend=%s", d, nsteps, h, kernels.BACKEND)
    record(0)
    done = 0
    while done < nsteps:
        chunk = min(cfg.sample_every, nsteps - done)
        kernels.rk4_steps(rho, e, nb, kappa, h, chunk)
        done += chunk
        record(done)

    observables = {name: np.array([r[name] for r in rows]) for name in names}
    return TrajectoryRecord(np.array(times), observables, snaps if cfg.store_snapshots else None)
