"""Entanglement monotones: concurrence and negativity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .hilbert import TOL, DensityOp, group_subsystems, partial_transpose

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)

NEG_EIG_TOL = 1e-10


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOp) else np.asarray(rho, dtype=complex)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    """Square root of a density matrix, clamping round-off negatives.

    Raises ``ValidationError`` if any eigenvalue is below ``-NEG_EIG_TOL``.
    """
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] < -NEG_EIG_TOL:
        raise ValidationError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def wootters_concurrence(rho) -> float:
    """Concurrence of a two-qubit density matrix.

    The eigenvalues of ``R = rho (YY) rho* (YY)`` are obtained from the
    Hermitian matrix ``sqrt(rho) (YY) rho* (YY) sqrt(rho)``, which has the
    same spectrum.
    """
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValidationError(f"two-qubit density matrix must be 4x4, got {m.shape}")
    if abs(np.trace(m) - 1.0) > TOL or np.max(np.abs(m - m.conj().T)) > TOL:
        raise ValidationError("density matrix must be Hermitian with unit trace")
    s = _psd_sqrt(m)
    rho_tilde = YY @ m.conj() @ YY
    h = s @ rho_tilde @ s
    ev = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    lam = np.sqrt(np.clip(ev, 0.0, None))[::-1]
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(1.0, max(0.0, c)))


def x_form_concurrence(w: float, x: float, y: float, z: complex) -> float:
    """Concurrence of the X state ``[[w,0,0,z],[0,x,0,0],[0,0,x,0],[z*,0,0,y]]``."""
    if abs(w + 2 * x + y - 1.0) > TOL:
        raise ValidationError(f"X state trace w + 2x + y = {w + 2 * x + y!r} != 1")
    if min(w, x, y) < -TOL or abs(z) ** 2 > w * y + TOL:
        raise ValidationError("X state is not positive semidefinite")
    return float(min(1.0, max(0.0, 2 * abs(z) - 2 * x)))


def x_state_matrix(w: float, x: float, y: float, z: complex) -> np.ndarray:
    return np.array(
        [[w, 0, 0, z], [0, x, 0, 0], [0, 0, x, 0], [np.conj(z), 0, 0, y]], dtype=complex
    )


@dataclass(frozen=True)
class TwoComponentDecomposition:
    """Pure state ``(mu |eta>|gamma> + nu |xi>|delta>) / norm_n``.

    ``p1 = <eta|xi>`` and ``p2 = <delta|gamma>``.  ``norm_n`` is derived
    when omitted.
    """

    mu: complex
    nu: complex
    p1: complex
    p2: complex
    norm_n: float | None = None

    def __post_init__(self):
        n2 = abs(self.mu) ** 2 + abs(self.nu) ** 2 + 2 * (np.conj(self.mu) * self.nu * self.p1 * np.conj(self.p2)).real
        if self.norm_n is None:
            if n2 <= 0:
                raise ValidationError("two-component state has zero norm")
            object.__setattr__(self, "norm_n", math.sqrt(n2))
        elif abs(self.norm_n ** 2 - n2) > 1e-12:
            raise ValidationError(f"norm_n^2 = {self.norm_n ** 2!r} inconsistent with weights ({n2!r})")


def two_component_concurrence(decomp: TwoComponentDecomposition) -> float:
    a1, a2 = abs(decomp.p1), abs(decomp.p2)
    if a1 > 1 + TOL or a2 > 1 + TOL:
        raise ValidationError(f"overlap moduli must be <= 1, got {a1!r}, {a2!r}")
    if not decomp.norm_n > 0:
        raise ValidationError("norm_n must be positive")
    f = max(0.0, 1 - a1 * a1) * max(0.0, 1 - a2 * a2)
    return 2 * abs(decomp.mu) * abs(decomp.nu) / decomp.norm_n ** 2 * math.sqrt(f)


def negativity_from_spectrum(eigs) -> float:
    eigs = np.asarray(eigs, dtype=float)
    return max(0.0, 0.5 * float(np.sum(np.abs(eigs) - eigs)))


def negativity(rho: DensityOp, split=None, transposed=1) -> float:
    """Negativity across a bipartition.

    ``split`` optionally merges subsystems into two parties, e.g. ``[2, 1]``
    for (impurity pair)|(mode) on a ``(2, 2, N+1)`` operator.  The party
    index ``transposed`` is partially transposed.
    """
    if split is not None:
        rho = group_subsystems(rho, split)
    pt = partial_transpose(rho, transposed)
    try:
        eigs = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed on partial transpose of dim {pt.shape[0]}: {exc}"
        ) from exc
    return negativity_from_spectrum(eigs)


def pure_state_negativity(schmidt_probs) -> float:
    """Negativity of a pure state from its Schmidt probabilities.

    ``((sum_i sqrt(p_i))^2 - 1) / 2``.
    """
    p = np.clip(np.asarray(schmidt_probs, dtype=float), 0.0, None)
    s = float(np.sum(np.sqrt(p)))
    return max(0.0, 0.5 * (s * s - 1.0))


def reduced_x_components(rho) -> tuple[float, float, float, complex]:
    """``(w, x, y, z)`` of a two-qubit matrix assumed to be X-shaped."""
    m = _as_matrix(rho)
    return m[0, 0].real, 0.5 * (m[1, 1].real + m[2, 2].real), m[3, 3].real, complex(m[0, 3])
