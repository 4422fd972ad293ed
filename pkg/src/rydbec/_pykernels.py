"""Pure-numpy Liouvillian kernels (fallback when the compiled core is absent).

Both backends expose the same two functions and operate on C-contiguous
``complex128`` matrices in composite basis order.
"""
import numpy as np


def _coefficients(energies, nb, kappa):
    n = np.tile(np.arange(nb, dtype=float), energies.size // nb)
    diag = -1j * (energies[:, None] - energies[None, :]) - 0.5 * kappa * (n[:, None] + n[None, :])
    s = np.sqrt(np.arange(1, nb, dtype=float))
    jump = kappa * np.outer(s, s)[None, :, None, :]
    return diag, jump


def _apply(rho, diag, jump, nb, out):
    np.multiply(diag, rho, out=out)
    if jump is not None:
        blocks = rho.shape[0] // nb
        r4 = rho.reshape(blocks, nb, blocks, nb)
        o4 = out.reshape(blocks, nb, blocks, nb)
        o4[:, :-1, :, :-1] += jump * r4[:, 1:, :, 1:]
    return out


def liouvillian(rho, energies, nb, kappa):
    """Right-hand side of the master equation for a diagonal Hamiltonian."""
    rho = np.ascontiguousarray(rho, dtype=complex)
    energies = np.ascontiguousarray(energies, dtype=float)
    diag, jump = _coefficients(energies, nb, kappa)
    return _apply(rho, diag, jump if kappa != 0.0 and nb > 1 else None, nb, np.empty_like(rho))


def rk4_steps(rho, energies, nb, kappa, dt, nsteps):
    """Advance ``rho`` in place by ``nsteps`` classical RK4 steps of size ``dt``."""
    energies = np.ascontiguousarray(energies, dtype=float)
    diag, jump = _coefficients(energies, nb, kappa)
    if kappa == 0.0 or nb == 1:
        jump = None
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)
    h2 = 0.5 * dt
    for _ in range(nsteps):
        _apply(rho, diag, jump, nb, k1)
        np.multiply(k1, h2, out=tmp)
        tmp += rho
        _apply(tmp, diag, jump, nb, k2)
        np.multiply(k2, h2, out=tmp)
        tmp += rho
        _apply(tmp, diag, jump, nb, k3)
        np.multiply(k3, dt, out=tmp)
        tmp += rho
        _apply(tmp, diag, jump, nb, k4)
        k2 += k3
        k2 *= 2.0
        k1 += k4
        k1 += k2
        k1 *= dt / 6.0
        rho += k1
    return rho
