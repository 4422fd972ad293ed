# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Liouvillian kernels; same contract as ``_pykernels``.

Each RK4 stage is fused with the stage update so every stage makes a single
pass over the matrix.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _stage(const double complex* x, const double complex* rho,
                        double complex* nxt, double complex* acc,
                        const double* e, const double* nocc, const double* sq,
                        Py_ssize_t d, Py_ssize_t nb, double kappa,
                        double c_next, double c_acc, bint first) noexcept nogil:
    # f = L(x); nxt = rho + c_next * f; acc (+)= c_acc * f
    cdef Py_ssize_t k, l, nk, nl
    cdef double half = 0.5 * kappa
    cdef double ek, hk, ck
    cdef double complex f, g
    cdef const double complex* xr
    cdef const double complex* xd
    for k in range(d):
        ek = e[k]
        hk = nocc[k]
        nk = <Py_ssize_t>hk
        xr = x + k * d
        xd = x + (k + 1) * d + 1
        ck = kappa * sq[nk] if (kappa != 0.0 and nk < nb - 1) else 0.0
        for l in range(d):
            g = -half * (hk + nocc[l]) - 1j * (ek - e[l])
            f = g * xr[l]
            if ck != 0.0:
                nl = <Py_ssize_t>nocc[l]
                if nl < nb - 1:
                    f = f + ck * sq[nl] * xd[l]
            if nxt != NULL:
                nxt[k * d + l] = rho[k * d + l] + c_next * f
            if first:
                acc[k * d + l] = c_acc * f
            else:
                acc[k * d + l] = acc[k * d + l] + c_acc * f


def _prepare(energies, Py_ssize_t nb):
    e = np.ascontiguousarray(energies, dtype=np.float64)
    nocc = np.tile(np.arange(nb, dtype=np.float64), e.shape[0] // nb)
    sq = np.sqrt(np.arange(1, nb + 1, dtype=np.float64))
    return e, nocc, sq


def liouvillian(rho, energies, Py_ssize_t nb, double kappa):
    """Right-hand side of the master equation for a diagonal Hamiltonian."""
    cdef const double complex[:, ::1] x = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t d = x.shape[0]
    out = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    e, nocc, sq = _prepare(energies, nb)
    cdef double[::1] ev = e
    cdef double[::1] nv = nocc
    cdef double[::1] sv = sq
    with nogil:
        _stage(&x[0, 0], &x[0, 0], NULL, &o[0, 0], &ev[0], &nv[0], &sv[0],
               d, nb, kappa, 0.0, 1.0, True)
    return out


def rk4_steps(double complex[:, ::1] rho, energies, Py_ssize_t nb, double kappa,
              double dt, Py_ssize_t nsteps):
    """Advance ``rho`` in place by ``nsteps`` classical RK4 steps of size ``dt``."""
    cdef Py_ssize_t d = rho.shape[0]
    e, nocc, sq = _prepare(energies, nb)
    cdef double[::1] ev = e
    cdef double[::1] nv = nocc
    cdef double[::1] sv = sq
    cdef double complex[:, ::1] ta = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] tb = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] acc = np.empty((d, d), dtype=np.complex128)
    cdef double complex* r = &rho[0, 0]
    cdef double complex* a = &ta[0, 0]
    cdef double complex* b = &tb[0, 0]
    cdef double complex* s = &acc[0, 0]
    cdef const double* pe = &ev[0]
    cdef const double* pn = &nv[0]
    cdef const double* ps = &sv[0]
    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0
    cdef Py_ssize_t step, k
    with nogil:
        for step in range(nsteps):
            _stage(r, r, a, s, pe, pn, ps, d, nb, kappa, h2, h6, True)
            _stage(a, r, b, s, pe, pn, ps, d, nb, kappa, h2, 2.0 * h6, False)
            _stage(b, r, a, s, pe, pn, ps, d, nb, kappa, dt, 2.0 * h6, False)
            _stage(a, r, NULL, s, pe, pn, ps, d, nb, kappa, 0.0, h6, False)
            for k in range(d * d):
                r[k] = r[k] + s[k]
    return np.asarray(rho)
