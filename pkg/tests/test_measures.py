import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydbec.errors import ValidationError
from rydbec.hilbert import DensityOp, FockSpec, coherent_amplitudes, density_from_pure, partial_trace
from rydbec.dynamics import concurrence_mima_closed, evolved_composite
from rydbec.hilbert import SystemParams
from rydbec.measures import (
    YY,
    TwoComponentDecomposition,
    negativity,
    pure_state_negativity,
    two_component_concurrence,
    wootters_concurrence,
    x_form_concurrence,
    x_state_matrix,
)

from conftest import random_density, random_unitary

BELL = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2


def wootters_direct(rho):
    # oracle: square roots of the (real parts of the) eigenvalues of the non-Hermitian R
    R = rho @ YY @ rho.conj() @ YY
    ev = np.sort(np.sqrt(np.clip(np.linalg.eigvals(R).real, 0, None)))[::-1]
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


def random_x_state(rng):
    w, x2, y = rng.dirichlet([1, 1, 1])
    x = x2 / 2
    z = math.sqrt(w * y) * rng.uniform() * np.exp(2j * math.pi * rng.uniform())
    return w, x, y, z


class TestWootters:
    def test_bell(self):
        assert wootters_concurrence(BELL) == pytest.approx(1, abs=1e-12)

    def test_product(self, rng):
        rho = np.kron(random_density(rng, 2), random_density(rng, 2))
        assert wootters_concurrence(rho) == pytest.approx(0, abs=1e-12)

    def test_collapsed_x_state(self):
        xi = 0.5 * math.exp(-8)
        rho = x_state_matrix(0.5, 0.0, 0.5, xi * np.exp(0.7j))
        assert wootters_concurrence(rho) == pytest.approx(math.exp(-8), rel=1e-8)
        assert wootters_direct(rho) == pytest.approx(math.exp(-8), rel=1e-6)

    def test_matches_direct_eigenvalues(self, rng):
        for _ in range(50):
            rho = random_density(rng, 4, rank=rng.integers(1, 5))
            assert wootters_concurrence(rho) == pytest.approx(wootters_direct(rho), abs=1e-7)

    def test_rejects_unphysical(self):
        bad = np.diag([0.6, 0.6, -0.2, 0.0])
        with pytest.raises(ValidationError):
            wootters_concurrence(bad)
        with pytest.raises(ValidationError):
            wootters_concurrence(np.eye(3) / 3)

    def test_tiny_negative_eigenvalue_clamped(self):
        rho = np.diag([0.5, 0.5 + 5e-11, -5e-11, 0.0])
        assert wootters_concurrence(rho) == 0.0

    def test_local_unitary_invariance(self, rng):
        # full rank: near rank-deficient states the concurrence responds like
        # sqrt(perturbation), so rotation round-off alone exceeds 1e-10
        for _ in range(50):
            rho = random_density(rng, 4)
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            rotated = u @ rho @ u.conj().T
            assert abs(wootters_concurrence(rotated) - wootters_concurrence(rho)) < 1e-10

    def test_zero_iff_ppt(self, rng):
        for _ in range(100):
            rho = random_density(rng, 4, rank=rng.integers(1, 5))
            c = wootters_concurrence(rho)
            n = negativity(DensityOp(rho, (2, 2)))
            assert (c < 1e-9) == (n < 1e-9)


class TestXForm:
    def test_bell(self):
        assert x_form_concurrence(0.5, 0.0, 0.5, 0.5) == 1

    def test_mixed(self):
        assert x_form_concurrence(0.25, 0.25, 0.25, 0.0) == 0

    def test_validation(self):
        with pytest.raises(ValidationError):
            x_form_concurrence(0.5, 0.1, 0.5, 0.0)
        with pytest.raises(ValidationError):
            x_form_concurrence(0.5, 0.0, 0.5, 0.6)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_agrees_with_wootters(self, seed):
        w, x, y, z = random_x_state(np.random.default_rng(seed))
        assert abs(x_form_concurrence(w, x, y, z) - wootters_concurrence(x_state_matrix(w, x, y, z))) < 1e-10


class TestTwoComponent:
    def test_identical_second_states(self):
        assert two_component_concurrence(TwoComponentDecomposition(0.6, 0.8, 0.0, 1.0)) == 0

    def test_orthogonal(self):
        s = 1 / math.sqrt(2)
        assert two_component_concurrence(TwoComponentDecomposition(s, s, 0.0, 0.0)) == pytest.approx(1)

    def test_norm_invariant(self):
        d = TwoComponentDecomposition(1.0, 0.5j, 0.3 + 0.1j, 0.2 - 0.4j)
        n2 = 1 + 0.25 + 2 * (np.conj(1.0) * 0.5j * (0.3 + 0.1j) * np.conj(0.2 - 0.4j)).real
        assert abs(d.norm_n ** 2 - n2) < 1e-12
        with pytest.raises(ValidationError):
            TwoComponentDecomposition(1.0, 0.0, 0.0, 0.0, norm_n=2.0)

    def test_invalid_overlap(self):
        with pytest.raises(ValidationError):
            two_component_concurrence(TwoComponentDecomposition(0.6, 0.8, 0.0, 1.5, norm_n=1.0))

    def test_coherent_overlaps_match_closed_form(self):
        theta, alpha = math.pi / 4, 2.0
        p = SystemParams(omega=1.0, lambda_c=1.0)
        t = math.pi / 2
        p2 = np.exp(2j * p.omega * t + alpha ** 2 * (np.exp(2j * p.lambda_c * t) - 1))
        c = two_component_concurrence(TwoComponentDecomposition(math.cos(theta), math.sin(theta), 0.0, p2))
        assert c == pytest.approx(math.sqrt(1 - math.exp(-16)), abs=1e-12)
        assert c == pytest.approx(concurrence_mima_closed(theta, alpha, p, t), abs=1e-12)

    def test_reduces_with_orthogonal_first_states(self, rng):
        # p1 = 0 and unit norm: 2|mu nu| sqrt(1 - |p2|^2)
        for _ in range(20):
            th = rng.uniform(0, math.pi)
            p2 = rng.uniform() * np.exp(1j * rng.uniform(0, 6))
            d = TwoComponentDecomposition(math.cos(th), math.sin(th), 0.0, p2)
            assert d.norm_n == pytest.approx(1)
            assert two_component_concurrence(d) == pytest.approx(abs(math.sin(2 * th)) * math.sqrt(1 - abs(p2) ** 2))


class TestNegativity:
    def test_product(self, rng):
        rho = np.kron(random_density(rng, 4), random_density(rng, 3))
        assert negativity(DensityOp(rho, (4, 3))) == pytest.approx(0, abs=1e-12)

    def test_bell(self):
        assert negativity(DensityOp(BELL, (2, 2))) == 0.5

    def test_separable_mixtures(self, rng):
        for _ in range(20):
            rho = sum(
                w * np.kron(random_density(rng, 4, rank=1), random_density(rng, 3, rank=1))
                for w in rng.dirichlet(np.ones(5))
            )
            assert negativity(DensityOp(rho, (4, 3))) < 1e-12

    def test_pure_composite_matches_schmidt(self):
        theta, alpha = math.pi / 4, 2.0
        p = SystemParams(omega=1.0, lambda_c=1.0, omega_b=1.0, chi=0.01)
        bec = coherent_amplitudes(alpha)
        psi = evolved_composite(theta, bec, p, math.pi / 2)
        rho = density_from_pure(psi)
        n_full = negativity(rho, split=[2, 1])
        # oracle: Schmidt coefficients from the SVD of the (4, N+1) amplitude matrix
        s = np.linalg.svd(psi.blocks(), compute_uv=False)
        oracle = 0.5 * (s.sum() ** 2 - 1)
        assert n_full == pytest.approx(oracle, abs=1e-10)
        probs = np.linalg.eigvalsh(partial_trace(rho, [0, 1]).matrix)
        assert pure_state_negativity(probs) == pytest.approx(oracle, abs=1e-10)
        # near-maximal in both pictures, and 2N equals the two-component concurrence
        c2 = concurrence_mima_closed(theta, alpha, p, math.pi / 2)
        assert 2 * n_full == pytest.approx(c2, abs=1e-8)
        assert n_full > 0.49
