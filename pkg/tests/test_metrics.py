import numpy as np
import pytest

from conftest import random_problem
from robust_spod.errors import DomainError
from robust_spod.metrics import (RunReport, build_table, noise_recovery_rate,
                                 pod_truncation_error, relative_reconstruction_error,
                                 spod_truncation_error)
from robust_spod.solvers import Decomposition, SnapshotMatrix, SpodProblem


def decomposition(frames, noise):
    return Decomposition(frames, noise, [], (0,) * len(frames), True, 1)


class TestRelativeError:
    def test_zero_variables(self):
        p = random_problem(0)
        zeros = np.zeros(p.shape)
        assert relative_reconstruction_error(p, decomposition([zeros, zeros], zeros)) == 1.0

    def test_exact(self):
        p = random_problem(1, lattice=True, k=1)
        d = decomposition([p.transports[0].backward(p.data)], np.zeros(p.shape))
        assert relative_reconstruction_error(p, d) <= 1e-12

    def test_against_naive(self, rng):
        p = random_problem(2)
        frames = [rng.standard_normal(p.shape) for _ in range(2)]
        noise = rng.standard_normal(p.shape)
        naive = p.data.copy()
        for op, q in zip(p.transports, frames):
            naive -= op.forward(q)
        naive -= noise
        expected = np.sqrt(np.sum(naive**2)) / np.sqrt(np.sum(p.data**2))
        assert relative_reconstruction_error(p, decomposition(frames, noise)) == pytest.approx(
            expected, rel=1e-12)


class TestPod:
    def test_full_rank_exact(self, rng):
        q = rng.standard_normal((9, 6))
        assert pod_truncation_error(q, 6) <= 1e-12

    def test_rank_zero_rejected(self, rng):
        with pytest.raises(DomainError):
            pod_truncation_error(rng.standard_normal((4, 3)), 0)
        with pytest.raises(DomainError):
            pod_truncation_error(rng.standard_normal((4, 3)), 4)

    def test_eckart_young_exact_rank(self, rng):
        q = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 15))
        assert pod_truncation_error(q, 3) <= 1e-12

    def test_tail_formula_and_monotone(self, rng):
        q = rng.standard_normal((12, 8))
        s = np.linalg.svd(q, compute_uv=False)
        errs = [pod_truncation_error(q, r) for r in range(1, 9)]
        for r, e in enumerate(errs, 1):
            assert e == pytest.approx(np.sqrt(np.sum(s[r:] ** 2)) / np.linalg.norm(q), abs=1e-10)
        assert all(a >= b for a, b in zip(errs, errs[1:]))

    def test_spod_truncation_full_rank_matches_relative_error(self, rng):
        p = random_problem(3, lattice=True)
        frames = [rng.standard_normal(p.shape) for _ in range(2)]
        d = decomposition(frames, np.zeros(p.shape))
        full = spod_truncation_error(p, frames, [min(p.shape)] * 2)
        assert full == pytest.approx(relative_reconstruction_error(p, d), rel=1e-10)


def test_noise_recovery_rate():
    e = np.zeros((4, 5))
    e[0, 1] = 3.0
    e[2, 3] = -2.0
    e[1, 1] = 0.5
    assert noise_recovery_rate(e, np.array([[0, 1], [2, 3]])) == 1.0
    assert noise_recovery_rate(e, np.array([[0, 1], [3, 3]])) == 0.5
    assert noise_recovery_rate(e, np.zeros((0, 2))) == 1.0


class TestTable:
    def test_single_row(self):
        t = build_table([RunReport("alm", 1.9e-5, (4, 2), 104, 9.0, True, "multilinear")])
        assert len(t) == 1
        assert t.rows[0] == ("multilinear", "ALM", "1.900e-05", "(4,2)", "104", "9.00", "yes")

    def test_stable_order_and_formats(self):
        reports = [RunReport(m, e, (4, 2), 10, 1.0, False, "multilinear")
                   for m, e in (("alm", 1e-5), ("jfb", 1e-2), ("bfb", 2e-2))]
        t = build_table(reports)
        assert [r[1] for r in t.rows] == ["JFB", "BFB", "ALM"]
        csv_text = t.to_csv()
        assert csv_text.splitlines()[0] == "benchmark,method,rel_error,ranks,iterations,cpu_seconds,converged"
        assert '"(4,2)"' in csv_text
        assert t.to_csv() == build_table(reversed(reports)).to_csv()
        text = t.to_text()
        assert text.splitlines()[0].split() == list(t.columns)
        assert len(text.splitlines()) == 5

    def test_empty(self):
        with pytest.raises(DomainError):
            build_table([])

    def test_negative_error(self):
        with pytest.raises(DomainError):
            RunReport("jfb", -1.0, (1,), 1, 0.0, True)
