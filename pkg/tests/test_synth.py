import numpy as np
import pytest

from robust_spod.errors import DomainError
from robust_spod.prox import estimate_rank
from robust_spod.synth import (BenchmarkSpec, add_salt_pepper, default_spec, gen_multilinear,
                               gen_sine_noise, generate, time_samples)


@pytest.fixture(scope="module")
def multilinear():
    return gen_multilinear()


@pytest.fixture(scope="module")
def sine_clean():
    return generate("sine_noise", noise_fraction=0.0)


def reassembly_error(snap, ops, truth):
    rec = sum(op.forward(f) for op, f in zip(ops, truth.frames))
    return np.linalg.norm(snap.values - rec) / np.linalg.norm(snap.values)


def test_default_specs():
    ml = default_spec("multilinear")
    assert (ml.m, ml.n, ml.space_domain, ml.time_domain) == (400, 200, (-0.5, 0.5), (0.0, 0.5))
    assert ml.delta_width == 0.0125 and ml.noise_fraction == 0.0
    sn = default_spec("sine_noise")
    assert (sn.m, sn.n, sn.space_domain, sn.time_domain) == (400, 200, (0.0, 0.5), (0.0, 1.0))
    assert sn.noise_fraction == 0.125


class TestMultilinear:
    def test_shapes_and_ranks(self, multilinear):
        snap, ops, truth = multilinear
        assert snap.shape == (400, 200) and len(ops) == 2
        assert truth.true_ranks == (4, 2)

    def test_shifts_are_lattice(self, multilinear):
        _, ops, _ = multilinear
        assert all(op.is_lattice for op in ops)

    def test_exact_reassembly(self, multilinear):
        assert reassembly_error(*multilinear) <= 1e-12

    def test_deshifted_ranks(self, multilinear):
        snap, ops, truth = multilinear
        assert truth.rank_certificates() == (4, 2)
        # frame 1 alone undone from the data keeps the rank of its own structure
        only1 = ops[0].forward(truth.frames[0])
        s = np.linalg.svd(ops[0].backward(only1), compute_uv=False)
        assert estimate_rank(s, 1e-7) == 4


class TestSineNoise:
    def test_ranks(self, sine_clean):
        _, _, truth = sine_clean
        assert truth.true_ranks == (4, 1)
        assert truth.rank_certificates() == (4, 1)

    def test_clean_reassembly_interpolation_bound(self, sine_clean):
        # off-lattice shifts: error is interpolation only; measured 2.8e-7
        assert reassembly_error(*sine_clean) <= 5e-7

    def test_salt_and_pepper_count(self):
        snap, _, truth = gen_sine_noise()
        mask = truth.noise_mask
        assert len(mask) == 10000
        assert len({tuple(ij) for ij in mask}) == 10000
        assert np.all(snap.values[mask[:, 0], mask[:, 1]] == 1.0)
        changed = snap.values != truth.clean
        assert changed.sum() <= 10000

    def test_seed_determinism(self):
        a = generate("sine_noise", seed=7)
        b = generate("sine_noise", seed=7)
        c = generate("sine_noise", seed=8)
        assert np.array_equal(a[0].values, b[0].values)
        assert np.array_equal(a[2].noise_mask, b[2].noise_mask)
        assert not np.array_equal(a[2].noise_mask, c[2].noise_mask)


class TestSaltPepper:
    def test_zero_fraction(self, rng):
        q = rng.standard_normal((5, 4))
        out, mask = add_salt_pepper(q, 0.0, 1.0, 3)
        np.testing.assert_array_equal(out, q)
        assert mask.shape == (0, 2)

    def test_full_fraction(self, rng):
        out, mask = add_salt_pepper(rng.standard_normal((5, 4)), 1.0, -2.0, 3)
        assert np.all(out == -2.0) and len(mask) == 20

    def test_deterministic(self, rng):
        q = rng.standard_normal((30, 20))
        a = add_salt_pepper(q, 0.3, 1.0, 11)
        b = add_salt_pepper(q, 0.3, 1.0, 11)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_input_untouched(self, rng):
        q = rng.standard_normal((6, 6))
        keep = q.copy()
        add_salt_pepper(q, 0.5)
        np.testing.assert_array_equal(q, keep)

    def test_bad_fraction(self):
        with pytest.raises(DomainError):
            add_salt_pepper(np.zeros((2, 2)), 1.5)


def test_time_samples_exclude_endpoint():
    t = time_samples(0.0, 0.5, 200)
    assert t[0] == 0.0 and t[-1] < 0.5
    assert np.allclose(np.diff(t), 0.0025)


@pytest.mark.parametrize("kwargs", [{"m": 5}, {"noise_fraction": 1.2}, {"delta_width": 0.0}])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        default_spec("multilinear", **kwargs)


def test_unknown_benchmark():
    with pytest.raises(DomainError):
        default_spec("wildfire")
    with pytest.raises(DomainError):
        BenchmarkSpec("wildfire", 10, 10, (0, 1), (0, 1))
