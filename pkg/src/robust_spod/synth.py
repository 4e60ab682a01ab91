"""Synthetic transport benchmarks with known co-moving decompositions.

``multilinear``
    two frames of ranks (4, 2) moving with shifts ``t`` and ``-t``; the
    shifts land on grid points, so transport is exact.
``sine_noise``
    two frames of ranks (4, 1), one oscillating with ``0.25 cos(7 pi t)``;
    off-lattice shifts, optional salt-and-pepper corruption.

Profiles are Gaussians ``exp(-x^2 / width^2)`` evaluated on the periodic
distance, so structures wrap around the domain instead of being cut off.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .prox import estimate_rank, svd
from .transport import SnapshotMatrix, SpatialGrid, TransportOperator

__all__ = [
    "BENCHMARKS",
    "BenchmarkSpec",
    "GroundTruth",
    "default_spec",
    "time_samples",
    "gen_multilinear",
    "gen_sine_noise",
    "generate",
    "add_salt_pepper",
]

BENCHMARKS = ("multilinear", "sine_noise")


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    m: int
    n: int
    space_domain: tuple
    time_domain: tuple
    delta_width: float = 0.0125
    noise_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.name not in BENCHMARKS:
            raise DomainError(f"unknown benchmark {self.name!r}")
        if self.m < 6:
            raise DomainError(f"grid too coarse for the interpolation stencil: m={self.m}")
        if self.n < 1:
            raise DomainError("need at least one time sample")
        if not self.delta_width > 0:
            raise DomainError("profile width must be positive")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise DomainError(f"noise fraction must lie in [0, 1], got {self.noise_fraction}")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")


def default_spec(name, **overrides):
    """Full-size defaults for ``name``, updated with ``overrides``."""
    if name == "multilinear":
        spec = BenchmarkSpec("multilinear", 400, 200, (-0.5, 0.5), (0.0, 0.5))
    elif name == "sine_noise":
        spec = BenchmarkSpec("sine_noise", 400, 200, (0.0, 0.5), (0.0, 1.0),
                             noise_fraction=0.125)
    else:
        raise DomainError(f"unknown benchmark {name!r}; expected one of {BENCHMARKS}")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(spec, **overrides)


@dataclass
class GroundTruth:
    frames: list
    shifts: list
    true_ranks: tuple
    noise_mask: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    clean: np.ndarray = None

    def rank_certificates(self, rel_tol=1e-7):
        return tuple(estimate_rank(svd(f)[1], rel_tol) for f in self.frames)


def time_samples(t0, t1, n):
    """``n`` uniform samples on ``[t0, t1)``; the step equals ``(t1 - t0) / n``."""
    return t0 + (t1 - t0) * np.arange(n) / n


def _grid(spec):
    a, b = spec.space_domain
    return SpatialGrid.from_interval(a, b, spec.m)


def _profile(x, center, width, length):
    d = np.mod(x - center + 0.5 * length, length) - 0.5 * length
    return np.exp(-(d**2) / width**2)


def gen_multilinear(spec=None):
    """Two-frame benchmark with exact lattice transport.

    Returns ``(snapshot, transports, truth)``.
    """
    spec = spec or default_spec("multilinear")
    grid = _grid(spec)
    t = time_samples(*spec.time_domain, spec.n)
    x = grid.x[:, None]
    L = grid.length
    w = spec.delta_width
    # the field is q1(x + t) + q2(x - t), i.e. transport shifts -t and +t
    shifts = [-t, t]
    frame1 = sum(np.sin(r * np.pi * t)[None, :] * _profile(x, 0.1 * r, w, L) for r in range(1, 5))
    frame2 = sum(np.cos(r * np.pi * t)[None, :] * _profile(x, 0.1 * r, w, L) for r in range(1, 3))
    values = (
        sum(np.sin(r * np.pi * t)[None, :] * _profile(x + t[None, :], 0.1 * r, w, L)
            for r in range(1, 5))
        + sum(np.cos(r * np.pi * t)[None, :] * _profile(x - t[None, :], 0.1 * r, w, L)
              for r in range(1, 3))
    )
    return _package(spec, grid, t, values, shifts, [frame1, frame2], (4, 2))


def gen_sine_noise(spec=None):
    """Two-frame benchmark with off-lattice shifts and salt-and-pepper noise."""
    spec = spec or default_spec("sine_noise")
    grid = _grid(spec)
    t = time_samples(*spec.time_domain, spec.n)
    x = grid.x[:, None]
    L = grid.length
    w = spec.delta_width
    d1 = 0.25 * np.cos(7 * np.pi * t)
    d2 = -t
    # bump r of the first frame sits at 0.1 r + 0.25 so the frame has rank 4
    frame1 = sum(np.sin(4 * np.pi * r * t)[None, :] * _profile(x, 0.1 * r + 0.25, w, L)
                 for r in range(1, 5))
    frame2 = np.ones_like(t)[None, :] * _profile(x, 0.2, w, L)
    values = (
        sum(np.sin(4 * np.pi * r * t)[None, :] * _profile(x + d1[None, :], 0.1 * r + 0.25, w, L)
            for r in range(1, 5))
        + _profile(x - d2[None, :], 0.2, w, L)
    )
    # field is q1(x + d1) + q2(x - d2)
    shifts = [-d1, d2]
    return _package(spec, grid, t, values, shifts, [frame1, frame2], (4, 1))


def _package(spec, grid, t, clean, shifts, frames, ranks):
    values, mask = add_salt_pepper(clean, spec.noise_fraction, 1.0, spec.seed)
    snapshot = SnapshotMatrix(values, grid, t)
    transports = [TransportOperator(s, grid) for s in shifts]
    truth = GroundTruth(frames=frames, shifts=[np.asarray(s) for s in shifts],
                        true_ranks=ranks, noise_mask=mask, clean=clean)
    return snapshot, transports, truth


def generate(name, **overrides):
    """Build benchmark ``name`` with optional :class:`BenchmarkSpec` overrides."""
    spec = default_spec(name, **overrides)
    return gen_multilinear(spec) if name == "multilinear" else gen_sine_noise(spec)


def add_salt_pepper(values, fraction, value=1.0, seed=0):
    """Set ``round(fraction * M * N)`` distinct random entries to ``value``.

    Returns
    -------
    corrupted : ndarray
    mask : ndarray of shape (count, 2)
        Row and column indices of the corrupted entries, sorted row-major.
    """
    if not 0.0 <= fraction <= 1.0:
        raise DomainError(f"noise fraction must lie in [0, 1], got {fraction}")
    values = np.array(values, dtype=np.float64)
    m, n = values.shape
    count = int(round(fraction * m * n))
    rng = np.random.default_rng(seed)
    flat = np.sort(rng.choice(m * n, size=count, replace=False))
    rows, cols = np.unravel_index(flat, (m, n))
    values[rows, cols] = value
    return values, np.column_stack([rows, cols]).astype(np.int64)
