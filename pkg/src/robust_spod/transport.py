"""Periodic grids, snapshot matrices and discrete shift transport.

A transport operator moves every snapshot ``q(t_n)`` by ``shifts[n]`` in
physical units: the forward transform evaluates ``q(x - shift)`` and the
backward transform ``q(x + shift)``. Off-lattice values come from a
centered degree-5 Lagrange interpolant on a six-point periodic stencil.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .errors import DomainError, ShapeError

__all__ = [
    "STENCIL_NODES",
    "SpatialGrid",
    "SnapshotMatrix",
    "TransportOperator",
    "lagrange_weights",
    "stencil",
    "apply_shift",
    "transport_forward",
    "transport_backward",
]

STENCIL_NODES = np.array([-2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
_STENCIL_LEN = len(STENCIL_NODES)
# offsets this close to an integer (in grid units) are treated as lattice shifts
_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic 1D grid ``x_i = x_min + i * dx`` for ``i < m_points``."""

    m_points: int
    x_min: float
    dx: float
    periodic: bool = True

    def __post_init__(self):
        if int(self.m_points) != self.m_points or self.m_points < _STENCIL_LEN:
            raise DomainError(
                f"grid needs at least {_STENCIL_LEN} points, got {self.m_points}"
            )
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise DomainError(f"dx must be positive and finite, got {self.dx}")
        if not self.periodic:
            raise DomainError("only periodic grids are supported")

    @classmethod
    def from_interval(cls, a, b, m_points):
        """Grid of ``m_points`` spanning ``[a, b)`` (right end excluded)."""
        if not b > a:
            raise DomainError(f"empty interval [{a}, {b})")
        return cls(int(m_points), float(a), (b - a) / m_points)

    @property
    def length(self):
        return self.m_points * self.dx

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.m_points)


@dataclass(frozen=True)
class SnapshotMatrix:
    """Space-time data: column ``n`` is the state at ``times[n]``."""

    values: np.ndarray
    grid: SpatialGrid
    times: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        times = np.asarray(self.times, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f"snapshot matrix must be 2D, got ndim={values.ndim}")
        if values.shape[0] != self.grid.m_points:
            raise ShapeError(
                f"{values.shape[0]} rows but grid has {self.grid.m_points} points"
            )
        if times.shape != (values.shape[1],):
            raise ShapeError(
                f"{values.shape[1]} snapshots but {times.size} time samples"
            )
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DomainError("time samples must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("snapshot matrix contains non-finite entries")
        values.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class TransportOperator:
    """Per-snapshot shift amounts (physical units) on a periodic grid.

    The stencil offsets and weights are computed once at construction.
    """

    shifts: np.ndarray
    grid: SpatialGrid
    _base: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)
    _inv_base: np.ndarray = field(init=False, repr=False, compare=False)
    _inv_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        shifts = np.asarray(self.shifts, dtype=np.float64).ravel()
        if not np.all(np.isfinite(shifts)):
            raise DomainError("shifts must be finite")
        shifts.flags.writeable = False
        object.__setattr__(self, "shifts", shifts)
        base, weights = stencil(shifts, self.grid)
        inv_base, inv_weights = stencil(-shifts, self.grid)
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_weights", weights)
        object.__setattr__(self, "_inv_base", inv_base)
        object.__setattr__(self, "_inv_weights", inv_weights)

    def __len__(self):
        return self.shifts.size

    @property
    def is_lattice(self):
        """True when every shift is a whole number of grid cells."""
        return bool(np.all(self._weights[:, 2] == 1.0))

    def forward(self, values):
        return transport_forward(values, self)

    def backward(self, values):
        return transport_backward(values, self)


def lagrange_weights(f):
    """Degree-5 Lagrange basis on nodes ``-2..3`` evaluated at ``f``.

    Parameters
    ----------
    f : float
        Fractional position in ``[0, 1)`` relative to node 0.

    Returns
    -------
    ndarray of shape (6,)
        ``l_j(f)`` for the nodes in :data:`STENCIL_NODES` order.
    """
    if not (np.isfinite(f) and 0.0 <= f < 1.0):
        raise DomainError(f"fractional offset must lie in [0, 1), got {f}")
    return _weights_array(np.array([f], dtype=np.float64))[0]


def _weights_array(f):
    f = np.asarray(f, dtype=np.float64)
    w = np.ones((f.size, _STENCIL_LEN))
    for j, xj in enumerate(STENCIL_NODES):
        for xm in STENCIL_NODES:
            if xm != xj:
                w[:, j] *= (f - xm) / (xj - xm)
    return w


def stencil(shifts, grid):
    """Base offsets and weights for shifting by ``shifts`` on ``grid``.

    The value at target index ``m`` is taken at fractional index
    ``m - shift/dx``. Writing that as ``m + base + f`` with integer ``base``
    and ``0 <= f < 1``, the output is ``sum_j w_j(f) q[(m + base + j - 2) % M]``.
    """
    offset = -np.asarray(shifts, dtype=np.float64).ravel() / grid.dx
    nearest = np.rint(offset)
    snap = np.abs(offset - nearest) <= _SNAP_TOL * np.maximum(1.0, np.abs(offset))
    offset = np.where(snap, nearest, offset)
    base_f = np.floor(offset)
    frac = offset - base_f
    # floor can round up to exactly 1.0 for tiny negative fractions
    wrap = frac >= 1.0
    base_f[wrap] += 1.0
    frac[wrap] = 0.0
    base = np.mod(base_f, grid.m_points).astype(np.int64)
    return base, _weights_array(frac)


def _check_matrix(values, op):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"expected a 2D matrix, got ndim={values.ndim}")
    if values.shape != (op.grid.m_points, len(op)):
        raise ShapeError(
            f"matrix is {values.shape[0]}x{values.shape[1]} but operator expects "
            f"{op.grid.m_points}x{len(op)}"
        )
    return values


def _apply(values, base, weights):
    rows = np.ascontiguousarray(values.T)
    return np.ascontiguousarray(_backend.shift_rows(rows, base, weights).T)


def transport_forward(values, op):
    """Column ``n`` of the result evaluates column ``n`` at ``x - shifts[n]``."""
    values = _check_matrix(values, op)
    return _apply(values, op._base, op._weights)


def transport_backward(values, op):
    """Column ``n`` of the result evaluates column ``n`` at ``x + shifts[n]``."""
    values = _check_matrix(values, op)
    return _apply(values, op._inv_base, op._inv_weights)


def apply_shift(q, delta, grid):
    """Shift a single snapshot ``q`` by ``delta`` (physical units)."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (grid.m_points,):
        raise ShapeError(f"vector has shape {q.shape}, grid has {grid.m_points} points")
    if not math.isfinite(delta):
        raise DomainError(f"shift must be finite, got {delta}")
    base, weights = stencil(np.array([delta]), grid)
    return _backend.shift_rows(np.ascontiguousarray(q[None, :]), base, weights)[0]
