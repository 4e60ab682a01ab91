"""Pure numpy fallback for the six-point periodic stencil kernel."""
import numpy as np

__all__ = ["shift_rows"]


def shift_rows(rows, base, weights):
    """Interpolate every row of ``rows`` on its own fractional offset.

    ``out[n, m] = sum_j weights[n, j] * rows[n, (m + base[n] + j - 2) % M]``
    """
    rows = np.asarray(rows, dtype=np.float64)
    n_rows, m_pts = rows.shape
    lattice = np.all(weights == np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]), axis=1)
    cols = np.arange(m_pts)
    out = np.empty_like(rows)

    if lattice.any():
        idx = (cols[None, :] + base[lattice, None]) % m_pts
        out[lattice] = np.take_along_axis(rows[lattice], idx, axis=1)

    frac = ~lattice
    if frac.any():
        sub = rows[frac]
        start = base[frac, None] - 2
        w = weights[frac]
        acc = np.zeros_like(sub)
        for j in range(6):
            idx = (cols[None, :] + start + j) % m_pts
            acc += w[:, j, None] * np.take_along_axis(sub, idx, axis=1)
        out[frac] = acc
    return out
