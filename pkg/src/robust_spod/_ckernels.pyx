# cython: language_level=3
"""Compiled six-point periodic stencil kernel."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def shift_rows(const double[:, ::1] rows, const long long[::1] base,
               const double[:, ::1] weights):
    """Interpolate every row of ``rows`` on its own fractional offset.

    ``out[n, m] = sum_j weights[n, j] * rows[n, (m + base[n] + j - 2) % M]``
    """
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t m_pts = rows.shape[1]
    cdef Py_ssize_t n, m, j, idx, start, lat
    cdef double acc
    cdef double w0, w1, w2, w3, w4, w5
    out = np.empty((n_rows, m_pts), dtype=np.float64)
    cdef double[:, ::1] res = out

    with nogil:
        for n in range(n_rows):
            start = (base[n] - 2) % m_pts
            if start < 0:
                start += m_pts
            w0 = weights[n, 0]
            w1 = weights[n, 1]
            w2 = weights[n, 2]
            w3 = weights[n, 3]
            w4 = weights[n, 4]
            w5 = weights[n, 5]
            if w0 == 0.0 and w1 == 0.0 and w2 == 1.0 and w3 == 0.0 and w4 == 0.0 and w5 == 0.0:
                # lattice shift: pure circular permutation
                lat = start + 2
                if lat >= m_pts:
                    lat -= m_pts
                for m in range(m_pts):
                    idx = m + lat
                    if idx >= m_pts:
                        idx -= m_pts
                    res[n, m] = rows[n, idx]
                continue
            for m in range(m_pts):
                idx = m + start
                if idx >= m_pts:
                    idx -= m_pts
                if idx + 5 < m_pts:
                    acc = (w0 * rows[n, idx] + w1 * rows[n, idx + 1]
                           + w2 * rows[n, idx + 2] + w3 * rows[n, idx + 3]
                           + w4 * rows[n, idx + 4] + w5 * rows[n, idx + 5])
                else:
                    acc = 0.0
                    for j in range(6):
                        acc = acc + weights[n, j] * rows[n, (idx + j) % m_pts]
                res[n, m] = acc
    return out
