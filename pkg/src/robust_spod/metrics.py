"""Evaluation metrics and Table-style run reports."""
from dataclasses import dataclass
import csv
import io

import numpy as np

from .errors import DomainError
from .prox import svd

__all__ = [
    "RunReport",
    "Table",
    "TABLE_COLUMNS",
    "relative_reconstruction_error",
    "pod_truncation_error",
    "spod_truncation_error",
    "noise_recovery_rate",
    "run_report",
    "build_table",
]

TABLE_COLUMNS = ("benchmark", "method", "rel_error", "ranks", "iterations",
                 "cpu_seconds", "converged")


@dataclass(frozen=True)
class RunReport:
    method: str
    relative_error: float
    ranks: tuple
    iterations: int
    cpu_seconds: float
    converged: bool
    benchmark: str = ""

    def __post_init__(self):
        if not self.relative_error >= 0:
            raise DomainError(f"relative error must be non-negative, got {self.relative_error}")


def relative_reconstruction_error(problem, decomposition):
    """``||Q - sum_k T^k Q^k - E||_F / ||Q||_F`` (0 for an all-zero ``Q``)."""
    data = problem.data
    r = data - decomposition.approximation(problem) - decomposition.noise
    norm = np.linalg.norm(data)
    return float(np.linalg.norm(r) / norm) if norm > 0 else float(np.linalg.norm(r))


def pod_truncation_error(values, rank):
    """Relative error of the best rank-``rank`` approximation of ``values``."""
    values = np.asarray(values, dtype=np.float64)
    if not 1 <= rank <= min(values.shape):
        raise DomainError(f"rank must lie in [1, {min(values.shape)}], got {rank}")
    u, s, vt = svd(values)
    approx = (u[:, :rank] * s[:rank]) @ vt[:rank]
    return float(np.linalg.norm(values - approx) / np.linalg.norm(values))


def _truncate(values, rank):
    u, s, vt = svd(values)
    return (u[:, :rank] * s[:rank]) @ vt[:rank]


def spod_truncation_error(problem, frames, ranks):
    """Relative error of ``sum_k T^k [Q^k]_{r_k}`` against the data.

    Each frame is cut to its best rank-``r_k`` approximation before transport,
    so the total number of modes is ``sum(ranks)``.
    """
    if len(ranks) != len(frames):
        raise DomainError("one rank per frame is required")
    data = problem.data
    approx = sum(op.forward(_truncate(q, r)) for op, q, r in zip(problem.transports, frames, ranks))
    return float(np.linalg.norm(data - approx) / np.linalg.norm(data))


def noise_recovery_rate(noise, mask):
    """Share of the corrupted entries found among the largest ``|E|`` entries.

    With ``c`` corrupted entries, the ``c`` largest-magnitude entries of
    ``noise`` are compared against ``mask`` (rows of ``(i, j)`` indices).
    """
    mask = np.asarray(mask, dtype=np.int64).reshape(-1, 2)
    count = len(mask)
    if count == 0:
        return 1.0
    flat = np.abs(np.asarray(noise)).ravel()
    top = np.argpartition(-flat, count - 1)[:count]
    truth = np.ravel_multi_index((mask[:, 0], mask[:, 1]), np.shape(noise))
    return float(np.intersect1d(top, truth).size / count)


def run_report(problem, decomposition, history, cpu_seconds, benchmark=""):
    return RunReport(
        method=history.method,
        relative_error=relative_reconstruction_error(problem, decomposition),
        ranks=tuple(decomposition.ranks),
        iterations=decomposition.iterations,
        cpu_seconds=float(cpu_seconds),
        converged=bool(decomposition.converged),
        benchmark=benchmark,
    )


class Table:
    """Rows of formatted report values in :data:`TABLE_COLUMNS` order."""

    def __init__(self, rows):
        self.columns = TABLE_COLUMNS
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_text(self):
        cells = [list(self.columns)] + [list(r) for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def build_table(reports):
    """Table with one row per report, sorted by benchmark then method order."""
    reports = list(reports)
    if not reports:
        raise DomainError("at least one report is required")
    order = {"jfb": 0, "bfb": 1, "alm": 2}
    reports.sort(key=lambda r: (r.benchmark, order.get(r.method, 99), r.method))
    rows = [
        (r.benchmark, r.method.upper(), f"{r.relative_error:.3e}",
         "(" + ",".join(str(int(k)) for k in r.ranks) + ")", str(int(r.iterations)),
         f"{r.cpu_seconds:.2f}", "yes" if r.converged else "no")
        for r in reports
    ]
    return Table(rows)
