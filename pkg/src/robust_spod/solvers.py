"""Proximal solvers for the robust shifted POD.

Three methods minimize low-rank co-moving fields ``Q^k`` and a sparse noise
matrix ``E`` such that ``Q ~ sum_k T^k Q^k + E``:

``jfb``
    joint forward-backward on ``F = 1/2 ||R||_F^2 + sum_k lam_k ||Q^k||_*
    + lam_noise ||E||_1`` with ``R = Q - sum_k T^k Q^k - E``.
``bfb``
    cyclic block-coordinate forward-backward (PALM) on the same ``F``.
``alm``
    augmented Lagrangian on the constrained problem, with one PALM sweep
    per multiplier update.
"""
from dataclasses import dataclass, field, replace
import logging
import time
from typing import Optional, Sequence

import numpy as np

from .errors import DivergenceError, DomainError, NumericalError, ShapeError
from .prox import DEFAULT_RANK_TOL, l1_norm, soft_threshold, svt
from .transport import SnapshotMatrix, TransportOperator

__all__ = [
    "METHODS",
    "SpodProblem",
    "SolverConfig",
    "SolverState",
    "Decomposition",
    "IterationRecord",
    "ConvergenceHistory",
    "mu_snapshots",
    "mu_frames",
    "zero_state",
    "residual",
    "objective",
    "grad_f",
    "jfb_iterate",
    "bfb_iterate",
    "alm_iterate",
    "solve",
]

log = logging.getLogger(__name__)

METHODS = ("jfb", "bfb", "alm")
ALM_E_UPDATES = ("gradient", "scaled", "literal")


@dataclass(frozen=True)
class SpodProblem:
    """Snapshot data plus one transport operator per co-moving frame."""

    snapshot: SnapshotMatrix
    transports: Sequence[TransportOperator]
    noise_enabled: bool = True

    def __post_init__(self):
        transports = tuple(self.transports)
        if not transports:
            raise DomainError("at least one transport operator is required")
        m, n = self.snapshot.shape
        for k, op in enumerate(transports):
            if len(op) != n:
                raise ShapeError(f"transport {k} has {len(op)} shifts, data has {n} snapshots")
            if op.grid.m_points != m:
                raise ShapeError(f"transport {k} grid has {op.grid.m_points} points, data has {m}")
        object.__setattr__(self, "transports", transports)

    @property
    def data(self):
        return self.snapshot.values

    @property
    def n_frames(self):
        return len(self.transports)

    @property
    def shape(self):
        return self.snapshot.shape


def mu_snapshots(data):
    """``M * N / (4 ||Q||_1)``, the penalty used for the synthetic benchmarks."""
    m, n = np.shape(data)
    return m * n / (4.0 * l1_norm(data))


def mu_frames(data, n_frames):
    """``M * K / (4 ||Q||_1)``, the alternative penalty preset."""
    m = np.shape(data)[0]
    return m * n_frames / (4.0 * l1_norm(data))


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters for :func:`solve`.

    ``lambdas`` may be a scalar (shared by every frame) or one value per
    frame. ``lambda_noise = 0`` removes the noise term and pins ``E`` to 0.
    Unset fields resolve to method defaults in :meth:`resolved`.
    """

    method: str = "alm"
    lambdas: object = 1.0
    lambda_noise: float = 0.0
    step_alpha: Optional[float] = None
    step_alphas: Optional[Sequence[float]] = None
    mu: Optional[float] = None
    mu_preset: str = "snapshots"
    delta_tol: float = 1e-5
    max_iter: Optional[int] = None
    rank_rel_tol: float = DEFAULT_RANK_TOL
    alm_e_update: str = "gradient"

    def __post_init__(self):
        method = str(self.method).lower()
        if method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "method", method)
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=np.float64))
        if lam.ndim != 1 or np.any(~np.isfinite(lam)) or np.any(lam <= 0):
            raise DomainError("lambdas must be positive and finite")
        if not (np.isfinite(self.lambda_noise) and self.lambda_noise >= 0):
            raise DomainError("lambda_noise must be non-negative")
        for name in ("step_alpha", "mu"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v}")
        if self.step_alphas is not None:
            a = np.asarray(self.step_alphas, dtype=np.float64)
            if np.any(~np.isfinite(a)) or np.any(a <= 0):
                raise DomainError("step_alphas must be positive")
        if not self.delta_tol > 0:
            raise DomainError("delta_tol must be positive")
        if self.max_iter is not None and int(self.max_iter) < 1:
            raise DomainError("max_iter must be at least 1")
        if self.mu_preset not in ("snapshots", "frames"):
            raise DomainError(f"unknown mu preset {self.mu_preset!r}")
        if self.alm_e_update not in ALM_E_UPDATES:
            raise DomainError(f"unknown ALM noise update {self.alm_e_update!r}")

    def lambdas_for(self, n_frames):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=np.float64))
        if lam.size == 1:
            return np.full(n_frames, lam[0])
        if lam.size != n_frames:
            raise ShapeError(f"{lam.size} lambdas for {n_frames} frames")
        return lam

    def resolved(self, problem):
        """Copy with every ``None`` default filled in for ``problem``."""
        k = problem.n_frames
        lam = tuple(float(v) for v in self.lambdas_for(k))
        alpha = self.step_alpha if self.step_alpha is not None else 1.0 / k
        alphas = self.step_alphas
        if alphas is not None:
            alphas = tuple(float(v) for v in alphas)
            if len(alphas) != k + 1:
                raise ShapeError(f"step_alphas needs {k + 1} entries, got {len(alphas)}")
        mu = self.mu
        if mu is None:
            norm1 = l1_norm(problem.data)
            if norm1 == 0:
                mu = 1.0
            elif self.mu_preset == "snapshots":
                mu = mu_snapshots(problem.data)
            else:
                mu = mu_frames(problem.data, k)
        max_iter = self.max_iter
        if max_iter is None:
            max_iter = 500 if self.method == "alm" else 5000
        return replace(self, lambdas=lam, step_alpha=float(alpha), step_alphas=alphas,
                       mu=float(mu), max_iter=int(max_iter))

    def block_steps(self, n_frames):
        """Step size for each of the ``K + 1`` blocks (frames, then noise)."""
        if self.step_alphas is not None:
            return tuple(self.step_alphas)
        alpha = self.step_alpha if self.step_alpha is not None else 1.0 / n_frames
        return (alpha,) * (n_frames + 1)


@dataclass
class SolverState:
    """Iterate of any method; ``dual`` is only used by ALM."""

    frames: list
    noise: np.ndarray
    dual: Optional[np.ndarray] = None
    spectra: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    transported: Optional[list] = None
    iteration: int = 0


def zero_state(problem):
    m, n = problem.shape
    k = problem.n_frames
    return SolverState(
        frames=[np.zeros((m, n)) for _ in range(k)],
        noise=np.zeros((m, n)),
        dual=np.zeros((m, n)),
        spectra=[np.zeros(min(m, n)) for _ in range(k)],
        ranks=[0] * k,
        transported=[np.zeros((m, n)) for _ in range(k)],
    )


@dataclass
class Decomposition:
    """Final co-moving fields, noise and per-frame spectra."""

    frames: list
    noise: np.ndarray
    spectra: list
    ranks: tuple
    converged: bool
    iterations: int
    dual: Optional[np.ndarray] = None

    def approximation(self, problem):
        """``sum_k T^k Q^k`` without the noise term."""
        return sum(op.forward(q) for op, q in zip(problem.transports, self.frames))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    criterion: float
    objective: float
    rel_error: float
    ranks: tuple
    noise_l1: float
    seconds: float


@dataclass
class ConvergenceHistory:
    """One :class:`IterationRecord` per completed iteration.

    ``criterion`` is the quantity the stopping rule watches: the objective
    ``F`` for the forward-backward methods and the relative residual for ALM.
    """

    method: str
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def ranks(self):
        return np.array([r.ranks for r in self.records], dtype=int)


def _check_shapes(problem, frames, noise):
    shape = problem.shape
    if len(frames) != problem.n_frames:
        raise ShapeError(f"{len(frames)} frames for {problem.n_frames} transports")
    for q in frames:
        if np.shape(q) != shape:
            raise ShapeError(f"frame shape {np.shape(q)} != data shape {shape}")
    if np.shape(noise) != shape:
        raise ShapeError(f"noise shape {np.shape(noise)} != data shape {shape}")


def _residual_from(data, transported, noise):
    r = data - transported[0]
    for tq in transported[1:]:
        r = r - tq
    return r - noise


def residual(problem, frames, noise):
    """``Q - sum_k T^k Q^k - E``."""
    _check_shapes(problem, frames, noise)
    transported = [op.forward(q) for op, q in zip(problem.transports, frames)]
    return _residual_from(problem.data, transported, np.asarray(noise, dtype=np.float64))


def objective(problem, frames, noise, config):
    """``1/2 ||R||_F^2 + sum_k lam_k ||Q^k||_* + lam_noise ||E||_1``."""
    from .prox import nuclear_norm

    r = residual(problem, frames, noise)
    lam = config.lambdas_for(problem.n_frames)
    value = 0.5 * float(np.vdot(r, r))
    value += sum(float(l) * nuclear_norm(q) for l, q in zip(lam, frames))
    if _noise_active(problem, config):
        value += config.lambda_noise * l1_norm(noise)
    return value


def grad_f(problem, frames, noise):
    """Partial gradients of ``1/2 ||R||_F^2``: ``(-T^{-k} R for each k, -R)``."""
    r = residual(problem, frames, noise)
    return [-op.backward(r) for op in problem.transports], -r


def _noise_active(problem, config):
    return bool(problem.noise_enabled) and config.lambda_noise > 0


def _objective_from(r, spectra, noise, lam, lambda_noise, noise_on):
    value = 0.5 * float(np.vdot(r, r))
    value += sum(float(l) * float(np.sum(s)) for l, s in zip(lam, spectra))
    if noise_on:
        value += lambda_noise * l1_norm(noise)
    return value


def _ensure_transported(state, problem):
    if state.transported is None:
        state.transported = [op.forward(q) for op, q in zip(problem.transports, state.frames)]
    return state.transported


def jfb_iterate(state, problem, config):
    """One joint forward-backward step; every block uses the same residual."""
    data = problem.data
    lam = config.lambdas_for(problem.n_frames)
    alpha = config.step_alpha if config.step_alpha is not None else 1.0 / problem.n_frames
    transported = _ensure_transported(state, problem)
    r = _residual_from(data, transported, state.noise)

    frames, spectra, ranks = [], [], []
    for op, q, l in zip(problem.transports, state.frames, lam):
        res = svt(q + alpha * op.backward(r), alpha * l, config.rank_rel_tol)
        frames.append(res.matrix)
        spectra.append(res.spectrum_after)
        ranks.append(res.rank_after)
    if _noise_active(problem, config):
        noise = soft_threshold(state.noise + alpha * r, alpha * config.lambda_noise)
    else:
        noise = np.zeros_like(state.noise)
    return SolverState(
        frames=frames, noise=noise, dual=state.dual, spectra=spectra, ranks=ranks,
        transported=[op.forward(q) for op, q in zip(problem.transports, frames)],
        iteration=state.iteration + 1,
    )


def bfb_iterate(state, problem, config):
    """One cyclic sweep of block forward-backward steps, frames first, then noise."""
    data = problem.data
    k_frames = problem.n_frames
    lam = config.lambdas_for(k_frames)
    steps = config.block_steps(k_frames)
    transported = list(_ensure_transported(state, problem))
    frames = list(state.frames)
    spectra, ranks = list(state.spectra), list(state.ranks)

    for k, op in enumerate(problem.transports):
        # blocks < k are already updated in this sweep
        r = _residual_from(data, transported, state.noise)
        res = svt(frames[k] + steps[k] * op.backward(r), steps[k] * lam[k], config.rank_rel_tol)
        frames[k] = res.matrix
        spectra[k] = res.spectrum_after
        ranks[k] = res.rank_after
        transported[k] = op.forward(res.matrix)

    if _noise_active(problem, config):
        r = _residual_from(data, transported, state.noise)
        a = steps[k_frames]
        noise = soft_threshold(state.noise + a * r, a * config.lambda_noise)
    else:
        noise = np.zeros_like(state.noise)
    return SolverState(frames=frames, noise=noise, dual=state.dual, spectra=spectra,
                       ranks=ranks, transported=transported, iteration=state.iteration + 1)


def alm_iterate(state, problem, config):
    """One augmented Lagrangian sweep followed by dual ascent.

    ``config.mu`` must be set (see :meth:`SolverConfig.resolved`).
    """
    if config.mu is None:
        raise DomainError("ALM needs mu; call SolverConfig.resolved(problem) first")
    data = problem.data
    lam = config.lambdas_for(problem.n_frames)
    inv_mu = 1.0 / config.mu
    dual = state.dual if state.dual is not None else np.zeros_like(data)
    transported = list(_ensure_transported(state, problem))
    frames = list(state.frames)
    spectra, ranks = list(state.spectra), list(state.ranks)
    noise = state.noise

    for k, op in enumerate(problem.transports):
        others = [tq for l, tq in enumerate(transported) if l != k]
        r = data - noise
        for tq in others:
            r = r - tq
        res = svt(op.backward(r + inv_mu * dual), inv_mu * lam[k], config.rank_rel_tol)
        frames[k] = res.matrix
        spectra[k] = res.spectrum_after
        ranks[k] = res.rank_after
        transported[k] = op.forward(res.matrix)

    if _noise_active(problem, config):
        r = _residual_from(data, transported, noise)
        if config.alm_e_update == "gradient":
            # step 1/mu along -grad_E L_mu = Y + mu R
            step = noise + r + inv_mu * dual
        elif config.alm_e_update == "scaled":
            step = noise + inv_mu * (r + dual)
        else:
            step = noise + inv_mu * r + dual
        noise = soft_threshold(step, inv_mu * config.lambda_noise)
    else:
        noise = np.zeros_like(noise)

    dual = dual + config.mu * _residual_from(data, transported, noise)
    return SolverState(frames=frames, noise=noise, dual=dual, spectra=spectra, ranks=ranks,
                       transported=transported, iteration=state.iteration + 1)


_ITERATES = {"jfb": jfb_iterate, "bfb": bfb_iterate, "alm": alm_iterate}


def solve(problem, config, callback=None, log_every=100):
    """Run the configured method from the zero initial guess.

    Forward-backward methods stop once ``F_prev - F <= delta_tol * F_prev``;
    ALM applies the same rule to the relative residual
    ``||Q - sum_k T^k Q^k - E||_F / ||Q||_F``. Both stop at ``max_iter``.

    Parameters
    ----------
    problem : SpodProblem
    config : SolverConfig
    callback : callable, optional
        Called as ``callback(state, record)`` after every iteration.
    log_every : int
        Emit a debug log line every this many iterations (0 disables).

    Returns
    -------
    decomposition : Decomposition
    history : ConvergenceHistory

    Raises
    ------
    DivergenceError
        If an iterate becomes non-finite; ``exc.history`` holds the records
        of every finite iterate.
    """
    config = config.resolved(problem)
    step = _ITERATES[config.method]
    data = problem.data
    lam = config.lambdas_for(problem.n_frames)
    noise_on = _noise_active(problem, config)
    data_norm = float(np.linalg.norm(data))
    history = ConvergenceHistory(config.method)

    def rel(x):
        return x / data_norm if data_norm > 0 else x

    state = zero_state(problem)
    prev = 0.5 * data_norm**2 if config.method != "alm" else rel(data_norm)
    converged = False
    start = time.perf_counter()

    for it in range(1, config.max_iter + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new_state = step(state, problem, config)
        except NumericalError as exc:
            raise DivergenceError(f"{config.method} diverged at iteration {it}: {exc}",
                                  history, it) from exc
        r = _residual_from(data, new_state.transported, new_state.noise)
        res_norm = float(np.linalg.norm(r))
        obj = _objective_from(r, new_state.spectra, new_state.noise, lam,
                              config.lambda_noise, noise_on)
        if not (np.isfinite(obj) and np.isfinite(res_norm)):
            raise DivergenceError(f"{config.method} produced non-finite values at iteration {it}",
                                  history, it)
        state = new_state
        crit = rel(res_norm) if config.method == "alm" else obj
        record = IterationRecord(
            iteration=it, criterion=crit, objective=obj, rel_error=rel(res_norm),
            ranks=tuple(int(r) for r in state.ranks), noise_l1=l1_norm(state.noise),
            seconds=time.perf_counter() - start,
        )
        history.records.append(record)
        if callback is not None:
            callback(state, record)
        if log_every and it % log_every == 0:
            log.debug("%s it=%d crit=%.6e rel_err=%.3e ranks=%s", config.method, it, crit,
                      record.rel_error, record.ranks)
        if abs(prev - crit) <= config.delta_tol * prev:
            converged = True
            break
        prev = crit

    decomposition = Decomposition(
        frames=state.frames, noise=state.noise, spectra=state.spectra,
        ranks=tuple(int(r) for r in state.ranks), converged=converged,
        iterations=len(history), dual=state.dual if config.method == "alm" else None,
    )
    return decomposition, history
