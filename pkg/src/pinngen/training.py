"""Two-phase network training (Adam then L-BFGS) and seeded ensembles.

Every run is fully determined by its integer seed: the seed is split into
one stream for collocation sampling and one for weight initialization, and
both optimizers are deterministic.  Wall time is recorded per model so
ensembles can be trained concurrently without distorting timing statistics.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .diff_engine import grad_pinn_loss, pinn_loss
from .jet_mlp import MlpArchitecture
from .problem import PoissonProblem
from .sampling import init_params, latin_hypercube

__all__ = [
    "TrainConfig",
    "TrainedModel",
    "Ensemble",
    "NonFiniteGradientError",
    "adam_run",
    "lbfgs_run",
    "train_single",
    "train_ensemble",
    "model_to_dict",
    "model_from_dict",
]

MODEL_FORMAT_VERSION = 1

# how a run ended: Adam-only budget exhausted, L-BFGS tolerance met,
# L-BFGS budget exhausted, line search could not make progress, or the
# gradient went non-finite and the run was cut short.
CONVERGED_BY = ("adam_budget", "lbfgs_tol", "lbfgs_budget", "lbfgs_line_search", "aborted")


class NonFiniteGradientError(RuntimeError):
    """Raised when an optimizer sees a NaN/Inf gradient; keeps the last
    finite parameter vector and the iteration index for diagnostics."""

    def __init__(self, iteration: int, params=None, phase: str = "adam"):
        super().__init__(f"non-finite gradient in {phase} at iteration {iteration}")
        self.iteration = iteration
        self.params = params
        self.phase = phase


@dataclass(frozen=True)
class TrainConfig:
    adam_iters: int
    adam_lr: float
    lbfgs_max_iters: int
    lbfgs_tol: float
    n_cp: int
    seed: int
    lbfgs_history: int = 50
    resample_each_iter: bool = False  # fresh collocation draw per Adam step

    def __post_init__(self):
        if self.adam_iters < 0 or self.lbfgs_max_iters < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.adam_lr <= 0:
            raise ValueError("adam_lr must be positive")
        if self.lbfgs_tol <= 0:
            raise ValueError("lbfgs_tol must be positive")
        if self.lbfgs_history < 1:
            raise ValueError("lbfgs_history must be >= 1")
        if self.n_cp < 1:
            raise ValueError("n_cp must be >= 1")

    def to_dict(self) -> dict:
        return {
            "adam_iters": self.adam_iters,
            "adam_lr": self.adam_lr,
            "lbfgs_max_iters": self.lbfgs_max_iters,
            "lbfgs_tol": self.lbfgs_tol,
            "n_cp": self.n_cp,
            "seed": self.seed,
            "lbfgs_history": self.lbfgs_history,
            "resample_each_iter": self.resample_each_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainedModel:
    arch: MlpArchitecture
    params: np.ndarray
    seed: int
    wall_time_s: float
    final_loss: float
    converged_by: str


@dataclass(frozen=True)
class Ensemble:
    """Models sharing one configuration and differing only by seed."""

    models: tuple[TrainedModel, ...]
    config: TrainConfig
    arch: MlpArchitecture
    problem: PoissonProblem

    def __len__(self) -> int:
        return len(self.models)


def adam_run(
    params: np.ndarray,
    grad_fn,
    iters: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> np.ndarray:
    """Standard Adam with bias correction, run for exactly ``iters`` steps."""
    if iters < 0:
        raise ValueError("iters must be >= 0")
    theta = np.array(params, dtype=np.float64)
    if iters == 0:
        return theta
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    for t in range(1, iters + 1):
        g = grad_fn(theta)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(t, params=theta, phase="adam")
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
    return theta


def _two_loop(g, s_list, y_list, rho_list):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    if y_list:
        gamma = (s_list[-1] @ y_list[-1]) / (y_list[-1] @ y_list[-1])
        q *= gamma
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * (y @ q)
        q += s * (a - b)
    return q


def _quad_min(a_lo, f_lo, dg_lo, a_hi, f_hi):
    """Minimizer of the quadratic matching f_lo, dg_lo at a_lo and f_hi at a_hi."""
    da = a_hi - a_lo
    denom = 2.0 * (f_hi - f_lo - dg_lo * da)
    if denom == 0 or not np.isfinite(denom):
        return None
    t = -dg_lo * da * da / denom
    return a_lo + t


def _zoom(phi, a_lo, f_lo, g_lo, dg_lo, a_hi, f_hi, f0, dg0, c1, c2, max_iter=25):
    for _ in range(max_iter):
        lo, hi = (a_lo, a_hi) if a_lo < a_hi else (a_hi, a_lo)
        span = hi - lo
        if span <= 1e-16 * max(1.0, abs(lo)):
            break
        a = _quad_min(a_lo, f_lo, dg_lo, a_hi, f_hi)
        if a is None or not (lo + 0.1 * span <= a <= hi - 0.1 * span):
            a = 0.5 * (lo + hi)
        f_a, g_a, dg_a = phi(a)
        if not np.isfinite(f_a) or f_a > f0 + c1 * a * dg0 or f_a >= f_lo:
            a_hi, f_hi = a, f_a
        else:
            if abs(dg_a) <= -c2 * dg0:
                return a, f_a, g_a, True
            if dg_a * (a_hi - a_lo) >= 0:
                a_hi, f_hi = a_lo, f_lo
            a_lo, f_lo, g_lo, dg_lo = a, f_a, g_a, dg_a
    # no strong-Wolfe point; fall back to the best sufficient-decrease point
    if a_lo > 0 and f_lo < f0 + c1 * a_lo * dg0:
        return a_lo, f_lo, g_lo, True
    return 0.0, f0, None, False


def _strong_wolfe(phi, f0, g0, dg0, alpha0, c1=1e-4, c2=0.9, max_iter=12):
    """Line search enforcing strong Wolfe conditions (bracket, then zoom)."""
    a_prev, f_prev, g_prev, dg_prev = 0.0, f0, g0, dg0
    a = alpha0
    for i in range(max_iter):
        f_a, g_a, dg_a = phi(a)
        if not np.isfinite(f_a) or f_a > f0 + c1 * a * dg0 or (i > 0 and f_a >= f_prev):
            return _zoom(phi, a_prev, f_prev, g_prev, dg_prev, a, f_a, f0, dg0, c1, c2)
        if abs(dg_a) <= -c2 * dg0:
            return a, f_a, g_a, True
        if dg_a >= 0:
            return _zoom(phi, a, f_a, g_a, dg_a, a_prev, f_prev, f0, dg0, c1, c2)
        a_prev, f_prev, g_prev, dg_prev = a, f_a, g_a, dg_a
        a = 2.0 * a
    return 0.0, f0, None, False


def lbfgs_run(
    params: np.ndarray,
    loss_grad_fn,
    max_iters: int,
    tol: float,
    history: int,
) -> tuple[np.ndarray, str]:
    """Limited-memory BFGS with two-loop recursion and strong Wolfe steps.

    Stops when the gradient max-norm drops to ``tol``, when an accepted step
    decreases the loss by no more than ``tol``, or at ``max_iters``.  A failed
    line search returns the best parameters reached so far with status
    ``"lbfgs_line_search"``.  Accepted steps never increase the loss.
    """
    if history < 1:
        raise ValueError("history must be >= 1")
    theta = np.array(params, dtype=np.float64)
    if max_iters == 0:
        return theta, "lbfgs_budget"
    f, g = loss_grad_fn(theta)
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradientError(0, params=theta, phase="lbfgs")
    if np.max(np.abs(g)) <= tol:
        return theta, "lbfgs_tol"
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    status = "lbfgs_budget"
    for _ in range(max_iters):
        d = -_two_loop(g, s_list, y_list, rho_list)
        dg0 = float(d @ g)
        if not np.isfinite(dg0) or dg0 >= 0:
            # stale curvature info; restart from steepest descent
            s_list.clear()
            y_list.clear()
            rho_list.clear()
            d = -g
            dg0 = -float(g @ g)

        def phi(a, _d=d, _theta=theta):
            f_a, g_a = loss_grad_fn(_theta + a * _d)
            return f_a, g_a, float(g_a @ _d)

        alpha0 = 1.0 if s_list else min(1.0, 1.0 / max(np.abs(g).sum(), 1e-12))
        alpha, f_new, g_new, ok = _strong_wolfe(phi, f, g, dg0, alpha0)
        if not ok:
            status = "lbfgs_line_search"
            break
        s = alpha * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > history:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        decrease = f - f_new
        theta = theta + s
        f, g = f_new, g_new
        if np.max(np.abs(g)) <= tol or decrease <= tol:
            status = "lbfgs_tol"
            break
    return theta, status


def _resampling_grad_fn(problem, arch, config, colloc_seed):
    boundary = list(problem.boundary_points)
    counter = {"k": 0}

    def grad_fn(theta):
        k = counter["k"]
        counter["k"] += 1
        seed = int(np.random.SeedSequence((colloc_seed, k)).generate_state(1)[0])
        cs = latin_hypercube(config.n_cp, problem.train_domain, seed)
        return grad_pinn_loss(arch, theta, cs, boundary).grad

    return grad_fn


def train_single(problem: PoissonProblem, arch: MlpArchitecture, config: TrainConfig) -> TrainedModel:
    """Full pipeline for one seed: sample, initialize, Adam, then L-BFGS.

    A non-finite gradient aborts the optimizers but still yields a model
    record (last finite parameters, ``converged_by="aborted"``) so ensemble
    statistics keep seeing failed runs.
    """
    colloc_seed, init_seed = (int(s) for s in np.random.SeedSequence(config.seed).generate_state(2))
    colloc = latin_hypercube(config.n_cp, problem.train_domain, colloc_seed)
    boundary = list(problem.boundary_points)
    theta = init_params(arch, init_seed)

    def loss_grad(t):
        lg = grad_pinn_loss(arch, t, colloc, boundary)
        return lg.loss, lg.grad

    status = "adam_budget"
    t0 = time.perf_counter()
    try:
        if config.adam_iters > 0:
            if config.resample_each_iter:
                grad_fn = _resampling_grad_fn(problem, arch, config, colloc_seed)
            else:
                grad_fn = lambda t: loss_grad(t)[1]
            theta = adam_run(theta, grad_fn, config.adam_iters, config.adam_lr)
        if config.lbfgs_max_iters > 0:
            theta, status = lbfgs_run(
                theta, loss_grad, config.lbfgs_max_iters, config.lbfgs_tol, config.lbfgs_history
            )
    except NonFiniteGradientError as err:
        if err.params is not None:
            theta = err.params
        status = "aborted"
    wall = time.perf_counter() - t0
    final_loss = pinn_loss(arch, theta, colloc, boundary)
    return TrainedModel(
        arch=arch,
        params=np.asarray(theta),
        seed=config.seed,
        wall_time_s=wall,
        final_loss=float(final_loss),
        converged_by=status,
    )


def _train_one(args):
    problem, arch, config = args
    return train_single(problem, arch, config)


def train_ensemble(
    problem: PoissonProblem,
    arch: MlpArchitecture,
    config: TrainConfig,
    n_models: int,
    n_jobs: int = 1,
) -> Ensemble:
    """Train ``n_models`` runs with seeds config.seed + 0..n_models-1.

    Models are returned in seed order regardless of ``n_jobs``; workers share
    no state, so parallel execution changes nothing but wall-clock time.
    """
    if n_models < 1:
        raise ValueError("n_models must be >= 1")
    jobs = [(problem, arch, replace(config, seed=config.seed + i)) for i in range(n_models)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            models = tuple(pool.map(_train_one, jobs))
    else:
        models = tuple(_train_one(j) for j in jobs)
    return Ensemble(models=models, config=config, arch=arch, problem=problem)


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "arch": model.arch.to_dict(),
        "params": [float(p) for p in model.params],
        "seed": model.seed,
        "wall_time_s": model.wall_time_s,
        "final_loss": model.final_loss,
        "converged_by": model.converged_by,
    }


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model record version {d.get('format_version')!r}")
    return TrainedModel(
        arch=MlpArchitecture.from_dict(d["arch"]),
        params=np.array(d["params"], dtype=np.float64),
        seed=int(d["seed"]),
        wall_time_s=float(d["wall_time_s"]),
        final_loss=float(d["final_loss"]),
        converged_by=str(d["converged_by"]),
    )
