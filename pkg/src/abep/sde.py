"""Positivity-preserving Euler-Maruyama integration of the energy diffusions.

One step reads

    x' = x + b(x) dt + sum_k sqrt(2 a_k(x) dt) eta_k v_k,

followed by a componentwise clamp at zero, with (b, a_k, v_k) the drift and
rank-one diffusion factors from :mod:`abep.generators` and eta independent
standard Gaussians (one per noise direction, ordered bonds, left, right).
Amplitudes are clamped at zero before the square root since round-off can
push them slightly negative at the boundary of the state space.

Chains are propagated in vectorized batches; a batch of R chains steps an
(R, N) array at once.  All randomness flows through a single generator per
call, so results are reproducible bit for bit given (seed, chain count).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams, as_state
from .errors import NumericalBlowup, ParameterError
from .generators import model_parts
from .rng import as_generator, stream

DEFAULT_CAP = 1e6


@dataclass(frozen=True)
class SdeConfig:
    """Time stepping and sampling plan for one simulation."""

    dt: float
    t_end: float
    thinning: float
    burn_in: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0):
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end > 0):
            raise ParameterError(f"t_end must be > 0, got {self.t_end}")
        if not (self.dt < self.thinning <= self.t_end):
            raise ParameterError(
                f"need dt < thinning <= t_end, got dt={self.dt}, "
                f"thinning={self.thinning}, t_end={self.t_end}"
            )
        if not (0 <= self.burn_in <= self.t_end):
            raise ParameterError(
                f"burn_in must lie in [0, t_end], got {self.burn_in}"
            )


def _step_batch(x: np.ndarray, p: SystemParams, dt: float, gauss: np.ndarray,
                model: str) -> np.ndarray:
    """One EM step for a batch of chains; x is (R, N), gauss is (R, N+1)."""
    n = p.n_sites
    drift, bond_amp, left_amp, right_amp, v = model_parts(x, p, model)
    sq = np.sqrt(2.0 * dt)
    out = x + drift * dt
    if n > 1:
        c = sq * np.sqrt(np.clip(bond_amp, 0.0, None)) * gauss[:, : n - 1]
        out[:, 1:] += c
        out[:, :-1] -= c
    out[:, 0] += sq * np.sqrt(np.clip(left_amp, 0.0, None)) * gauss[:, n - 1]
    cr = sq * np.sqrt(np.clip(right_amp, 0.0, None)) * gauss[:, n]
    if v is None:
        out[:, -1] += cr
    else:
        out += cr[:, None] * v
    np.maximum(out, 0.0, out=out)
    return out


def em_step(x, p: SystemParams, dt: float, noise, model: str = "bep") -> np.ndarray:
    """Single explicit step from one configuration.

    noise must hold one standard Gaussian per noise direction (N+1 values,
    bonds first, then left and right reservoirs).
    """
    arr = as_state(x, p.n_sites)
    eta = np.asarray(noise, dtype=float)
    if eta.shape != (p.n_sites + 1,):
        raise ParameterError(
            f"noise must have shape ({p.n_sites + 1},), got {eta.shape}"
        )
    return _step_batch(arr[None, :], p, dt, eta[None, :], model)[0]


def _run_chains(x0: np.ndarray, p: SystemParams, model: str, dt: float,
                n_steps: int, rng: np.random.Generator, cap: float,
                record_at=()):
    """Propagate a batch, snapshotting at the given step indices.

    Returns (final states, list of snapshots).  Raises NumericalBlowup when
    any component passes the cap.
    """
    x = np.array(x0, dtype=float)
    r = x.shape[0]
    k = p.n_sites + 1
    targets = sorted(int(t) for t in record_at)
    ti = 0
    snaps = []
    # chunked noise draws; the normal stream is identical for any chunking
    chunk = max(1, min(4096, 65536 // max(1, r * k)))
    step = 0
    while step < n_steps:
        c = min(chunk, n_steps - step)
        gauss = rng.standard_normal((c, r, k))
        for j in range(c):
            # a diverging chain overflows inside the coefficient evaluation
            # before the cap trips; the guard below turns the resulting
            # inf/nan into a structured error, so the warnings add nothing
            with np.errstate(over="ignore", invalid="ignore"):
                x = _step_batch(x, p, dt, gauss[j], model)
            step += 1
            m = float(x.max())
            # the inverted comparison also trips on nan and inf, which a
            # plain m > cap would let through
            if not m <= cap:
                raise NumericalBlowup(
                    f"component reached {m:.4g} (cap {cap:.4g}) at t = {step * dt:.6g}"
                )
            while ti < len(targets) and targets[ti] == step:
                snaps.append(x.copy())
                ti += 1
    return x, snaps


def _emit_steps(cfg: SdeConfig):
    """Step indices at which states are emitted: burn_in + j * thinning."""
    n_steps = int(round(cfg.t_end / cfg.dt))
    out = []
    j = 1
    while True:
        t = cfg.burn_in + j * cfg.thinning
        if t > cfg.t_end * (1.0 + 1e-12):
            break
        idx = int(round(t / cfg.dt))
        if idx >= 1:
            out.append(min(idx, n_steps))
        j += 1
    return n_steps, out


def simulate_trajectory(x0, p: SystemParams, cfg: SdeConfig, model: str = "bep",
                        cap: float = DEFAULT_CAP):
    """Integrate one trajectory, emitting thinned states after burn-in.

    Returns a list of (time, configuration) pairs, deterministic given the
    seed in cfg.
    """
    arr = as_state(x0, p.n_sites)
    n_steps, emit = _emit_steps(cfg)
    rng = stream(cfg.seed, f"trajectory-{model}")
    _, snaps = _run_chains(arr[None, :], p, model, cfg.dt, n_steps, rng, cap,
                           record_at=emit)
    return [(idx * cfg.dt, snap[0]) for idx, snap in zip(emit, snaps)]


def _eval_observable(observable, states2d: np.ndarray) -> np.ndarray:
    """Evaluate a scalar observable on (M, N) stacked states, vectorizing
    when the callable supports batched input."""
    try:
        vals = np.asarray(observable(states2d), dtype=float)
        if vals.shape == (states2d.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(observable(row)) for row in states2d])


def stationary_estimate(p: SystemParams, cfg: SdeConfig, model: str, observable,
                        n_chains: int = 1, x0=None, cap: float = DEFAULT_CAP,
                        n_batches: int = 20):
    """Long-run mean of an observable with a batch-means standard error.

    Runs n_chains independent chains from x0 (default: the zero state),
    discards burn_in, thins, and averages.  The standard error comes from
    the spread of per-chain batch means, so it accounts for autocorrelation
    on scales below the batch length.
    """
    if n_chains < 1:
        raise ParameterError("n_chains must be >= 1")
    start = np.zeros(p.n_sites) if x0 is None else as_state(x0, p.n_sites)
    x_init = np.tile(start, (n_chains, 1))
    n_steps, emit = _emit_steps(cfg)
    if not emit:
        raise ParameterError("no samples: increase t_end or reduce burn_in/thinning")
    rng = stream(cfg.seed, f"stationary-{model}")
    _, snaps = _run_chains(x_init, p, model, cfg.dt, n_steps, rng, cap,
                           record_at=emit)
    stacked = np.stack(snaps)                      # (M, R, N)
    m, r, n = stacked.shape
    vals = _eval_observable(observable, stacked.reshape(m * r, n)).reshape(m, r)
    mean = float(vals.mean())
    groups = np.array_split(np.arange(m), min(n_batches, m))
    batch_means = np.concatenate([vals[g].mean(axis=0) for g in groups])
    if batch_means.size > 1:
        se = float(np.std(batch_means, ddof=1) / np.sqrt(batch_means.size))
    else:
        se = 0.0
    return mean, se


def ensemble_endpoint(x0, p: SystemParams, model: str, dt: float, t: float,
                      n_chains: int, seed, cap: float = DEFAULT_CAP) -> np.ndarray:
    """Final states of n_chains independent chains all started at x0."""
    arr = as_state(x0, p.n_sites)
    rng = as_generator(seed, f"endpoint-{model}")
    n_steps = int(round(t / dt))
    x_init = np.tile(arr, (n_chains, 1))
    final, _ = _run_chains(x_init, p, model, dt, n_steps, rng, cap)
    return final
