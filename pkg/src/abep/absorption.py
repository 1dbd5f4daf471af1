"""Exact absorption probabilities for one or two dual particles.

The dual particles random-walk on sites 1..N with inclusion attraction and
disappear into the boundary sites 0 and N+1.  For the boundary jumps two
rate bookkeepings are supported:

    edge="unit":  boundary jumps at rate (count at the edge site), exactly
                  the particle system simulated in :mod:`abep.sip`;
    edge="walk":  boundary jumps at rate alpha * (count), which makes a
                  lone particle a uniform nearest-neighbor walk.

The closed-form expressions implemented below solve the "walk" system for
every alpha; the two bookkeepings agree at alpha = 1 (and for N = 1, where
every bond touches a boundary).  The linear solver is the authority, the
closed forms are validators against it.

Two-particle states are unordered pairs (i, j), i <= j.  Once one particle
is absorbed the survivor continues as a single particle, so the pair system
closes with the single-particle solution as boundary data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams
from .errors import SingularSystem

_single_cache: dict = {}
_pair_cache: dict = {}


@dataclass(frozen=True)
class AbsorptionResult:
    """Outcome probabilities for two dual particles."""

    p_both_left: float
    p_both_right: float
    p_split: float

    def as_tuple(self):
        return (self.p_both_left, self.p_both_right, self.p_split)

    @property
    def total(self) -> float:
        return self.p_both_left + self.p_both_right + self.p_split


def _edge_rate(count: int, alpha: float, edge: str) -> float:
    if edge == "unit":
        return float(count)
    if edge == "walk":
        return alpha * count
    raise ValueError(f"edge must be 'unit' or 'walk', got {edge!r}")


def _single_right_probs(n: int, alpha: float, edge: str) -> np.ndarray:
    """P(absorbed right) for one particle at each start 1..N (linear solve)."""
    key = (n, float(alpha), edge)
    if key in _single_cache:
        return _single_cache[key]
    a = np.zeros((n, n))
    b = np.zeros(n)
    for i in range(1, n + 1):
        rl = _edge_rate(1, alpha, edge) if i == 1 else alpha
        rr = _edge_rate(1, alpha, edge) if i == n else alpha
        a[i - 1, i - 1] = rl + rr
        if i > 1:
            a[i - 1, i - 2] = -rl
        if i < n:
            a[i - 1, i] = -rr
        else:
            b[i - 1] = rr          # jumping right from N absorbs with value 1
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("single-particle absorption system is singular") from exc
    _single_cache[key] = h
    return h


def single_right_closed(i: int, n: int, alpha: float,
                        edge: str = "walk") -> float:
    """Closed-form right-exit probability of a lone dual walker."""
    if edge == "walk":
        return i / (n + 1.0)
    if edge == "unit":
        return (i + alpha - 1.0) / (n + 2.0 * alpha - 1.0)
    raise ValueError(f"edge must be 'unit' or 'walk', got {edge!r}")


def single_absorption_solve(i: int, p: SystemParams, edge: str = "walk"):
    """(p_left, p_right) for one particle at site i, by linear solve."""
    if not 1 <= i <= p.n_sites:
        raise IndexError(f"site {i} outside 1..{p.n_sites}")
    h = _single_right_probs(p.n_sites, p.alpha, edge)
    pr = float(h[i - 1])
    return (1.0 - pr, pr)


def single_absorption(i: int, p: SystemParams):
    """(p_left, p_right) for one particle at site i.

    Closed form: p_right = i / (N+1), checked on every call against the
    uniform-walk linear solve.
    """
    n = p.n_sites
    if not 1 <= i <= n:
        raise IndexError(f"site {i} outside 1..{n}")
    pr = i / (n + 1.0)
    solved = single_absorption_solve(i, p, edge="walk")[1]
    assert abs(pr - solved) <= 1e-12, (pr, solved)
    return (1.0 - pr, pr)


def _pair_states(n: int):
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def _pair_moves(i: int, j: int, n: int, alpha: float, edge: str):
    """Jumps out of the unordered pair (i, j): (rate, event).

    event is either a new pair tuple, or ("L", site) / ("R", site) when one
    particle got absorbed with the other one left at the given site.
    """
    mv = []
    if i == j:
        rate_l = _edge_rate(2, alpha, edge) if i == 1 else 2.0 * alpha
        mv.append((rate_l, ("L", j) if i == 1 else (i - 1, j)))
        rate_r = _edge_rate(2, alpha, edge) if i == n else 2.0 * alpha
        mv.append((rate_r, (i, "R") if i == n else (i, j + 1)))
        return mv
    near = 1.0 if j == i + 1 else 0.0
    # particle at i moving left
    rate = _edge_rate(1, alpha, edge) if i == 1 else alpha
    mv.append((rate, ("L", j) if i == 1 else (i - 1, j)))
    # particle at i moving right (towards j)
    mv.append((alpha + near, tuple(sorted((i + 1, j)))))
    # particle at j moving left (towards i)
    mv.append((alpha + near, tuple(sorted((i, j - 1)))))
    # particle at j moving right
    rate = _edge_rate(1, alpha, edge) if j == n else alpha
    mv.append((rate, (i, "R") if j == n else (i, j + 1)))
    return mv


def _pair_solution(n: int, alpha: float, edge: str):
    """Solve all three outcome probabilities for every start, in one solve."""
    key = (n, float(alpha), edge)
    if key in _pair_cache:
        return _pair_cache[key]
    states = _pair_states(n)
    index = {s: k for k, s in enumerate(states)}
    m = len(states)
    a = np.zeros((m, m))
    b = np.zeros((m, 3))          # columns: both-left, both-right, split
    h1 = _single_right_probs(n, alpha, edge)
    for (i, j) in states:
        row = index[(i, j)]
        for rate, event in _pair_moves(i, j, n, alpha, edge):
            a[row, row] += rate
            if isinstance(event[0], str) or isinstance(event[1], str):
                if event[0] == "L":
                    rest = event[1]
                    pr = h1[rest - 1]
                    b[row, 0] += rate * (1.0 - pr)
                    b[row, 2] += rate * pr
                else:
                    rest = event[0]
                    pr = h1[rest - 1]
                    b[row, 1] += rate * pr
                    b[row, 2] += rate * (1.0 - pr)
            else:
                a[row, index[event]] -= rate
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("two-particle absorption system is singular") from exc
    sol = {
        s: AbsorptionResult(float(h[k, 0]), float(h[k, 1]), float(h[k, 2]))
        for s, k in index.items()
    }
    _pair_cache[key] = sol
    return sol


def two_particle_solve(i: int, j: int, p: SystemParams,
                       edge: str = "walk") -> AbsorptionResult:
    """Exact outcome probabilities for two particles started at (i, j)."""
    n = p.n_sites
    if not (1 <= i <= j <= n):
        raise IndexError(f"need 1 <= i <= j <= N, got ({i}, {j}) with N = {n}")
    return _pair_solution(n, p.alpha, edge)[(i, j)]


def two_particle_closed_form(i: int, j: int, p: SystemParams) -> AbsorptionResult:
    """Closed-form outcome probabilities (uniform-walk boundary bookkeeping).

    With K = (N+1)(alpha (N+1) + 1):

        p_both_left  = (N+1-j)(alpha (N+1-i) + 1) / K        - 1/(2K) if i = j
        p_both_right = i (1 + alpha j) / K                   - 1/(2K) if i = j
        p_split      = [(alpha (N+1) - 1) i + (1 + alpha (N+1)) j
                        - 2 alpha i j] / K                   + 1/K   if i = j

    The three values sum to one identically.
    """
    n = p.n_sites
    if not (1 <= i <= j <= n):
        raise IndexError(f"need 1 <= i <= j <= N, got ({i}, {j}) with N = {n}")
    al = p.alpha
    k = (n + 1.0) * (al * (n + 1.0) + 1.0)
    p_ll = (n + 1.0 - j) * (al * (n + 1.0 - i) + 1.0) / k
    p_rr = i * (1.0 + al * j) / k
    p_sp = ((al * (n + 1.0) - 1.0) * i + (1.0 + al * (n + 1.0)) * j
            - 2.0 * al * i * j) / k
    if i == j:
        p_ll -= 0.5 / k
        p_rr -= 0.5 / k
        p_sp += 1.0 / k
    return AbsorptionResult(p_ll, p_rr, p_sp)
