"""Drift and rank-one diffusion coefficients of the two energy diffusions.

Both generators are kept in the common form

    L f = sum_i b_i d_i f  +  sum_k a_k (v_k . grad)^2 f,

where (v_k . grad)^2 is the pure directional second derivative with the
direction frozen at the evaluation point.  Any first-order piece produced by
state dependence of a direction is folded into the drift b, so the matching
SDE reads dX = b dt + sum_k sqrt(2 a_k) v_k dW_k.

Noise directions are ordered [bond 1, ..., bond N-1, left reservoir, right
reservoir], N+1 in total for both models, which makes the symmetric-limit
comparison componentwise.

Symmetric model on coordinates z (per bond and reservoir):
    bond (i, i+1): amplitude z_i z_{i+1} on e_{i+1} - e_i, first-order
        coefficient alpha (z_i - z_{i+1}) on the same direction;
    left: amplitude T_l z_1 on e_1, drift T_l alpha - z_1 at site 1;
    right: mirror image with T_r at site N.

Asymmetric model on coordinates x, with E_l the partial energies:
    bond (i, i+1): amplitude (1 - e^{-s x_i})(e^{s x_{i+1}} - 1) / s^2 on
        e_{i+1} - e_i, first-order coefficient
        [ (1 - e^{-s x_i})(e^{s x_{i+1}} - 1)
          + alpha (2 - e^{-s x_i} - e^{s x_{i+1}}) ] / s;
    left: amplitude T_l e^{s E_1} (e^{s x_1} - 1) / s on e_1, drift at
        site 1 equal to T_l e^{s E_1} (alpha + e^{s x_1} - 1)
        - (e^{s x_1} - 1) / s;
    right: one rank-one direction v with v_l = e^{s E_l}(1 - e^{-s x_l})
        for l < N and v_N = e^{s E_N}, amplitude T_r g_N(x), and drift
        (alpha T_r - g_N) v + T_r g_N u where
        u_l = s (e^{2 s E_l} - e^{2 s E_{l+1}}) for l < N and
        u_N = s e^{2 s E_N}  (the transport correction of the moving
        direction).

These coefficients make the conjugation by the energy transform exact: the
asymmetric generator applied to f o g equals the symmetric generator of f
evaluated at g(x), which is what intertwining_residual measures.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams, as_state, map_g, partial_energies


@dataclass
class DriftDiffusion:
    """Drift vector plus rank-one diffusion factors at one configuration."""

    drift: np.ndarray
    noise_dirs: list  # list of (amplitude, direction vector) pairs


def _bep_parts(z: np.ndarray, p: SystemParams):
    """Batched symmetric-model coefficients.

    Returns (drift (R,N), bond amplitudes (R,N-1), left amplitude (R,),
    right amplitude (R,), right direction None for the static e_N).
    """
    a = p.alpha
    drift = np.zeros_like(z)
    c = a * (z[..., :-1] - z[..., 1:])     # bond coefficient on e_{i+1} - e_i
    drift[..., :-1] -= c
    drift[..., 1:] += c
    drift[..., 0] += p.t_left * a - z[..., 0]
    drift[..., -1] += p.t_right * a - z[..., -1]
    bond_amp = z[..., :-1] * z[..., 1:]
    left_amp = p.t_left * z[..., 0]
    right_amp = p.t_right * z[..., -1]
    return drift, bond_amp, left_amp, right_amp, None


def _abep_parts(x: np.ndarray, p: SystemParams):
    """Batched asymmetric-model coefficients; see the module docstring."""
    s = p.sigma
    a = p.alpha
    e = partial_energies(x)                 # (..., N+1), e[..., l-1] = E_l
    em = -np.expm1(-s * x)                  # 1 - e^{-s x_i}
    ep = np.expm1(s * x)                    # e^{s x_i} - 1
    drift = np.zeros_like(x)

    # bulk bonds
    prod = em[..., :-1] * ep[..., 1:]
    bond_amp = prod / (s * s)
    c = (prod + a * (em[..., :-1] - ep[..., 1:])) / s
    drift[..., :-1] -= c
    drift[..., 1:] += c

    # left reservoir (site 1 only)
    e1 = np.exp(s * e[..., 0])
    left_amp = p.t_left * e1 * ep[..., 0] / s
    drift[..., 0] += p.t_left * e1 * (a + ep[..., 0]) - ep[..., 0] / s

    # right reservoir: rank-one direction across the whole chain
    ee = np.exp(s * e[..., :-1])            # e^{s E_l}, l = 1..N
    v = ee * em
    v[..., -1] = ee[..., -1]
    e2 = ee * ee
    u = np.empty_like(v)
    u[..., :-1] = s * (e2[..., :-1] - e2[..., 1:])
    u[..., -1] = s * e2[..., -1]
    g_n = em[..., -1] / s                   # g_N(x) = (1 - e^{-s x_N}) / s
    right_amp = p.t_right * g_n
    drift += (a * p.t_right - g_n)[..., None] * v
    drift += (p.t_right * g_n)[..., None] * u
    return drift, bond_amp, left_amp, right_amp, v


def _assemble(n: int, parts) -> DriftDiffusion:
    drift, bond_amp, left_amp, right_amp, v = parts
    dirs = []
    for i in range(n - 1):
        d = np.zeros(n)
        d[i] = -1.0
        d[i + 1] = 1.0
        dirs.append((float(bond_amp[i]), d))
    left = np.zeros(n)
    left[0] = 1.0
    dirs.append((float(left_amp), left))
    if v is None:
        right = np.zeros(n)
        right[-1] = 1.0
    else:
        right = np.array(v, dtype=float)
    dirs.append((float(right_amp), right))
    return DriftDiffusion(drift=np.array(drift, dtype=float), noise_dirs=dirs)


def bep_coefficients(z, p: SystemParams) -> DriftDiffusion:
    """Symmetric-model coefficients at one configuration z."""
    arr = as_state(z, p.n_sites)
    return _assemble(p.n_sites, _bep_parts(arr, p))


def abep_coefficients(x, p: SystemParams) -> DriftDiffusion:
    """Asymmetric-model coefficients at one configuration x.

    With sigma = 0 this is exactly the symmetric model.
    """
    arr = as_state(x, p.n_sites)
    if p.sigma == 0:
        return bep_coefficients(arr, p)
    return _assemble(p.n_sites, _abep_parts(arr, p))


def model_parts(x: np.ndarray, p: SystemParams, model: str):
    """Batched coefficient parts for 'bep' or 'abep' (sde backend)."""
    if model == "bep" or p.sigma == 0:
        return _bep_parts(x, p)
    if model == "abep":
        return _abep_parts(x, p)
    raise ValueError(f"unknown model {model!r}")


def apply_generator(coeffs: DriftDiffusion, f, x, fd_step: float) -> float:
    """Apply L = b . grad + sum_k a_k (v_k . grad)^2 to f at x numerically.

    Central finite differences of order fd_step**2; directional second
    derivatives use f(x + h v) - 2 f(x) + f(x - h v).
    """
    x = np.asarray(x, dtype=float)
    h = float(fd_step)
    out = 0.0
    for i, b in enumerate(coeffs.drift):
        if b == 0.0:
            continue
        step = np.zeros_like(x)
        step[i] = h
        out += b * (f(x + step) - f(x - step)) / (2.0 * h)
    f0 = None
    for amp, v in coeffs.noise_dirs:
        if amp == 0.0:
            continue
        if f0 is None:
            f0 = f(x)
        out += amp * (f(x + h * v) - 2.0 * f0 + f(x - h * v)) / (h * h)
    return float(out)


def intertwining_residual(x, p: SystemParams, f, fd_step: float) -> float:
    """|L_asym (f o g)(x) - (L_sym f)(g(x))| by finite differences."""
    x = as_state(x, p.n_sites)
    z = map_g(x, p)
    lhs = apply_generator(abep_coefficients(x, p), lambda y: f(map_g(y, p)), x, fd_step)
    rhs = apply_generator(bep_coefficients(z, p), f, z, fd_step)
    return abs(lhs - rhs)
