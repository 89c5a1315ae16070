"""Adaptive digital self-interference cancellation.

The residual SI after the analog stage is linear in the augmented monomials
of the known transmit frame (the impairment basis times the delay lines), so
the canceller solves a regularized least squares from training samples: SVD
of the design matrix, truncated at the smallest rank whose per-antenna
residual falls to the thermal noise floor. The learned map is then applied
to the whole frame after the ADC.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .impairments import build_augmented_vector
from .waveform import frame_power
from .config_units import linear_to_db


@dataclass
class DigitalCancellerState:
    theta: np.ndarray                     # (n_rx, n_basis) learned map
    rank_used: int
    residual_power_per_antenna: np.ndarray
    singular_values: np.ndarray


def build_design_matrix(x, l_si):
    """Stack delayed copies of the impairment monomials of the TX frame.

    :param x: (n_tx, T) known transmit frame (pre-impairment baseband)
    :param l_si: number of delay lines spanned
    :returns: (6 * n_tx * l_si, T); delayed columns before the frame start
        are zero (the frame is the start of the transmission)
    """
    x = np.atleast_2d(np.asarray(x))
    n_tx, t = x.shape
    blocks = []
    for l in range(l_si):
        xl = np.zeros_like(x)
        if l < t:
            xl[:, l:] = x[:, :t - l]
        blocks.append(build_augmented_vector(xl))
    return np.vstack(blocks)


def linear_basis_mask(n_tx, l_si):
    """Rows of the design matrix holding only the linear monomial x."""
    mask = np.zeros(6 * n_tx * l_si, dtype=bool)
    for l in range(l_si):
        mask[l * 6 * n_tx: l * 6 * n_tx + n_tx] = True
    return mask


def tsvd_estimate(psi, y, noise_var_w):
    """Truncated-SVD fit of y over the rows of psi.

    Ranks are added in descending singular-value order until every antenna's
    mean-square residual is at or below noise_var_w; if that never happens
    the full numerical rank is used, which coincides with the minimum-norm
    least-squares solution. Singular values at numerical zero are never used.
    """
    psi = np.asarray(psi)
    y = np.atleast_2d(np.asarray(y))
    t = psi.shape[1]
    if y.shape[1] != t:
        raise ValueError("design matrix and observations disagree in length")
    u, s, v = numerics.svd(psi)
    tol = s[0] * max(psi.shape) * np.finfo(float).eps if s.size else 0.0
    k = int(np.sum(s > tol))
    if k == 0:
        theta = np.zeros((y.shape[0], psi.shape[0]), dtype=complex)
        res = frame_power(y)
        return DigitalCancellerState(theta, 0, res, s[:0])
    b = y @ v[:, :k]                       # coefficients along the SV basis
    cum = np.cumsum(np.abs(b) ** 2, axis=1)
    res = np.maximum(np.sum(np.abs(y) ** 2, axis=1)[:, None] - cum, 0.0)
    ok = np.all(res / t <= noise_var_w, axis=0)
    p = int(np.argmax(ok)) + 1 if np.any(ok) else k
    theta = (b[:, :p] / s[:p]) @ u[:, :p].conj().T
    return DigitalCancellerState(theta, p, res[:, p - 1] / t, s[:k])


def cancel_signal(state, psi):
    """Correction signal -Theta psi[k]; add to the post-ADC frame."""
    return -(state.theta @ psi)


def digital_cancellation_db(before, after):
    """Per-antenna suppression power ratio in dB, averaged over antennas."""
    p_before = frame_power(before)
    p_after = frame_power(after)
    ratio = np.where(p_after > 0, p_before / np.where(p_after > 0, p_after, 1.0),
                     np.inf)
    db = np.where(np.isinf(ratio), 400.0, linear_to_db(ratio))
    return float(np.mean(db))
