"""Transmitter IQ-imbalance and PA nonlinearity, plus the receiver ADC.

The TX chain per antenna is: digital drive scale c, IQ mixer with image
leakage (mu1, mu2), third-order PA (nu1, nu3). The chain admits an exact
composite description

    x_out = g1 x + z(x),   z from the augmented monomial vector psi(x),

where psi stacks (x, x*, x^3, x^2 x*, x x*^2, x*^3) and the six composite
gains follow from expanding nu3 |mu1 u + mu2 u*|^2 (mu1 u + mu2 u*). Both
forms are implemented and agree to machine precision; the simulator runs the
physical chain and the analysis code uses the composite gains.
"""

from dataclasses import dataclass

import numpy as np

from .config_units import dbm_to_linear, db_to_linear


@dataclass(frozen=True)
class TxImpairmentModel:
    """IQ mixer (g, theta) -> (mu1, mu2), and PA gains at the PA input plane."""
    g: float
    theta: float
    mu1: complex
    mu2: complex
    nu1: float
    nu3: float
    irr_db: float | None
    iip3_dbm: float | None

    @property
    def image_rejection(self):
        """Linear image-rejection ratio |mu1/mu2|^2 (inf for an ideal mixer)."""
        if self.mu2 == 0:
            return np.inf
        return abs(self.mu1 / self.mu2) ** 2


def make_impairment_model(irr_db=30.0, iip3_dbm=15.0, nu1=None, theta=0.0,
                          pa_gain_db=38.0):
    """Build the TX impairment model.

    :param irr_db: image rejection ratio in dB; None for an ideal mixer
    :param iip3_dbm: PA input-referred third-order intercept; None for linear
    :param nu1: PA linear amplitude gain; defaults to 10^(pa_gain_db/20)
    :param theta: mixer phase skew in radians; the amplitude mismatch g is
        solved so the requested IRR is met exactly
    """
    if nu1 is None:
        nu1 = 10.0 ** (pa_gain_db / 20.0)
    if irr_db is None or np.isinf(irr_db):
        g, theta_eff = 1.0, 0.0
    else:
        if irr_db <= 0:
            raise ValueError("irr_db must be positive")
        r = db_to_linear(irr_db)
        # |1 + g e^{-j t}|^2 = R |1 - g e^{j t}|^2 reduces to
        # g^2 - 2 g cos(t) (R+1)/(R-1) + 1 = 0; take the root in (0, 1).
        beta = np.cos(theta) * (r + 1.0) / (r - 1.0)
        if beta < 1.0:
            raise ValueError("requested IRR unreachable at this phase skew")
        g = beta - np.sqrt(beta * beta - 1.0)
        theta_eff = theta
    mu1 = 0.5 * (1.0 + g * np.exp(-1j * theta_eff))
    mu2 = 0.5 * (1.0 - g * np.exp(+1j * theta_eff))
    if iip3_dbm is None:
        nu3 = 0.0
    else:
        nu3 = nu1 / dbm_to_linear(iip3_dbm)
    return TxImpairmentModel(g=float(g), theta=float(theta_eff),
                             mu1=complex(mu1), mu2=complex(mu2),
                             nu1=float(nu1), nu3=float(nu3),
                             irr_db=irr_db, iip3_dbm=iip3_dbm)


@dataclass(frozen=True)
class GainMatrices:
    """Composite per-chain gains of the impaired transmitter.

    g1, g2 weight x and x*; g3..g6 weight the cubic monomials in psi order.
    All TX chains are identical, so the gain matrices are these scalars times
    identity blocks; drive is the digital scale applied before the mixer.
    """
    g1: complex
    g2: complex
    g3: complex
    g4: complex
    g5: complex
    g6: complex
    drive: float
    model: TxImpairmentModel

    def scalars(self):
        return np.array([self.g1, self.g2, self.g3, self.g4, self.g5, self.g6])

    def augmented(self, n_tx):
        """(n_tx, 6 n_tx) block matrix [g1 I | g2 I | ... | g6 I]."""
        eye = np.eye(n_tx)
        return np.hstack([gk * eye for gk in self.scalars()])


def derive_gain_matrices(model, g1_target):
    """Back-solve the drive level so the composite linear gain is g1_target.

    The drive scale is real: c = g1_target / |mu1 nu1|. With a = mu1 c and
    b = mu2 c the PA input is w = a x + b x*, and expanding
    nu1 w + nu3 |w|^2 w over the monomials of psi gives the six gains. The
    x^2 x* coefficient is a (|a|^2 + 2 |b|^2) nu3 (and its mirror for
    x x*^2); at the ideal-mixer point it reduces to exactly nu3_eff, matching
    the plain cubic nu1 x + nu3 |x|^2 x.
    """
    c = float(g1_target) / abs(model.mu1 * model.nu1)
    a = model.mu1 * c
    b = model.mu2 * c
    aa = abs(a) ** 2
    bb = abs(b) ** 2
    nu1, nu3 = model.nu1, model.nu3
    return GainMatrices(
        g1=nu1 * a,
        g2=nu1 * b,
        g3=nu3 * a * a * np.conj(b),
        g4=nu3 * a * (aa + 2.0 * bb),
        g5=nu3 * b * (2.0 * aa + bb),
        g6=nu3 * np.conj(a) * b * b,
        drive=c,
        model=model,
    )


def build_augmented_vector(x):
    """Stack the impairment monomials of x: (x, x*, x^3, x^2 x*, x x*^2, x*^3).

    x may be (n,) or (n, T); the result is (6n,) or (6n, T) with the blocks
    in that fixed order.
    """
    x = np.asarray(x)
    xc = np.conj(x)
    return np.concatenate([x, xc, x ** 3, x ** 2 * xc, x * xc ** 2, xc ** 3],
                          axis=0)


def tx_chain(x, gains):
    """Run frames through drive scale, IQ mixer and PA.

    :param x: (n_tx, n_samples) intended baseband frame
    :param gains: GainMatrices from derive_gain_matrices
    :returns: (x_tilde, z) with x_tilde = g1 x + z exactly
    """
    m = gains.model
    u = gains.drive * np.asarray(x)
    w = m.mu1 * u + m.mu2 * np.conj(u)
    x_tilde = m.nu1 * w + m.nu3 * (np.abs(w) ** 2) * w
    z = x_tilde - gains.g1 * x
    return x_tilde, z


# ---------------------------------------------------------------------------
# receiver front end

@dataclass(frozen=True)
class AdcModel:
    bits: int = 14
    papr_db: float = 10.0
    dynamic_range_db: float = 60.0
    full_scale_dbm: float = -30.0
    auto_range: bool = True


def adc_full_scale(adc, y=None):
    """Full-scale power per antenna, watts.

    With auto_range the rail tracks the measured per-antenna peak rail
    amplitude (a peak-tracking AGC) but never drops below the configured
    full-scale floor, so quantization error stays within one LSB while the
    step never collapses on a cold antenna. The papr_db field is the static
    dynamic-range accounting behind the floor, not an enforced clip level.
    """
    floor_w = dbm_to_linear(adc.full_scale_dbm)
    if not adc.auto_range or y is None:
        return floor_w
    y = np.atleast_2d(np.asarray(y))
    peak = np.maximum(np.abs(y.real), np.abs(y.imag)).max(axis=1)
    return np.maximum(floor_w, peak ** 2)


def adc_quantize(y, adc, full_scale_w=None):
    """Uniform mid-rise quantization of I and Q rails with clipping.

    Each rail spans [-A, +A] with A = sqrt(full_scale_w) in 2^bits steps;
    inputs beyond the rails clip to the outermost code. The map is idempotent.
    full_scale_w may be a scalar or per-antenna vector; if omitted it is
    derived from the frame via adc_full_scale.
    """
    y = np.asarray(y)
    if full_scale_w is None:
        full_scale_w = adc_full_scale(adc, y)
    amp = np.sqrt(np.asarray(full_scale_w, dtype=float))
    if amp.ndim == 1 and y.ndim == 2:
        amp = amp[:, None]
    step = 2.0 * amp / (2 ** adc.bits)
    top = amp - 0.5 * step

    def rail(v):
        return np.clip((np.floor(v / step) + 0.5) * step, -top, top)

    return rail(y.real) + 1j * rail(y.imag)


def check_saturation(power_w, threshold_w):
    """Per-antenna RF saturation flags; the boundary counts as saturated."""
    return np.asarray(power_w) >= threshold_w
