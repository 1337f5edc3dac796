"""Control law lambda(t, beta) = lambda0 * G(beta) * f(t).

The temperature envelope G and temporal modulation f are small tagged
classes; tabulated variants interpolate with a C^1 monotone cubic
(PCHIP) and raise outside their abscissa range.  All profiles are
immutable after construction.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .exceptions import ExtrapolationError

#: Step scale for finite-difference beta derivatives of tabulated envelopes.
TABULATED_DERIVATIVE_STEP = 1e-5


@dataclass(frozen=True)
class GaussianEnvelope:
    """G(beta) = exp(-(beta-beta0)^2 / (2 s_beta^2)), maximal (=1) at beta0.

    The exponent is formed from the ratio (beta-beta0)/s_beta before
    squaring so extreme arguments underflow to zero instead of overflowing;
    increments scale as G'^2, so silent overflow would zero the physics.
    """

    beta0: float
    s_beta: float

    def __post_init__(self):
        if not self.s_beta > 0.0:
            raise ValueError(f"s_beta must be > 0, got {self.s_beta}")

    def value(self, beta):
        z = (np.asarray(beta, dtype=float) - self.beta0) / self.s_beta
        return np.exp(-0.5 * z * z)

    def derivative(self, beta):
        beta = np.asarray(beta, dtype=float)
        return -((beta - self.beta0) / self.s_beta**2) * self.value(beta)

    derivative_is_approximate = False


@dataclass(frozen=True)
class ConstantEnvelope:
    """Temperature-insensitive drive: G = 1, G' = 0 (the no-go case)."""

    def value(self, beta):
        return np.ones_like(np.asarray(beta, dtype=float))

    def derivative(self, beta):
        return np.zeros_like(np.asarray(beta, dtype=float))

    derivative_is_approximate = False


@dataclass(frozen=True)
class TabulatedEnvelope:
    """User-supplied G(beta) samples, PCHIP-interpolated.

    Beta derivatives come from a centered finite difference with step
    ``TABULATED_DERIVATIVE_STEP * max(1, |beta|)`` (shrunk near the table
    edges) and are flagged approximate.
    """

    betas: tuple
    values: tuple
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    derivative_is_approximate = True

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if betas.ndim != 1 or betas.size < 2 or betas.size != vals.size:
            raise ValueError("tabulated envelope needs >= 2 (beta, value) pairs")
        if not np.all(np.diff(betas) > 0):
            raise ValueError("tabulated abscissa must be strictly increasing")
        object.__setattr__(self, "betas", tuple(betas))
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "_interp", PchipInterpolator(betas, vals, extrapolate=False))

    def _check_range(self, beta):
        lo, hi = self.betas[0], self.betas[-1]
        if np.any(np.asarray(beta) < lo) or np.any(np.asarray(beta) > hi):
            raise ExtrapolationError(
                f"beta outside tabulated range [{lo}, {hi}]"
            )

    def value(self, beta):
        self._check_range(beta)
        return self._interp(beta)

    def derivative(self, beta):
        beta = float(beta)
        self._check_range(beta)
        lo, hi = self.betas[0], self.betas[-1]
        h = TABULATED_DERIVATIVE_STEP * max(1.0, abs(beta))
        h = min(h, beta - lo, hi - beta) if (beta > lo and beta < hi) else 0.0
        if h > 0.0:
            return (self._interp(beta + h) - self._interp(beta - h)) / (2.0 * h)
        # endpoint: one-sided difference
        h1 = TABULATED_DERIVATIVE_STEP * max(1.0, abs(beta))
        if beta <= lo:
            return (self._interp(lo + h1) - self._interp(lo)) / h1
        return (self._interp(hi) - self._interp(hi - h1)) / h1


@dataclass(frozen=True)
class CosineModulation:
    """f(t) = cos(omega_d * t + phi)."""

    omega_d: float
    phi: float = 0.0

    def __post_init__(self):
        if self.omega_d < 0.0:
            raise ValueError(f"omega_d must be >= 0, got {self.omega_d}")

    def value(self, t):
        return np.cos(self.omega_d * np.asarray(t, dtype=float) + self.phi)


@dataclass(frozen=True)
class ConstantModulation:
    """f(t) = 1 (constant-in-time control)."""

    def value(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TabulatedModulation:
    """User-supplied f(t) samples, PCHIP-interpolated; no extrapolation."""

    times: tuple
    values: tuple
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or ts.size != vals.size:
            raise ValueError("tabulated modulation needs >= 2 (t, value) pairs")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("tabulated abscissa must be strictly increasing")
        object.__setattr__(self, "times", tuple(ts))
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "_interp", PchipInterpolator(ts, vals, extrapolate=False))

    def value(self, t):
        lo, hi = self.times[0], self.times[-1]
        if np.any(np.asarray(t) < lo) or np.any(np.asarray(t) > hi):
            raise ExtrapolationError(f"t outside tabulated range [{lo}, {hi}]")
        return self._interp(t)


@dataclass(frozen=True)
class DriveProfile:
    """lambda(t, beta) = lambda0 * envelope(beta) * temporal(t)."""

    lambda0: float
    envelope: object
    temporal: object

    @property
    def omega_d(self) -> float:
        """Driving frequency, 0 for non-cosine modulations."""
        return getattr(self.temporal, "omega_d", 0.0)


def lambda_at(profile: DriveProfile, t, beta):
    """Drive amplitude at (t, beta); vectorized over t."""
    value = profile.lambda0 * profile.envelope.value(beta) * profile.temporal.value(t)
    return float(value) if np.isscalar(t) or np.ndim(t) == 0 else value


def dlambda_dbeta(profile: DriveProfile, t, beta):
    """Beta derivative of the drive amplitude at (t, beta); vectorized over t.

    Identically zero for temperature-insensitive envelopes; this is the
    weight entering the non-equilibrium contribution, so an exactly-zero
    derivative is the no-go condition.
    """
    value = profile.lambda0 * profile.envelope.derivative(beta) * profile.temporal.value(t)
    return float(value) if np.isscalar(t) or np.ndim(t) == 0 else value


def sample_envelope_center(beta_star: float, equilibrium_qfi_value: float,
                           seed: int) -> float:
    """Draw an envelope center uniformly from max(0, beta* +- 1/sqrt(F_eq)).

    Deterministic given the seed; used by the opt-in config sampler.
    """
    if equilibrium_qfi_value <= 0.0:
        raise ValueError("equilibrium QFI must be positive to size the sampling window")
    half_width = 1.0 / math.sqrt(equilibrium_qfi_value)
    lo = max(0.0, beta_star - half_width)
    hi = beta_star + half_width
    rng = np.random.default_rng(seed)
    return float(rng.uniform(lo, hi))
