"""Finite-blocklength channel-coding math for AWGN links.

Normal-approximation machinery: Gaussian Q-function and its inverse,
Shannon capacity, channel dispersion, and the closed-form channel-use
count for a payload at a target block error rate (plus its inverse).
All functions are pure and scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import erfc, ndtri

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Supremum of V(gamma), reached as gamma -> inf.
DISPERSION_LIMIT = 1.0 / math.log(2.0) ** 2


def q_func(x: float) -> float:
    """Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2))."""
    if not math.isfinite(x):
        raise DomainError(f"q_func argument must be finite, got {x!r}")
    return 0.5 * float(erfc(x / _SQRT2))


def q_inv(p: float) -> float:
    """Inverse of q_func on (0, 1).

    Inverse-normal rational approximation polished with one Newton step
    against q_func, which keeps the q_func/q_inv roundtrip below 1e-12
    relative error over p in [1e-12, 1 - 1e-12].
    """
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise DomainError(f"q_inv argument must be in (0, 1), got {p!r}")
    x = -float(ndtri(p))
    pdf = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    if pdf > 0.0:
        x += (q_func(x) - p) / pdf
    return x


def shannon_capacity(sinr_linear: float) -> float:
    """AWGN capacity C = log2(1 + sinr) in bits per channel use."""
    if not (math.isfinite(sinr_linear) and sinr_linear > 0.0):
        raise DomainError(f"sinr_linear must be positive, got {sinr_linear!r}")
    return math.log2(1.0 + sinr_linear)


def channel_dispersion(sinr_linear: float) -> float:
    """Channel dispersion V = (1 - 1/(1+sinr)^2) / ln(2)^2.

    Strictly increasing in the SINR; in (0, 1/ln(2)^2) for finite
    positive SINR (squared information units per channel use).
    """
    if not (math.isfinite(sinr_linear) and sinr_linear > 0.0):
        raise DomainError(f"sinr_linear must be positive, got {sinr_linear!r}")
    return DISPERSION_LIMIT * (1.0 - 1.0 / (1.0 + sinr_linear) ** 2)


def db_to_linear(x_db: float) -> float:
    """Convert a dB power ratio to linear scale."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a linear power ratio to dB."""
    if not x > 0.0:
        raise DomainError(f"linear value must be positive, got {x!r}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class FblContext:
    """Payload size and link SINR with the derived coding quantities.

    ``capacity`` and ``dispersion`` are always recomputed from
    ``sinr_linear``; they are stored so repeated evaluations do not pay
    for the logs.
    """

    payload_bits: int
    sinr_linear: float
    capacity: float = field(init=False)
    dispersion: float = field(init=False)

    def __post_init__(self) -> None:
        if not (isinstance(self.payload_bits, int) and self.payload_bits >= 1):
            raise DomainError(
                f"payload_bits must be a positive integer, got {self.payload_bits!r}"
            )
        object.__setattr__(self, "capacity", shannon_capacity(self.sinr_linear))
        object.__setattr__(self, "dispersion", channel_dispersion(self.sinr_linear))


def channel_use(ctx: FblContext, bler: float) -> float:
    """Channel uses R that carry ctx.payload_bits at the given BLER.

    Positive root of L = R*C - Qinv(bler)*sqrt(R*V), solved as a
    quadratic in sqrt(R). Valid for bler in (0, 0.5), where Qinv is
    nonnegative and the positive-root selection holds; R is real-valued
    (no rounding to resource blocks).
    """
    if not (isinstance(bler, (int, float)) and 0.0 < bler < 0.5):
        raise DomainError(f"bler must be in (0, 0.5), got {bler!r}")
    qi = q_inv(bler)
    c = ctx.capacity
    v = ctx.dispersion
    root = (qi * math.sqrt(v) + math.sqrt(qi * qi * v + 4.0 * ctx.payload_bits * c)) / (
        2.0 * c
    )
    return root * root


def achieved_bler(ctx: FblContext, channel_uses: float) -> float:
    """BLER achieved when the payload is sent over ``channel_uses`` uses.

    Inverse of :func:`channel_use` on its valid domain; strictly
    decreasing in ``channel_uses``.
    """
    if not channel_uses > 0.0:
        raise DomainError(f"channel_uses must be positive, got {channel_uses!r}")
    arg = (channel_uses * ctx.capacity - ctx.payload_bits) / math.sqrt(
        channel_uses * ctx.dispersion
    )
    return q_func(arg)
