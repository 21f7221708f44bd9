"""Expected and distributional radio-resource usage with one retransmission.

Every link always completes its own retransmission when its first
transmission fails, even if another link already delivered the packet,
so the total channel usage of a duplicated transmission is a binomial
mixture over the per-link first-transmission outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DomainError, ValidationError
from .fbl import FblContext, channel_use
from .outage import ChaseCombiningSpec, LinkBlerProfile, succ_first
from .solver import (
    BlerPolicy,
    ContextArg,
    SolveResult,
    _node_contexts,
    _validate_scheme,
    build_profile,
    solve_bler,
)


@dataclass(frozen=True)
class UsageDistribution:
    """Discrete distribution of the total channel uses of one round."""

    support: Tuple[Tuple[float, float], ...]  # (channel_uses, probability)

    def __post_init__(self) -> None:
        total = math.fsum(p for _, p in self.support)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"probabilities must sum to 1, got {total!r}")
        uses = [u for u, _ in self.support]
        if any(a >= b for a, b in zip(uses, uses[1:])):
            raise DomainError("support points must be strictly increasing")

    def mean(self) -> float:
        return math.fsum(u * p for u, p in self.support)


@dataclass(frozen=True)
class UsageReport:
    """Dimensioning summary at a reliability target.

    ``channel_use_single`` is the per-transmission channel-use count
    (node average when per-node SINRs differ); ``total_usage`` includes
    the expected retransmissions over all links. When requested, the
    metadata's own channel-use count is reported alongside and is never
    added into ``total_usage``.
    """

    bler_target: float
    channel_use_single: float
    total_usage: float
    scheme: str
    m_nodes: int
    metadata_channel_use: Optional[float] = None

    def __post_init__(self) -> None:
        slack = 1e-9 * self.channel_use_single
        if self.total_usage < self.channel_use_single - slack:
            raise DomainError("total usage cannot undercut a single transmission")
        if self.total_usage < self.m_nodes * self.channel_use_single - slack:
            raise DomainError("total usage cannot undercut one transmission per node")


def usage_sc(r: float, p_succ_first: float) -> float:
    """Expected channel uses of a single link: r plus r more when the
    first transmission fails, i.e. (2 - p_succ_first) * r."""
    if not r > 0.0:
        raise DomainError(f"channel uses must be positive, got {r!r}")
    if not 0.0 <= p_succ_first <= 1.0:
        raise DomainError(f"p_succ_first must be in [0, 1], got {p_succ_first!r}")
    return (2.0 - p_succ_first) * r


def usage_mc(m: int, r: float, p_succ_first: float) -> float:
    """Expected channel uses over m duplicating links."""
    if not (isinstance(m, int) and m >= 1):
        raise DomainError(f"m must be a positive integer, got {m!r}")
    return m * usage_sc(r, p_succ_first)


def usage_distribution_mc(m: int, r: float, p_succ_first: float) -> UsageDistribution:
    """Distribution of total channel uses over m links.

    n of the m first transmissions fail (binomially), adding n
    retransmissions: (m + n) * r with weight C(m,n) p^(m-n) (1-p)^n.
    """
    if not (isinstance(m, int) and m >= 1):
        raise DomainError(f"m must be a positive integer, got {m!r}")
    if not r > 0.0:
        raise DomainError(f"channel uses must be positive, got {r!r}")
    if not 0.0 <= p_succ_first <= 1.0:
        raise DomainError(f"p_succ_first must be in [0, 1], got {p_succ_first!r}")
    p = p_succ_first
    support = tuple(
        ((m + n) * r, math.comb(m, n) * p ** (m - n) * (1.0 - p) ** n)
        for n in range(m + 1)
    )
    return UsageDistribution(support)


def normalized_usage(scheme: str, m: int, profile: LinkBlerProfile) -> float:
    """Expected usage in multiples of one transmission's resources."""
    _validate_scheme(scheme, m)
    if scheme == "SC":
        m = 1
    return usage_mc(m, 1.0, succ_first(profile))


def usage_at_reliability(
    scheme: str,
    m: int,
    target_outage: float,
    ctx: ContextArg,
    policy: BlerPolicy,
    chase: ChaseCombiningSpec,
    metadata_bits: Optional[int] = None,
) -> UsageReport:
    """Dimension a transmission for a reliability target.

    Pipeline: solve the per-transmission BLER target, size the
    transmission via the finite-blocklength channel use at that BLER,
    then account for expected retransmissions. Per-node SINRs may
    differ; usage is then summed node-wise.
    """
    _validate_scheme(scheme, m)
    if scheme == "SC":
        m = 1
    if not 0.0 < target_outage < 0.25:
        raise DomainError(
            f"target outage must be in (0, 0.25), got {target_outage!r}"
        )
    if ctx is None:
        raise ValidationError("usage_at_reliability requires an FblContext")
    contexts = _node_contexts(ctx, m)
    result: SolveResult = solve_bler(scheme, m, target_outage, policy, chase, contexts)
    uses = [channel_use(c, result.p_d) for c in contexts]
    # p_succ_first depends only on the BLER targets, shared by all nodes
    profile = build_profile(result.p_d, policy, chase, contexts[0])
    p1 = succ_first(profile)
    total = (2.0 - p1) * math.fsum(uses)
    meta_use = None
    if metadata_bits is not None:
        meta_use = math.fsum(
            channel_use(FblContext(metadata_bits, c.sinr_linear), result.p_m)
            for c in contexts
        ) / len(contexts)
    return UsageReport(
        bler_target=result.p_d,
        channel_use_single=math.fsum(uses) / len(uses),
        total_usage=total,
        scheme=scheme,
        m_nodes=m,
        metadata_channel_use=meta_use,
    )
