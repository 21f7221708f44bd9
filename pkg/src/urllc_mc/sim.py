"""Monte Carlo HARQ event simulator with reproducible parallel streams.

Each trial plays the per-link reception event tree (first transmission,
timeout retransmission, NACK retransmission with Chase combining),
duplicates across links, samples latency and counts channel uses.
Per-trial randomness comes from counter-based Philox substreams keyed by
(seed, trial index), so results are bit-identical for any batch size or
worker count. Plain Monte Carlo only: validate at error rates where the
binomial intervals are meaningful, not at the 1e-5 operating points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .errors import DomainError, ValidationError
from .outage import LinkBlerProfile
from .solver import _validate_scheme

# Per-trial draw layout: one shared frame-alignment draw, then five draws
# per link: own frame alignment (used only when alignment is not shared),
# first metadata, first data, second metadata, and a second-stage draw
# that is the retransmitted-data decode on the timeout path and the
# combined decode on the NACK path (the paths are mutually exclusive, so
# one fresh uniform serves both).
_DRAWS_PER_NODE = 5

_LEAF_FIRST, _LEAF_TIMEOUT, _LEAF_NACK, _LEAF_OUT = 0, 1, 2, 3

DEFAULT_BATCH_SIZE = 1 << 17


@dataclass(frozen=True)
class Numerology:
    """Mini-slot timing constants; durations are in TTIs unless noted.

    The default is a four-symbol mini-slot at 30 kHz subcarrier spacing
    (TTI of 1/7 ms), HARQ round-trip of four TTIs and a feedback timeout
    of three TTIs, which fits one retransmission in a 1 ms budget.
    """

    scs_khz: float = 30.0
    symbols_per_tti: int = 4
    harq_rtt_ttis: int = 4
    timeout_ttis: int = 3
    t_up_ttis: float = 1.0
    t_tx_ttis: float = 1.0
    t_bp_initial_ttis: float = 0.0

    def __post_init__(self) -> None:
        if not self.scs_khz > 0:
            raise ValidationError(f"scs_khz must be positive, got {self.scs_khz!r}")
        for name in ("symbols_per_tti", "harq_rtt_ttis", "timeout_ttis"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 1):
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
        if not self.t_tx_ttis > 0:
            raise ValidationError(f"t_tx_ttis must be positive, got {self.t_tx_ttis!r}")
        for name in ("t_up_ttis", "t_bp_initial_ttis"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")


def _ms_from_ttis(numerology: Numerology, ttis: float) -> float:
    # grouped so that integer TTI totals come out exact (e.g. 7 TTIs at
    # 4 symbols / 30 kHz is exactly 1.0 ms)
    return (ttis * numerology.symbols_per_tti) * (15.0 / numerology.scs_khz) / 14.0


def tti_duration_ms(numerology: Numerology) -> float:
    """TTI length in ms: symbols_per_tti * (15 / scs_khz) / 14."""
    return _ms_from_ttis(numerology, 1.0)


def latency_budget_check(numerology: Numerology, budget_ms: float) -> tuple[float, bool]:
    """Worst-case one-retransmission latency and whether it fits the budget.

    Worst case: a full TTI of frame alignment, the HARQ round trip, the
    retransmission itself and the receiver processing time.
    """
    if not budget_ms > 0:
        raise ValidationError(f"budget_ms must be positive, got {budget_ms!r}")
    worst_ttis = (
        1.0
        + numerology.harq_rtt_ttis
        + numerology.t_tx_ttis
        + numerology.t_up_ttis
        + numerology.t_bp_initial_ttis
    )
    worst_ms = _ms_from_ttis(numerology, worst_ttis)
    return worst_ms, worst_ms <= budget_ms


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one simulated HARQ round (all links of one packet)."""

    success: bool
    used_retransmission: bool
    latency_ttis: Optional[float]  # None when the packet was lost
    channel_use_multiples: int


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    ci_half_width_95: float
    trials: int
    seed: int


class Metric(Enum):
    OUTAGE = "outage"
    MEAN_USAGE = "mean_usage"
    LATENCY_QUANTILE = "latency_quantile"


@dataclass(frozen=True)
class SimAggregate:
    """Raw tallies of a run: integer counts plus success latencies.

    ``leaf_counts[n]`` are the per-link event-tree leaf tallies
    (first-try success, timeout-path success, NACK-path success, outage)
    of link n. ``usage_extra_counts[k]`` counts trials in which exactly
    k links retransmitted (total channel uses (m + k) transmissions).
    """

    trials: int
    seed: int
    m_nodes: int
    n_success: int
    leaf_counts: np.ndarray  # (m, 4) int64
    usage_extra_counts: np.ndarray  # (m + 1,) int64
    success_latencies_ttis: Optional[np.ndarray]

    def usage_multiples_sum(self) -> int:
        extras = int(np.sum(self.usage_extra_counts * np.arange(self.m_nodes + 1)))
        return self.m_nodes * self.trials + extras


def _trial_uniforms(seed: int, start: int, count: int, m: int) -> np.ndarray:
    """Uniform draws for trials [start, start + count), row per trial.

    The per-trial budget is padded to a whole number of Philox blocks
    (four 64-bit words) so any batch boundary lands exactly on a trial
    boundary of the counter space.
    """
    k = 1 + _DRAWS_PER_NODE * m
    k_pad = -(-k // 4) * 4
    bits = Philox(key=seed)
    bits.advance(start * (k_pad // 4))
    return Generator(bits).random((count, k_pad))[:, :k]


def _node_leaves(u: np.ndarray, profile: LinkBlerProfile) -> np.ndarray:
    """Classify trials into event-tree leaves for one link.

    ``u`` columns: first metadata, first data, second metadata, second
    stage. The combined decode after a NACK fails with the conditional
    probability p_c / p_d1 given that the first data decode failed.
    """
    meta1_fail = u[:, 0] < profile.p_m1
    data1_fail = u[:, 1] < profile.p_d1
    meta2_ok = u[:, 2] >= profile.p_m2
    leaves = np.full(u.shape[0], _LEAF_OUT, dtype=np.int8)
    leaves[~meta1_fail & ~data1_fail] = _LEAF_FIRST
    leaves[meta1_fail & meta2_ok & (u[:, 3] >= profile.p_d2)] = _LEAF_TIMEOUT
    cond_fail = profile.p_c / profile.p_d1 if profile.p_d1 > 0 else 0.0
    leaves[~meta1_fail & data1_fail & meta2_ok & (u[:, 3] >= cond_fail)] = _LEAF_NACK
    return leaves


def _check_profiles(profiles: Sequence[LinkBlerProfile]) -> None:
    if len(profiles) < 1:
        raise DomainError("at least one link profile is required")
    for profile in profiles:
        if profile.p_c > 0.0 and profile.p_d1 == 0.0:
            raise DomainError(
                "p_c > 0 with p_d1 = 0 leaves the combining probability undefined"
            )


def _run_batch(
    profiles: Sequence[LinkBlerProfile],
    numerology: Numerology,
    seed: int,
    start: int,
    count: int,
    shared_frame_alignment: bool,
    collect_latencies: bool,
):
    m = len(profiles)
    u = _trial_uniforms(seed, start, count, m)
    first_lat_offset = (
        numerology.t_bp_initial_ttis + numerology.t_tx_ttis + numerology.t_up_ttis
    )
    retx_lat_offset = (
        numerology.harq_rtt_ttis + numerology.t_tx_ttis + numerology.t_up_ttis
    )
    leaf_counts = np.zeros((m, 4), dtype=np.int64)
    extra_retx = np.zeros(count, dtype=np.int64)
    best_lat = np.full(count, np.inf)
    for n, profile in enumerate(profiles):
        cols = u[:, 1 + _DRAWS_PER_NODE * n : 1 + _DRAWS_PER_NODE * (n + 1)]
        t_fa = u[:, 0] if shared_frame_alignment else cols[:, 0]
        leaves = _node_leaves(cols[:, 1:5], profile)
        leaf_counts[n] = np.bincount(leaves, minlength=4)
        first = leaves == _LEAF_FIRST
        extra_retx += ~first
        lat = np.where(first, t_fa + first_lat_offset, t_fa + retx_lat_offset)
        lat[leaves == _LEAF_OUT] = np.inf
        best_lat = np.minimum(best_lat, lat)
    success = np.isfinite(best_lat)
    usage_extra = np.bincount(extra_retx, minlength=m + 1)
    latencies = best_lat[success] if collect_latencies else None
    return int(success.sum()), leaf_counts, usage_extra, latencies


def simulate_run(
    profiles: Sequence[LinkBlerProfile],
    numerology: Numerology,
    trials: int,
    seed: int,
    shared_frame_alignment: bool = True,
    collect_latencies: bool = True,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
) -> SimAggregate:
    """Run ``trials`` independent HARQ rounds and tally the outcomes.

    Counts accumulate as integers and batches reduce in index order, so
    the aggregate is identical for any ``batch_size``/``jobs`` split.
    """
    _check_profiles(profiles)
    if not (isinstance(trials, int) and trials >= 1):
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if not (isinstance(seed, int) and seed >= 0):
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    if batch_size < 1 or jobs < 1:
        raise ValidationError("batch_size and jobs must be positive")
    m = len(profiles)
    starts = list(range(0, trials, batch_size))

    def run(start: int):
        return _run_batch(
            profiles,
            numerology,
            seed,
            start,
            min(batch_size, trials - start),
            shared_frame_alignment,
            collect_latencies,
        )

    if jobs == 1 or len(starts) == 1:
        results = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, starts))

    n_success = 0
    leaf_counts = np.zeros((m, 4), dtype=np.int64)
    usage_extra = np.zeros(m + 1, dtype=np.int64)
    latency_parts: List[np.ndarray] = []
    for batch_success, batch_leaves, batch_usage, batch_lat in results:
        n_success += batch_success
        leaf_counts += batch_leaves
        usage_extra += batch_usage
        if batch_lat is not None:
            latency_parts.append(batch_lat)
    latencies = np.concatenate(latency_parts) if collect_latencies else None
    return SimAggregate(
        trials=trials,
        seed=seed,
        m_nodes=m,
        n_success=n_success,
        leaf_counts=leaf_counts,
        usage_extra_counts=usage_extra,
        success_latencies_ttis=latencies,
    )


def _trial_from_uniforms(
    profiles: Sequence[LinkBlerProfile],
    numerology: Numerology,
    row: np.ndarray,
    shared_frame_alignment: bool,
) -> TrialOutcome:
    best = math.inf
    multiples = 0
    used_retx = False
    for n, profile in enumerate(profiles):
        base = 1 + _DRAWS_PER_NODE * n
        t_fa = float(row[0] if shared_frame_alignment else row[base])
        leaf = int(_node_leaves(row[base + 1 : base + 5].reshape(1, 4), profile)[0])
        if leaf == _LEAF_FIRST:
            multiples += 1
            lat = t_fa + (
                numerology.t_bp_initial_ttis
                + numerology.t_tx_ttis
                + numerology.t_up_ttis
            )
        else:
            multiples += 2
            used_retx = True
            if leaf == _LEAF_OUT:
                lat = math.inf
            else:
                lat = t_fa + (
                    numerology.harq_rtt_ttis
                    + numerology.t_tx_ttis
                    + numerology.t_up_ttis
                )
        best = min(best, lat)
    success = math.isfinite(best)
    return TrialOutcome(
        success=success,
        used_retransmission=used_retx,
        latency_ttis=best if success else None,
        channel_use_multiples=multiples,
    )


def simulate_mc_trial(
    profiles: Sequence[LinkBlerProfile],
    numerology: Numerology,
    rng: Generator,
    shared_frame_alignment: bool = True,
) -> TrialOutcome:
    """One duplicated HARQ round; the first successful copy wins.

    Every link always finishes its own retransmission when its first
    transmission fails, so channel-use multiples sum over links even
    when another copy already got through.
    """
    _check_profiles(profiles)
    row = rng.random(1 + _DRAWS_PER_NODE * len(profiles))
    return _trial_from_uniforms(profiles, numerology, row, shared_frame_alignment)


def simulate_sc_trial(
    profile: LinkBlerProfile, numerology: Numerology, rng: Generator
) -> TrialOutcome:
    """One single-link HARQ round."""
    return simulate_mc_trial([profile], numerology, rng)


def estimate(
    metric: Metric,
    scheme: str,
    trials: int,
    seed: int,
    numerology: Numerology,
    profiles: Sequence[LinkBlerProfile],
    quantile: float = 0.99,
    shared_frame_alignment: bool = True,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of one metric with a 95% half-width.

    OUTAGE is a proportion (normal-approximation binomial interval).
    MEAN_USAGE is in multiples of one transmission's channel uses.
    LATENCY_QUANTILE is the empirical quantile of successful-trial
    latencies in TTIs; no interval is attached to it.
    """
    _validate_scheme(scheme, len(profiles))
    agg = simulate_run(
        profiles,
        numerology,
        trials,
        seed,
        shared_frame_alignment=shared_frame_alignment,
        collect_latencies=metric is Metric.LATENCY_QUANTILE,
        batch_size=batch_size,
        jobs=jobs,
    )
    return estimate_from_aggregate(metric, agg, quantile=quantile)


def estimate_from_aggregate(
    metric: Metric, agg: SimAggregate, quantile: float = 0.99
) -> MonteCarloEstimate:
    """Turn raw tallies into a point estimate with its interval."""
    n = agg.trials
    if metric is Metric.OUTAGE:
        mean = (n - agg.n_success) / n
        ci = 1.96 * math.sqrt(mean * (1.0 - mean) / n)
        return MonteCarloEstimate(mean, ci, n, agg.seed)
    if metric is Metric.MEAN_USAGE:
        values = agg.m_nodes + np.arange(agg.m_nodes + 1)
        counts = agg.usage_extra_counts
        total = int(np.sum(values * counts))
        total_sq = int(np.sum(values * values * counts))
        mean = total / n
        var = max(0.0, total_sq / n - mean * mean)
        return MonteCarloEstimate(mean, 1.96 * math.sqrt(var / n), n, agg.seed)
    if metric is Metric.LATENCY_QUANTILE:
        if not 0.0 < quantile <= 1.0:
            raise ValidationError(f"quantile must be in (0, 1], got {quantile!r}")
        if agg.success_latencies_ttis is None:
            raise ValidationError("latencies were not collected for this run")
        lats = agg.success_latencies_ttis
        mean = float(np.quantile(lats, quantile)) if lats.size else math.nan
        return MonteCarloEstimate(mean, 0.0, n, agg.seed)
    raise ValidationError(f"unknown metric {metric!r}")
