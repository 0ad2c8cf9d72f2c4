"""Monte Carlo estimates of the throughput metrics.

Simulates the channel directly: every antenna entry of the downlink and
uplink vectors is a circularly symmetric complex Gaussian built from two
real Gaussians of variance ``omega / 2``.  Nothing from :mod:`wpcn.analytic`
is used, so these estimates are an independent check on the closed forms.

Reproducibility
---------------
Trials are grouped in fixed blocks of :data:`STREAM_BLOCK`.  Block ``i``
draws from its own counter-based Philox stream keyed by ``(seed, i)``, and
per-block statistics are merged in block order.  An estimate is therefore a
pure function of ``(params, trials, seed)``; ``batch_size`` and ``workers``
only change how blocks are scheduled.
"""
from __future__ import annotations

import math
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from wpcn.errors import ConfigError, DomainError
from wpcn.model import ChannelDraw, SystemParams, derive

__all__ = [
    "STREAM_BLOCK",
    "McConfig",
    "McEstimate",
    "block_generator",
    "sample_channel",
    "estimate_outage",
    "estimate_ergodic_capacity",
    "estimate_throughput",
    "z_score",
]

STREAM_BLOCK = 8192
_CACHE_ENTRIES = 6


@dataclass(frozen=True)
class McConfig:
    """Simulation size and seeding.

    ``batch_size`` is the number of trials handed to a worker at a time
    (rounded up to whole stream blocks); ``workers`` is the thread count.
    Neither affects the estimates.
    """

    trials: int
    seed: int = 0
    batch_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("mc trials must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("mc seed must be a 64-bit unsigned integer")
        if self.batch_size < 1:
            raise ConfigError("mc batch_size must be positive")
        if self.workers < 1:
            raise ConfigError("mc workers must be positive")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent Philox stream for one block of trials."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_channel(n: int, omega: float, rng: np.random.Generator,
                   size: int | None = None) -> ChannelDraw:
    """Draw squared norms of the downlink and uplink channel vectors.

    Each of the ``2n`` complex entries has independent real and imaginary
    parts with variance ``omega / 2``; the draws are consumed in trial-major
    order so a shorter ``size`` yields a prefix of a longer one.
    """
    if int(n) != n or n < 1:
        raise DomainError("N must be a positive integer")
    if not omega > 0:
        raise DomainError("omega must be positive")
    shape = () if size is None else (int(size),)
    parts = rng.standard_normal(shape + (2, int(n), 2)) * math.sqrt(omega / 2.0)
    norms = np.square(parts).sum(axis=(-1, -2))
    if size is None:
        return ChannelDraw(float(norms[0]), float(norms[1]))
    return ChannelDraw(norms[..., 0], norms[..., 1])


def _block_sizes(trials):
    full, rest = divmod(trials, STREAM_BLOCK)
    return [STREAM_BLOCK] * full + ([rest] if rest else [])


def _generate_blocks(n, seed, first, sizes):
    out = []
    for offset, size in enumerate(sizes):
        draw = sample_channel(n, 1.0, block_generator(seed, first + offset), size)
        prod = draw.h_norm_sq * draw.g_norm_sq
        prod.flags.writeable = False
        out.append(prod)
    return out


_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()


def _normalized_products(n, mc):
    """Per-block samples of ``|h|^2 |g|^2 / omega^2`` (product of two Gamma(n, 1))."""
    key = (n, mc.trials, mc.seed)
    with _cache_lock:
        if key in _cache:
            _cache.move_to_end(key)
            return _cache[key]
    sizes = _block_sizes(mc.trials)
    per_task = max(1, -(-mc.batch_size // STREAM_BLOCK))
    starts = range(0, len(sizes), per_task)
    tasks = [(n, mc.seed, s, sizes[s:s + per_task]) for s in starts]
    if mc.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            chunks = list(pool.map(lambda t: _generate_blocks(*t), tasks))
    else:
        chunks = [_generate_blocks(*t) for t in tasks]
    blocks = tuple(b for chunk in chunks for b in chunk)
    with _cache_lock:
        _cache[key] = blocks
        while len(_cache) > _CACHE_ENTRIES:
            _cache.popitem(last=False)
    return blocks


def _snr_scale(params):
    if params.tau == 0.0:
        return 0.0
    return derive(params).snr_scale


def estimate_outage(params: SystemParams, mc: McConfig) -> McEstimate:
    """Fraction of simulated blocks with ``log2(1 + gamma_A) < R``."""
    c = _snr_scale(params)
    gamma_0 = derive(params).gamma_0
    hits = 0
    for prod in _normalized_products(params.n_antennas, mc):
        hits += int(np.count_nonzero(c * prod < gamma_0))
    p = hits / mc.trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / mc.trials), mc.trials, mc.seed)


def estimate_ergodic_capacity(params: SystemParams, mc: McConfig) -> McEstimate:
    """Sample mean of ``log2(1 + gamma_A)`` with its standard error."""
    c = _snr_scale(params)
    count = 0
    mean = 0.0
    m2 = 0.0
    # Chan et al. pairwise merge of per-block (count, mean, M2), in block order
    for prod in _normalized_products(params.n_antennas, mc):
        v = np.log1p(c * prod) / math.log(2.0)
        nb = v.size
        mb = float(v.mean())
        m2b = float(np.square(v - mb).sum())
        total = count + nb
        delta = mb - mean
        mean += delta * nb / total
        m2 += m2b + delta * delta * count * nb / total
        count = total
    if count > 1:
        stderr = math.sqrt(m2 / (count - 1) / count)
    else:
        stderr = math.inf
    return McEstimate(mean, stderr, mc.trials, mc.seed)


def estimate_throughput(mode: str, params: SystemParams, mc: McConfig) -> McEstimate:
    """Monte Carlo throughput for ``delay_limited`` or ``delay_tolerant``."""
    if mode not in ("delay_limited", "delay_tolerant"):
        raise DomainError(f"unknown mode {mode!r}")
    if params.tau in (0.0, 1.0):
        return McEstimate(0.0, 0.0, mc.trials, mc.seed)
    share = 1.0 - params.tau
    if mode == "delay_limited":
        out = estimate_outage(params, mc)
        scale = params.rate * share
        return McEstimate((1.0 - out.mean) * scale, out.stderr * scale, mc.trials, mc.seed)
    cap = estimate_ergodic_capacity(params, mc)
    return McEstimate(cap.mean * share, cap.stderr * share, mc.trials, mc.seed)


def z_score(analytic_value: float, est: McEstimate, mode: str, params: SystemParams) -> float:
    """Standardized gap between an analytic throughput and its MC estimate.

    For the delay-limited mode the binomial standard error is taken at the
    analytic outage probability (the null hypothesis under test), which stays
    meaningful when no outage was observed.  The delay-tolerant mode uses the
    sample standard error.
    """
    gap = analytic_value - est.mean
    se = est.stderr
    if mode == "delay_limited" and 0.0 < params.tau < 1.0 and params.rate > 0:
        scale = params.rate * (1.0 - params.tau)
        p0 = min(1.0, max(0.0, 1.0 - analytic_value / scale))
        se = scale * math.sqrt(p0 * (1.0 - p0) / est.trials)
    if se == 0.0:
        return 0.0 if gap == 0.0 else math.copysign(math.inf, gap)
    return gap / se
