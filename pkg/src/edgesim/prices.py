"""Positively recurrent price generators on a finite tick grid.

Two chain kinds are provided, both with reflecting boundaries so the
chain is finite and irreducible (hence positively recurrent):

  * reflecting_walk: lazy symmetric walk; with stay_probability the price
    holds, otherwise it moves one tick up or down with equal probability.
  * mean_reverting_walk: as above, but the up-move probability is tilted
    by reversion_strength * (center - price) / width toward the grid
    center, clamped to [0, 1].

Steps at grid_min / grid_max reflect inward.

One uniform draw is consumed per tick.  The mapping from a uniform u to a
move is fixed and shared by every code path in the package:

    u < stay                  -> hold
    u < stay + (1-stay)*p_up  -> +1 tick
    otherwise                 -> -1 tick

walk_block() produces the same path as repeated next_price() calls on the
same generator, tick for tick, while drawing uniforms in bulk; the
simulation harness relies on that equivalence for its vectorized engine.

Deterministic substreams are derived from a master seed with
numpy SeedSequence spawn keys; see substream().
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

REFLECTING_WALK = "reflecting_walk"
MEAN_REVERTING_WALK = "mean_reverting_walk"

ABOVE = "above"
BELOW = "below"

# Documented substream indices under one master seed.
STREAM_PRICE = 0
STREAM_INTENT = 1
STREAM_SIDE = 2
STREAM_DELAY = 3
STREAM_HITTING = 4

# Scalar fallback near boundaries re-vectorizes at most this many times
# per block before finishing the block step by step.
_MAX_BLOCK_RESTARTS = 8


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Deterministic generator for the index-th substream of a master seed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class PriceProcessConfig:
    kind: str = REFLECTING_WALK
    grid_min: int = 9000
    grid_max: int = 11000
    start_price: int = 10000
    stay_probability: Fraction = Fraction(1, 2)
    reversion_strength: Fraction = Fraction(0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (REFLECTING_WALK, MEAN_REVERTING_WALK):
            raise ValueError(f"unknown price process kind {self.kind!r}")
        if self.grid_min >= self.grid_max:
            raise ValueError("grid_min must be < grid_max")
        if not self.grid_min <= self.start_price <= self.grid_max:
            raise ValueError(f"start_price {self.start_price} outside grid")
        if not 0 <= self.stay_probability < 1:
            raise ValueError("stay_probability must be in [0, 1)")
        if not 0 <= self.reversion_strength <= 1:
            raise ValueError("reversion_strength must be in [0, 1] so step "
                             "probabilities stay in [0, 1]")

    @property
    def center(self) -> Fraction:
        return Fraction(self.grid_min + self.grid_max, 2)

    @property
    def width(self) -> int:
        return self.grid_max - self.grid_min


@dataclass
class PricePathState:
    """Current grid price, tick clock, and the owned generator state."""
    current_price: int
    time: int
    rng: np.random.Generator


def initial_state(config: PriceProcessConfig,
                  rng: np.random.Generator | None = None) -> PricePathState:
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    return PricePathState(current_price=config.start_price, time=0, rng=rng)


def _up_probability(config: PriceProcessConfig, price: int) -> float:
    if config.kind == REFLECTING_WALK:
        return 0.5
    tilt = config.reversion_strength * (config.center - price) / config.width
    return min(1.0, max(0.0, 0.5 + float(tilt)))


def _reflect(price: int, grid_min: int, grid_max: int) -> int:
    if price > grid_max:
        return 2 * grid_max - price
    if price < grid_min:
        return 2 * grid_min - price
    return price


def next_price(state: PricePathState, config: PriceProcessConfig) -> PricePathState:
    """Advance one tick, consuming one uniform; reflects at the grid edges."""
    u = state.rng.random()
    stay = float(config.stay_probability)
    p = state.current_price
    if u >= stay:
        p_up = _up_probability(config, p)
        step = 1 if u < stay + (1.0 - stay) * p_up else -1
        p = _reflect(p + step, config.grid_min, config.grid_max)
    return replace(state, current_price=p, time=state.time + 1)


def walk_block(price: int, rng: np.random.Generator, n: int,
               config: PriceProcessConfig) -> np.ndarray:
    """The next n prices, path-identical to n next_price() steps.

    Consumes exactly n uniforms from rng.  Vectorized for the reflecting
    walk (with a scalar fallback around boundary reflections); the
    mean-reverting walk is stepped sequentially because its move law
    depends on the current position.
    """
    if n <= 0:
        return np.empty(0, dtype=np.int64)
    u = rng.random(n)
    stay = float(config.stay_probability)
    gmin, gmax = config.grid_min, config.grid_max

    if config.kind == MEAN_REVERTING_WALK:
        out = np.empty(n, dtype=np.int64)
        p = price
        for i in range(n):
            ui = u[i]
            if ui >= stay:
                p_up = _up_probability(config, p)
                step = 1 if ui < stay + (1.0 - stay) * p_up else -1
                p = _reflect(p + step, gmin, gmax)
            out[i] = p
        return out

    up_threshold = stay + (1.0 - stay) * 0.5
    steps = np.where(u < stay, 0, np.where(u < up_threshold, 1, -1)).astype(np.int64)
    out = np.empty(n, dtype=np.int64)
    p = price
    i = 0
    restarts = 0
    while i < n:
        if restarts >= _MAX_BLOCK_RESTARTS:
            for j in range(i, n):
                p = _reflect(p + int(steps[j]), gmin, gmax)
                out[j] = p
            break
        restarts += 1
        free = p + np.cumsum(steps[i:])
        bad = (free > gmax) | (free < gmin)
        k = int(np.argmax(bad)) if bad.any() else -1
        if k < 0:
            out[i:] = free
            p = int(free[-1])
            break
        if k > 0:
            out[i:i + k] = free[:k]
            p = int(free[k - 1])
        j = i + k
        while j < n:
            p = _reflect(p + int(steps[j]), gmin, gmax)
            out[j] = p
            j += 1
            if gmin + 1 < p < gmax - 1:
                break
        i = j
    return out


@dataclass(frozen=True)
class HittingTimeSummary:
    samples: int
    cap: int
    count_finite: int
    mean: float
    max: int

    @property
    def capped(self) -> int:
        return self.samples - self.count_finite


def _validate_threshold(config: PriceProcessConfig, start_price: int,
                        xi: int, direction: str) -> int:
    """Return the first grid price strictly beyond the threshold."""
    if xi < 1:
        raise ValueError(f"threshold must be >= 1 tick, got {xi}")
    if not config.grid_min <= start_price <= config.grid_max:
        raise ValueError(f"start price {start_price} outside grid")
    if direction == ABOVE:
        if start_price + xi >= config.grid_max:
            raise ValueError(
                f"no grid price strictly above {start_price} + {xi}; "
                f"threshold unreachable within the grid")
        return start_price + xi + 1
    if direction == BELOW:
        if start_price - xi <= config.grid_min:
            raise ValueError(
                f"no grid price strictly below {start_price} - {xi}; "
                f"threshold unreachable within the grid")
        return start_price - xi - 1
    raise ValueError(f"direction must be 'above' or 'below', got {direction!r}")


def _hit_one_reflecting(rng: np.random.Generator, config: PriceProcessConfig,
                        start: int, target: int, direction: str,
                        cap: int, block: int = 1 << 15) -> int:
    """First passage time to the target price for one replication, or 0
    if not reached within cap steps (times are >= 1 so 0 is free).

    Only one boundary can be touched before the hit (the target lies
    strictly inside the grid and the walk moves one tick at a time), and
    a symmetric walk reflected at a single boundary is the folded free
    walk: position = boundary + |free walk - boundary|.  The passage
    time beyond the target is therefore the free walk's exit time from a
    symmetric interval, which needs no reflection handling at all.
    """
    stay = float(config.stay_probability)
    up_threshold = stay + (1.0 - stay) * 0.5
    if direction == ABOVE:
        x = start - config.grid_min
        tgt = target - config.grid_min
    else:
        x = config.grid_max - start
        tgt = config.grid_max - target
    done = 0
    while done < cap:
        n = min(block, cap - done)
        u = rng.random(n)
        steps = np.where(u < stay, 0, np.where(u < up_threshold, 1, -1))
        free = x + np.cumsum(steps)
        if int(free.max()) < tgt and int(free.min()) > -tgt:
            x = int(free[-1])
            done += n
            continue
        hit = (free >= tgt) | (free <= -tgt)
        return done + int(np.argmax(hit)) + 1
    return 0


def _hit_lockstep_mean_reverting(rng: np.random.Generator,
                                 config: PriceProcessConfig, start: int,
                                 target: int, direction: str, samples: int,
                                 cap: int) -> np.ndarray:
    """Hitting times for all replications advanced in lockstep (0 = capped)."""
    stay = float(config.stay_probability)
    strength = float(config.reversion_strength)
    center = float(config.center)
    width = float(config.width)
    gmin, gmax = config.grid_min, config.grid_max
    above = direction == ABOVE

    pos = np.full(samples, start, dtype=np.int64)
    times = np.zeros(samples, dtype=np.int64)
    idx = np.arange(samples)
    t = 0
    while idx.size and t < cap:
        t += 1
        u = rng.random(idx.size)
        p_up = np.clip(0.5 + strength * (center - pos) / width, 0.0, 1.0)
        move = u >= stay
        up = u < stay + (1.0 - stay) * p_up
        pos = pos + np.where(move, np.where(up, 1, -1), 0)
        pos = np.where(pos > gmax, 2 * gmax - pos, pos)
        pos = np.where(pos < gmin, 2 * gmin - pos, pos)
        hit = pos >= target if above else pos <= target
        if hit.any():
            times[idx[hit]] = t
            keep = ~hit
            idx = idx[keep]
            pos = pos[keep]
    return times


def estimate_hitting_time(config: PriceProcessConfig, start_price: int, xi: int,
                          direction: str, samples: int, cap: int,
                          master_seed: int | None = None) -> HittingTimeSummary:
    """Monte Carlo summary of the first time the price moves strictly
    beyond start_price +/- xi, over independent replications.

    Replications use deterministic child streams of the seed in
    replication order, so the summary is reproducible for a given
    (config, seed, samples, cap).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    target = _validate_threshold(config, start_price, xi, direction)
    seed = config.seed if master_seed is None else master_seed

    if config.kind == MEAN_REVERTING_WALK:
        rng = substream(seed, STREAM_HITTING)
        times = _hit_lockstep_mean_reverting(
            rng, config, start_price, target, direction, samples, cap)
    else:
        root = np.random.SeedSequence(entropy=seed, spawn_key=(STREAM_HITTING,))
        children = root.spawn(samples)
        times = np.empty(samples, dtype=np.int64)
        for w in range(samples):
            rng = np.random.default_rng(children[w])
            times[w] = _hit_one_reflecting(
                rng, config, start_price, target, direction, cap)

    finite = times[times > 0]
    count = int(finite.size)
    return HittingTimeSummary(
        samples=samples,
        cap=cap,
        count_finite=count,
        mean=float(finite.mean()) if count else float("nan"),
        max=int(finite.max()) if count else 0,
    )
