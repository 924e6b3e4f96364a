"""Monte Carlo simulation of the ring election game.

The true game hands every player one persistent random key: survivors of
a round are the players whose key beats both nearest *surviving*
neighbours, and they keep their keys.  That chain is not driven by a
per-round survivor law, so it is simulated here rather than computed.
The redraw variants hand out fresh keys each round and are exactly the
chains the phase engine computes; simulating them supplies an
engine-independent consistency check.

Trials run in fixed-size batches, each with its own counter-based RNG
substream keyed by (seed, batch index), so results are reproducible
bit-for-bit and merge order-independently.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

_BATCH = 4096
_KEY_BITS = 63


class RingVariant(str, Enum):
    TRUE_PERSISTENT = "true-persistent"
    REDRAW_CIRCULAR = "redraw-circular"
    REDRAW_LINEAR_I = "redraw-linear-i"
    REDRAW_LINEAR_II = "redraw-linear-ii"


@dataclass(frozen=True)
class SimConfig:
    variant: RingVariant
    n: int
    trials: int
    seed: int
    stop_threshold: int = 1
    record_traces: bool = True

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"need trials >= 1, got {self.trials}")
        if self.stop_threshold < 1:
            raise ValueError("stop threshold must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    """A Monte Carlo point estimate with its standard error."""

    statistic: str
    point: float
    stderr: float
    trials: int
    extra: dict = field(default_factory=dict)

    def sigmas_from(self, reference: float) -> float:
        if self.stderr == 0.0:
            return math.inf if self.point != reference else 0.0
        return abs(self.point - reference) / self.stderr


@dataclass
class ElectionRecords:
    """Per-trial outcomes; traces are stored flat with offsets."""

    config: SimConfig
    rounds: np.ndarray
    messages: np.ndarray
    trace_flat: np.ndarray | None
    trace_offsets: np.ndarray | None

    def trace(self, trial: int) -> np.ndarray:
        """Survivor counts after each round, starting from n."""
        if self.trace_flat is None:
            raise ValueError("run was configured with record_traces=False")
        lo, hi = self.trace_offsets[trial], self.trace_offsets[trial + 1]
        return self.trace_flat[lo:hi]

    def round_histogram(self) -> dict[int, int]:
        values, counts = np.unique(self.rounds, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def _batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(seed, batch_index)))
    )


def _draw_distinct_keys(rng: np.random.Generator, m: int, width: int) -> np.ndarray:
    """Uniform 63-bit integer keys, redrawing any row containing a tie."""
    keys = rng.integers(0, 1 << _KEY_BITS, size=(m, width), dtype=np.int64)
    while True:
        sorted_rows = np.sort(keys, axis=1)
        bad = (sorted_rows[:, 1:] == sorted_rows[:, :-1]).any(axis=1)
        if not bad.any():
            return keys
        keys[bad] = rng.integers(0, 1 << _KEY_BITS, size=(int(bad.sum()), width), dtype=np.int64)


def _peak_mask(keys: np.ndarray, variant: RingVariant) -> np.ndarray:
    """Boolean survivor mask per row; width must be >= 2."""
    width = keys.shape[1]
    if variant in (RingVariant.TRUE_PERSISTENT, RingVariant.REDRAW_CIRCULAR):
        left = np.roll(keys, 1, axis=1)
        right = np.roll(keys, -1, axis=1)
        return (keys > left) & (keys > right)
    mask = np.zeros(keys.shape, dtype=bool)
    if width >= 3:
        mask[:, 1:-1] = (keys[:, 1:-1] > keys[:, :-2]) & (keys[:, 1:-1] > keys[:, 2:])
    if variant is RingVariant.REDRAW_LINEAR_II:
        mask[:, 0] = keys[:, 0] > keys[:, 1]
        mask[:, -1] = keys[:, -1] > keys[:, -2]
    return mask


def _group_rows_by_width(
    flat: np.ndarray, widths: np.ndarray, indices: np.ndarray
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Split a ragged row-major buffer into per-width key matrices."""
    groups: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    order = np.argsort(widths, kind="stable")
    offsets = np.zeros(len(widths) + 1, dtype=np.int64)
    np.cumsum(widths, out=offsets[1:])
    for width in np.unique(widths):
        if width == 0:
            continue
        rows = order[widths[order] == width]
        block = np.empty((len(rows), int(width)), dtype=flat.dtype)
        for out_row, row in enumerate(rows):
            block[out_row] = flat[offsets[row] : offsets[row] + width]
        groups[int(width)] = (block, indices[rows])
    return groups


def run_election(config: SimConfig) -> ElectionRecords:
    """Play the election to completion for every trial.

    Termination: the circular rules always keep at least one player and
    strictly shrink any set of two or more; linear-I may wipe everyone
    out, in which case the winner is drawn at random at zero cost and the
    trial simply ends.  Identical configs give bit-identical records.
    """
    rounds = np.zeros(config.trials, dtype=np.int32)
    messages = np.zeros(config.trials, dtype=np.int64)
    traces: list[list[int]] | None = (
        [[] for _ in range(config.trials)] if config.record_traces else None
    )
    persistent = config.variant is RingVariant.TRUE_PERSISTENT

    for start in range(0, config.trials, _BATCH):
        stop = min(start + _BATCH, config.trials)
        rng = _batch_rng(config.seed, start // _BATCH)
        m = stop - start
        # active groups: width -> (keys or None, trial indices)
        indices = np.arange(start, stop, dtype=np.int64)
        groups: dict[int, tuple[np.ndarray | None, np.ndarray]] = {}
        if config.n > config.stop_threshold:
            keys0 = _draw_distinct_keys(rng, m, config.n) if persistent else None
            groups[config.n] = (keys0, indices)
        while groups:
            next_groups: dict[int, list[tuple[np.ndarray | None, np.ndarray]]] = {}
            for width, (keys, idx) in sorted(groups.items()):
                if keys is None:
                    keys = _draw_distinct_keys(rng, len(idx), width)
                mask = _peak_mask(keys, config.variant)
                survivors = mask.sum(axis=1).astype(np.int64)
                rounds[idx] += 1
                # 2n per round: eliminated players keep relaying, so each
                # ring link is crossed twice per round regardless of width
                messages[idx] += 2 * config.n
                if traces is not None:
                    for trial, count in zip(idx, survivors):
                        traces[trial].append(int(count))
                if persistent:
                    flat = keys[mask]
                    sub = _group_rows_by_width(flat, survivors, idx)
                    for w, (block, sub_idx) in sub.items():
                        if w > config.stop_threshold:
                            next_groups.setdefault(w, []).append((block, sub_idx))
                else:
                    for w in np.unique(survivors):
                        w = int(w)
                        if w > config.stop_threshold:
                            sub_idx = idx[survivors == w]
                            next_groups.setdefault(w, []).append((None, sub_idx))
            groups = {}
            for w, parts in next_groups.items():
                idx = np.concatenate([p[1] for p in parts])
                if persistent:
                    block = np.vstack([p[0] for p in parts])
                else:
                    block = None
                groups[w] = (block, idx)

    trace_flat = trace_offsets = None
    if traces is not None:
        lengths = np.array([len(t) for t in traces], dtype=np.int64)
        trace_offsets = np.zeros(config.trials + 1, dtype=np.int64)
        np.cumsum(lengths, out=trace_offsets[1:])
        trace_flat = np.fromiter(
            itertools.chain.from_iterable(traces), dtype=np.int64, count=int(lengths.sum())
        )
    return ElectionRecords(
        config=config,
        rounds=rounds,
        messages=messages,
        trace_flat=trace_flat,
        trace_offsets=trace_offsets,
    )


def survivors_after_rounds(
    variant: RingVariant, n: int, trials: int, seed: int, *, rounds: int = 2
) -> np.ndarray:
    """Survivor count of every trial after a fixed number of rounds.

    Leaner than :func:`run_election`: no traces, no message accounting,
    stops after ``rounds`` eliminations (a trial ending earlier keeps its
    final count).
    """
    out = np.zeros(trials, dtype=np.int64)
    persistent = variant is RingVariant.TRUE_PERSISTENT
    for start in range(0, trials, _BATCH):
        stop = min(start + _BATCH, trials)
        rng = _batch_rng(seed, start // _BATCH)
        m = stop - start
        indices = np.arange(start, stop, dtype=np.int64)
        keys = _draw_distinct_keys(rng, m, n) if persistent else None
        groups: dict[int, tuple[np.ndarray | None, np.ndarray]] = {n: (keys, indices)}
        for _ in range(rounds):
            next_groups: dict[int, list[tuple[np.ndarray | None, np.ndarray]]] = {}
            for width, (block, idx) in sorted(groups.items()):
                if block is None:
                    block = _draw_distinct_keys(rng, len(idx), width)
                mask = _peak_mask(block, variant)
                survivors = mask.sum(axis=1).astype(np.int64)
                out[idx] = survivors
                if persistent:
                    flat = block[mask]
                    for w, (sub_block, sub_idx) in _group_rows_by_width(
                        flat, survivors, idx
                    ).items():
                        if w >= 2:
                            next_groups.setdefault(w, []).append((sub_block, sub_idx))
                else:
                    for w in np.unique(survivors):
                        w = int(w)
                        if w >= 2:
                            sub_idx = idx[survivors == w]
                            next_groups.setdefault(w, []).append((None, sub_idx))
            groups = {}
            for w, parts in next_groups.items():
                idx = np.concatenate([p[1] for p in parts])
                block = np.vstack([p[0] for p in parts]) if persistent else None
                groups[w] = (block, idx)
    return out


def closed_form_c2() -> float:
    """Two-round survival ratio of the persistent-key ring:
    (3 e^4 - 48 e^2 + 233) / 384."""
    e2 = math.exp(2.0)
    return (3.0 * e2 * e2 - 48.0 * e2 + 233.0) / 384.0


def estimate_c2(
    n: int, trials: int, seed: int, variant: RingVariant = RingVariant.TRUE_PERSISTENT
) -> SimEstimate:
    """Monte Carlo estimate of the expected two-round survival ratio."""
    counts = survivors_after_rounds(variant, n, trials, seed, rounds=2)
    ratios = counts / float(n)
    point = float(ratios.mean())
    stderr = float(ratios.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SimEstimate(
        statistic="two-round-survival-ratio",
        point=point,
        stderr=stderr,
        trials=trials,
        extra={
            "n": n,
            "variant": variant.value,
            "reference_persistent": closed_form_c2(),
            "reference_redraw": 1.0 / 9.0,
        },
    )


def _circular_peak_count(values: tuple[int, ...]) -> int:
    n = len(values)
    return sum(
        1
        for i in range(n)
        if values[i] > values[i - 1] and values[i] > values[(i + 1) % n]
    )


def _circular_peak_keys(values: tuple[int, ...]) -> tuple[int, ...]:
    n = len(values)
    return tuple(
        values[i]
        for i in range(n)
        if values[i] > values[i - 1] and values[i] > values[(i + 1) % n]
    )


def exhaustive_second_round(
    *, ring_size: int = 8, first_round: int = 4, second_round: int = 2
) -> Fraction:
    """Exact conditional probability of the persistent-key second round.

    Enumerates every ordering of ``ring_size`` distinct keys, conditions
    on ``first_round`` survivors, and counts orderings whose survivors
    (keeping their keys, in ring order) leave ``second_round`` players.
    """
    conditioned = 0
    hits = 0
    for perm in itertools.permutations(range(ring_size)):
        if _circular_peak_count(perm) != first_round:
            continue
        conditioned += 1
        if _circular_peak_count(_circular_peak_keys(perm)) == second_round:
            hits += 1
    if conditioned == 0:
        raise ValueError("conditioning event impossible")
    return Fraction(hits, conditioned)


def exhaustive_redraw_round(*, ring_size: int = 4, survivors: int = 2) -> Fraction:
    """Exact one-round survivor probability for a fresh ring, by
    enumeration (independent of the recurrence tables)."""
    hits = sum(
        1
        for perm in itertools.permutations(range(ring_size))
        if _circular_peak_count(perm) == survivors
    )
    return Fraction(hits, math.factorial(ring_size))


def conditional_second_round(
    trials: int,
    seed: int,
    variant: RingVariant = RingVariant.TRUE_PERSISTENT,
    *,
    ring_size: int = 8,
    first_round: int = 4,
    second_round: int = 2,
    min_events: int = 1000,
) -> SimEstimate:
    """Monte Carlo version of :func:`exhaustive_second_round`."""
    events = 0
    hits = 0
    for start in range(0, trials, _BATCH):
        stop = min(start + _BATCH, trials)
        rng = _batch_rng(seed, start // _BATCH)
        keys = _draw_distinct_keys(rng, stop - start, ring_size)
        mask = _peak_mask(keys, RingVariant.TRUE_PERSISTENT)
        survivors = mask.sum(axis=1)
        selected = survivors == first_round
        events += int(selected.sum())
        if not selected.any():
            continue
        if variant is RingVariant.TRUE_PERSISTENT:
            flat = keys[selected][mask[selected]].reshape(-1, first_round)
        else:
            flat = _draw_distinct_keys(rng, int(selected.sum()), first_round)
        second = _peak_mask(flat, RingVariant.TRUE_PERSISTENT).sum(axis=1)
        hits += int((second == second_round).sum())
    if events < min_events:
        raise ValueError(
            f"only {events} conditioning events; raise trials (need >= {min_events})"
        )
    p = hits / events
    stderr = math.sqrt(max(p * (1.0 - p), 1e-300) / events)
    return SimEstimate(
        statistic=f"P({second_round} of {first_round} | {ring_size}-ring)",
        point=p,
        stderr=stderr,
        trials=events,
        extra={"total_trials": trials, "variant": variant.value},
    )


def mean_survival_ratios(records: ElectionRecords, max_rounds: int = 6) -> list[float]:
    """Mean count-after-round / count-before-round, per round index.

    Evidence series for how fast the persistent-key game thins the ring;
    values near 1/3 echo the redraw behaviour, persistently lower values
    do not.
    """
    if records.trace_flat is None:
        raise ValueError("needs traces; run with record_traces=True")
    sums = np.zeros(max_rounds)
    norms = np.zeros(max_rounds)
    n = records.config.n
    for trial in range(records.config.trials):
        trace = records.trace(trial)
        prev = n
        for r, count in enumerate(trace[:max_rounds]):
            sums[r] += count / prev if prev else 0.0
            norms[r] += 1
            prev = count
    out = []
    for r in range(max_rounds):
        if norms[r] == 0:
            break
        out.append(float(sums[r] / norms[r]))
    return out
