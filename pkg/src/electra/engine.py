"""Phase-count laws of elimination chains: exact tables, ending states,
and state-occupancy probabilities.

The chain starts at n and in each round jumps to the survivor count drawn
from the model; every state at or below the stop threshold is absorbing.
The law of the number of rounds is built column by column:

    rounds(n, j) = sum_k P(n, k) * rounds(k, j - 1)

with the initialization convention deciding what a wiped-out round (state
0) costs: nothing under STANDARD, one extra phase under ALT_COST.

Rows up to ``exact_cutoff`` are kept as exact rationals; higher rows use
floating arithmetic that reads the already-exact low rows, so exactness
degrades only where the rationals would be unaffordable anyway.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import sparse

from .models import SurvivorModel

#: stop adding phase columns once every row holds all but this much mass
DEFAULT_RESIDUAL_EPS = 1e-12

_J_CAP = 20_000


class InitConvention(str, Enum):
    STANDARD = "standard"  # ending with nobody left costs nothing extra
    ALT_COST = "altcost"  # the final forced pick costs one phase


def _zero_cost(init: InitConvention) -> int:
    return 1 if init is InitConvention.ALT_COST else 0


@dataclass
class PhaseTable:
    """Distribution of the number of phases, all starting sizes at once.

    ``probs[n, j]`` is the probability that the game starting from n
    players takes exactly j phases; ``cum`` is its running sum in j.
    ``exact_rows`` holds the same rows as exact rationals for n up to the
    cutoff.  Immutable after construction; share freely across threads.
    """

    model: SurvivorModel
    max_n: int
    threshold_a: int
    init: InitConvention
    exact_cutoff: int
    residual_eps: float
    j_max: int
    probs: np.ndarray
    cum: np.ndarray
    exact_rows: dict[int, tuple[Fraction, ...]]
    means: np.ndarray
    means_direct: np.ndarray
    exact_means: dict[int, Fraction]
    mean_gap: float

    def prob(self, n: int, j: int) -> float:
        self._check_n(n)
        return float(self.probs[n, j]) if 0 <= j <= self.j_max else 0.0

    def cdf(self, n: int, j: int) -> float:
        self._check_n(n)
        if j < 0:
            return 0.0
        return float(self.cum[n, min(j, self.j_max)])

    def row(self, n: int) -> np.ndarray:
        self._check_n(n)
        return self.probs[n].copy()

    def cdf_row(self, n: int) -> np.ndarray:
        self._check_n(n)
        return self.cum[n].copy()

    def exact_prob(self, n: int, j: int) -> Fraction:
        row = self.exact_row(n)
        return row[j] if 0 <= j < len(row) else Fraction(0)

    def exact_row(self, n: int) -> tuple[Fraction, ...]:
        if n not in self.exact_rows:
            raise ValueError(f"no exact row for n={n} (cutoff {self.exact_cutoff})")
        return self.exact_rows[n]

    def exact_cdf(self, n: int, j: int) -> Fraction:
        row = self.exact_row(n)
        return sum(row[: j + 1], Fraction(0))

    def mean(self, n: int) -> float:
        self._check_n(n)
        return float(self.means[n])

    def exact_mean(self, n: int) -> Fraction:
        if n not in self.exact_means:
            raise ValueError(f"no exact mean for n={n} (cutoff {self.exact_cutoff})")
        return self.exact_means[n]

    def residual(self, n: int) -> float:
        return 1.0 - self.cdf(n, self.j_max)

    def _check_n(self, n: int) -> None:
        if not 0 <= n <= self.max_n:
            raise ValueError(f"row {n} outside 0..{self.max_n}")

    def to_csv(self, path: str | Path, *, exact_path: str | Path | None = None) -> None:
        """Write ``n,j,prob`` rows; optionally the exact regime as
        ``n,j,numerator,denominator`` alongside."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "j", "prob"])
            for n in range(self.max_n + 1):
                for j in range(self.j_max + 1):
                    p = self.probs[n, j]
                    if p > 0.0:
                        writer.writerow([n, j, repr(float(p))])
        if exact_path is not None:
            with open(exact_path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["n", "j", "numerator", "denominator"])
                for n in sorted(self.exact_rows):
                    for j, p in enumerate(self.exact_rows[n]):
                        if p != 0:
                            writer.writerow([n, j, p.numerator, p.denominator])

    def means_to_csv(self, path: str | Path, *, alpha: Fraction | float | None = None) -> None:
        """Write ``n,x,log_alpha_n,phi_residual`` rows (log base 1/alpha)."""
        if alpha is None:
            alpha = self.model.declared_alpha
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "x", "log_alpha_n", "phi_residual"])
            for n in range(self.max_n + 1):
                x = float(self.means[n])
                if n >= 1 and alpha is not None:
                    ln = math.log(n) / math.log(1.0 / float(alpha))
                    writer.writerow([n, repr(x), repr(ln), repr(x - ln)])
                else:
                    writer.writerow([n, repr(x), "", ""])


def _validate_setup(model: SurvivorModel, max_n: int, a: int, init: InitConvention) -> None:
    if max_n < 1:
        raise ValueError(f"need max_n >= 1, got {max_n}")
    if a < 0:
        raise ValueError(f"need threshold >= 0, got {a}")
    if a == 0 and not model.can_reach_zero:
        raise ValueError(
            f"threshold 0 needs a chain that can reach 0; {model.name} cannot"
        )
    if a == 0 and init is InitConvention.ALT_COST:
        raise ValueError("altcost initialization needs threshold >= 1")


def compute_phase_table(
    model: SurvivorModel,
    max_n: int,
    threshold_a: int = 1,
    init: InitConvention = InitConvention.STANDARD,
    *,
    residual_eps: float = DEFAULT_RESIDUAL_EPS,
    exact_cutoff: int | None = None,
    j_cap: int = _J_CAP,
) -> PhaseTable:
    """Fill the phase-count table for all starting sizes up to ``max_n``.

    Columns are appended until every row is complete to ``residual_eps``.
    The recursive and the direct mean formulas are both evaluated and
    cross-checked before the table is returned.
    """
    _validate_setup(model, max_n, threshold_a, init)
    cutoff = model.exact_cutoff if exact_cutoff is None else exact_cutoff
    a = threshold_a
    zero_cost = _zero_cost(init)
    transient = range(a + 1, max_n + 1)
    exact_transient = [n for n in transient if n <= cutoff]

    # float transition data (all transient rows, exact region included)
    pmf_f: dict[int, dict[int, float]] = {}
    pmf_x: dict[int, dict[int, Fraction]] = {}
    for n in transient:
        if n <= cutoff:
            pmf_x[n] = model.pmf_exact(n)
            pmf_f[n] = {k: float(p) for k, p in pmf_x[n].items()}
        else:
            pmf_f[n] = model.pmf_float(n)

    size = max_n + 1
    data, cols, indptr = [], [], [0]
    b0 = np.zeros(size)
    b1 = np.zeros(size)
    for n in range(size):
        if n in pmf_f:
            for k, p in sorted(pmf_f[n].items()):
                if k > a:
                    cols.append(k)
                    data.append(p)
                elif k == 0 and zero_cost == 1:
                    b1[n] += p
                else:
                    b0[n] += p
        indptr.append(len(data))
    matrix = sparse.csr_matrix(
        (np.array(data), np.array(cols, dtype=np.int64), np.array(indptr)),
        shape=(size, size),
    )

    # exact transition data, restricted to transient targets
    x_rows: dict[int, list[tuple[int, Fraction]]] = {}
    b0_x: dict[int, Fraction] = {}
    b1_x: dict[int, Fraction] = {}
    for n in exact_transient:
        x_rows[n] = [(k, p) for k, p in sorted(pmf_x[n].items()) if k > a]
        b0_x[n] = sum(
            (p for k, p in pmf_x[n].items() if k <= a and not (k == 0 and zero_cost)),
            Fraction(0),
        )
        b1_x[n] = sum(
            (p for k, p in pmf_x[n].items() if k == 0 and zero_cost), Fraction(0)
        )

    # column 0: absorbing states with zero cost
    col = np.zeros(size)
    for k in range(0, min(a, max_n) + 1):
        if not (k == 0 and zero_cost):
            col[k] = 1.0
    col_x: dict[int, Fraction] = {}
    float_cols = [col]
    exact_cols: list[dict[int, Fraction]] = [col_x]
    exact_done = not exact_transient
    settled = col.copy()
    best_worst = math.inf
    stalled = 0

    while True:
        j = len(float_cols)
        if j > j_cap:
            raise RuntimeError(
                f"phase law did not absorb within {j_cap} columns for {model.name}"
            )
        prev = float_cols[-1]
        col = matrix @ prev
        col[: a + 1] = 0.0
        if j == 1:
            col += b0
        if j == 2:
            col += b1
        # exact column, overwriting the float mirror on the exact rows
        new_x: dict[int, Fraction] = {}
        if not exact_done:
            prev_x = exact_cols[-1]
            for n in exact_transient:
                total = Fraction(0)
                for k, p in x_rows[n]:
                    pk = prev_x.get(k)
                    if pk:
                        total += p * pk
                if j == 1:
                    total += b0_x[n]
                if j == 2:
                    total += b1_x[n]
                if total:
                    new_x[n] = total
                    col[n] = float(total)
                else:
                    col[n] = 0.0
            if not new_x:
                exact_done = True
        exact_cols.append(new_x)
        float_cols.append(col)

        settled = settled + col
        worst = (1.0 - settled[a + 1 :]).max() if max_n > a else 0.0
        if worst < residual_eps:
            break
        # pmf tails truncated by a floating backend can floor the residual
        # above eps; accept once progress stops and the rows are complete
        # to the contractual 1e-9
        if worst < 0.99 * best_worst:
            best_worst, stalled = worst, 0
        else:
            stalled += 1
            if stalled >= 100 and worst < 1e-9:
                break

    probs = np.column_stack(float_cols)
    j_max = probs.shape[1] - 1
    # absorbing rows are point masses
    for k in range(0, min(a, max_n) + 1):
        probs[k, :] = 0.0
        probs[k, zero_cost if k == 0 else 0] = 1.0
    cum = np.cumsum(probs, axis=1)

    exact_rows: dict[int, tuple[Fraction, ...]] = {}
    for n in range(0, min(max_n, cutoff) + 1):
        if n <= a:
            row = [Fraction(0)] * (j_max + 1)
            row[zero_cost if n == 0 else 0] = Fraction(1)
        else:
            row = [column.get(n, Fraction(0)) for column in exact_cols]
        exact_rows[n] = tuple(row)

    means_rec, exact_means = _recursive_means(
        model, max_n, a, zero_cost, cutoff, pmf_x, pmf_f
    )
    means_direct = probs @ np.arange(j_max + 1, dtype=float)
    mean_gap = float(np.max(np.abs(means_rec - means_direct)))
    table = PhaseTable(
        model=model,
        max_n=max_n,
        threshold_a=a,
        init=init,
        exact_cutoff=cutoff,
        residual_eps=residual_eps,
        j_max=j_max,
        probs=probs,
        cum=cum,
        exact_rows=exact_rows,
        means=means_rec,
        means_direct=means_direct,
        exact_means=exact_means,
        mean_gap=mean_gap,
    )
    mean_phases(table)  # enforce the two-formula agreement contract
    return table


def _recursive_means(
    model: SurvivorModel,
    max_n: int,
    a: int,
    zero_cost: int,
    cutoff: int,
    pmf_x: dict[int, dict[int, Fraction]],
    pmf_f: dict[int, dict[int, float]],
) -> tuple[np.ndarray, dict[int, Fraction]]:
    """means via x(n) = 1 + sum_k P(n,k) x(k), solving the k = n self-loop."""
    means = np.zeros(max_n + 1)
    exact_means: dict[int, Fraction] = {}
    for k in range(0, min(a, max_n) + 1):
        value = Fraction(zero_cost if k == 0 else 0)
        exact_means[k] = value
        means[k] = float(value)
    for n in range(a + 1, max_n + 1):
        if n <= cutoff:
            acc = Fraction(1)
            self_mass = Fraction(0)
            for k, p in pmf_x[n].items():
                if k == n:
                    self_mass = p
                else:
                    acc += p * exact_means[k]
            value = acc / (1 - self_mass)
            exact_means[n] = value
            means[n] = float(value)
        else:
            acc = 1.0
            self_mass = 0.0
            for k, p in pmf_f[n].items():
                if k == n:
                    self_mass = p
                else:
                    acc += p * means[k]
            means[n] = acc / (1.0 - self_mass)
    return means, exact_means


@dataclass(frozen=True)
class MeanSeries:
    """The two mean formulas side by side."""

    recursive: np.ndarray
    direct: np.ndarray
    max_gap: float


def mean_phases(table: PhaseTable, *, tol: float | None = None) -> MeanSeries:
    """Expected phase counts, checked two ways.

    The recursive form is exact (rational below the cutoff); the direct
    form sums the computed law and carries the column-truncation error.
    A gap beyond ``tol`` means the table is inconsistent and is an error.
    """
    if tol is None:
        tol = max(1e-10, table.residual_eps * (table.j_max + 20))
    if table.mean_gap > tol:
        raise ValueError(
            f"mean formulas disagree by {table.mean_gap:.3e} (tolerance {tol:.1e})"
        )
    return MeanSeries(
        recursive=table.means.copy(),
        direct=table.means_direct.copy(),
        max_gap=table.mean_gap,
    )


@dataclass
class EndingStateTable:
    """Probability of finishing with exactly i players, i = 1..threshold.

    A wiped-out game (state 0) counts as finishing with one player: the
    forced random pick leaves a single leader.
    """

    model: SurvivorModel
    max_n: int
    threshold_a: int
    probs: np.ndarray
    exact: dict[int, tuple[Fraction, ...]]

    def prob(self, n: int, i: int) -> float:
        if not 1 <= i <= self.threshold_a:
            raise ValueError(f"ending state {i} outside 1..{self.threshold_a}")
        return float(self.probs[n, i])

    def exact_prob(self, n: int, i: int) -> Fraction:
        if n not in self.exact:
            raise ValueError(f"no exact row for n={n}")
        return self.exact[n][i]


def ending_state_probs(
    model: SurvivorModel,
    max_n: int,
    threshold_a: int,
    *,
    exact_cutoff: int | None = None,
) -> EndingStateTable:
    """Where the stopped chain lands, for every start below ``max_n``."""
    if threshold_a < 1:
        raise ValueError("ending-state analysis needs threshold >= 1")
    _validate_setup(model, max_n, threshold_a, InitConvention.STANDARD)
    cutoff = model.exact_cutoff if exact_cutoff is None else exact_cutoff
    a = threshold_a
    probs = np.zeros((max_n + 1, a + 1))
    exact: dict[int, tuple[Fraction, ...]] = {}

    def fixed_row(state: int) -> list[Fraction]:
        row = [Fraction(0)] * (a + 1)
        row[1 if state == 0 else state] = Fraction(1)
        return row

    exact_rows: dict[int, list[Fraction]] = {}
    for k in range(0, min(a, max_n) + 1):
        exact_rows[k] = fixed_row(k)
        probs[k] = [float(v) for v in exact_rows[k]]
        exact[k] = tuple(exact_rows[k])
    for n in range(a + 1, max_n + 1):
        if n <= cutoff:
            acc = [Fraction(0)] * (a + 1)
            self_mass = Fraction(0)
            for k, p in model.pmf_exact(n).items():
                if k == n:
                    self_mass = p
                    continue
                source = exact_rows[k] if k in exact_rows else None
                if source is None:
                    raise AssertionError("transition above current state")
                for i in range(a + 1):
                    if source[i]:
                        acc[i] += p * source[i]
            scale = 1 - self_mass
            row = [v / scale for v in acc]
            exact_rows[n] = row
            exact[n] = tuple(row)
            probs[n] = [float(v) for v in row]
        else:
            acc = np.zeros(a + 1)
            self_mass = 0.0
            for k, p in model.pmf_float(n).items():
                if k == n:
                    self_mass = p
                elif k == 0:
                    acc[1] += p
                else:
                    acc += p * probs[k]
            probs[n] = acc / (1.0 - self_mass)
    return EndingStateTable(
        model=model, max_n=max_n, threshold_a=a, probs=probs, exact=exact
    )


def passage_probs(
    model: SurvivorModel, n: int, states: list[int], **kwargs
) -> dict[int, float]:
    """Probability that some round has exactly i survivors.

    Realized by stopping the chain at threshold i: the stopped chain ends
    at i exactly when the free chain passes through i.
    """
    out = {}
    for i in states:
        table = ending_state_probs(model, n, threshold_a=i, **kwargs)
        out[i] = table.prob(n, i)
    return out


@dataclass
class Occupancy:
    """Expected visit counts Q per state, from one fixed start.

    For a strictly decreasing chain Q(k) is the probability that some
    round starts with exactly k players; below the threshold it is the
    probability of ending there (state 0 kept separate from state 1).
    ``mean_recovered`` re-derives the expected phase count as the total
    time spent in transient states.
    """

    start_n: int
    threshold_a: int
    visits: dict[int, Fraction] | dict[int, float]
    rounds: list[dict[int, Fraction]] | list[dict[int, float]]
    mean_recovered: Fraction | float


def occupancy_probs(
    model: SurvivorModel,
    start_n: int,
    threshold_a: int = 1,
    *,
    exact_cutoff: int | None = None,
    mass_eps: float = 1e-14,
    j_cap: int = _J_CAP,
) -> Occupancy:
    """Forward state-occupancy propagation from one starting size."""
    _validate_setup(model, start_n, threshold_a, InitConvention.STANDARD)
    cutoff = model.exact_cutoff if exact_cutoff is None else exact_cutoff
    a = threshold_a
    use_exact = start_n <= cutoff
    one = Fraction(1) if use_exact else 1.0
    pmf = model.pmf_exact if use_exact else model.pmf_float

    current: dict[int, Fraction | float] = {start_n: one}
    visits: dict[int, Fraction | float] = {start_n: one}
    rounds = [dict(current)]
    while current:
        if len(rounds) > j_cap:
            raise RuntimeError(f"occupancy propagation exceeded {j_cap} rounds")
        nxt: dict[int, Fraction | float] = {}
        for state, mass in current.items():
            for k, p in pmf(state).items():
                flow = mass * p
                if not flow:
                    continue
                visits[k] = visits.get(k, 0 * one) + flow
                if k > a:
                    nxt[k] = nxt.get(k, 0 * one) + flow
        current = {k: v for k, v in nxt.items() if float(v) >= mass_eps or v == 0}
        current = {k: v for k, v in current.items() if v != 0}
        if current:
            rounds.append(dict(current))
        total = sum(float(v) for v in current.values())
        if total < mass_eps:
            break
    mean_recovered = sum(
        (v for k, v in visits.items() if k > a), 0 * one
    )
    return Occupancy(
        start_n=start_n,
        threshold_a=a,
        visits=visits,
        rounds=rounds,
        mean_recovered=mean_recovered,
    )
