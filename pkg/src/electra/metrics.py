"""Distances between integer laws, empirical limit extraction, and the
numerical Laplace/Fourier machinery for log-periodic residuals.

The centering throughout is x = j - log(n)/log(1/alpha): as n grows the
phase law collapses (in the appropriate sense) onto a fixed profile in x,
up to a periodic drift.  This module measures that collapse, rebuilds the
periodic mean residual from a numerically estimated Laplace transform,
and carries the closed forms available for the halving toy chain and the
fair-coin game.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

from .engine import PhaseTable

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# integer laws and metrics


@dataclass(frozen=True)
class IntegerLaw:
    """A probability law on the integers: mass ``probs[i]`` at offset+i."""

    offset: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a nonempty vector")
        if probs.min() < -1e-15:
            raise ValueError("negative probability mass")
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"law mass {total} differs from 1 beyond 1e-10")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, masses: dict[int, float]) -> "IntegerLaw":
        lo, hi = min(masses), max(masses)
        probs = np.zeros(hi - lo + 1)
        for k, p in masses.items():
            probs[k - lo] = p
        return cls(offset=lo, probs=probs)

    @classmethod
    def point_mass(cls, k: int) -> "IntegerLaw":
        return cls(offset=k, probs=np.array([1.0]))

    @property
    def hi(self) -> int:
        return self.offset + len(self.probs) - 1

    def prob(self, k: int) -> float:
        if self.offset <= k <= self.hi:
            return float(self.probs[k - self.offset])
        return 0.0

    def cdf(self, k: int) -> float:
        if k < self.offset:
            return 0.0
        if k >= self.hi:
            return 1.0
        return float(self.probs[: k - self.offset + 1].sum())

    def mean(self) -> float:
        ks = np.arange(self.offset, self.hi + 1)
        return float(np.dot(ks, self.probs))

    def shift(self, by: int) -> "IntegerLaw":
        return IntegerLaw(offset=self.offset + by, probs=self.probs.copy())


def _aligned(a: IntegerLaw, b: IntegerLaw) -> tuple[np.ndarray, np.ndarray]:
    lo = min(a.offset, b.offset)
    hi = max(a.hi, b.hi)
    pa = np.zeros(hi - lo + 1)
    pb = np.zeros(hi - lo + 1)
    pa[a.offset - lo : a.offset - lo + len(a.probs)] = a.probs
    pb[b.offset - lo : b.offset - lo + len(b.probs)] = b.probs
    return pa, pb


def dtv(a: IntegerLaw, b: IntegerLaw) -> float:
    """Total variation distance: half the l1 gap between the pmfs."""
    pa, pb = _aligned(a, b)
    return 0.5 * float(np.abs(pa - pb).sum())


def dw(a: IntegerLaw, b: IntegerLaw) -> float:
    """Wasserstein (Kantorovich) distance between integer laws.

    For integer laws this equals the l1 gap between the cdfs, and always
    dominates :func:`dtv`.
    """
    pa, pb = _aligned(a, b)
    return float(np.abs(np.cumsum(pa - pb)[:-1]).sum()) if len(pa) > 1 else 0.0


def law_from_phase(table: PhaseTable, n: int) -> IntegerLaw:
    """Phase law of one starting size as an integer law (trimmed)."""
    row = table.row(n)
    nz = np.nonzero(row > 0.0)[0]
    if len(nz) == 0:
        raise ValueError(f"row {n} is empty")
    lo, hi = int(nz[0]), int(nz[-1])
    probs = row[lo : hi + 1].copy()
    probs /= probs.sum()
    return IntegerLaw(offset=lo, probs=probs)


def ceil_shift_law(cdf, shift: float, *, tail: float = 1e-13) -> IntegerLaw:
    """Law of ceil(Z + shift) when Z has distribution function ``cdf``.

    P(ceil(Z + shift) = k) = cdf(k - shift) - cdf(k - 1 - shift); the
    support is scanned outward until both tails fall below ``tail``.
    """
    center = int(math.floor(shift))
    lo = center
    while cdf(lo - 1 - shift) > tail:
        lo -= 1
        if center - lo > 10_000:
            raise ValueError("left tail does not vanish")
    hi = center
    while 1.0 - cdf(hi - shift) > tail:
        hi += 1
        if hi - center > 10_000:
            raise ValueError("right tail does not vanish")
    ks = np.arange(lo, hi + 1)
    upper = np.array([cdf(k - shift) for k in ks])
    lower = np.array([cdf(k - 1 - shift) for k in ks])
    probs = np.clip(upper - lower, 0.0, None)
    probs /= probs.sum()
    return IntegerLaw(offset=lo, probs=probs)


# ---------------------------------------------------------------------------
# empirical limit scatter


def _log_base(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"need survival ratio alpha in (0,1), got {alpha}")
    return math.log(1.0 / alpha)


@dataclass(frozen=True)
class LimitScatter:
    """Scatter {(j - log n, cumulative prob)} approximating the limit cdf."""

    xs: np.ndarray
    ys: np.ndarray
    ns: np.ndarray
    js: np.ndarray

    def collapse_spread(self, *, window: float = 0.05, top_half: bool = True) -> float:
        """Worst vertical drop between nearly-equal x values.

        For samples i, m with x_i <= x_m <= x_i + window a collapse onto a
        nondecreasing limit demands y_i <= y_m; the spread is the largest
        violation.  Zero for an exact collapse, strictly positive when the
        limit is genuinely non-monotone.
        """
        xs, ys = self.xs, self.ys
        if top_half:
            n_cut = (self.ns.min() + self.ns.max()) / 2.0
            keep = self.ns >= n_cut
            xs, ys = xs[keep], ys[keep]
        worst = 0.0
        start = 0
        for i in range(len(xs)):
            while xs[start] < xs[i] - window:
                start += 1
            ahead = ys[start:i]
            if len(ahead):
                worst = max(worst, float(ahead.max() - ys[i]))
        return worst

    def monotone_violations(self, *, window: float = 0.05, tol: float = 1e-9) -> int:
        """Count of sample pairs within ``window`` in x that step downward."""
        count = 0
        start = 0
        for i in range(len(self.xs)):
            while self.xs[start] < self.xs[i] - window:
                start += 1
            ahead = self.ys[start:i]
            count += int(np.sum(ahead > self.ys[i] + tol))
        return count

    def sup_gap_to(self, cdf) -> float:
        """sup over samples of |observed - cdf(x)|."""
        ref = np.array([cdf(x) for x in self.xs])
        return float(np.abs(self.ys - ref).max())


def empirical_limit(
    table: PhaseTable,
    alpha: float,
    n_lo: int,
    n_hi: int,
    *,
    drop_tail: float = 1e-12,
) -> LimitScatter:
    """Collect the scatter of cumulative phase probabilities against
    x = j - log(n)/log(1/alpha) for n in [n_lo, n_hi]."""
    if n_lo > n_hi:
        raise ValueError("empty n range")
    if n_hi > table.max_n:
        raise ValueError(f"table covers n <= {table.max_n}, asked for {n_hi}")
    base = _log_base(float(alpha))
    xs, ys, ns, js = [], [], [], []
    for n in range(max(n_lo, 1), n_hi + 1):
        ln = math.log(n) / base
        cum = table.cdf_row(n)
        for j in range(table.j_max + 1):
            y = float(cum[j])
            saturated = j > 0 and cum[j - 1] > 1.0 - drop_tail
            if y < drop_tail or saturated:
                continue
            xs.append(j - ln)
            ys.append(y)
            ns.append(n)
            js.append(j)
    order = np.argsort(xs, kind="stable")
    return LimitScatter(
        xs=np.asarray(xs)[order],
        ys=np.asarray(ys)[order],
        ns=np.asarray(ns)[order],
        js=np.asarray(js)[order],
    )


# ---------------------------------------------------------------------------
# numerical Laplace transform and periodic reconstruction


@dataclass(frozen=True)
class PeriodicitySamples:
    """Sorted point masses (y, mass) feeding the Laplace quadrature.

    Duplicate y values are merged by averaging their masses: a run of
    tied samples fed through the trapezoid-style weights collapses to a
    single point carrying their common mass, so averaging is the
    tie-stable equivalent (summing would overweight ties, which the
    ``laplace_transform(.., 0) ~ 1`` self-calibration catches).
    """

    ys: np.ndarray
    masses: np.ndarray

    def __len__(self) -> int:
        return len(self.ys)


def periodicity_samples(
    table: PhaseTable,
    alpha: float,
    n_lo: int,
    n_hi: int,
    *,
    min_mass: float = 0.0,
) -> PeriodicitySamples:
    """Point masses of the phase law against x = j - log n, pooled over n."""
    if n_hi > table.max_n:
        raise ValueError(f"table covers n <= {table.max_n}, asked for {n_hi}")
    base = _log_base(float(alpha))
    pool: dict[float, list[float]] = {}
    for n in range(max(n_lo, 1), n_hi + 1):
        ln = math.log(n) / base
        row = table.row(n)
        for j in range(table.j_max + 1):
            mass = float(row[j])
            if mass > min_mass:
                pool.setdefault(j - ln, []).append(mass)
    ys = np.array(sorted(pool))
    masses = np.array([sum(pool[y]) / len(pool[y]) for y in ys])
    return PeriodicitySamples(ys=ys, masses=masses)


def laplace_transform(samples: PeriodicitySamples, alpha: complex) -> complex:
    """Quadrature estimate of the Laplace transform of the pooled law.

    Interior weights are (y[k+1] - y[k-1])/2; the two boundary weights use
    the one-sided gaps.  At alpha = 0 this returns the quadrature's total
    mass, which should sit within a couple of percent of 1 - the standard
    self-calibration check.
    """
    if len(samples) < 3:
        raise ValueError("need at least 3 samples for the quadrature")
    ys, masses = samples.ys, samples.masses
    weights = np.empty_like(ys)
    weights[1:-1] = (ys[2:] - ys[:-2]) / 2.0
    weights[0] = ys[1] - ys[0]
    weights[-1] = ys[-1] - ys[-2]
    values = np.exp(alpha * ys) * masses * weights
    return complex(values.sum())


@dataclass(frozen=True)
class PeriodicityFit:
    """Mean level and periodic oscillation recovered from the transform.

    ``reconstruction(x)`` approximates the mean phase count minus
    log(n)/log(1/alpha) at x = fractional position of log n; it has
    period 1 by construction.
    """

    mean_level: float
    coefficients: dict[int, complex]
    fourier_terms: int
    step: float

    def oscillation(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for l, coef in self.coefficients.items():
            total = total + 2.0 * (
                coef.real * np.cos(_TWO_PI * l * x) - coef.imag * np.sin(_TWO_PI * l * x)
            )
        return total if total.shape else float(total)

    def reconstruction(self, x) -> np.ndarray | float:
        return self.mean_level + self.oscillation(x)


def periodicity_reconstruct(
    samples: PeriodicitySamples, fourier_terms: int = 5, *, step: float = 1e-4
) -> PeriodicityFit:
    """Recover the periodic mean residual from the numerical transform.

    The constant is the transform's derivative at 0; the l-th Fourier
    coefficient is its derivative at 2*pi*l*i.  Derivatives are taken by
    central differences with the given real step.
    """
    if fourier_terms < 1:
        raise ValueError("need at least one Fourier term")

    def derivative(at: complex) -> complex:
        return (
            laplace_transform(samples, at + step)
            - laplace_transform(samples, at - step)
        ) / (2.0 * step)

    mean_level = derivative(0.0).real
    coefficients = {
        l: derivative(complex(0.0, _TWO_PI * l)) for l in range(1, fourier_terms + 1)
    }
    return PeriodicityFit(
        mean_level=mean_level,
        coefficients=coefficients,
        fourier_terms=fourier_terms,
        step=step,
    )


# ---------------------------------------------------------------------------
# closed forms: fair-coin game


def fair_coin_limit_cdf(x) -> np.ndarray | float:
    """Limit distribution of the centered fair-coin phase count:
    F(x) = 2^-x / (exp(2^-x) - 1)."""
    x = np.asarray(x, dtype=float)
    u = np.exp2(-x)
    small = u < 1e-8
    large = u > 500.0
    mid = ~(small | large)
    out = np.empty_like(u)
    out[small] = 1.0 - u[small] / 2.0  # u/expm1(u) expanded
    out[mid] = u[mid] / np.expm1(u[mid])
    out[large] = u[large] * np.exp(-u[large])
    return out if out.shape else float(out)


@functools.lru_cache(maxsize=None)
def _fair_coin_terms(terms: int) -> tuple[complex, ...]:
    import mpmath

    out = []
    for k in range(1, terms + 1):
        chi = 2.0j * math.pi * k / math.log(2.0)
        value = mpmath.zeta(1 - chi) * mpmath.gamma(1 - chi)
        out.append(complex(value))
    return tuple(out)


def fair_coin_phi(t: float, terms: int = 20) -> float:
    """Periodic mean residual of the fair-coin game.

    phi(t) = 1/2 - (1/log 2) * sum_{k != 0} zeta(1-chi_k) gamma(1-chi_k)
    e^{2 pi i k log2 t}, chi_k = 2 pi i k / log 2, truncated to |k| <=
    ``terms``.  Gamma decay makes the series converge extremely fast;
    zeta/gamma at complex arguments come from mpmath.
    """
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    log2t = math.log2(t)
    total = 0.0
    for k, coef in enumerate(_fair_coin_terms(terms), start=1):
        phase = cmath.exp(2.0j * math.pi * k * log2t)
        total += 2.0 * (coef * phase).real
    return 0.5 - total / math.log(2.0)


# ---------------------------------------------------------------------------
# closed forms: halving toy chain


def toy_limit_cdf(x) -> np.ndarray | float:
    """Limit cdf of the toy halving chain: 2 - 2^-x on [-1, 0]."""
    x = np.asarray(x, dtype=float)
    out = np.clip(2.0 - np.exp2(-x), 0.0, 1.0)
    return out if out.shape else float(out)


def toy_phi(x: float) -> float:
    """Periodic mean residual of the toy chain at log2 n = x:
    2^{x - floor x} - (x - floor x) - 1."""
    frac = x - math.floor(x)
    return 2.0**frac - frac - 1.0


def toy_end_two_prob(x: float) -> float:
    """Probability the toy chain stopped at threshold 3 ends with exactly
    two players, at log2 n = x: |2^{1 + x - floor x} - 3|."""
    frac = x - math.floor(x)
    return abs(2.0 ** (1.0 + frac) - 3.0)


@dataclass(frozen=True)
class ToyClosedForms:
    cdf_value: float
    mean_residual: float
    end_two_prob: float


def toy_closed_forms(x: float) -> ToyClosedForms:
    """All three toy closed forms at once: the limit cdf at x, and the
    periodic mean residual / end-with-two probability at log2 n = x."""
    return ToyClosedForms(
        cdf_value=float(toy_limit_cdf(x)),
        mean_residual=toy_phi(x),
        end_two_prob=toy_end_two_prob(x),
    )
