"""Null distribution models and the shared randomness contract.

Each model knows its cumulative distribution function F, the left limit
F(x-), point masses, and the generalized inverse

    N(omega) = sup{y : F(y) < omega},  omega in (0, 1),

used for inverse-transform sampling.  N satisfies F(N(omega)) >= omega and
F(z) > omega implies z > N(omega).  Survival counterparts (``sf``,
``sf_left``) are first class so tail quantities close to 1 keep full
relative precision instead of dying in 1 - cdf cancellation.

All numeric methods accept scalars or arrays and mirror the numpy ufunc
convention: scalar in, float out.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, ClassVar, Sequence

import numpy as np
from scipy import special, stats

from .errors import DomainError, ParameterError

__all__ = [
    "RandomStream",
    "NullDistribution",
    "Poisson",
    "Binomial",
    "Uniform01",
    "TabulatedDiscrete",
    "ContinuousByCdf",
]

# Widest truncation used when a full-support discrete model must be reduced
# to a finite table (tail mass below this is ignored by table builders).
TABLE_TAIL = 1e-16

_QUANTILE_MAX_STEPS = 1000


class RandomStream:
    """Deterministic, seedable source of uniforms on the open interval (0, 1).

    Wraps a 64-bit-seeded PCG64 generator.  A stream has a single owner:
    share the stream object itself, never the underlying generator, and use
    :meth:`spawn` to derive independent child streams for parallel work
    instead of reusing one seed.
    """

    def __init__(self, seed: int | tuple | np.random.SeedSequence):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            try:
                self._seq = np.random.SeedSequence(seed)
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"invalid seed: {seed!r}") from exc
        self._gen = np.random.Generator(np.random.PCG64(self._seq))

    def uniform_open(self, size: int | tuple | None = None):
        """Draw uniforms strictly inside (0, 1); scalar when size is None."""
        if size is None:
            u = self._gen.random()
            while u == 0.0:
                u = self._gen.random()
            return u
        u = self._gen.random(size)
        mask = u == 0.0
        while mask.any():
            u[mask] = self._gen.random(int(mask.sum()))
            mask = u == 0.0
        return u

    def spawn(self, n: int) -> list["RandomStream"]:
        """Derive n independent child streams (seed splitting)."""
        return [RandomStream(child) for child in self._seq.spawn(n)]


def _ret(x, values):
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(x) == 0:
        return float(values)
    return np.asarray(values, dtype=float)


def _check_open_unit(omega) -> np.ndarray:
    om = np.asarray(omega, dtype=float)
    if not np.all((om > 0.0) & (om < 1.0)):
        raise DomainError("omega must lie strictly inside (0, 1)")
    return om


def _check_finite(x) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("evaluation point must be finite")
    return xa


class NullDistribution(ABC):
    """One panel cell's model under the null hypothesis."""

    continuous: ClassVar[bool] = False

    @abstractmethod
    def cdf(self, x):
        """F(x) = P(X <= x)."""

    @abstractmethod
    def sf(self, x):
        """P(X > x) = 1 - cdf(x), computed without cancellation."""

    @abstractmethod
    def cdf_left(self, x):
        """Left limit F(x-) = P(X < x)."""

    @abstractmethod
    def sf_left(self, x):
        """P(X >= x) = 1 - cdf_left(x), computed without cancellation."""

    @abstractmethod
    def mass(self, x):
        """Point mass P(X = x); zero everywhere for continuous models."""

    @abstractmethod
    def skorokhod_quantile(self, omega):
        """Generalized inverse N(omega) = sup{y : F(y) < omega}."""

    def sample(self, stream: RandomStream, size: int | tuple | None = None):
        """Inverse-transform sampling: N(U) with U from the stream."""
        return self.skorokhod_quantile(stream.uniform_open(size))


class _IntegerSupport(NullDistribution):
    """Shared left-limit plumbing for models supported on 0, 1, 2, ..."""

    def cdf_left(self, x):
        # F(x-) = F(ceil(x) - 1): steps down only at integer support points.
        return self.cdf(np.ceil(_check_finite(x)) - 1.0)

    def sf_left(self, x):
        return self.sf(np.ceil(_check_finite(x)) - 1.0)

    def _ppf_start(self, om: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _upper_limit(self) -> float:
        return np.inf

    def skorokhod_quantile(self, omega):
        om = _check_open_unit(omega)
        oma = np.atleast_1d(om)
        k = np.clip(self._ppf_start(oma), 0.0, self._upper_limit())
        # Library inverses can be off by a step at bracket boundaries;
        # correct against the sup definition exactly.
        for _ in range(_QUANTILE_MAX_STEPS):
            down = (k > 0) & (self.cdf(k - 1.0) >= oma)
            up = ~down & (self.cdf(k) < oma) & (k < self._upper_limit())
            if not np.any(down | up):
                break
            k = np.where(down, k - 1.0, np.where(up, k + 1.0, k))
        else:  # pragma: no cover
            raise RuntimeError("quantile correction did not converge")
        return _ret(omega, k if np.ndim(omega) else k[0])


@dataclass(frozen=True)
class Poisson(_IntegerSupport):
    """Poisson model with positive mean."""

    mean: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and self.mean > 0.0):
            raise ParameterError(f"Poisson mean must be finite and positive, got {self.mean!r}")

    def cdf(self, x):
        k = np.floor(_check_finite(x))
        vals = special.gammaincc(np.maximum(k, 0.0) + 1.0, self.mean)
        return _ret(x, np.where(k < 0.0, 0.0, vals))

    def sf(self, x):
        k = np.floor(_check_finite(x))
        vals = special.gammainc(np.maximum(k, 0.0) + 1.0, self.mean)
        return _ret(x, np.where(k < 0.0, 1.0, vals))

    def mass(self, x):
        xa = _check_finite(x)
        on = (xa >= 0.0) & (np.floor(xa) == xa)
        k = np.where(on, xa, 0.0)
        logp = k * np.log(self.mean) - self.mean - special.gammaln(k + 1.0)
        return _ret(x, np.where(on, np.exp(logp), 0.0))

    def _ppf_start(self, om):
        return np.asarray(stats.poisson.ppf(om, self.mean), dtype=float)


@dataclass(frozen=True)
class Binomial(_IntegerSupport):
    """Binomial model on {0, ..., trials}."""

    trials: int
    success_prob: float

    def __post_init__(self):
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 0):
            raise ParameterError(f"trials must be a non-negative integer, got {self.trials!r}")
        if not (np.isfinite(self.success_prob) and 0.0 <= self.success_prob <= 1.0):
            raise ParameterError(f"success_prob must lie in [0, 1], got {self.success_prob!r}")

    def cdf(self, x):
        k = np.floor(_check_finite(x))
        return _ret(x, stats.binom.cdf(k, self.trials, self.success_prob))

    def sf(self, x):
        k = np.floor(_check_finite(x))
        return _ret(x, stats.binom.sf(k, self.trials, self.success_prob))

    def mass(self, x):
        return _ret(x, stats.binom.pmf(_check_finite(x), self.trials, self.success_prob))

    def _ppf_start(self, om):
        return np.asarray(stats.binom.ppf(om, self.trials, self.success_prob), dtype=float)

    def _upper_limit(self) -> float:
        return float(self.trials)


@dataclass(frozen=True)
class Uniform01(NullDistribution):
    """Standard uniform model on [0, 1]."""

    continuous: ClassVar[bool] = True

    def cdf(self, x):
        return _ret(x, np.clip(_check_finite(x), 0.0, 1.0))

    def sf(self, x):
        return _ret(x, 1.0 - np.clip(_check_finite(x), 0.0, 1.0))

    def cdf_left(self, x):
        return self.cdf(x)

    def sf_left(self, x):
        return self.sf(x)

    def mass(self, x):
        return _ret(x, np.zeros_like(_check_finite(x)))

    def skorokhod_quantile(self, omega):
        om = _check_open_unit(omega)
        return _ret(omega, om)


@dataclass(frozen=True)
class TabulatedDiscrete(NullDistribution):
    """Finite discrete model given by explicit support points and masses."""

    support: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if sup.ndim != 1 or m.ndim != 1 or sup.size != m.size or sup.size == 0:
            raise ParameterError("support and masses must be 1-d, non-empty, equal length")
        if not np.all(np.isfinite(sup)) or not np.all(np.diff(sup) > 0.0):
            raise ParameterError("support must be finite and strictly increasing")
        if not np.all(m > 0.0):
            raise ParameterError("all masses must be strictly positive")
        if abs(float(m.sum()) - 1.0) > 1e-12:
            raise ParameterError(f"masses must sum to 1 within 1e-12, got {float(m.sum())!r}")
        object.__setattr__(self, "support", tuple(float(v) for v in sup))
        object.__setattr__(self, "masses", tuple(float(v) for v in m))
        object.__setattr__(self, "_sup", sup)
        object.__setattr__(self, "_m", m)
        # cum[i] = mass at or below point i; tail[i] = mass at or above point i
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(m)]))
        object.__setattr__(self, "_tail", np.concatenate([np.cumsum(m[::-1])[::-1], [0.0]]))

    def cdf(self, x):
        idx = np.searchsorted(self._sup, _check_finite(x), side="right")
        return _ret(x, self._cum[idx])

    def sf(self, x):
        idx = np.searchsorted(self._sup, _check_finite(x), side="right")
        return _ret(x, self._tail[idx])

    def cdf_left(self, x):
        idx = np.searchsorted(self._sup, _check_finite(x), side="left")
        return _ret(x, self._cum[idx])

    def sf_left(self, x):
        idx = np.searchsorted(self._sup, _check_finite(x), side="left")
        return _ret(x, self._tail[idx])

    def mass(self, x):
        xa = _check_finite(x)
        idx = np.searchsorted(self._sup, xa, side="left")
        idx_c = np.minimum(idx, self._sup.size - 1)
        hit = self._sup[idx_c] == xa
        return _ret(x, np.where(hit, self._m[idx_c], 0.0))

    def skorokhod_quantile(self, omega):
        om = _check_open_unit(omega)
        idx = np.searchsorted(self._cum[1:], om, side="left")
        idx = np.minimum(idx, self._sup.size - 1)
        return _ret(omega, self._sup[idx])


@dataclass(frozen=True)
class ContinuousByCdf(NullDistribution):
    """Continuous model defined by a CDF callable on [lower, upper].

    The callable must be a genuine CDF reaching 0 at ``lower`` and 1 at
    ``upper``; this is checked on a probe grid at construction.
    """

    cdf_fn: Callable
    lower: float = 0.0
    upper: float = 1.0

    continuous: ClassVar[bool] = True

    _PROBE_POINTS = 257

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper) and self.lower < self.upper):
            raise ParameterError("need finite lower < upper")
        fn = self.cdf_fn
        xs = np.linspace(self.lower, self.upper, self._PROBE_POINTS)
        try:
            vals = np.asarray(fn(xs), dtype=float)
            if vals.shape != xs.shape:
                raise TypeError
        except Exception:
            fn = np.vectorize(self.cdf_fn, otypes=[float])
            vals = np.asarray(fn(xs), dtype=float)
        object.__setattr__(self, "_fn", fn)
        if not np.all(np.isfinite(vals)):
            raise ParameterError("cdf callable returned non-finite values on the probe grid")
        if np.any(np.diff(vals) < -1e-12):
            raise ParameterError("cdf callable is decreasing on the probe grid")
        if not (vals[0] <= 1e-9 and vals[-1] >= 1.0 - 1e-9):
            raise ParameterError("cdf callable must reach 0 at lower and 1 at upper")

    def cdf(self, x):
        xa = np.clip(_check_finite(x), self.lower, self.upper)
        return _ret(x, np.clip(np.asarray(self._fn(xa), dtype=float), 0.0, 1.0))

    def sf(self, x):
        return _ret(x, 1.0 - np.asarray(self.cdf(x)))

    def cdf_left(self, x):
        return self.cdf(x)

    def sf_left(self, x):
        return self.sf(x)

    def mass(self, x):
        return _ret(x, np.zeros_like(_check_finite(x)))

    def skorokhod_quantile(self, omega):
        om = _check_open_unit(omega)
        oma = np.atleast_1d(om)
        lo = np.full(oma.shape, self.lower)
        hi = np.full(oma.shape, self.upper)
        # Bisect to an interval of width 1e-12, keeping F(hi) >= omega.
        span = self.upper - self.lower
        steps = min(120, int(np.ceil(np.log2(max(span, 1e-12) / 1e-12))) + 2)
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.cdf(mid)) < oma
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return _ret(omega, hi if np.ndim(omega) else hi[0])


def integer_cdf_table(dist: NullDistribution, tail: float = TABLE_TAIL) -> np.ndarray:
    """CDF values F(0..K) with P(X > K) <= tail, for integer-supported models.

    Used by the Monte Carlo harness: searchsorted on this table is exactly
    the Skorokhod inverse restricted to integer support.
    """
    if isinstance(dist, Binomial):
        k_max = dist.trials
    elif isinstance(dist, Poisson):
        k_max = int(np.ceil(dist.mean + 20.0 * np.sqrt(dist.mean) + 40.0))
        while dist.sf(float(k_max)) > tail:  # rare for extreme tails
            k_max = 2 * k_max + 10
    else:
        raise ParameterError(f"no integer table for {type(dist).__name__}")
    return np.asarray(dist.cdf(np.arange(0, k_max + 1, dtype=float)))
