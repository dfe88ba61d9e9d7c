"""Measurement sampling and labeled data generation.

Labels are exact: ``Y_i = <T, X_i^{ell}>`` with no noise channel.  Rows of
the sample matrix are i.i.d. with i.i.d. entries from one of the built-in
scalar laws; the whole dataset is a pure function of (spec, seed) through
a counter-based substream, so repeated generation is bit-reproducible.

Parameterization of the built-in families:

- gaussian(mu, sigma)
- uniform(low, high)
- laplace(mu, scale)             density exp(-|x-mu|/scale) / (2 scale)
- exponential(rate)              density rate * exp(-rate x) on x >= 0
- gamma(shape, rate)             rate parameterization, mean shape/rate
- discrete_integer(bound, weights) on [-bound, bound] subset of Z

The first five are log-concave; the discrete family exists for the
integer-alphabet lower-bound experiments.  Raw moments are available in
closed form for every family (binomial expansion around the central
moments where needed), which the orthogonal-polynomial builder prefers
over quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import substream
from .symtensor import SymmetricTensor, from_rank_one_sum

__all__ = [
    "DistributionSpec",
    "MeasurementSet",
    "TeacherNetwork",
    "generate",
    "load_measurements",
    "sample_vectors",
    "save_measurements",
    "tensorize",
]

_FAMILIES = ("gaussian", "uniform", "laplace", "exponential", "gamma",
             "discrete_integer")


def _double_factorial_odd(k: int) -> int:
    # (k-1)!! for even k: E[Z^k] of a standard normal.
    return math.factorial(k) // (2 ** (k // 2) * math.factorial(k // 2))


@dataclass(frozen=True)
class DistributionSpec:
    """A scalar sampling law with fixed parameters."""

    family: str
    params: tuple = ()
    bound: int | None = None
    weights: tuple | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unsupported family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.family == "gaussian":
            if self.params[1] <= 0:
                raise ValueError("gaussian needs sigma > 0")
        elif self.family == "uniform":
            if self.params[0] >= self.params[1]:
                raise ValueError("uniform needs low < high")
        elif self.family == "laplace":
            if self.params[1] <= 0:
                raise ValueError("laplace needs scale > 0")
        elif self.family == "exponential":
            if self.params[0] <= 0:
                raise ValueError("exponential needs rate > 0")
        elif self.family == "gamma":
            if self.params[0] <= 0 or self.params[1] <= 0:
                raise ValueError("gamma needs shape > 0 and rate > 0")
        elif self.family == "discrete_integer":
            if self.bound is None or self.bound < 0:
                raise ValueError("discrete_integer needs a bound B >= 0")
            n = 2 * self.bound + 1
            w = self.weights
            if w is None:
                w = (1.0 / n,) * n
            w = tuple(float(x) for x in w)
            if len(w) != n:
                raise ValueError(f"need {n} weights for support [-{self.bound}, {self.bound}]")
            if any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)

    # -- constructors ------------------------------------------------------

    @classmethod
    def gaussian(cls, mu: float = 0.0, sigma: float = 1.0):
        return cls("gaussian", (mu, sigma))

    @classmethod
    def uniform(cls, low: float = -1.0, high: float = 1.0):
        return cls("uniform", (low, high))

    @classmethod
    def laplace(cls, mu: float = 0.0, scale: float = 1.0):
        return cls("laplace", (mu, scale))

    @classmethod
    def exponential(cls, rate: float = 1.0):
        return cls("exponential", (rate,))

    @classmethod
    def gamma(cls, shape: float, rate: float = 1.0):
        return cls("gamma", (shape, rate))

    @classmethod
    def discrete_integer(cls, bound: int, weights=None):
        return cls("discrete_integer", (), bound=int(bound),
                   weights=None if weights is None else tuple(weights))

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "gaussian":
            mu, sigma = self.params
            return mu + sigma * rng.standard_normal(size)
        if self.family == "uniform":
            low, high = self.params
            return rng.uniform(low, high, size)
        if self.family == "laplace":
            mu, scale = self.params
            return rng.laplace(mu, scale, size)
        if self.family == "exponential":
            (rate,) = self.params
            return rng.exponential(1.0 / rate, size)
        if self.family == "gamma":
            shape, rate = self.params
            return rng.gamma(shape, 1.0 / rate, size)
        values = np.arange(-self.bound, self.bound + 1, dtype=np.float64)
        return rng.choice(values, size=size, p=np.asarray(self.weights))

    # -- analytic structure --------------------------------------------------

    def moment(self, k: int) -> float:
        """Raw moment E[X^k], in closed form."""
        if k < 0:
            raise ValueError("moment order must be >= 0")
        if self.family == "gaussian":
            mu, sigma = self.params
            return float(sum(
                math.comb(k, j) * mu ** (k - j) * sigma ** j * _double_factorial_odd(j)
                for j in range(0, k + 1, 2)))
        if self.family == "uniform":
            low, high = self.params
            return float((high ** (k + 1) - low ** (k + 1)) / ((k + 1) * (high - low)))
        if self.family == "laplace":
            mu, scale = self.params
            return float(sum(
                math.comb(k, j) * mu ** (k - j) * scale ** j * math.factorial(j)
                for j in range(0, k + 1, 2)))
        if self.family == "exponential":
            (rate,) = self.params
            return float(math.factorial(k) / rate ** k)
        if self.family == "gamma":
            shape, rate = self.params
            value = 1.0
            for i in range(k):
                value *= (shape + i) / rate
            return float(value)
        values = np.arange(-self.bound, self.bound + 1, dtype=np.float64)
        return float(np.dot(np.asarray(self.weights), values ** k))

    def pdf(self, x: float) -> float:
        """Density of the continuous families (quadrature cross-checks)."""
        if self.family == "gaussian":
            mu, sigma = self.params
            return math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        if self.family == "uniform":
            low, high = self.params
            return 1.0 / (high - low) if low <= x <= high else 0.0
        if self.family == "laplace":
            mu, scale = self.params
            return math.exp(-abs(x - mu) / scale) / (2 * scale)
        if self.family == "exponential":
            (rate,) = self.params
            return rate * math.exp(-rate * x) if x >= 0 else 0.0
        if self.family == "gamma":
            shape, rate = self.params
            if x <= 0:
                return 0.0
            return (rate ** shape) * x ** (shape - 1) * math.exp(-rate * x) / math.gamma(shape)
        raise ValueError("discrete_integer has no density")

    def support(self) -> tuple[float, float]:
        if self.family == "uniform":
            return self.params
        if self.family in ("exponential", "gamma"):
            return (0.0, math.inf)
        if self.family == "discrete_integer":
            return (-float(self.bound), float(self.bound))
        return (-math.inf, math.inf)

    @property
    def is_discrete(self) -> bool:
        return self.family == "discrete_integer"

    # -- serialization ---------------------------------------------------------

    @property
    def label(self) -> str:
        if self.family == "discrete_integer":
            return f"discrete_integer(B={self.bound})"
        args = ",".join(format(p, "g") for p in self.params)
        return f"{self.family}({args})"

    def to_record(self) -> dict:
        record = {"family": self.family, "params": list(self.params)}
        if self.family == "discrete_integer":
            record["bound"] = self.bound
            record["weights"] = list(self.weights)
        return record

    @classmethod
    def from_record(cls, record: dict) -> "DistributionSpec":
        return cls(record["family"], tuple(record.get("params", ())),
                   bound=record.get("bound"),
                   weights=tuple(record["weights"]) if record.get("weights") else None)


def sample_vectors(dist: DistributionSpec, d: int, N: int, seed: int,
                   stream: int = 0) -> np.ndarray:
    """Draw an (N, d) matrix with i.i.d. entries from ``dist``."""
    if d < 1 or N < 0:
        raise ValueError("need d >= 1 and N >= 0")
    X = dist.sample(substream(seed, stream), (N, d)).astype(np.float64)
    X.flags.writeable = False
    return X


@dataclass(frozen=True)
class MeasurementSet:
    """Samples X (N x d), exact labels Y, and the generating configuration."""

    X: np.ndarray
    Y: np.ndarray
    dist: DistributionSpec
    seed: int
    d: int
    ell: int
    rank: int | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or X.shape[0] != Y.shape[0] or X.shape[1] != self.d:
            raise ValueError("X must be (N, d) with one label per row")
        if self.ell < 1:
            raise ValueError("measurement sets require ell >= 1")
        X = X.copy()
        Y = Y.copy()
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def N(self) -> int:
        return self.X.shape[0]


def generate(Tstar: SymmetricTensor, dist: DistributionSpec, N: int, seed: int,
             rank: int | None = None) -> MeasurementSet:
    """Sample X and attach exact labels Y_i = <T*, X_i^{ell}>."""
    if Tstar.ell < 1:
        raise ValueError("label generation requires ell >= 1")
    X = sample_vectors(dist, Tstar.d, N, seed)
    Y = Tstar.apply_rows(X)
    return MeasurementSet(X=X, Y=Y, dist=dist, seed=seed,
                          d=Tstar.d, ell=Tstar.ell, rank=rank)


@dataclass(frozen=True)
class TeacherNetwork:
    """Width-r network x -> sum_j a_j <W_j, x>^ell (the power activation)."""

    a: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64).reshape(-1).copy()
        W = np.asarray(self.W, dtype=np.float64).copy()
        if W.ndim != 2 or W.shape[0] != a.shape[0]:
            raise ValueError("W must be (r, d) with one row per output weight")
        a.flags.writeable = False
        W.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "W", W)

    @property
    def r(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def predict(self, X, ell: int) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (X @ self.W.T) ** ell @ self.a


def tensorize(net: TeacherNetwork, ell: int) -> SymmetricTensor:
    """The tensor carrying the network: sum_j a_j W_j^{ell}.

    Its symmetric rank is at most ``net.r`` and its labels coincide with the
    network outputs on every input.
    """
    if ell < 1:
        raise ValueError("tensorization requires ell >= 1")
    return from_rank_one_sum(zip(net.a, net.W), ell, d=net.d)


def save_measurements(ms: MeasurementSet, path) -> None:
    """One JSON header line, then CSV rows of X entries followed by Y."""
    header = {
        "d": ms.d, "ell": ms.ell, "N": ms.N, "dist": ms.dist.to_record(),
        "seed": ms.seed, "rank": ms.rank,
    }
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join([f"x{j + 1}" for j in range(ms.d)] + ["y"]) + "\n")
        for row, y in zip(ms.X, ms.Y):
            cells = [format(v, ".17g") for v in row] + [format(y, ".17g")]
            fh.write(",".join(cells) + "\n")


def load_measurements(path) -> MeasurementSet:
    with open(path) as fh:
        header = json.loads(fh.readline())
        fh.readline()  # column names
        body = [line.strip().split(",") for line in fh if line.strip()]
    d = int(header["d"])
    data = np.array([[float(c) for c in row] for row in body], dtype=np.float64)
    data = data.reshape(-1, d + 1)
    return MeasurementSet(
        X=data[:, :d], Y=data[:, d], dist=DistributionSpec.from_record(header["dist"]),
        seed=int(header["seed"]), d=d, ell=int(header["ell"]),
        rank=header.get("rank"))
