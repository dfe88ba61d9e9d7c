"""Compressed order-``ell`` symmetric tensors over R^d.

A symmetric tensor is determined by one coefficient per multi-index
``alpha`` (nonnegative integers summing to ``ell``): the tensor entry at
any index tuple ``I`` equals the coefficient at the occupancy vector of
``I``.  Storage is therefore ``C(d + ell - 1, ell)`` floats instead of
``d**ell``.  The multiplicity ``N_alpha = ell! / prod(alpha_j!)`` counts
the index tuples collapsing onto ``alpha``; every weighted formula below
applies it explicitly:

    <T, x^{ell}>   = sum_alpha N_alpha T_alpha prod_j x_j^alpha_j
    <T, U>_F       = sum_alpha N_alpha T_alpha U_alpha

Multi-indices are enumerated once per (d, ell) in graded-lexicographic
order (first coordinate largest first), which fixes serialization and the
column order of every design matrix built downstream.

All objects are immutable after construction and all operations are pure,
so values can be shared freely across concurrent tasks.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

__all__ = [
    "DENSE_ENTRY_LIMIT",
    "MultiIndexTable",
    "RankOneSum",
    "SymmetricTensor",
    "beta_of_index",
    "enumerate_multi_indices",
    "from_rank_one_sum",
    "multi_index_table",
    "multinomial",
    "sym_dim",
]

DENSE_ENTRY_LIMIT = 10**7

# Counts above 2**53 are not exactly representable in float64, and every
# weighted formula eventually multiplies by them.
_EXACT_INT_LIMIT = 2**53


def _check_exact(value: int, what: str) -> int:
    if value > _EXACT_INT_LIMIT:
        raise CapacityError(f"{what} = {value} exceeds the exact float64 range")
    return value


@functools.lru_cache(maxsize=None)
def enumerate_multi_indices(d: int, ell: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of degree ``ell`` over ``d`` slots, graded-lex order."""
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    if ell < 0:
        raise ValueError("order ell must be >= 0")

    def rec(slots: int, total: int):
        if slots == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for tail in rec(slots - 1, total - head):
                yield (head,) + tail

    return tuple(rec(d, ell))


def multinomial(alpha) -> int:
    """Number of index tuples with occupancy vector ``alpha``."""
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be nonnegative")
    degree = sum(alpha)
    value = math.factorial(degree)
    for a in alpha:
        value //= math.factorial(a)
    return _check_exact(value, "multinomial coefficient")


def sym_dim(d: int, ell: int) -> int:
    """Dimension of the space of order-``ell`` symmetric tensors over R^d."""
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    if ell < 0:
        raise ValueError("order ell must be >= 0")
    return _check_exact(math.comb(d + ell - 1, ell), "symmetric dimension")


def beta_of_index(index, d: int) -> tuple[int, ...]:
    """Occupancy vector of an index tuple with 0-based entries in range(d)."""
    beta = [0] * d
    for i in index:
        i = int(i)
        if not 0 <= i < d:
            raise ValueError(f"index entry {i} out of range for dimension {d}")
        beta[i] += 1
    return tuple(beta)


@dataclass(frozen=True)
class MultiIndexTable:
    """Cached enumeration artifacts for one (d, ell) pair."""

    d: int
    ell: int
    alphas: np.ndarray          # (P, d) int64, graded-lex rows
    weights: np.ndarray         # (P,) float64, N_alpha per row
    position: dict              # alpha tuple -> row

    @property
    def size(self) -> int:
        return self.alphas.shape[0]


@functools.lru_cache(maxsize=None)
def multi_index_table(d: int, ell: int) -> MultiIndexTable:
    indices = enumerate_multi_indices(d, ell)
    alphas = np.array(indices, dtype=np.int64).reshape(len(indices), d)
    alphas.flags.writeable = False
    weights = np.array([multinomial(a) for a in indices], dtype=np.float64)
    weights.flags.writeable = False
    position = {alpha: k for k, alpha in enumerate(indices)}
    return MultiIndexTable(d=d, ell=ell, alphas=alphas, weights=weights,
                           position=position)


def _monomials(X: np.ndarray, alphas: np.ndarray, max_temp: int = 2_000_000) -> np.ndarray:
    """Evaluate prod_j X[:, j]**alpha[j] for every row of X and alpha.

    Returns an (n, P) matrix; the broadcast temporary is chunked to
    ``max_temp`` floats.
    """
    n = X.shape[0]
    P, d = alphas.shape
    out = np.empty((n, P), dtype=np.float64)
    step = max(1, max_temp // max(P * d, 1))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        out[lo:hi] = np.prod(X[lo:hi, None, :] ** alphas[None, :, :], axis=2)
    if n == 0:
        out = out.reshape(0, P)
    return out


class SymmetricTensor:
    """Immutable compressed symmetric tensor."""

    __slots__ = ("d", "ell", "coeffs")

    def __init__(self, d: int, ell: int, coeffs):
        table = multi_index_table(d, ell)
        arr = np.asarray(coeffs, dtype=np.float64).reshape(-1).copy()
        if arr.shape[0] != table.size:
            raise ValueError(
                f"expected {table.size} coefficients for (d={d}, ell={ell}), "
                f"got {arr.shape[0]}")
        arr.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SymmetricTensor is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, d: int, ell: int) -> "SymmetricTensor":
        return cls(d, ell, np.zeros(sym_dim(d, ell)))

    @classmethod
    def from_values(cls, d: int, ell: int, values: dict) -> "SymmetricTensor":
        """Build from a {multi-index tuple: coefficient} mapping."""
        table = multi_index_table(d, ell)
        coeffs = np.zeros(table.size)
        for alpha, value in values.items():
            alpha = tuple(int(a) for a in alpha)
            if alpha not in table.position:
                raise ValueError(f"{alpha} is not a degree-{ell} multi-index over d={d}")
            coeffs[table.position[alpha]] = value
        return cls(d, ell, coeffs)

    @classmethod
    def basis_power(cls, d: int, ell: int, axis: int = 0) -> "SymmetricTensor":
        """The rank-one tensor e_axis^{ell}."""
        alpha = [0] * d
        alpha[axis] = ell
        return cls.from_values(d, ell, {tuple(alpha): 1.0})

    # -- lookups -----------------------------------------------------------

    @property
    def table(self) -> MultiIndexTable:
        return multi_index_table(self.d, self.ell)

    def coeff(self, alpha) -> float:
        return float(self.coeffs[self.table.position[tuple(int(a) for a in alpha)]])

    def entry(self, index) -> float:
        """Dense entry at an index tuple (0-based)."""
        if len(index) != self.ell:
            raise ValueError(f"index tuple must have length {self.ell}")
        return self.coeff(beta_of_index(index, self.d))

    # -- algebra -----------------------------------------------------------

    def apply(self, x) -> float:
        """Evaluate <T, x^{ell}> = sum_alpha N_alpha T_alpha x^alpha."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.d:
            raise ValueError(f"vector has dimension {x.shape[0]}, tensor has {self.d}")
        table = self.table
        mono = np.prod(x[None, :] ** table.alphas, axis=1)
        return float(np.dot(table.weights * self.coeffs, mono))

    def apply_rows(self, X) -> np.ndarray:
        """Vectorized :meth:`apply` over the rows of an (n, d) matrix."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected an (n, {self.d}) matrix, got {X.shape}")
        table = self.table
        return _monomials(X, table.alphas) @ (table.weights * self.coeffs)

    def frobenius_inner(self, other: "SymmetricTensor") -> float:
        if (other.d, other.ell) != (self.d, self.ell):
            raise ValueError("Frobenius inner product needs matching (d, ell)")
        return float(np.dot(self.table.weights * self.coeffs, other.coeffs))

    def frobenius_norm(self) -> float:
        return math.sqrt(max(self.frobenius_inner(self), 0.0))

    def dense(self) -> np.ndarray:
        """Expand to the full (d,)*ell array.  Test oracle; capacity-limited."""
        entries = self.d ** self.ell
        if entries > DENSE_ENTRY_LIMIT:
            raise CapacityError(
                f"dense expansion has {entries} entries (limit {DENSE_ENTRY_LIMIT})")
        out = np.zeros((self.d,) * self.ell)
        if self.ell == 0:
            return out + self.coeffs[0]
        for alpha, value in zip(self.table.alphas, self.coeffs):
            rep = tuple(itertools.chain.from_iterable(
                (j,) * int(a) for j, a in enumerate(alpha)))
            for perm in set(itertools.permutations(rep)):
                out[perm] = value
        return out

    # -- linear structure ----------------------------------------------------

    def _binary(self, other, op) -> "SymmetricTensor":
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        if (other.d, other.ell) != (self.d, self.ell):
            raise ValueError("shape mismatch")
        return SymmetricTensor(self.d, self.ell, op(self.coeffs, other.coeffs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SymmetricTensor(self.d, self.ell, -self.coeffs)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, np.integer, np.floating)):
            return NotImplemented
        return SymmetricTensor(self.d, self.ell, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        return (self.d, self.ell) == (other.d, other.ell) and np.array_equal(
            self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.d, self.ell, self.coeffs.tobytes()))

    def __repr__(self):
        return f"SymmetricTensor(d={self.d}, ell={self.ell}, dim={self.coeffs.shape[0]})"

    # -- serialization --------------------------------------------------------

    def to_record(self) -> dict:
        """Structured record: {d, ell, values: [[alpha, coeff], ...]} in canonical order."""
        return {
            "d": self.d,
            "ell": self.ell,
            "values": [[list(alpha), float(c)]
                       for alpha, c in zip(enumerate_multi_indices(self.d, self.ell),
                                           self.coeffs)],
        }

    @classmethod
    def from_record(cls, record: dict) -> "SymmetricTensor":
        d, ell = int(record["d"]), int(record["ell"])
        return cls.from_values(d, ell, {tuple(a): c for a, c in record["values"]})


@dataclass(frozen=True)
class RankOneSum:
    """A sum sum_i lambda_i v_i^{ell}, stored as (weight, vector) pairs."""

    terms: tuple

    def __post_init__(self):
        frozen = []
        dim = None
        for lam, v in self.terms:
            v = np.asarray(v, dtype=np.float64).reshape(-1)
            if dim is None:
                dim = v.shape[0]
            elif v.shape[0] != dim:
                raise ValueError("all component vectors must share one dimension")
            v = v.copy()
            v.flags.writeable = False
            frozen.append((float(lam), v))
        object.__setattr__(self, "terms", tuple(frozen))

    @property
    def d(self) -> int:
        if not self.terms:
            raise ValueError("empty rank-one sum has no dimension")
        return self.terms[0][1].shape[0]

    @property
    def r(self) -> int:
        return len(self.terms)

    def evaluate(self, x, ell: int) -> float:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        return float(sum(lam * np.dot(v, x) ** ell for lam, v in self.terms))

    def materialize(self, ell: int) -> SymmetricTensor:
        return from_rank_one_sum(self, ell)


def from_rank_one_sum(s, ell: int, d: int | None = None) -> SymmetricTensor:
    """Materialize sum_i lambda_i v_i^{ell} into compressed coefficients.

    ``s`` is a :class:`RankOneSum` or an iterable of (weight, vector) pairs;
    ``d`` is only needed when the term list is empty.
    """
    terms = s.terms if isinstance(s, RankOneSum) else tuple(
        (float(lam), np.asarray(v, dtype=np.float64).reshape(-1)) for lam, v in s)
    if not terms:
        if d is None:
            raise ValueError("dimension d required for an empty rank-one sum")
        return SymmetricTensor.zeros(d, ell)
    dim = terms[0][1].shape[0]
    if d is not None and d != dim:
        raise ValueError(f"vectors have dimension {dim}, expected {d}")
    if any(v.shape[0] != dim for _, v in terms):
        raise ValueError("all component vectors must share one dimension")
    table = multi_index_table(dim, ell)
    coeffs = np.zeros(table.size)
    for lam, v in terms:
        coeffs += lam * np.prod(v[None, :] ** table.alphas, axis=1)
    return SymmetricTensor(dim, ell, coeffs)
