"""Sign codebooks and low symmetric-rank packing sets.

A codebook is a set of near-orthogonal vectors in {+-1}^d obtained by the
probabilistic method: resample the whole set until every pair satisfies
|<v_i, v_j>| / d <= epsilon.  Normalizing rows by sqrt(d) and summing
ell-th powers over r-element index subsets S yields the packing members

    T_S = sum_{i in S} (v_i / sqrt(d))^{ell},

whose pairwise Frobenius distances are exact polynomials in the codebook
Gram matrix: with Q = S \\ S', R = S' \\ S and G the Gram of the
normalized vectors,

    ||T_S - T_S'||_F^2 = sum_{Q x Q} G^ell + sum_{R x R} G^ell
                         - 2 sum_{Q x R} G^ell

(diagonal terms contribute |Q| + |R| since the vectors are unit norm).
Every entry of d^{ell/2} T_S is a sum of +-1 products, hence an integer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ExperimentError
from .seeding import substream
from .symtensor import enumerate_multi_indices, sym_dim

__all__ = [
    "Codebook",
    "PackingExhaustionError",
    "PackingSet",
    "PackingVerification",
    "build_packing",
    "gram_distance",
    "gv_codebook",
    "verify_packing",
]


class PackingExhaustionError(ExperimentError):
    """Resampling budget exhausted; parameters sit outside the probable regime."""


@dataclass(frozen=True)
class Codebook:
    """Rows of {+-1}^d with pairwise normalized inner products <= epsilon."""

    vectors: np.ndarray       # (n, d) int8
    epsilon: float
    attempts: int
    seed: int

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=np.int8).copy()
        if V.ndim != 2 or not np.all(np.abs(V) == 1):
            raise ValueError("codebook vectors must be +-1 matrices")
        V.flags.writeable = False
        object.__setattr__(self, "vectors", V)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def gram(self) -> np.ndarray:
        """Gram matrix of the sqrt(d)-normalized rows (exact up to division)."""
        V = self.vectors.astype(np.int64)
        return (V @ V.T) / self.d

    def to_record(self) -> dict:
        return {"d": self.d, "n": self.n, "epsilon": self.epsilon,
                "attempts": self.attempts, "seed": self.seed,
                "rows": self.vectors.tolist()}


def gv_codebook(d: int, n: int, epsilon: float, seed: int,
                max_attempts: int = 200) -> Codebook:
    """Draw a codebook by full resampling until the pairwise bound holds."""
    if n < 1:
        raise ValueError("need at least one codeword")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    threshold = epsilon * d
    for attempt in range(1, max_attempts + 1):
        rng = substream(seed, attempt - 1)
        V = rng.integers(0, 2, size=(n, d), dtype=np.int8) * 2 - 1
        dots = V.astype(np.int64) @ V.astype(np.int64).T
        off = np.abs(dots[np.triu_indices(n, k=1)])
        if off.size == 0 or off.max() <= threshold:
            return Codebook(vectors=V, epsilon=epsilon, attempts=attempt, seed=seed)
    raise PackingExhaustionError(
        f"no codebook with n={n}, d={d}, epsilon={epsilon} found in "
        f"{max_attempts} attempts; the feasible regime needs n << exp(c d eps^2)")


def gram_distance(s, s2, gram: np.ndarray, ell: int) -> float:
    """Frobenius distance ||T_S - T_S2||_F from the Gram matrix alone."""
    gram = np.asarray(gram, dtype=np.float64)
    if np.any(np.abs(np.diag(gram) - 1.0) > 1e-10):
        raise ValueError("gram matrix must come from unit-norm vectors")
    q = sorted(set(s) - set(s2))
    r = sorted(set(s2) - set(s))
    Gq = gram[np.ix_(q, q)] ** ell
    Gr = gram[np.ix_(r, r)] ** ell
    Gqr = gram[np.ix_(q, r)] ** ell
    dist_sq = Gq.sum() + Gr.sum() - 2.0 * Gqr.sum()
    return math.sqrt(max(dist_sq, 0.0))


@dataclass(frozen=True)
class PackingSet:
    """A codebook plus the r-subsets indexing its packing members."""

    codebook: Codebook
    subsets: tuple
    ell: int
    r: int
    gram: np.ndarray

    def __post_init__(self):
        subsets = tuple(tuple(int(i) for i in s) for s in self.subsets)
        for s in subsets:
            if len(s) != self.r or any(not 0 <= i < self.codebook.n for i in s):
                raise ValueError("subsets must contain r valid codeword indices")
        G = np.asarray(self.gram, dtype=np.float64).copy()
        G.flags.writeable = False
        object.__setattr__(self, "subsets", subsets)
        object.__setattr__(self, "gram", G)

    @property
    def size(self) -> int:
        return len(self.subsets)

    def member_vectors(self, idx: int) -> np.ndarray:
        """Normalized component vectors of member ``idx``, one per row."""
        rows = self.codebook.vectors[list(self.subsets[idx])].astype(np.float64)
        return rows / math.sqrt(self.codebook.d)

    def member_rank_one_terms(self, idx: int):
        return [(1.0, v) for v in self.member_vectors(idx)]

    def to_record(self) -> dict:
        return {"codebook": self.codebook.to_record(), "ell": self.ell,
                "r": self.r, "subsets": [list(s) for s in self.subsets]}


def _sample_subsets(n: int, r: int, M: int, rng: np.random.Generator):
    """Distinct sorted r-subsets of range(n), uniform, by seeded rejection."""
    available = math.comb(n, r)
    if available < M:
        raise ValueError(f"only {available} subsets of size {r} exist, need {M}")
    chosen = []
    seen = set()
    budget = 1000 * M + 1000
    while len(chosen) < M:
        if budget == 0:
            raise PackingExhaustionError("subset rejection sampling stalled")
        budget -= 1
        s = tuple(sorted(rng.choice(n, size=r, replace=False).tolist()))
        if s not in seen:
            seen.add(s)
            chosen.append(s)
    return tuple(chosen)


def build_packing(d: int, ell: int, r: int, M: int, seed: int,
                  epsilon: float | None = None, n_codewords: int | None = None,
                  max_attempts: int = 200) -> PackingSet:
    """Codebook + M distinct r-subsets.

    ``epsilon`` defaults to r**-0.01.  The codebook size defaults to the
    smallest n with C(n, r) >= 2M (so rejection sampling stays fast), and
    at least 2r.
    """
    if r < 1 or M < 1:
        raise ValueError("need r >= 1 and M >= 1")
    if ell < 1:
        raise ValueError("packing members require ell >= 1")
    if epsilon is None:
        epsilon = r ** -0.01
    if n_codewords is None:
        n_codewords = max(r, 2)
        while math.comb(n_codewords, r) < 2 * M:
            n_codewords += 1
        n_codewords = max(n_codewords, 2 * r)
    codebook = gv_codebook(d, n_codewords, epsilon, seed, max_attempts)
    subsets = _sample_subsets(n_codewords, r, M, substream(seed, 10**6))
    return PackingSet(codebook=codebook, subsets=subsets, ell=ell, r=r,
                      gram=codebook.gram())


@dataclass(frozen=True)
class PackingVerification:
    """Exact packing diagnostics (distances via the Gram identity)."""

    min_distance: float
    max_norm: float
    integrality_ok: bool
    pairwise_epsilon: float
    has_duplicates: bool
    worst_pair_overlap: int         # k = |S \ S'| at the closest pair
    distance_bound_at_worst: float  # sqrt(max(2k - 3 k^2 eps^ell, 0)) there
    bound_holds: bool               # dist >= bound on every pair where positive
    log_subsets_available: float
    gv_rate_empirical: float        # log(n) / (d eps^2) for the realized codebook

    def to_record(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _pair_bound_sq(k: int, epsilon: float, ell: int) -> float:
    return 2.0 * k - 3.0 * k * k * epsilon ** ell


def verify_packing(P: PackingSet) -> PackingVerification:
    """Exact verification of the packing guarantees.

    Distances come from :func:`gram_distance`; the per-pair lower bound
    2k - 3k^2 eps^ell (squared distance, k the subset overlap defect) is
    checked wherever it is positive, at the codebook's epsilon.
    """
    G = P.gram
    n = P.codebook.n
    eps_param = P.codebook.epsilon
    off = np.abs(G - np.eye(n))
    pairwise_epsilon = float(off.max()) if n > 1 else 0.0

    min_distance = math.inf
    worst_k = 0
    has_duplicates = False
    bound_holds = True
    for i, j in itertools.combinations(range(P.size), 2):
        si, sj = set(P.subsets[i]), set(P.subsets[j])
        k = len(si - sj)
        dist = gram_distance(P.subsets[i], P.subsets[j], G, P.ell)
        if k == 0:
            has_duplicates = True
        bound_sq = _pair_bound_sq(k, eps_param, P.ell)
        if bound_sq > 0 and dist ** 2 < bound_sq - 1e-9 * max(1.0, bound_sq):
            bound_holds = False
        if dist < min_distance:
            min_distance = dist
            worst_k = k

    norms = []
    for idx in range(P.size):
        block = G[np.ix_(P.subsets[idx], P.subsets[idx])] ** P.ell
        norms.append(math.sqrt(max(block.sum(), 0.0)))
    max_norm = max(norms) if norms else 0.0

    return PackingVerification(
        min_distance=min_distance,
        max_norm=max_norm,
        integrality_ok=_integrality_check(P),
        pairwise_epsilon=pairwise_epsilon,
        has_duplicates=has_duplicates,
        worst_pair_overlap=worst_k,
        distance_bound_at_worst=math.sqrt(max(_pair_bound_sq(worst_k, eps_param, P.ell), 0.0)),
        bound_holds=bound_holds,
        log_subsets_available=float(math.log(math.comb(n, P.r))),
        gv_rate_empirical=float(math.log(n) / (P.codebook.d * eps_param ** 2))
        if n > 1 else 0.0,
    )


def _integrality_check(P: PackingSet, sample_limit: int = 512) -> bool:
    """Entries of d^{ell/2} T_S are integers: accumulate +-1 products exactly.

    All multi-indices are checked when the symmetric dimension is small;
    otherwise a deterministic sample of index tuples is used (the property
    is structural, the check exercises the integer accumulation path).
    """
    V = P.codebook.vectors.astype(object)  # Python ints: no overflow
    d = P.codebook.d
    if sym_dim(d, P.ell) <= sample_limit:
        tuples = []
        for alpha in enumerate_multi_indices(d, P.ell):
            rep = tuple(itertools.chain.from_iterable(
                (j,) * int(a) for j, a in enumerate(alpha)))
            tuples.append(rep)
    else:
        rng = substream(P.codebook.seed, 10**6 + 1)
        tuples = [tuple(rng.integers(0, d, size=P.ell).tolist())
                  for _ in range(sample_limit)]
    for s in P.subsets:
        rows = V[list(s)]
        for I in tuples:
            total = 0
            for row in rows:
                prod = 1
                for i in I:
                    prod *= int(row[i])
                total += prod
            if not isinstance(total, int):
                return False
            if abs(total) > P.r:
                return False
    return True
