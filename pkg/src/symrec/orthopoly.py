"""Orthonormal polynomials from raw moments, and the second-moment bound.

Given a moment sequence m_0..m_{2n} of a scalar law, the Hankel matrix
H[i, j] = m_{i+j} is positive definite and its leading determinants
D_0..D_n build the unique orthonormal family P_0..P_n with positive
leading coefficients (P_0 = 1).  Two constructions are provided:

- :func:`orthonormal_family` factors H = L L^T and takes the rows of
  L^{-1} as monomial coefficients (well-conditioned; the default), and
- :func:`family_from_determinants` expands the classical bordered-Hankel
  determinant by cofactors (kept as a cross-check for small degree).

The family feeds the expansion of <T, X^{ell}> in products of the P_n:
the degree-ell slice has coefficients

    Theta_alpha = N_alpha * prod_j sqrt(D_{alpha_j} / D_{alpha_j - 1}) * T_alpha

with the convention D_{-1} = 1, and the partial sum of Theta_alpha^2 is
wedged between the exact population second moment and Xi * ||T||_F^2
where Xi = (min_i D_i / max(max_i D_i, 1))^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import CapacityError, ExperimentError
from .measurements import DistributionSpec
from .symtensor import SymmetricTensor, multi_index_table

__all__ = [
    "LowerBoundReport",
    "MomentSequence",
    "OrthogonalFamily",
    "family_from_determinants",
    "hankel_determinant",
    "hankel_matrix",
    "moments_of",
    "orthonormal_family",
    "second_moment_exact",
    "theta_coefficient",
    "theta_slice",
    "xi_constant",
]

SECOND_MOMENT_CAPACITY = 3000
_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class MomentSequence:
    """Raw moments m_0, m_1, ..., with m_0 = 1."""

    moments: tuple
    source: str = "explicit"

    def __post_init__(self):
        m = tuple(float(x) for x in self.moments)
        if not m:
            raise ValueError("moment sequence must contain at least m_0")
        if abs(m[0] - 1.0) > 1e-9:
            raise ValueError(f"m_0 must equal 1, got {m[0]}")
        object.__setattr__(self, "moments", m)

    @property
    def order(self) -> int:
        return len(self.moments) - 1

    def __getitem__(self, k: int) -> float:
        return self.moments[k]


def moments_of(dist: DistributionSpec, n: int, method: str = "auto") -> MomentSequence:
    """Moments m_0..m_n of ``dist``.

    ``method`` is one of ``auto`` (closed form), ``analytic``, or
    ``quadrature``; the chosen path is recorded in ``source``.
    """
    if n < 0:
        raise ValueError("moment order must be >= 0")
    if method not in ("auto", "analytic", "quadrature"):
        raise ValueError(f"unknown moment method {method!r}")
    if method in ("auto", "analytic"):
        return MomentSequence(tuple(dist.moment(k) for k in range(n + 1)),
                              source="analytic")
    if dist.is_discrete:
        raise ValueError("quadrature is only defined for the continuous families")
    lo, hi = dist.support()
    values = []
    for k in range(n + 1):
        val, err = scipy.integrate.quad(
            lambda x, k=k: x ** k * dist.pdf(x), lo, hi,
            epsabs=1e-12, epsrel=1e-12, limit=200)
        if err > max(1e-12, 1e-9 * abs(val)):
            raise ValueError(
                f"quadrature for moment {k} of {dist.label} did not converge "
                f"(error estimate {err:g})")
        values.append(val)
    return MomentSequence(tuple(values), source="quadrature")


def hankel_matrix(m: MomentSequence, n: int) -> np.ndarray:
    if m.order < 2 * n:
        raise ValueError(f"need moments up to order {2 * n}, have {m.order}")
    moments = np.asarray(m.moments)
    return moments[np.add.outer(np.arange(n + 1), np.arange(n + 1))]


def hankel_determinant(m: MomentSequence, n: int) -> float:
    """Leading principal moment-Hankel determinant D_n.

    LU with partial pivoting; a pivot below 1e-12 times the matrix
    max-norm, or a non-positive value, flags an invalid moment sequence.
    """
    H = hankel_matrix(m, n)
    if n == 0:
        return float(H[0, 0])
    lu, piv = scipy.linalg.lu_factor(H)
    diag = np.diag(lu)
    scale = np.max(np.abs(H))
    if np.any(np.abs(diag) < _PIVOT_TOL * scale):
        raise ValueError(f"degenerate Hankel matrix at order {n}")
    sign = 1.0 if np.count_nonzero(piv != np.arange(n + 1)) % 2 == 0 else -1.0
    det = sign * float(np.prod(diag))
    if det <= 0:
        raise ValueError(f"non-positive Hankel determinant D_{n} = {det}: "
                         "not a valid moment sequence")
    return det


@dataclass(frozen=True)
class OrthogonalFamily:
    """Orthonormal polynomials P_0..P_ell with their Hankel determinants."""

    moments: MomentSequence
    hankel: tuple                # D_0 .. D_ell
    coeffs: tuple                # coeffs[n][k] = coefficient of x^k in P_n

    def __post_init__(self):
        frozen = []
        for c in self.coeffs:
            arr = np.asarray(c, dtype=np.float64).copy()
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "coeffs", tuple(frozen))
        object.__setattr__(self, "hankel", tuple(float(D) for D in self.hankel))

    @property
    def degree(self) -> int:
        return len(self.hankel) - 1

    def ratio(self, k: int) -> float:
        """sqrt(D_k / D_{k-1}), with D_{-1} = 1."""
        if k == 0:
            return math.sqrt(self.hankel[0])
        return math.sqrt(self.hankel[k] / self.hankel[k - 1])

    def ratios(self) -> np.ndarray:
        return np.array([self.ratio(k) for k in range(self.degree + 1)])

    def evaluate(self, n: int, x) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=np.float64),
                                                self.coeffs[n])

    def moment_dot(self, p, q) -> float:
        """E[p(X) q(X)] as a finite bilinear form in the stored moments."""
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        if p.shape[0] + q.shape[0] - 2 > self.moments.order:
            raise ValueError("stored moments do not cover this product degree")
        m = np.asarray(self.moments.moments)
        table = m[np.add.outer(np.arange(p.shape[0]), np.arange(q.shape[0]))]
        return float(p @ table @ q)

    def to_record(self) -> dict:
        return {
            "moments": list(self.moments.moments),
            "moment_source": self.moments.source,
            "hankel_determinants": list(self.hankel),
            "coefficients": [list(map(float, c)) for c in self.coeffs],
        }


def orthonormal_family(m: MomentSequence, ell: int) -> OrthogonalFamily:
    """Build P_0..P_ell from the Cholesky factor of the moment Hankel matrix."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    dets = tuple(hankel_determinant(m, n) for n in range(ell + 1))
    H = hankel_matrix(m, ell)
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate Hankel matrix") from exc
    Linv = scipy.linalg.solve_triangular(L, np.eye(ell + 1), lower=True)
    coeffs = tuple(Linv[n, :n + 1] for n in range(ell + 1))
    return OrthogonalFamily(moments=m, hankel=dets, coeffs=coeffs)


def family_from_determinants(m: MomentSequence, ell: int) -> OrthogonalFamily:
    """Cofactor-expansion construction; cross-checks the Cholesky route."""
    dets = tuple(hankel_determinant(m, n) for n in range(ell + 1))
    coeffs = [np.array([1.0])]
    for n in range(1, ell + 1):
        H = hankel_matrix(m, n)
        c = np.empty(n + 1)
        for j in range(n + 1):
            minor = np.delete(H[:n, :], j, axis=1)
            c[j] = (-1) ** (n + j) * np.linalg.det(minor)
        coeffs.append(c / math.sqrt(dets[n] * dets[n - 1]))
    return OrthogonalFamily(moments=m, hankel=dets, coeffs=tuple(coeffs))


def theta_coefficient(T: SymmetricTensor, alpha, fam: OrthogonalFamily) -> float:
    """Expansion coefficient of the degree-ell product polynomial at ``alpha``."""
    alpha = tuple(int(a) for a in alpha)
    if sum(alpha) != T.ell:
        raise ValueError(f"|alpha| = {sum(alpha)} does not match ell = {T.ell}")
    if max(alpha) > fam.degree:
        raise ValueError("family not built to a high enough degree")
    table = multi_index_table(T.d, T.ell)
    k = table.position[alpha]
    ratios = fam.ratios()
    return float(table.weights[k] * np.prod(ratios[list(alpha)]) * T.coeffs[k])


def theta_slice(T: SymmetricTensor, fam: OrthogonalFamily) -> np.ndarray:
    """All Theta_alpha on the degree-ell slice, in canonical order."""
    if fam.degree < T.ell:
        raise ValueError("family not built to a high enough degree")
    table = multi_index_table(T.d, T.ell)
    ratios = fam.ratios()
    ratio_prod = np.prod(ratios[table.alphas], axis=1)
    return table.weights * ratio_prod * T.coeffs


def second_moment_exact(T: SymmetricTensor, m: MomentSequence) -> float:
    """Exact E[<T, X^{ell}>^2] for i.i.d. coordinates with moments ``m``.

    Brute-force pairing of multi-indices:
    sum_{a, a'} N_a N_a' T_a T_a' prod_j m_{a_j + a'_j}.
    """
    if T.d ** T.ell > SECOND_MOMENT_CAPACITY:
        raise CapacityError(
            f"d**ell = {T.d ** T.ell} exceeds the pair-enumeration capacity "
            f"{SECOND_MOMENT_CAPACITY}")
    if m.order < 2 * T.ell:
        raise ValueError(f"need moments up to order {2 * T.ell}, have {m.order}")
    table = multi_index_table(T.d, T.ell)
    moments = np.asarray(m.moments)
    prod = np.ones((table.size, table.size))
    A = table.alphas
    for j in range(T.d):
        prod *= moments[np.add.outer(A[:, j], A[:, j])]
    w = table.weights * T.coeffs
    return float(w @ prod @ w)


def xi_constant(fam: OrthogonalFamily, ell: int, d: int) -> float:
    """Xi = C^d with C = min_{i<=ell} D_i / max(max_{i<=ell} D_i, 1)."""
    if ell > fam.degree:
        raise ValueError("family not built to a high enough degree")
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    dets = fam.hankel[:ell + 1]
    c = min(dets) / max(max(dets), 1.0)
    return c ** d


@dataclass(frozen=True)
class LowerBoundReport:
    """The chain exact >= partial_sum >= bound, evaluated on one tensor."""

    exact: float
    partial_sum: float
    bound: float


def verify_lower_bound(T: SymmetricTensor, m: MomentSequence,
                       fam: OrthogonalFamily,
                       rel_tol: float = 1e-9) -> LowerBoundReport:
    """Evaluate the second-moment chain and assert it holds.

    exact is the brute-force population second moment, partial_sum is the
    energy of the degree-ell expansion slice, bound is Xi * ||T||_F^2.
    A violation beyond ``rel_tol`` means an implementation bug, since the
    chain is an identity-plus-inequalities, and raises ExperimentError.
    """
    exact = second_moment_exact(T, m)
    partial = float(np.sum(theta_slice(T, fam) ** 2))
    bound = xi_constant(fam, T.ell, T.d) * T.frobenius_inner(T)
    slack_ep = rel_tol * max(abs(exact), abs(partial), 1e-300)
    slack_pb = rel_tol * max(abs(partial), abs(bound), 1e-300)
    if exact + slack_ep < partial or partial + slack_pb < bound:
        raise ExperimentError(
            f"second-moment chain violated: exact={exact!r}, "
            f"partial_sum={partial!r}, bound={bound!r}")
    return LowerBoundReport(exact=exact, partial_sum=partial, bound=bound)
