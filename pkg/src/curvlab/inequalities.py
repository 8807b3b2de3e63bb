"""Exact-rational admissibility sweeps and the sharp matrix inequalities.

All (n, m)-indexed constants are computed with `fractions.Fraction`, so the
case checks below are genuine equalities and strict inequalities, not
tolerance tests.  Floating point enters only inside the matrix optimizers.

The second-fundamental-form functional uses hypersurface index labels
2..n, stored at 0-based positions 0..n-2 of a symmetric (n-1) x (n-1)
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "AdmissibilityRecord",
    "DValue",
    "MatrixWitness",
    "admissible",
    "d_of",
    "check_d_third_expression",
    "check_recursion",
    "check_gamma_equivalence",
    "stability_coefficients",
    "chen_weight_mask",
    "chen_numerator",
    "chen_numerator_gradient",
    "chen_functional",
    "chen_min_exact",
    "chen_min_ratio",
    "brendle_min_exact",
    "brendle_min",
    "admissibility_sweep_rows",
    "d_table_rows",
]


# ---------------------------------------------------------------------------
# admissibility and the constant D(n, m)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityRecord:
    """Exact values of the two admissibility polynomials for a pair (n, m)."""

    n: int
    m: int
    ineq1: Fraction  # m^2 - mn + 2n - 2
    ineq2: Fraction  # m^2 - mn + m + n
    admissible: bool


@dataclass(frozen=True)
class DValue:
    """The three candidate rationals and their exact minimum.

    For m = 1 the first candidate m/(2m-2) is undefined and stored as None;
    it is treated as +infinity when taking the minimum.
    """

    n: int
    m: int
    candidates: tuple[Optional[Fraction], Fraction, Fraction]
    value: Fraction


def admissible(n: int, m: int) -> AdmissibilityRecord:
    """Evaluate both admissibility polynomials exactly."""
    if not (1 <= m < n):
        raise ValueError(f"require 1 <= m < n, got (n, m) = ({n}, {m})")
    ineq1 = Fraction(m * m - m * n + 2 * n - 2)
    ineq2 = Fraction(m * m - m * n + m + n)
    return AdmissibilityRecord(n, m, ineq1, ineq2, ineq1 > 0 and ineq2 > 0)


def d_of(n: int, m: int) -> DValue:
    """Exact minimum of the three candidate rationals defining D(n, m)."""
    rec = admissible(n, m)
    if not rec.admissible:
        raise ValueError(f"(n, m) = ({n}, {m}) is not admissible")
    first = Fraction(m, 2 * m - 2) if m > 1 else None
    second = Fraction(1, n - m)
    third = rec.ineq2 / (2 * rec.ineq1)
    pool = [c for c in (first, second, third) if c is not None]
    return DValue(n, m, (first, second, third), min(pool))


@dataclass(frozen=True)
class SweepReport:
    """Outcome of an exact sweep with one row per checked case."""

    passed: bool
    rows: tuple[dict, ...]


def check_d_third_expression(n_range: Sequence[int] = range(3, 8)) -> SweepReport:
    """Check that D(n, m) equals its third candidate on every admissible pair, m >= 2."""
    rows = []
    ok = True
    for n in n_range:
        for m in range(2, n):
            rec = admissible(n, m)
            if not rec.admissible:
                continue
            dv = d_of(n, m)
            third = dv.candidates[2]
            match = dv.value == third
            ok = ok and match
            rows.append({"n": n, "m": m, "D": dv.value, "third": third, "equal": match})
    return SweepReport(ok, tuple(rows))


def check_recursion(n: int, m: int) -> SweepReport:
    """Check D(n-l, m-l) >= (l-1)/(2l) for l = 0..m-2, exactly.

    l = 0 passes vacuously (the right-hand side is -infinity).  Intermediate
    pairs that leave the admissible set are recorded rather than raised.
    """
    rec = admissible(n, m)
    if not rec.admissible or m < 2:
        raise ValueError(f"(n, m) = ({n}, {m}) must be admissible with m >= 2")
    rows = []
    ok = True
    for ell in range(0, m - 1):
        if ell == 0:
            rows.append({"l": 0, "pair": (n, m), "bound": None, "D": d_of(n, m).value,
                         "holds": True, "note": "vacuous"})
            continue
        ni, mi = n - ell, m - ell
        bound = Fraction(ell - 1, 2 * ell)
        sub = admissible(ni, mi)
        if not sub.admissible:
            ok = False
            rows.append({"l": ell, "pair": (ni, mi), "bound": bound, "D": None,
                         "holds": False, "note": "intermediate pair not admissible"})
            continue
        dv = d_of(ni, mi).value
        holds = dv >= bound
        ok = ok and holds
        rows.append({"l": ell, "pair": (ni, mi), "bound": bound, "D": dv,
                     "holds": holds, "note": ""})
    return SweepReport(ok, tuple(rows))


def check_gamma_equivalence(n: int, m: int) -> bool:
    """Whether (2m-2)/m < 4/(n-m) and m^2 - mn + m + n > 0 agree as truth values."""
    if not (1 <= m < n):
        raise ValueError(f"require 1 <= m < n, got (n, m) = ({n}, {m})")
    lhs = Fraction(2 * m - 2, m) < Fraction(4, n - m)
    rhs = admissible(n, m).ineq2 > 0
    return lhs == rhs


def stability_coefficients(k: Fraction) -> tuple[Fraction, Fraction]:
    """Return (1 + k^2/(4 eps), 4/(4-k)) with eps = k - k^2/4, both exact.

    The two coefficients coincide for every rational k in (0, 4); the pair is
    returned so tests can assert the identity rather than trust it.
    """
    k = Fraction(k)
    if not (0 < k < 4):
        raise ValueError("k must lie in (0, 4)")
    eps = k - k * k / 4
    return 1 + k * k / (4 * eps), Fraction(4, 1) / (4 - k)


def admissibility_sweep_rows(n_range: Sequence[int] = range(3, 8)) -> list[dict]:
    rows = []
    for n in n_range:
        for m in range(1, n):
            rec = admissible(n, m)
            rows.append({"n": n, "m": m, "ineq1": rec.ineq1, "ineq2": rec.ineq2,
                         "admissible": rec.admissible})
    return rows


def d_table_rows(n_range: Sequence[int] = range(3, 8)) -> list[dict]:
    rows = []
    for n in n_range:
        for m in range(1, n):
            if admissible(n, m).admissible:
                dv = d_of(n, m)
                rows.append({"n": n, "m": m, "candidates": dv.candidates, "D": dv.value})
    return rows


# ---------------------------------------------------------------------------
# the second-fundamental-form functional
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixWitness:
    """A symmetric matrix together with the functional value it achieves.

    `ratio` is the functional divided by H^2 on the trace slice (Chen case),
    or the numerator value on the traceless norm-1 slice (minimal case,
    where H = 0).
    """

    n: int
    m: int
    matrix: np.ndarray
    ratio: float
    H: float


def chen_weight_mask(n: int, m: int) -> np.ndarray:
    """Boolean (n-1) x (n-1) mask of the weighted pairs.

    Entry (t, s) is True when the label pair (i, j) = (t+2, s+2) satisfies
    2 <= i <= m and i < j <= n.  Empty for m = 1.
    """
    p = n - 1
    mask = np.zeros((p, p), dtype=bool)
    for t in range(p):
        if t + 2 > m:
            break
        mask[t, t + 1:] = True
    return mask


def chen_numerator(a: np.ndarray, mask: np.ndarray) -> float:
    """|A|_F^2 + sum over masked pairs of (a_ii a_jj - a_ij^2)."""
    diag = np.diag(a)
    pair_term = float(np.sum(mask * (np.outer(diag, diag) - a * a)))
    return float(np.sum(a * a)) + pair_term


def chen_numerator_gradient(a: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Gradient of chen_numerator along symmetric directions.

    Returns the symmetric matrix G with d/dt N(A + t H) = <G, H>_F for every
    symmetric H.  Validated against central differences in the tests.
    """
    g = 2.0 * a.copy()
    diag = np.diag(a)
    w = (mask | mask.T).astype(float)
    # every masked pair containing p contributes the opposite diagonal entry
    g[np.diag_indices_from(g)] += w @ diag
    g -= w * a
    return g


def chen_functional(a: np.ndarray, n: int, m: int) -> float:
    """The ratio (numerator)/H^2; homogeneous of degree zero."""
    h = float(np.trace(a))
    if abs(h) < 1e-300:
        raise ValueError("trace must be nonzero for the ratio")
    return chen_numerator(a, chen_weight_mask(n, m)) / (h * h)


# -- symmetric-matrix bases -------------------------------------------------

def _symmetric_basis(p: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of symmetric p x p matrices."""
    basis = []
    for i in range(p):
        e = np.zeros((p, p))
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(p):
        for j in range(i + 1, p):
            e = np.zeros((p, p))
            e[i, j] = e[j, i] = inv_sqrt2
            basis.append(e)
    return basis


def _traceless_basis(p: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of traceless symmetric p x p matrices."""
    basis = []
    # Helmert vectors span the diagonal trace-zero subspace
    for k in range(1, p):
        v = np.zeros(p)
        v[:k] = 1.0
        v[k] = -k
        v /= np.sqrt(k * (k + 1))
        basis.append(np.diag(v))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(p):
        for j in range(i + 1, p):
            e = np.zeros((p, p))
            e[i, j] = e[j, i] = inv_sqrt2
            basis.append(e)
    return basis


def _quadratic_in_basis(n: int, m: int, basis: list[np.ndarray],
                        shift: np.ndarray | None = None):
    """Represent the numerator as c^T Q c + 2 b^T c + const over a matrix basis.

    The numerator is a homogeneous quadratic form in the matrix, so on the
    affine family shift + sum_k c_k basis_k it is exactly quadratic in c.
    """
    mask = chen_weight_mask(n, m)
    d = len(basis)
    if shift is None:
        shift = np.zeros_like(basis[0])

    def q(mat):
        return chen_numerator(mat, mask)

    const = q(shift)
    qe = np.array([q(e) for e in basis])
    b = np.empty(d)
    for k, e in enumerate(basis):
        b[k] = 0.5 * (q(shift + e) - const - qe[k])
    qmat = np.empty((d, d))
    for i in range(d):
        qmat[i, i] = qe[i]
        for j in range(i + 1, d):
            cross = 0.5 * (q(basis[i] + basis[j]) - qe[i] - qe[j])
            qmat[i, j] = qmat[j, i] = cross
    return qmat, b, const


def chen_min_exact(n: int, m: int) -> MatrixWitness:
    """Exact minimum of the ratio on the H = 1 slice via the stationarity system.

    Serves as the independent oracle for the descent-based minimizer.  The
    slice restriction of the numerator is a quadratic bounded below (the
    ratio is bounded below by a positive constant), hence its Hessian is
    positive semidefinite and the least-squares stationary point is a global
    minimizer.
    """
    rec = admissible(n, m)
    if not rec.admissible:
        raise ValueError(f"(n, m) = ({n}, {m}) is not admissible")
    p = n - 1
    shift = np.eye(p) / p
    basis = _traceless_basis(p)
    qmat, b, const = _quadratic_in_basis(n, m, basis, shift)
    c, *_ = np.linalg.lstsq(qmat, -b, rcond=None)
    value = float(const + 2.0 * b @ c + c @ qmat @ c)
    mat = shift + sum(ck * e for ck, e in zip(c, basis))
    return MatrixWitness(n, m, mat, value, float(np.trace(mat)))


def chen_min_ratio(n: int, m: int, budget: int = 64, seed: int = 0) -> MatrixWitness:
    """Multi-start projected gradient descent for the ratio on the H = 1 slice.

    `budget` counts random starts.  Coordinates live in a Frobenius-orthonormal
    traceless basis, so the trace constraint is built into the parameterization
    and plain descent with backtracking applies.
    """
    rec = admissible(n, m)
    if not rec.admissible:
        raise ValueError(f"(n, m) = ({n}, {m}) is not admissible")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    p = n - 1
    shift = np.eye(p) / p
    basis = _traceless_basis(p)
    qmat, b, const = _quadratic_in_basis(n, m, basis, shift)

    def value(c):
        return const + 2.0 * b @ c + c @ qmat @ c

    def grad(c):
        return 2.0 * (b + qmat @ c)

    rng = np.random.Generator(np.random.PCG64(seed))
    d = len(basis)
    starts = [np.zeros(d)] + [rng.standard_normal(d) for _ in range(budget - 1)]
    best_c, best_v = None, np.inf
    for c in starts:
        c = c.copy()
        v = value(c)
        for _ in range(500):
            g = grad(c)
            gn = float(np.linalg.norm(g))
            if gn < 1e-14:
                break
            step = 1.0 / (1.0 + gn)
            moved = False
            for _ in range(60):
                cand = c - step * g
                vc = value(cand)
                if vc < v - 1e-4 * step * gn * gn:
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
            if float(np.linalg.norm(cand - c)) < 1e-12:
                c, v = cand, vc
                break
            c, v = cand, vc
        if v < best_v:
            best_v, best_c = v, c
    mat = shift + sum(ck * e for ck, e in zip(best_c, basis))
    return MatrixWitness(n, m, mat, float(best_v), float(np.trace(mat)))


# ---------------------------------------------------------------------------
# the minimal-case functional on traceless norm-1 matrices
# ---------------------------------------------------------------------------

def _brendle_form_matrix(n: int, m: int) -> np.ndarray:
    """Matrix of the numerator quadratic form on the traceless orthonormal basis."""
    basis = _traceless_basis(n - 1)
    qmat, b, const = _quadratic_in_basis(n, m, basis)
    assert abs(const) < 1e-15 and float(np.linalg.norm(b)) < 1e-15
    return qmat


def brendle_min_exact(n: int, m: int) -> MatrixWitness:
    """Smallest eigenvalue of the numerator on {tr A = 0, |A|_F = 1}.

    Eigen-decomposition oracle: the restriction is a quadratic form, so its
    minimum on the unit sphere of the subspace is the bottom eigenvalue.
    """
    rec = admissible(n, m)
    if rec.ineq1 <= 0:
        raise ValueError(f"requires m^2 - mn + 2n - 2 > 0, got {rec.ineq1}")
    qmat = _brendle_form_matrix(n, m)
    w, vecs = np.linalg.eigh(qmat)
    basis = _traceless_basis(n - 1)
    mat = sum(ck * e for ck, e in zip(vecs[:, 0], basis))
    return MatrixWitness(n, m, mat, float(w[0]), float(np.trace(mat)))


def brendle_min(n: int, m: int, budget: int = 64, seed: int = 0) -> MatrixWitness:
    """Multi-start projected descent on the traceless norm-1 slice.

    Rayleigh-quotient minimization with renormalization after every step;
    validated against `brendle_min_exact` in tests.
    """
    rec = admissible(n, m)
    if rec.ineq1 <= 0:
        raise ValueError(f"requires m^2 - mn + 2n - 2 > 0, got {rec.ineq1}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    qmat = _brendle_form_matrix(n, m)
    d = qmat.shape[0]
    rng = np.random.Generator(np.random.PCG64(seed))

    def value(c):
        return float(c @ qmat @ c)

    best_c, best_v = None, np.inf
    for s in range(budget):
        c = rng.standard_normal(d)
        c /= np.linalg.norm(c)
        v = value(c)
        for _ in range(500):
            g = 2.0 * (qmat @ c) - 2.0 * v * c  # sphere-tangent gradient
            gn = float(np.linalg.norm(g))
            if gn < 1e-13:
                break
            step = 1.0 / (1.0 + gn)
            moved = False
            for _ in range(60):
                cand = c - step * g
                cand /= np.linalg.norm(cand)
                vc = value(cand)
                if vc < v - 1e-6 * step * gn * gn:
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
            delta = float(np.linalg.norm(cand - c))
            c, v = cand, vc
            if delta < 1e-12:
                break
        if v < best_v:
            best_v, best_c = v, c
    basis = _traceless_basis(n - 1)
    mat = sum(ck * e for ck, e in zip(best_c, basis))
    return MatrixWitness(n, m, mat, float(best_v), float(np.trace(mat)))
