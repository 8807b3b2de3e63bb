"""Curvature tensors of warped torus metrics and of generic coordinate charts.

Two independent engines live here.  `riemann_exact` evaluates the closed-form
orthonormal components of the warped torus family

    g = eps^2 f(r)^2 g_sphere + dr^2 + u(r)^(4/m) (dx_1^2 + ... + dx_{m-1}^2)

while `riemann_fd` differentiates arbitrary chart metrics with nested
fourth-order central differences and knows nothing about the family.  Tests
play them against each other.

Conventions.  Rm[a, b, c, d] = g(R(e_a, e_b) e_d, e_c) with

    R^e_{dab} = d_a Gamma^e_{bd} - d_b Gamma^e_{ad}
                + Gamma^e_{ap} Gamma^p_{bd} - Gamma^e_{bp} Gamma^p_{ad},

so the round unit sphere has Rm(e_i, e_j, e_i, e_j) = +1 and
ricci[a][b] = sum_c Rm[c][a][c][b] is positive on spheres.

Orthonormal frame order for the warped torus family: the n-m sphere
directions first, then r, then the m-1 torus directions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "RadialProfile",
    "gaussian_profile",
    "cosh_power_profile",
    "constant_profile",
    "WarpedTorusMetric",
    "ChristoffelTable",
    "RiemannData",
    "CoordinateMetric",
    "christoffel_exact",
    "riemann_exact",
    "riemann_fd",
    "ricci_scalar",
    "laplacian_fd",
    "to_subchart",
    "compare_exact_vs_fd",
    "kulkarni_nomizu",
    "random_curvature_tensor",
    "constant_curvature_riemann",
    "product_sphere_flat_riemann",
]


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """A smooth function of r carrying its analytic first two derivatives."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]

    def __call__(self, r):
        return self.value(r)


def gaussian_profile(a: float, name: str | None = None) -> RadialProfile:
    """exp(a r^2) with exact derivatives."""
    a = float(a)

    def v(r):
        return np.exp(a * np.asarray(r, dtype=float) ** 2)

    def v1(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * a * r * np.exp(a * r ** 2)

    def v2(r):
        r = np.asarray(r, dtype=float)
        return (2.0 * a + 4.0 * a * a * r * r) * np.exp(a * r ** 2)

    return RadialProfile(name or f"exp({a}*r^2)", v, v1, v2)


def cosh_power_profile(omega: float, power: float, name: str | None = None) -> RadialProfile:
    """cosh(omega r)^power with exact derivatives.

    Log-derivative form keeps the expressions stable for negative powers:
    (log v)' = p w tanh(w r), (log v)'' = p w^2 sech^2(w r).
    """
    w, p = float(omega), float(power)

    def v(r):
        return np.cosh(w * np.asarray(r, dtype=float)) ** p

    def v1(r):
        r = np.asarray(r, dtype=float)
        return p * w * np.tanh(w * r) * np.cosh(w * r) ** p

    def v2(r):
        r = np.asarray(r, dtype=float)
        t = np.tanh(w * r)
        sech2 = 1.0 / np.cosh(w * r) ** 2
        return ((p * w * t) ** 2 + p * w * w * sech2) * np.cosh(w * r) ** p

    return RadialProfile(name or f"cosh({w}*r)^{p}", v, v1, v2)


def constant_profile(c: float = 1.0, name: str | None = None) -> RadialProfile:
    c = float(c)
    return RadialProfile(
        name or f"const({c})",
        lambda r: np.full_like(np.asarray(r, dtype=float), c),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    )


# ---------------------------------------------------------------------------
# the warped torus family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarpedTorusMetric:
    """dr^2 + eps^2 f^2(r) g_sphere + u^(4/m)(r) (flat torus), on a finite r interval.

    The sphere factor S^(n-m) carries its radius-1 round metric scaled by
    eps^2 f^2(r); the torus factor contributes m-1 circle directions.
    """

    n: int
    m: int
    epsilon: float
    f_profile: RadialProfile
    u_profile: RadialProfile
    r_domain: tuple[float, float]

    def __post_init__(self):
        if not (1 <= self.m <= self.n - 1):
            raise ValueError(f"require 1 <= m <= n-1, got (n, m) = ({self.n}, {self.m})")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        lo, hi = self.r_domain
        if not lo < hi:
            raise ValueError("r_domain must be a nondegenerate interval")

    @property
    def sphere_dim(self) -> int:
        return self.n - self.m

    @property
    def torus_dim(self) -> int:
        return self.m - 1

    def require_in_domain(self, r: float) -> None:
        lo, hi = self.r_domain
        if not (lo <= r <= hi):
            raise ValueError(f"r = {r} outside domain [{lo}, {hi}]")

    def frame_labels(self) -> tuple[str, ...]:
        return (("sphere",) * self.sphere_dim + ("r",)
                + ("torus",) * self.torus_dim)

    def coordinate_frame_indices(self) -> tuple[int, ...]:
        """Indices of (e_r, e_x1, ..., e_x(m-1)) in the orthonormal frame order."""
        return tuple(range(self.sphere_dim, self.n))

    def to_json_dict(self, profile_case: str | None = None,
                     lam: float | None = None,
                     params: dict | None = None) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "epsilon": self.epsilon,
            "profile": {
                "case": profile_case or "custom",
                "lambda": lam,
                "params": params or {"f": self.f_profile.name, "u": self.u_profile.name},
            },
            "r_domain": list(self.r_domain),
        }


@dataclass(frozen=True)
class ChristoffelTable:
    """Nonzero Christoffel symbols of the warped torus family at a point.

    Block indices: alpha/beta for sphere directions, r, and i/j for torus
    directions.  Symbols proportional to a Kronecker delta are stored by
    their scalar coefficient; the sphere-internal symbols equal those of the
    round chart on S^(n-m) and are delegated to it.
    """

    r: float
    sphere_r: float          # Gamma^beta_{alpha r} = (f'/f) delta
    torus_r: float           # Gamma^j_{i r} = (2u'/(m u)) delta
    r_torus: float           # Gamma^r_{i j} = -(2u'/(m u)) u^(4/m) delta
    r_sphere_coeff: float    # Gamma^r_{alpha beta} = coeff * h_{alpha beta}
    sphere_internal: str = "round-chart symbols of S^(n-m)"
    zeros: tuple[str, ...] = (
        "Gamma^i_{alpha r}", "Gamma^r_{alpha r}", "Gamma^beta_{alpha i}",
        "Gamma^j_{alpha i}", "Gamma^r_{alpha i}", "Gamma^alpha_{r r}",
        "Gamma^r_{r r}", "Gamma^i_{r r}", "Gamma^alpha_{r i}",
        "Gamma^r_{r i}", "Gamma^alpha_{i j}", "Gamma^k_{i j}",
    )

    def as_dict(self) -> dict:
        out = {
            "Gamma^beta_{alpha r}": self.sphere_r,
            "Gamma^j_{i r}": self.torus_r,
            "Gamma^r_{i j}": self.r_torus,
            "Gamma^r_{alpha beta} / h_{alpha beta}": self.r_sphere_coeff,
        }
        out.update({name: 0.0 for name in self.zeros})
        return out


def christoffel_exact(metric: WarpedTorusMetric, r: float) -> ChristoffelTable:
    """Closed-form Christoffel symbols at radius r."""
    metric.require_in_domain(r)
    f, f1 = metric.f_profile(r), metric.f_profile.d1(r)
    u, u1 = metric.u_profile(r), metric.u_profile.d1(r)
    m = metric.m
    tors = 2.0 * u1 / (m * u)
    return ChristoffelTable(
        r=float(r),
        sphere_r=float(f1 / f),
        torus_r=float(tors),
        r_torus=float(-tors * u ** (4.0 / m)),
        r_sphere_coeff=float(-metric.epsilon ** 2 * f * f1),
    )


# ---------------------------------------------------------------------------
# curvature data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannData:
    """Orthonormal-frame curvature components with their contractions."""

    dim: int
    components: np.ndarray  # shape (dim,) * 4
    ricci: np.ndarray       # shape (dim, dim)
    scalar: float

    @classmethod
    def from_components(cls, components: np.ndarray) -> "RiemannData":
        components = np.asarray(components, dtype=float)
        dim = components.shape[0]
        if components.shape != (dim,) * 4:
            raise ValueError("components must be a 4-index table over one dimension")
        ricci = np.einsum("cacb->ab", components)
        return cls(dim, components, ricci, float(np.trace(ricci)))

    def symmetry_residuals(self) -> dict[str, float]:
        r = self.components
        scale = float(np.max(np.abs(r))) or 1.0
        bianchi = r + np.einsum("bcad->abcd", r) + np.einsum("cabd->abcd", r)
        return {
            "antisym_ab": float(np.max(np.abs(r + np.einsum("bacd->abcd", r)))),
            "antisym_cd": float(np.max(np.abs(r + np.einsum("abdc->abcd", r)))),
            "pair": float(np.max(np.abs(r - np.einsum("cdab->abcd", r)))),
            "bianchi": float(np.max(np.abs(bianchi))),
            "ricci": float(np.max(np.abs(self.ricci - np.einsum("cacb->ab", r)))),
            "scalar": abs(self.scalar - float(np.trace(np.einsum("cacb->ab", r)))),
            "scale": scale,
        }

    def validate(self, tol: float = 1e-9, relative: bool = False) -> dict[str, float]:
        """Raise when any symmetry or contraction residual exceeds tol.

        With relative=True the bound is tol * max(1, component scale), which
        is the right yardstick for finite-difference output.
        """
        res = self.symmetry_residuals()
        bound = tol * max(1.0, res["scale"]) if relative else tol
        bad = {k: v for k, v in res.items()
               if k != "scale" and v > bound}
        if bad:
            raise ValueError(f"curvature symmetry residuals exceed {bound:g}: {bad}")
        return res


def ricci_scalar(riemann: RiemannData) -> tuple[np.ndarray, float]:
    """Recompute the contractions; idempotent with the stored fields."""
    ricci = np.einsum("cacb->ab", riemann.components)
    return ricci, float(np.trace(ricci))


def riemann_exact(metric: WarpedTorusMetric, r: float) -> RiemannData:
    """Closed-form orthonormal curvature components of the warped torus family.

    Frame order: sphere block, then e_r, then the torus block.  Only the
    sectional pattern R[a,b,a,b] (and its symmetry images) is nonzero.
    """
    metric.require_in_domain(r)
    n, m = metric.n, metric.m
    ns, nt = metric.sphere_dim, metric.torus_dim
    f, f1, f2 = (metric.f_profile(r), metric.f_profile.d1(r), metric.f_profile.d2(r))
    u, u1, u2 = (metric.u_profile(r), metric.u_profile.d1(r), metric.u_profile.d2(r))
    lf1, lu1 = f1 / f, u1 / u
    a = 2.0 / m

    k_ss = 1.0 / (metric.epsilon ** 2 * f * f) - lf1 * lf1
    k_st = -a * lf1 * lu1
    k_sr = -f2 / f
    k_rt = -a * (u2 / u) - a * (a - 1.0) * lu1 * lu1
    k_tt = -(a * lu1) ** 2

    labels = metric.frame_labels()

    def pair_value(la: str, lb: str) -> float:
        key = frozenset((la, lb))
        if key == {"sphere"}:
            return k_ss
        if key == {"sphere", "torus"}:
            return k_st
        if key == {"sphere", "r"}:
            return k_sr
        if key == {"r", "torus"}:
            return k_rt
        if key == {"torus"}:
            return k_tt
        raise AssertionError(key)

    comp = np.zeros((n, n, n, n))
    for a_idx in range(n):
        for b_idx in range(a_idx + 1, n):
            k = float(pair_value(labels[a_idx], labels[b_idx]))
            comp[a_idx, b_idx, a_idx, b_idx] = k
            comp[b_idx, a_idx, b_idx, a_idx] = k
            comp[a_idx, b_idx, b_idx, a_idx] = -k
            comp[b_idx, a_idx, a_idx, b_idx] = -k
    return RiemannData.from_components(comp)


# ---------------------------------------------------------------------------
# finite-difference engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateMetric:
    """A chart metric: point -> symmetric positive-definite matrix."""

    dim: int
    g: Callable[[np.ndarray], np.ndarray]
    chart_box: tuple[tuple[float, float], ...]

    def require_inside(self, x: np.ndarray, margin: float = 0.0) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},)")
        for xi, (lo, hi) in zip(x, self.chart_box):
            if not (lo + margin <= xi <= hi - margin):
                raise ValueError(f"coordinate {xi} outside chart box "
                                 f"[{lo}, {hi}] with margin {margin}")


def _d1_stencil(fn, x, axis, h):
    """Fourth-order central first derivative along one axis."""
    e = np.zeros_like(x)
    e[axis] = 1.0
    return (-fn(x + 2 * h * e) + 8.0 * fn(x + h * e)
            - 8.0 * fn(x - h * e) + fn(x - 2 * h * e)) / (12.0 * h)


def _christoffel_at(metric: CoordinateMetric, x: np.ndarray, h: float) -> np.ndarray:
    gmat = metric.g(x)
    ginv = np.linalg.inv(gmat)
    dg = np.stack([_d1_stencil(metric.g, x, a, h) for a in range(metric.dim)])
    # Gamma^k_{ij} = 1/2 g^{kl} (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
    sym = np.einsum("ijl->ijl", dg) + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, sym)


def riemann_fd(metric: CoordinateMetric, x: Sequence[float], step: float = 1e-3) -> RiemannData:
    """Riemann tensor of a chart metric by nested central differences.

    Christoffel symbols come from fourth-order differences of g; their
    derivatives from fourth-order differences of the symbols, so g is
    sampled up to 4*step away from x.  Components are returned in the
    orthonormal frame obtained from the Cholesky factor of g(x).
    """
    x = np.asarray(x, dtype=float)
    metric.require_inside(x, margin=4.5 * step)
    gmat = metric.g(x)
    try:
        chol = np.linalg.cholesky(gmat)
    except np.linalg.LinAlgError as exc:
        raise ValueError("metric is not positive definite at the base point") from exc

    dim = metric.dim
    gamma = _christoffel_at(metric, x, step)
    dgamma = np.stack([
        _d1_stencil(lambda y: _christoffel_at(metric, y, step), x, a, step)
        for a in range(dim)
    ])  # dgamma[a, e, b, d] = d_a Gamma^e_{bd}

    # R^e_{dab} = d_a Gamma^e_{bd} - d_b Gamma^e_{ad} + Gamma * Gamma terms
    r_updown = (np.einsum("aebd->edab", dgamma) - np.einsum("bead->edab", dgamma)
                + np.einsum("eap,pbd->edab", gamma, gamma)
                - np.einsum("ebp,pad->edab", gamma, gamma))
    rm = np.einsum("ce,edab->abcd", gmat, r_updown)

    frame = np.linalg.inv(chol).T  # columns are orthonormal frame vectors
    r_on = np.einsum("pqrs,pa,qb,rc,sd->abcd", rm, frame, frame, frame, frame)
    return RiemannData.from_components(r_on)


def laplacian_fd(metric: CoordinateMetric, fn: Callable[[np.ndarray], float],
                 x: Sequence[float], step: float = 1e-3) -> float:
    """Laplace-Beltrami of a scalar chart function by central differences.

    Delta f = g^{ab} (d_a d_b f - Gamma^c_{ab} d_c f).
    """
    x = np.asarray(x, dtype=float)
    metric.require_inside(x, margin=4.5 * step)
    dim = metric.dim
    ginv = np.linalg.inv(metric.g(x))
    gamma = _christoffel_at(metric, x, step)

    grad = np.array([_d1_stencil(fn, x, a, step) for a in range(dim)])
    hess = np.empty((dim, dim))
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = step
        hess[a, a] = (-fn(x + 2 * e) + 16.0 * fn(x + e) - 30.0 * fn(x)
                      + 16.0 * fn(x - e) - fn(x - 2 * e)) / (12.0 * step ** 2)
        for b in range(a + 1, dim):
            hess[a, b] = hess[b, a] = _d1_stencil(
                lambda y: _d1_stencil(fn, y, b, step), x, a, step)
    return float(np.einsum("ab,ab->", ginv, hess)
                 - np.einsum("ab,cab,c->", ginv, gamma, grad))


# ---------------------------------------------------------------------------
# chart export for cross-checks
# ---------------------------------------------------------------------------

def to_subchart(metric: WarpedTorusMetric, max_torus: int = 2):
    """Explicit chart through a great 2-sphere of the sphere factor.

    Coordinates (theta, phi, r, x_1, ..., x_t) with t = min(m-1, max_torus):

        g = diag(eps^2 f^2, eps^2 f^2 sin^2 theta, 1, u^(4/m), ...).

    The great 2-sphere is the fixed-point set of an isometric reflection of
    S^(n-m), hence totally geodesic, so the chart's intrinsic curvature
    components coincide with the ambient ones on the retained index classes.
    Every distinct component class of the family survives whenever t >= 2
    (t >= 1 suffices for m = 2, which has no torus-torus pairs).

    Returns (CoordinateMetric, labels) with labels matching frame positions.
    """
    if metric.sphere_dim < 2:
        raise ValueError("need a sphere factor of dimension >= 2 for the chart")
    t = min(metric.torus_dim, max_torus)
    eps2 = metric.epsilon ** 2
    four_over_m = 4.0 / metric.m
    f, u = metric.f_profile, metric.u_profile

    def g(x):
        theta, r = x[0], x[2]
        fv = float(f(r))
        uv = float(u(r))
        diag = np.concatenate([
            [eps2 * fv * fv, eps2 * fv * fv * np.sin(theta) ** 2, 1.0],
            np.full(t, uv ** four_over_m),
        ])
        return np.diag(diag)

    box = ((0.3, np.pi - 0.3), (-4.0, 4.0), metric.r_domain) + ((-4.0, 4.0),) * t
    labels = ("sphere", "sphere", "r") + ("torus",) * t
    return CoordinateMetric(3 + t, g, box), labels


def compare_exact_vs_fd(metric: WarpedTorusMetric, r: float, step: float = 1e-3,
                        theta: float = 1.0) -> float:
    """Max componentwise discrepancy between the two engines at radius r.

    Builds the expected chart-frame tensor from the exact class values and
    compares against the finite-difference result entry by entry, scaling
    each difference by max(1, |expected entry|).
    """
    chart, labels = to_subchart(metric)
    exact = riemann_exact(metric, r)

    # exact class values via representative ambient indices
    rep = {"sphere": 0, "r": metric.sphere_dim, "torus": metric.sphere_dim + 1}
    second_rep = {"sphere": 1, "r": metric.sphere_dim,
                  "torus": metric.sphere_dim + 2 if metric.torus_dim >= 2 else None}

    dim = chart.dim
    expected = np.zeros((dim,) * 4)
    for a in range(dim):
        for b in range(a + 1, dim):
            la, lb = labels[a], labels[b]
            ia = rep[la]
            ib = rep[lb] if la != lb else second_rep[lb]
            k = exact.components[ia, ib, ia, ib]
            expected[a, b, a, b] = expected[b, a, b, a] = k
            expected[a, b, b, a] = expected[b, a, a, b] = -k

    x = np.zeros(dim)
    x[0], x[2] = theta, r
    fd = riemann_fd(chart, x, step=step)
    denom = np.maximum(1.0, np.abs(expected))
    return float(np.max(np.abs(fd.components - expected) / denom))


# ---------------------------------------------------------------------------
# algebraic curvature tensors for property tests
# ---------------------------------------------------------------------------

def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Curvature-type product of two symmetric matrices.

    The result carries every Riemann symmetry including the first Bianchi
    identity, which makes it the right generator for random test tensors.
    """
    return (np.einsum("ac,bd->abcd", a, b) + np.einsum("bd,ac->abcd", a, b)
            - np.einsum("ad,bc->abcd", a, b) - np.einsum("bc,ad->abcd", a, b))


def random_curvature_tensor(dim: int, rng: np.random.Generator) -> RiemannData:
    """Random tensor with all Riemann symmetries, as a sum of two products."""
    mats = []
    for _ in range(4):
        s = rng.standard_normal((dim, dim))
        mats.append(0.5 * (s + s.T))
    comp = kulkarni_nomizu(mats[0], mats[1]) + kulkarni_nomizu(mats[2], mats[3])
    return RiemannData.from_components(comp)


def constant_curvature_riemann(dim: int, k: float) -> RiemannData:
    """Space form of sectional curvature k: R = (k/2) * (g kn g)."""
    eye = np.eye(dim)
    return RiemannData.from_components(0.5 * k * kulkarni_nomizu(eye, eye))


def product_sphere_flat_riemann(sphere_dim: int, radius: float, flat_dim: int) -> RiemannData:
    """Round sphere of the given radius times a flat factor, orthonormal frame."""
    dim = sphere_dim + flat_dim
    block = np.zeros((dim, dim))
    block[:sphere_dim, :sphere_dim] = np.eye(sphere_dim)
    return RiemannData.from_components(
        0.5 / radius ** 2 * kulkarni_nomizu(block, block))
