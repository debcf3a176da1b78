"""Elasticity coefficient sets and the hypotheses imposed on them.

The stiffness tensor is fully symmetric (``a_ijkl = a_jikl = a_klij``),
which in 2D leaves six independent components; storing exactly those six
makes the symmetry hold by construction.  This module audits, for a
given coefficient set:

* strong ellipticity   -- positivity of ``sum a_ijkl xi_i eta_j xi_k eta_l``
  over unit direction pairs;
* strong convexity     -- positivity of ``sum a_ijkl e_ij e_kl`` over
  symmetric matrices, via the 3x3 Voigt matrix;
* the hyperbolicity discriminant
  ``Delta = (a1212 + a1122)^2 - 4 a1112 a1222``;
* eigenpairs of the quadratic matrix pencil
  ``L11 th^2 + L12 th + L22`` together with the nonsingularity measure
  ``|det(z, conj z)|`` per root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ucp2d.fields import ScalarField, parse
from ucp2d.geometry import Rect

__all__ = [
    "ElasticityCoefficients",
    "PencilEigenpairs",
    "lambda_matrices",
    "ellipticity_margin",
    "convexity_margin",
    "hyperbolicity_delta",
    "delta_field",
    "pencil_eigenpairs",
    "random_elliptic_tensor",
]

A_NAMES = ("a1111", "a1112", "a1122", "a1212", "a1222", "a2222")
B_NAMES = tuple(f"b{i}{j}{k}" for i in (1, 2) for j in (1, 2) for k in (1, 2))
C_NAMES = ("c11", "c12", "c21", "c22")

_ZERO = ScalarField.constant(0.0)


def _as_field(v):
    if isinstance(v, ScalarField):
        return v
    if isinstance(v, str):
        return parse(v)
    return ScalarField.constant(v)


@dataclass(frozen=True)
class ElasticityCoefficients:
    """Six independent stiffness components plus lower-order terms.

    ``b_ijk`` multiplies ``d_k u_j`` in equation row ``i``; ``c_ij``
    multiplies ``u_j`` in row ``i``.  All default to zero.
    """

    a1111: ScalarField
    a1112: ScalarField
    a1122: ScalarField
    a1212: ScalarField
    a1222: ScalarField
    a2222: ScalarField
    b: dict = field(default_factory=dict)  # (i, j, k) -> ScalarField
    c: dict = field(default_factory=dict)  # (i, j) -> ScalarField

    def a(self, i, j, k, l):
        """Resolve any index quadruple through the full symmetry."""
        p1 = tuple(sorted((i, j)))
        p2 = tuple(sorted((k, l)))
        p1, p2 = sorted((p1, p2))
        name = f"a{p1[0]}{p1[1]}{p2[0]}{p2[1]}"
        return getattr(self, name)

    def b_(self, i, j, k):
        return self.b.get((i, j, k), _ZERO)

    def c_(self, i, j):
        return self.c.get((i, j), _ZERO)

    def a_array(self, x, y):
        """Full 2x2x2x2 tensor of values at a point (or grid of points)."""
        vals = {name: getattr(self, name)(x, y) for name in A_NAMES}
        shape = np.shape(vals["a1111"])
        out = np.empty((2, 2, 2, 2) + shape)
        for i in (1, 2):
            for j in (1, 2):
                for k in (1, 2):
                    for l in (1, 2):
                        p1 = tuple(sorted((i, j)))
                        p2 = tuple(sorted((k, l)))
                        p1, p2 = sorted((p1, p2))
                        out[i - 1, j - 1, k - 1, l - 1] = vals[
                            f"a{p1[0]}{p1[1]}{p2[0]}{p2[1]}"
                        ]
        return out

    @classmethod
    def from_components(cls, tensor, lower_order=None):
        """Build from name->expression mappings.

        ``tensor`` must supply all six a-components; ``lower_order`` may
        supply any of ``b111..b222`` and ``c11..c22``.
        """
        missing = [n for n in A_NAMES if n not in tensor]
        if missing:
            raise ValueError(f"missing tensor components: {', '.join(missing)}")
        unknown = [n for n in tensor if n not in A_NAMES]
        if unknown:
            raise ValueError(f"unknown tensor components: {', '.join(unknown)}")
        a = {n: _as_field(tensor[n]) for n in A_NAMES}
        b, c = {}, {}
        for name, expr in (lower_order or {}).items():
            if name in B_NAMES:
                i, j, k = (int(ch) for ch in name[1:])
                b[(i, j, k)] = _as_field(expr)
            elif name in C_NAMES:
                i, j = (int(ch) for ch in name[1:])
                c[(i, j)] = _as_field(expr)
            else:
                raise ValueError(f"unknown lower-order coefficient {name!r}")
        return cls(b=b, c=c, **a)

    @classmethod
    def isotropic(cls, mu, lam):
        """Stiffness of an isotropic medium (no lower-order terms)."""
        mu, lam = _as_field(mu), _as_field(lam)
        return cls(
            a1111=2.0 * mu + lam,
            a1112=_ZERO,
            a1122=lam,
            a1212=mu,
            a1222=_ZERO,
            a2222=2.0 * mu + lam,
        )

    def with_divergence_form_lower_order(self):
        """Lower-order terms produced by expanding div(a grad u).

        ``b_ikl = dx a_i1kl + dy a_i2kl``; zeroth-order terms stay zero.
        Constant-coefficient tensors come back unchanged apart from
        explicit zero entries.
        """
        b = {}
        for i in (1, 2):
            for k in (1, 2):
                for l in (1, 2):
                    f = self.a(i, 1, k, l).diff("x") + self.a(i, 2, k, l).diff("y")
                    b[(i, k, l)] = f
        return ElasticityCoefficients(
            a1111=self.a1111,
            a1112=self.a1112,
            a1122=self.a1122,
            a1212=self.a1212,
            a1222=self.a1222,
            a2222=self.a2222,
            b=b,
            c=dict(self.c),
        )


@dataclass(frozen=True)
class PencilEigenpairs:
    """Roots and null vectors of the quadratic pencil at one point.

    ``conditioning[r] = |det([z, conj z])|`` for the unit null vector of
    root ``r``; the continuation hypothesis needs it bounded away from
    zero.  ``nullity[r]`` is the geometric null-space dimension of the
    pencil matrix at the root; values other than 1 flag a defective or
    totally degenerate root (reported, never silently patched).
    """

    roots: np.ndarray        # (4,) complex
    vectors: np.ndarray      # (4, 2) complex, unit columns per root
    conditioning: np.ndarray  # (4,) float
    nullity: np.ndarray      # (4,) int
    residuals: np.ndarray    # (4,) float, ||P(th) z||

    @property
    def defective(self):
        return bool(np.any(self.nullity != 1))


def lambda_matrices(coeffs, x, y):
    """The three symmetric 2x2 blocks of the second-order symbol.

    Returns ``(L11, L12, L22)`` with::

        L11 = [[a1111, a1112], [a1112, a1212]]
        L12 = [[2 a1112, a1212 + a1122], [a1212 + a1122, 2 a1222]]
        L22 = [[a1212, a1222], [a1222, a2222]]
    """
    a1111 = coeffs.a1111(x, y)
    a1112 = coeffs.a1112(x, y)
    a1122 = coeffs.a1122(x, y)
    a1212 = coeffs.a1212(x, y)
    a1222 = coeffs.a1222(x, y)
    a2222 = coeffs.a2222(x, y)
    l11 = np.array([[a1111, a1112], [a1112, a1212]])
    l12 = np.array([[2 * a1112, a1212 + a1122], [a1212 + a1122, 2 * a1222]])
    l22 = np.array([[a1212, a1222], [a1222, a2222]])
    return l11, l12, l22


def _direction_form(a4, cos_a, sin_a, cos_b, sin_b):
    """Q(alpha, beta) = xi.M(eta).xi for direction angle grids.

    ``a4``: (2,2,2,2) tensor values at one point; returns (len a, len b).
    """
    xi = np.stack([cos_a, sin_a], axis=-1)   # (A, 2)
    eta = np.stack([cos_b, sin_b], axis=-1)  # (B, 2)
    m = np.einsum("ijkl,bj,bl->bik", a4, eta, eta)
    return np.einsum("ai,bik,ak->ab", xi, m, xi)


def _newton_refine_direction(a4, alpha, beta, q0):
    """One safeguarded Newton step on Q(alpha, beta); returns min found."""
    h = 1e-4

    def q(a, b):
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        xi = np.array([ca, sa])
        eta = np.array([cb, sb])
        m = np.einsum("ijkl,j,l->ik", a4, eta, eta)
        return float(xi @ m @ xi)

    g = np.array(
        [
            (q(alpha + h, beta) - q(alpha - h, beta)) / (2 * h),
            (q(alpha, beta + h) - q(alpha, beta - h)) / (2 * h),
        ]
    )
    q_c = q(alpha, beta)
    hess = np.array(
        [
            [
                (q(alpha + h, beta) - 2 * q_c + q(alpha - h, beta)) / h**2,
                (
                    q(alpha + h, beta + h)
                    - q(alpha + h, beta - h)
                    - q(alpha - h, beta + h)
                    + q(alpha - h, beta - h)
                )
                / (4 * h**2),
            ],
            [0.0, (q(alpha, beta + h) - 2 * q_c + q(alpha, beta - h)) / h**2],
        ]
    )
    hess[1, 0] = hess[0, 1]
    try:
        evals = np.linalg.eigvalsh(hess)
        if evals.min() <= 1e-12 * max(1.0, abs(evals).max()):
            return q0  # flat or indefinite curvature: keep the grid value
        step = np.linalg.solve(hess, -g)
    except np.linalg.LinAlgError:
        return q0
    cap = 2 * np.pi / 360
    norm = np.hypot(*step)
    if norm > cap:
        step *= cap / norm
    q_new = q(alpha + step[0], beta + step[1])
    return min(q0, q_new)


def ellipticity_margin(coeffs, region, n):
    """Certified lower margin of the strong-ellipticity form on a region.

    Minimises the direction form over an ``n x n`` spatial grid and a
    360 x 360 grid of direction angles (the form has period pi in each
    angle), then applies one safeguarded Newton refinement at each
    spatial point's angular minimum.  A positive return certifies the
    ellipticity constant up to sampling resolution.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    xs, ys = region.grid(n)
    angles = np.linspace(0.0, np.pi, 360, endpoint=False)
    cos_t, sin_t = np.cos(angles), np.sin(angles)
    best = np.inf
    for xv in xs:
        for yv in ys:
            a4 = coeffs.a_array(float(xv), float(yv))
            q = _direction_form(a4, cos_t, sin_t, cos_t, sin_t)
            ia, ib = np.unravel_index(np.argmin(q), q.shape)
            local = _newton_refine_direction(
                a4, angles[ia], angles[ib], float(q[ia, ib])
            )
            best = min(best, local)
    return best


def _voigt_matrix(coeffs, x, y):
    a1111 = coeffs.a1111(x, y)
    a1112 = coeffs.a1112(x, y)
    a1122 = coeffs.a1122(x, y)
    a1212 = coeffs.a1212(x, y)
    a1222 = coeffs.a1222(x, y)
    a2222 = coeffs.a2222(x, y)
    r2 = np.sqrt(2.0)
    return np.array(
        [
            [a1111, a1122, r2 * a1112],
            [a1122, a2222, r2 * a1222],
            [r2 * a1112, r2 * a1222, 2 * a1212],
        ]
    )


def convexity_margin(coeffs, region, n):
    """Minimum over the region of the best strong-convexity constant.

    In the basis ``(e11, e22, sqrt2 e12)`` the convexity form is the 3x3
    Voigt matrix, so its smallest eigenvalue at a point equals the
    sharpest constant there.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    xs, ys = region.grid(n)
    best = np.inf
    for xv in xs:
        for yv in ys:
            v = _voigt_matrix(coeffs, float(xv), float(yv))
            best = min(best, float(np.linalg.eigvalsh(v)[0]))
    return best


def hyperbolicity_delta(coeffs, x, y):
    """``Delta = (a1212 + a1122)^2 - 4 a1112 a1222`` at a point."""
    s = coeffs.a1212(x, y) + coeffs.a1122(x, y)
    return s * s - 4.0 * coeffs.a1112(x, y) * coeffs.a1222(x, y)


def delta_field(coeffs):
    """The discriminant as a symbolic field (for exact differentiation)."""
    s = coeffs.a1212 + coeffs.a1122
    return s * s - 4.0 * coeffs.a1112 * coeffs.a1222


def _pencil_matrix(l11, l12, l22, theta):
    return l11 * theta**2 + l12 * theta + l22


def pencil_eigenpairs(coeffs, x, y, nullity_tol=1e-8):
    """All four eigenpairs of ``L11 th^2 + L12 th + L22`` at ``(x, y)``.

    Roots come from the eigenvalues of the 4x4 companion linearisation
    and are polished by a multiplicity-tolerant Newton iteration on the
    scalar quartic ``det``; null vectors are smallest right singular
    vectors of the pencil matrix at each root.
    """
    l11, l12, l22 = lambda_matrices(coeffs, x, y)
    scale = max(np.abs(l11).max(), np.abs(l12).max(), np.abs(l22).max())
    if scale == 0.0:
        raise ValueError("zero pencil")
    if abs(np.linalg.det(l11)) <= 1e-14 * scale**2:
        raise ValueError("leading block L11 is singular at the point")

    inv11 = np.linalg.inv(l11)
    companion = np.zeros((4, 4))
    companion[:2, 2:] = np.eye(2)
    companion[2:, :2] = -inv11 @ l22
    companion[2:, 2:] = -inv11 @ l12
    roots = np.linalg.eigvals(companion).astype(complex)

    # quartic det(L(th)) with descending coefficients; convolve keeps
    # leading zeros that poly1d-based helpers would trim
    p11 = np.array([l11[0, 0], l12[0, 0], l22[0, 0]])
    p12 = np.array([l11[0, 1], l12[0, 1], l22[0, 1]])
    p22 = np.array([l11[1, 1], l12[1, 1], l22[1, 1]])
    quartic = np.convolve(p11, p22) - np.convolve(p12, p12)
    dq = np.polyder(quartic)
    d2q = np.polyder(dq)

    def polish(th):
        # Newton on p/p' converges quadratically even at multiple roots
        for _ in range(50):
            p = np.polyval(quartic, th)
            p1 = np.polyval(dq, th)
            p2 = np.polyval(d2q, th)
            denom = p1 * p1 - p * p2
            if denom == 0:
                break
            step = p * p1 / denom
            th = th - step
            if abs(step) <= 1e-16 * (1.0 + abs(th)):
                break
        return th

    roots = np.array([polish(th) for th in roots])

    vectors = np.zeros((4, 2), dtype=complex)
    conditioning = np.zeros(4)
    nullity = np.zeros(4, dtype=int)
    residuals = np.zeros(4)
    for r, th in enumerate(roots):
        pm = _pencil_matrix(l11.astype(complex), l12.astype(complex), l22.astype(complex), th)
        _, sv, vh = np.linalg.svd(pm)
        z = vh[-1].conj()
        z = z / np.linalg.norm(z)
        vectors[r] = z
        det_zz = z[0] * np.conj(z[1]) - np.conj(z[0]) * z[1]
        conditioning[r] = abs(det_zz)
        local_scale = scale * max(1.0, abs(th)) ** 2
        nullity[r] = int(np.sum(sv <= nullity_tol * local_scale))
        residuals[r] = float(np.linalg.norm(pm @ z))
    return PencilEigenpairs(
        roots=roots,
        vectors=vectors,
        conditioning=conditioning,
        nullity=nullity,
        residuals=residuals,
    )


def random_elliptic_tensor(rng, anisotropy=0.25, require_delta_positive=True,
                           max_tries=200):
    """Random constant coefficient set with a certified ellipticity margin.

    Perturbs an isotropic base tensor componentwise and rejects samples
    whose direction-form minimum (dense angle scan) or discriminant is
    not safely positive.
    """
    probe = Rect.square(0.0, 0.0, 1e-3)
    for _ in range(max_tries):
        mu = rng.uniform(0.5, 2.0)
        lam = rng.uniform(-0.4 * mu, 2.0)
        base = {
            "a1111": 2 * mu + lam,
            "a1112": 0.0,
            "a1122": lam,
            "a1212": mu,
            "a1222": 0.0,
            "a2222": 2 * mu + lam,
        }
        delta = {k: rng.uniform(-anisotropy, anisotropy) * mu for k in base}
        comp = {k: base[k] + delta[k] for k in base}
        coeffs = ElasticityCoefficients.from_components(comp)
        if ellipticity_margin(coeffs, probe, 2) <= 0.01 * mu:
            continue
        if require_delta_positive and hyperbolicity_delta(coeffs, 0.0, 0.0) <= 0.01:
            continue
        return coeffs
    raise RuntimeError("failed to sample a strongly elliptic tensor")
