"""Model manifolds and the curvature data entering the Jacobi operator.

Two families are supported: constant-curvature spaces (sphere kappa > 0,
flat kappa = 0, hyperbolic kappa < 0) and a synthetic family whose metric
is engineered so that a prescribed symmetric matrix potential V(s) appears
as the orthogonal block of the curvature term along a straight geodesic.
Geodesics are parametrized on [0, 1] at constant speed r = d(x, y), so the
energy of a minimizer is r^2/2 and the Jacobi operator lives on [0, 1].
"""

import numpy as np

from .errors import ConjugatePointError, DomainError

__all__ = [
    "ConstantCurvature",
    "SyntheticPotential",
    "GeodesicData",
    "JacobiSystem",
    "jacobi_endomorphism",
    "exp_jacobian_closed_form",
    "ricci_along",
    "sphere_parallel_transport_check",
]

_SYMMETRY_TOL = 1e-12


class ConstantCurvature:
    """Space form of dimension n and sectional curvature kappa."""

    def __init__(self, n: int, kappa: float):
        if n < 1:
            raise DomainError(f"dimension must be >= 1, got {n}")
        if not np.isfinite(kappa):
            raise DomainError("curvature must be finite")
        self.n = int(n)
        self.kappa = float(kappa)

    @property
    def radius(self) -> float:
        """Radius 1/sqrt(kappa) for positively curved spaces."""
        if self.kappa <= 0:
            raise DomainError("radius is defined only for kappa > 0")
        return 1.0 / np.sqrt(self.kappa)

    def __repr__(self):
        return f"ConstantCurvature(n={self.n}, kappa={self.kappa})"


class SyntheticPotential:
    """Manifold of dimension n realizing a prescribed (n-1)x(n-1) potential.

    The metric g_ss = 1 + sum_ij V_ij(s) x^i x^j near the segment
    [0, t] x {0} makes the s-axis a geodesic whose curvature term has
    the orthogonal block V(s); the tangent direction stays flat.
    """

    def __init__(self, n: int, potential, t: float):
        if n < 2:
            raise DomainError("synthetic manifolds need dimension >= 2")
        if t <= 0:
            raise DomainError("interval length must be positive")
        self.n = int(n)
        self.t = float(t)
        self.potential = potential
        for s in (0.0, 0.37 * t, 0.5 * t, 0.91 * t, t):
            V = np.atleast_2d(np.asarray(potential(s), dtype=float))
            if V.shape != (n - 1, n - 1):
                raise DomainError(
                    f"potential block must be {(n - 1, n - 1)}, got {V.shape}"
                )
            if np.max(np.abs(V - V.T)) >= _SYMMETRY_TOL * max(1.0, np.max(np.abs(V))):
                raise DomainError(f"potential not symmetric at s={s}")

    def __repr__(self):
        return f"SyntheticPotential(n={self.n}, t={self.t})"


class GeodesicData:
    """A constant-speed geodesic on [0, 1] with speed r = d(x, y)."""

    def __init__(self, manifold, speed: float):
        if speed < 0:
            raise DomainError(f"geodesic speed must be >= 0, got {speed}")
        if isinstance(manifold, ConstantCurvature) and manifold.kappa > 0:
            # minimizers on the sphere do not pass the antipode
            if speed > np.pi / np.sqrt(manifold.kappa) + 1e-12:
                raise DomainError(
                    "speed exceeds pi/sqrt(kappa); no minimizing geodesic"
                )
        self.manifold = manifold
        self.speed = float(speed)

    @property
    def energy(self) -> float:
        return 0.5 * self.speed**2


class JacobiSystem:
    """The operator -d^2/ds^2 + V(s) on [0, t] with Dirichlet conditions.

    V is symmetric-matrix valued; it may be given as a constant matrix or
    as a callable of s.  Constant potentials keep closed-form evaluation
    paths available downstream.
    """

    def __init__(self, n: int, t: float, potential):
        if n < 1:
            raise DomainError(f"fiber dimension must be >= 1, got {n}")
        if t <= 0:
            raise DomainError(f"interval length must be positive, got {t}")
        self.n = int(n)
        self.t = float(t)
        if callable(potential):
            self._func = potential
            self._const = None
        else:
            mat = np.array(potential, dtype=float)
            if mat.shape == () and n == 1:
                mat = mat.reshape(1, 1)
            if mat.shape != (n, n):
                raise DomainError(f"potential must be {n}x{n}, got {mat.shape}")
            self._func = None
            self._const = mat
        for s in (0.0, 0.29 * t, 0.5 * t, 0.83 * t, t):
            V = self(s)
            if np.max(np.abs(V - V.T)) >= _SYMMETRY_TOL * max(1.0, np.max(np.abs(V))):
                raise DomainError(f"potential not symmetric at s={s}")

    @classmethod
    def constant(cls, matrix, t: float) -> "JacobiSystem":
        mat = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(mat.shape[0], t, mat)

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    def __call__(self, s: float) -> np.ndarray:
        if self._const is not None:
            return self._const
        V = np.asarray(self._func(s), dtype=float)
        if V.shape == () and self.n == 1:
            V = V.reshape(1, 1)
        return V

    def mean_matrix(self) -> np.ndarray:
        """Average of V over [0, t]; exact for constant potentials."""
        if self._const is not None:
            return self._const
        from numpy.polynomial.legendre import leggauss

        x, w = leggauss(64)
        nodes = 0.5 * self.t * (x + 1.0)
        acc = np.zeros((self.n, self.n))
        for xi, wi in zip(nodes, w):
            acc += wi * self(xi)
        return acc * 0.5

    def time_reversed(self) -> "JacobiSystem":
        """System with potential V(t - s); same spectrum and determinants."""
        if self._const is not None:
            return JacobiSystem(self.n, self.t, self._const)
        t = self.t
        func = self._func
        return JacobiSystem(self.n, t, lambda s: func(t - s))


def jacobi_endomorphism(g: GeodesicData) -> JacobiSystem:
    """Curvature term of the Jacobi operator along g, in a parallel frame.

    The frame is chosen with e_1 = velocity/r.  For constant curvature the
    result is the constant matrix -kappa r^2 (I - e_1 e_1^T): the tangent
    direction is annihilated and each orthogonal direction is shifted by
    -kappa r^2, matching the eigenvalues pi^2 k^2 - kappa r^2 of the
    Jacobi operator.  Synthetic manifolds return their prescribed block
    (rescaled to the unit parametrization interval) with a zero tangent
    block.
    """
    m = g.manifold
    r = g.speed
    if isinstance(m, ConstantCurvature):
        mat = np.zeros((m.n, m.n))
        if m.n > 1:
            mat[1:, 1:] = -m.kappa * r * r * np.eye(m.n - 1)
        return JacobiSystem(m.n, 1.0, mat)
    if isinstance(m, SyntheticPotential):
        t, pot, n = m.t, m.potential, m.n

        def full_block(u, t=t, pot=pot, n=n):
            out = np.zeros((n, n))
            out[1:, 1:] = t * t * np.atleast_2d(np.asarray(pot(t * u), dtype=float))
            return out

        return JacobiSystem(m.n, 1.0, full_block)
    raise DomainError(f"unsupported manifold {type(m).__name__}")


def exp_jacobian_closed_form(m: ConstantCurvature, d: float) -> float:
    """Jacobian of the exponential map between points at distance d.

    Equals (sin(sqrt(kappa) d)/(sqrt(kappa) d))^(n-1), with sin replaced
    by sinh for negative curvature; the d -> 0 limit is 1.
    """
    if not isinstance(m, ConstantCurvature):
        raise DomainError("closed form requires a constant-curvature manifold")
    if d < 0 or not np.isfinite(d):
        raise DomainError(f"distance must be finite and >= 0, got {d}")
    if m.kappa > 0 and d >= np.pi / np.sqrt(m.kappa):
        raise ConjugatePointError(
            f"d={d} reaches the conjugate distance pi/sqrt(kappa)"
        )
    if m.kappa == 0 or d == 0:
        return 1.0
    if m.kappa > 0:
        x = np.sqrt(m.kappa) * d
        return float(np.sinc(x / np.pi) ** (m.n - 1))
    x = np.sqrt(-m.kappa) * d
    return float((np.sinh(x) / x) ** (m.n - 1))


def ricci_along(g: GeodesicData) -> float:
    """Ricci curvature ric(velocity, velocity) = (n-1) kappa r^2, constant in s."""
    m = g.manifold
    if not isinstance(m, ConstantCurvature):
        raise DomainError("Ricci contraction implemented for constant curvature only")
    return (m.n - 1) * m.kappa * g.speed**2


def _rk4_step(f, y, s, h):
    k1 = f(s, y)
    k2 = f(s + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(s + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(s + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def sphere_parallel_transport_check(n: int, x, v, s: float, steps: int = 2048):
    """Geodesic flow and frame transport on the embedded sphere S^n.

    Integrates the ambient ODEs for the great circle through x with
    initial velocity v together with parallel transport of an orthonormal
    tangent frame, and returns (point, frame) at time s.  The frame is
    an (n+1) x n matrix whose columns stay orthonormal and tangent; this
    provides the embedded cross-check that the parallel-frame picture
    used by the curvature terms is consistent.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (n + 1,) or v.shape != (n + 1,):
        raise DomainError(f"point and velocity must be in R^{n + 1}")
    R = np.linalg.norm(x)
    if R <= 0:
        raise DomainError("point must be nonzero")
    speed = np.linalg.norm(v)
    if abs(np.dot(x, v)) > 1e-10 * max(1.0, R * speed):
        raise DomainError("velocity is not tangent to the sphere at x")

    # orthonormal tangent frame at x, first column along v when v != 0
    seeds = [v] if speed > 0 else []
    seeds += [e for e in np.eye(n + 1)]
    frame = []
    for seed in seeds:
        u = seed - np.dot(seed, x) / R**2 * x
        for f in frame:
            u = u - np.dot(u, f) * f
        norm = np.linalg.norm(u)
        if norm > 1e-12:
            frame.append(u / norm)
        if len(frame) == n:
            break
    U0 = np.column_stack(frame)

    if speed == 0 or s == 0:
        return x.copy(), U0

    # state: position, velocity, frame columns; parallel transport keeps
    # the covariant derivative zero, i.e. dU/ds = -x (xdot^T U)/R^2
    def rhs(_, state):
        p, w, U = state
        return (w, -(speed**2 / R**2) * p, -np.outer(p, w @ U) / R**2)

    class _State(tuple):
        def __add__(self, other):
            return _State(a + b for a, b in zip(self, other))

        def __rmul__(self, c):
            return _State(c * a for a in self)

    state = _State((x, v, U0))
    h = s / steps
    t = 0.0
    for _ in range(steps):
        state = _rk4_step(lambda tt, st: _State(rhs(tt, st)), state, t, h)
        t += h
    p, _, U = state
    return p, U
