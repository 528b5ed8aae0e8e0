"""Grid discretization and residual measurement.

Dense complex matrices on a uniform 1-D grid represent the Hamiltonian
H = -d(m^{-1} d) + Vtilde (midpoint-sampled mass flux, Dirichlet walls as
identity rows decoupled from the interior block), the charge operator C
(central stencils with node-sampled coefficients, zeroed boundary rows)
and parity P (node-reversal permutation).

Operator identities such as zeta = zeta^dagger or zeta zeta* = sum_k l_k
H^{N-k} hold in the continuum; their discrete counterparts are measured by
applying the residual matrix to a fixed basis of smooth, boundary-decaying
probe vectors and taking interior-restricted Frobenius norms, normalized by
the dominant term.  Raw entrywise matrix norms would not converge (the
compact flux Laplacian and composed central stencils differ by a null
stencil with O(1) entries); the probe measurement sees the operator action
and decreases at the stencil order O(h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .expr import EMPTY_ENV, Expr, ParamEnv, differentiate, evaluate, evaluate_many
from .model import MassFn

__all__ = [
    "DiscreteError", "GridError", "AssemblyError", "EigensolverError",
    "UnsupportedOrderError",
    "Grid", "OperatorMatrix", "Spectrum", "ConvergenceResult",
    "assemble_hamiltonian", "assemble_charge", "parity_matrix",
    "probe_matrix", "constraint_residuals", "dense_eigenvalues",
    "eigenvalues", "hamiltonian_spectrum", "susy_algebra_spectrum",
    "conjugate_pairing_distance",
    "conjugate_closure", "riccati_residual", "convergence_study",
    "make_supercharges", "pseudo_hermiticity_inverse_residual",
    "wavefunction_from_log_derivative", "l2_normalizable",
    "MAX_DENSE_DIMENSION", "RESIDUAL_FLOOR",
]

MAX_DENSE_DIMENSION = 4096
RESIDUAL_FLOOR = 1e-14
DEFAULT_PROBE_COUNT = 8


class DiscreteError(Exception):
    pass


class GridError(DiscreteError):
    pass


class AssemblyError(DiscreteError):
    pass


class EigensolverError(DiscreteError):
    pass


class UnsupportedOrderError(DiscreteError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid; node i sits at x_min + i*h with h = (x_max-x_min)/(n-1)."""

    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if self.points < 16:
            raise GridError(f"need at least 16 points, got {self.points}")
        if not self.x_min < self.x_max:
            raise GridError(f"empty grid ({self.x_min}, {self.x_max})")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.points - 1)

    @property
    def symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-14 * max(1.0, abs(self.x_max))

    def nodes(self) -> np.ndarray:
        return self.x_min + np.arange(self.points) * self.h

    def midpoints(self) -> np.ndarray:
        return self.nodes()[:-1] + 0.5 * self.h

    def refined(self) -> "Grid":
        """Grid with halved spacing on the same interval."""
        return Grid(self.x_min, self.x_max, 2 * self.points - 1)


@dataclass
class OperatorMatrix:
    """Dense complex matrix tied to a grid; immutable once built."""

    data: np.ndarray
    grid: Grid
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.data, dtype=complex)
        n = self.grid.points
        if a.shape != (n, n):
            raise AssemblyError(
                f"matrix shape {a.shape} does not match grid with {n} points")
        if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
            raise AssemblyError(f"non-finite entries in operator '{self.label}'")
        a.setflags(write=False)
        self.data = a

    @property
    def n(self) -> int:
        return self.grid.points


@dataclass
class Spectrum:
    """Eigenvalues sorted by (Re, Im) plus the conjugate-pairing distance."""

    values: np.ndarray
    conjugate_pairing_distance: float

    def __len__(self) -> int:
        return int(self.values.size)


def _sorted_eigenvalues(values: np.ndarray) -> np.ndarray:
    order = np.lexsort((values.imag, values.real))
    return values[order]


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def assemble_hamiltonian(m: MassFn, vtilde: Expr, g: Grid,
                         env: Optional[ParamEnv] = None) -> OperatorMatrix:
    """H = -d(m^{-1} d) + Vtilde with midpoint mass sampling:

        (H psi)_i = -(1/h^2)[ (psi_{i+1}-psi_i)/m_{i+1/2}
                              - (psi_i-psi_{i-1})/m_{i-1/2} ] + Vtilde_i psi_i

    on interior rows; Dirichlet boundary rows are identity rows decoupled
    from the interior block.  Second-order accurate.
    """
    env = env if env is not None else EMPTY_ENV
    n = g.points
    h = g.h
    mids = g.midpoints()
    m_mid = evaluate_many(m.expr, mids, env)
    for x, v in zip(mids, m_mid):
        if v.real <= 0.0 or abs(v.imag) > 1e-12 * (1.0 + abs(v)):
            raise AssemblyError(f"mass not positive at midpoint x={x!r}: m={v!r}")
    inv_m = 1.0 / m_mid.real
    v_nodes = evaluate_many(vtilde, g.nodes()[1:-1], env)

    data = np.zeros((n, n), dtype=complex)
    idx = np.arange(1, n - 1)
    data[idx, idx] = (inv_m[idx - 1] + inv_m[idx]) / h**2 + v_nodes
    left = idx[idx - 1 >= 1]
    data[left, left - 1] = -inv_m[left - 1] / h**2
    right = idx[idx + 1 <= n - 2]
    data[right, right + 1] = -inv_m[right] / h**2
    data[0, 0] = 1.0
    data[n - 1, n - 1] = 1.0
    return OperatorMatrix(data, g, label="H")


def assemble_charge(coeffs, g: Grid, env: Optional[ParamEnv] = None) -> OperatorMatrix:
    """Discrete N-th order charge operator with central stencils and
    node-sampled coefficients; boundary rows zeroed.

    Supported orders are N = 1 (lead * D1 + sub) and N = 2
    (lead * D2 + sub * D1 + u0); for N >= 3 the interior coefficients have
    no closed form and assembly raises UnsupportedOrderError.
    """
    env = env if env is not None else EMPTY_ENV
    n_order = coeffs.n
    if n_order > 2:
        raise UnsupportedOrderError(
            f"no discrete stencil for order {n_order}: interior coefficients "
            "u_0..u_(N-3) are not derivable in closed form")
    if any(entry is None for entry in coeffs.u):
        raise UnsupportedOrderError("charge coefficients contain absent entries")

    n = g.points
    h = g.h
    x_int = g.nodes()[1:-1]
    lead = evaluate_many(coeffs.lead, x_int, env)
    sub = evaluate_many(coeffs.sub, x_int, env)

    data = np.zeros((n, n), dtype=complex)
    idx = np.arange(1, n - 1)
    if n_order == 1:
        data[idx, idx - 1] = -lead / (2 * h)
        data[idx, idx + 1] = lead / (2 * h)
        data[idx, idx] = sub
    else:
        u0 = evaluate_many(coeffs.u[0], x_int, env)
        data[idx, idx - 1] = lead / h**2 - sub / (2 * h)
        data[idx, idx + 1] = lead / h**2 + sub / (2 * h)
        data[idx, idx] = -2 * lead / h**2 + u0
    return OperatorMatrix(data, g, label=f"C{n_order}")


def parity_matrix(g: Grid) -> OperatorMatrix:
    """Node-reversal permutation; requires a symmetric grid; P^2 = I exactly."""
    if not g.symmetric:
        raise GridError(
            f"parity needs a symmetric grid, got ({g.x_min}, {g.x_max})")
    n = g.points
    data = np.zeros((n, n), dtype=complex)
    data[np.arange(n), n - 1 - np.arange(n)] = 1.0
    return OperatorMatrix(data, g, label="P")


# ---------------------------------------------------------------------------
# Constraint residuals
# ---------------------------------------------------------------------------

def probe_matrix(g: Grid, count: int = DEFAULT_PROBE_COUNT) -> np.ndarray:
    """Fixed basis of smooth probe vectors (Gaussian-windowed polynomials
    and low harmonics), normalized columns; deterministic."""
    x = g.nodes()
    half = 0.5 * (g.x_max - g.x_min)
    center = 0.5 * (g.x_max + g.x_min)
    t = (x - center) / half
    window = np.exp(-(3.0 * t) ** 2)
    shapes = [np.ones_like(t), t, t**2, t**3,
              np.cos(np.pi * t), np.sin(np.pi * t),
              np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)]
    cols = []
    for j in range(count):
        base = shapes[j % len(shapes)]
        if j >= len(shapes):
            base = base * np.cos((j // len(shapes)) * t)
        col = window * base
        cols.append(col / np.linalg.norm(col))
    return np.stack(cols, axis=1).astype(complex)


def constraint_residuals(H: OperatorMatrix, C: OperatorMatrix, P: OperatorMatrix,
                         l: Sequence[complex],
                         probes: Optional[np.ndarray] = None,
                         margin: Optional[int] = None) -> dict:
    """Normalized residuals of the three operator constraints with
    zeta = C P:

        pseudo : zeta - zeta^dagger                     (Hermiticity of zeta)
        cpt    : C (P conj(H) P) - H C                  (CPT conservation)
        susy   : zeta conj(zeta) - sum_k l_k H^{N-k}    (SUSY polynomial)

    Each residual matrix is applied to smooth probe vectors, restricted to
    interior rows (boundary rows plus a 2N-node stencil margin trimmed) and
    measured in the Frobenius norm relative to the dominant term.
    """
    if not (H.grid == C.grid == P.grid):
        raise GridError("H, C, P must share one grid")
    if not H.grid.symmetric:
        raise GridError("constraint residuals need a symmetric grid")
    coeffs = tuple(complex(c) for c in l)
    n_order = len(coeffs)
    if n_order < 1:
        raise DiscreteError("need at least one SUSY constant")
    n = H.n
    if margin is None:
        margin = 1 + 2 * n_order
    if 2 * margin >= n:
        raise GridError(f"margin {margin} leaves no interior rows for n={n}")
    V = probes if probes is not None else probe_matrix(H.grid)

    rows = slice(margin, n - margin)
    Hd, Cd, Pd = H.data, C.data, P.data
    zeta = Cd @ Pd

    def act(mat: np.ndarray) -> float:
        return float(np.linalg.norm((mat @ V)[rows]))

    out = {}
    out["pseudo"] = act(zeta - zeta.conj().T) / max(act(zeta), np.finfo(float).tiny)

    lhs = Cd @ (Pd @ Hd.conj() @ Pd)
    rhs = Hd @ Cd
    out["cpt"] = act(lhs - rhs) / max(act(lhs), act(rhs), np.finfo(float).tiny)

    poly = np.zeros_like(Hd)
    power = np.eye(n, dtype=complex)       # H^0
    poly += coeffs[-1] * power
    for k in range(n_order - 1, 0, -1):    # l_k H^{N-k}
        power = power @ Hd
        poly += coeffs[k - 1] * power
    poly += power @ Hd                     # H^N
    lhs2 = zeta @ zeta.conj()
    out["susy"] = act(lhs2 - poly) / max(act(lhs2), act(poly), np.finfo(float).tiny)
    return out


def make_supercharges(zeta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Block supercharges Q = [[0, zeta], [0, 0]], Qbar = [[0, 0], [conj(zeta), 0]];
    their anticommutator is diag(zeta conj(zeta), conj(zeta) zeta)."""
    n = zeta.shape[0]
    Q = np.zeros((2 * n, 2 * n), dtype=complex)
    Qbar = np.zeros((2 * n, 2 * n), dtype=complex)
    Q[:n, n:] = zeta
    Qbar[n:, :n] = zeta.conj()
    return Q, Qbar


def pseudo_hermiticity_inverse_residual(H: OperatorMatrix, C: OperatorMatrix,
                                        P: OperatorMatrix,
                                        kappa_limit: float = 1e8):
    """Residual of H^dagger zeta^{-1} - zeta^{-1} H on the interior block,
    with the condition number of zeta reported.

    Returns (residual, kappa); residual is None when kappa > kappa_limit,
    since zeta^{-1} then carries no certifiable information.
    """
    zeta = (C.data @ P.data)[1:-1, 1:-1]
    Hi = H.data[1:-1, 1:-1]
    kappa = float(np.linalg.cond(zeta))
    if not math.isfinite(kappa) or kappa > kappa_limit:
        return None, kappa
    zinv = np.linalg.inv(zeta)
    resid = np.linalg.norm(Hi.conj().T @ zinv - zinv @ Hi)
    scale = np.linalg.norm(zinv @ Hi)
    return float(resid / max(scale, np.finfo(float).tiny)), kappa


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def dense_eigenvalues(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense complex matrix, sorted by (Re, Im).

    Backed by LAPACK's standard dense pipeline (balancing, Householder
    Hessenberg reduction, shifted QR); backward-stable to ~1e-12 * ||M||
    per eigenvalue.  Non-convergence of the QR iteration (LAPACK's ~30n
    sweep budget) is reported, never silent.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigensolverError(f"need a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DENSE_DIMENSION:
        raise EigensolverError(
            f"dense budget is n <= {MAX_DENSE_DIMENSION}, got {a.shape[0]}")
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"QR iteration did not converge: {exc}") from exc
    return _sorted_eigenvalues(values)


def conjugate_pairing_distance(values: np.ndarray) -> float:
    """Greedy nearest-pair matching distance between the eigenvalue multiset
    and its conjugate image (both sorted by (Re, Im)); 0 for self-conjugate
    spectra."""
    ev = _sorted_eigenvalues(np.asarray(values, dtype=complex))
    target = _sorted_eigenvalues(ev.conj())
    used = np.zeros(ev.size, dtype=bool)
    worst = 0.0
    for s in ev:
        d = np.abs(target - s)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst


def eigenvalues(M: OperatorMatrix) -> Spectrum:
    """Spectrum of the full matrix (all n eigenvalues)."""
    values = dense_eigenvalues(M.data)
    return Spectrum(values=values,
                    conjugate_pairing_distance=conjugate_pairing_distance(values))


def hamiltonian_spectrum(M: OperatorMatrix) -> Spectrum:
    """Spectrum of the decoupled interior block of a Dirichlet Hamiltonian
    (drops the two identity boundary rows, which would otherwise contribute
    two artificial unit eigenvalues)."""
    values = dense_eigenvalues(M.data[1:-1, 1:-1])
    return Spectrum(values=values,
                    conjugate_pairing_distance=conjugate_pairing_distance(values))


def susy_algebra_spectrum(C: OperatorMatrix, P: OperatorMatrix) -> Spectrum:
    """Spectrum of zeta conj(zeta) with zeta = C P, the discrete image of
    the SUSY polynomial sum_k l_k H^{N-k}.

    This multiset is exactly closed under conjugation (spec(AB) = spec(BA)
    and conj(zeta conj(zeta)) = conj(zeta) zeta), so its measured pairing
    distance isolates eigensolver backward error and certifies the CPT
    spectral property at discretization level.
    """
    if C.grid != P.grid:
        raise GridError("C and P must share one grid")
    zeta = C.data @ P.data
    values = dense_eigenvalues(zeta @ zeta.conj())
    return Spectrum(values=values,
                    conjugate_pairing_distance=conjugate_pairing_distance(values))


def conjugate_closure(s: Spectrum, tol: Optional[float] = None) -> float:
    """Conjugate-closure distance of a spectrum; a value <= tol certifies
    the CPT spectral property at discretization level (tol is recorded by
    callers, not enforced here)."""
    return s.conjugate_pairing_distance


# ---------------------------------------------------------------------------
# Riccati residual (shared verification kernel)
# ---------------------------------------------------------------------------

def riccati_residual(m: MassFn, vtilde: Expr, phi: Expr, e: complex,
                     samples: Sequence[float],
                     env: Optional[ParamEnv] = None) -> float:
    """Sup over samples of |-(phi' + phi^2)/m + (m'/m^2) phi + Vtilde - e|,
    the log-derivative form of H psi = e psi."""
    env = env if env is not None else EMPTY_ENV
    dphi = differentiate(phi)
    mx = m.expr
    dm = differentiate(mx)
    worst = 0.0
    for x in samples:
        x = float(x)
        mv = evaluate(mx, x, env)
        pv = evaluate(phi, x, env)
        dpv = evaluate(dphi, x, env)
        dmv = evaluate(dm, x, env)
        vv = evaluate(vtilde, x, env)
        r = -(dpv + pv * pv) / mv + (dmv / (mv * mv)) * pv + vv - complex(e)
        worst = max(worst, abs(r))
    return worst


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceResult:
    order: float
    residuals: tuple
    floored: bool = False


def convergence_study(residual_fn: Callable[[Grid], Mapping[str, float]],
                      grids: Sequence[Grid]) -> dict:
    """Least-squares slope of log(residual) against log(h) per residual name.

    Needs at least three grids with successively halved spacing.  Residuals
    below the 1e-14 floor are flagged as converged-to-floor (the slope is
    then fit anyway but carries no information).
    """
    if len(grids) < 3:
        raise GridError("need at least 3 grids")
    hs = [g.h for g in grids]
    for a, b in zip(hs, hs[1:]):
        if not 1.9 <= a / b <= 2.1:
            raise GridError(f"grid spacings must halve, got ratio {a / b:.3f}")
    rows = [dict(residual_fn(g)) for g in grids]
    names = rows[0].keys()
    out = {}
    log_h = np.log(hs)
    for name in names:
        vals = np.array([row[name] for row in rows], dtype=float)
        floored = bool(np.any(vals < RESIDUAL_FLOOR))
        slope = float(np.polyfit(log_h, np.log(np.maximum(vals, 1e-300)), 1)[0])
        out[name] = ConvergenceResult(order=slope, residuals=tuple(vals),
                                      floored=floored)
    return out


# ---------------------------------------------------------------------------
# Wavefunction reconstruction from a log-derivative
# ---------------------------------------------------------------------------

def wavefunction_from_log_derivative(phi: Expr, xs: Sequence[float],
                                     env: Optional[ParamEnv] = None,
                                     midpoint: Optional[float] = None) -> np.ndarray:
    """psi on the nodes from psi'/psi = phi by fixed-step 4th-order
    (Simpson) cumulative quadrature of phi from the domain midpoint, with
    the normalization psi(midpoint) = 1."""
    env = env if env is not None else EMPTY_ENV
    xs = np.asarray(list(xs), dtype=float)
    if midpoint is None:
        midpoint = 0.5 * (xs[0] + xs[-1])

    def segment(a: float, b: float) -> complex:
        if a == b:
            return 0.0 + 0.0j
        mid = 0.5 * (a + b)
        return ((b - a) / 6.0) * (evaluate(phi, a, env)
                                  + 4.0 * evaluate(phi, mid, env)
                                  + evaluate(phi, b, env))

    anchor = int(np.argmin(np.abs(xs - midpoint)))
    integral = np.zeros(xs.size, dtype=complex)
    integral[anchor] = segment(midpoint, xs[anchor])
    for j in range(anchor + 1, xs.size):
        integral[j] = integral[j - 1] + segment(xs[j - 1], xs[j])
    for j in range(anchor - 1, -1, -1):
        integral[j] = integral[j + 1] - segment(xs[j], xs[j + 1])
    return np.exp(integral)


def l2_normalizable(psi: np.ndarray, ratio: float = 1e-3) -> bool:
    """Window-confinement test: boundary amplitude at most ``ratio`` of the
    peak amplitude, i.e. |psi|^2 at the walls is negligible."""
    peak = float(np.max(np.abs(psi)))
    edge = math.sqrt(abs(psi[0]) ** 2 + abs(psi[-1]) ** 2)
    return edge <= ratio * peak
