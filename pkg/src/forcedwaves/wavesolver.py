"""Global forced waves on a truncated domain [-L, L].

Second-order centered collocation of phi'' + c phi' + phi (a(z) - phi) = 0
with a Dirichlet left boundary phi(-L) = a(-L) (the local equilibrium; the
wave approaches alpha only asymptotically) and a right boundary that encodes
the targeted decay law: either Robin phi'(L) = sigma_R phi(L) with sigma_R
the target ansatz's log-derivative, or an amplitude pin phi(L) = value for
selecting individual members of the slow family (the Robin coefficient is
shared across that family, so it cannot separate them).

The nonlinear system is solved by damped Newton with a tridiagonal Jacobian.
No positivity projection is applied: a converged iterate with phi <= 0
somewhere is the meaningful "no positive wave" outcome, distinct from Newton
divergence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.linalg import solve_banded

from . import oracles
from .environment import (
    AnsatzUnavailableError,
    DecayAnsatz,
    EnvironmentProfile,
    ExpTail,
    ProfileItself,
    PureExp,
    Sigma1Int,
    SlowMaximal,
    TildeA,
    classify,
)

__all__ = [
    "SolverConfig",
    "WaveSolution",
    "NewtonDivergenceError",
    "NoPositiveWaveError",
    "resolve_target",
    "standard_starts",
    "solve_wave",
    "continuation_in_c",
    "ContinuationResult",
    "wave_family",
    "ordering_check",
    "OrderingResult",
    "continuum_residual",
]

TARGET_TAGS = ("pure_exp", "sigma1", "tilde_a", "slow_maximal", "profile_itself")


@dataclass(frozen=True)
class SolverConfig:
    L: float
    N: int
    newton_tol: float = 1e-10
    newton_max_iter: int = 120
    max_halvings: int = 30
    continuation_step: float = 0.05

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.N < 1001:
            raise ValueError("N must be at least 1001")
        if self.newton_tol < 1e-12:
            raise ValueError("newton_tol below 1e-12 is not resolvable")

    @staticmethod
    def default_for(profile: EnvironmentProfile) -> "SolverConfig":
        # exponential tails settle within tens of units; algebraic-family
        # tails need long domains before the asymptotic regime is visible
        if isinstance(profile.tail, ExpTail):
            return SolverConfig(L=60.0, N=4001)
        return SolverConfig(L=200.0, N=8001)

    def grid(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.N)


class NewtonDivergenceError(RuntimeError):
    def __init__(self, message, last_iterate=None, residual_history=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_history = list(residual_history or [])


class NoPositiveWaveError(RuntimeError):
    """Newton converged, but the converged state is not a positive wave."""

    def __init__(self, message, phi=None, residual_norm=None, residual_history=None):
        super().__init__(message)
        self.phi = phi
        self.residual_norm = residual_norm
        self.residual_history = list(residual_history or [])


@dataclass
class WaveSolution:
    c: float
    grid: np.ndarray
    phi: np.ndarray
    residual_norm: float
    decay_tag: str
    bc_right: Optional[float]  # Robin coefficient; None when amplitude-pinned
    target: Optional[DecayAnsatz] = field(default=None, repr=False)
    pinned_amplitude: Optional[float] = None
    iterations: int = 0
    config: Optional[SolverConfig] = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "phi"])
            for z, p in zip(self.grid, self.phi):
                w.writerow([f"{z:.17g}", f"{p:.17g}"])

    def sidecar_dict(self) -> dict:
        return {
            "c": self.c,
            "L": float(self.grid[-1]),
            "N": int(len(self.grid)),
            "residual_norm": self.residual_norm,
            "decay_tag": self.decay_tag,
            "bc_right": self.bc_right,
            "pinned_amplitude": self.pinned_amplitude,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# discrete operator
# ---------------------------------------------------------------------------

def discrete_residual(phi: np.ndarray, a: np.ndarray, h: float, c: float,
                      left_value: float, sigma_R: Optional[float],
                      pin_value: Optional[float]) -> np.ndarray:
    """Residual of the collocation system; boundary rows at both ends.

    The Robin condition enters through the ghost-node elimination
    phi_{N+1} = phi_{N-1} + 2 h sigma_R phi_N, which keeps the last row a
    centered second-order discretization and the Jacobian tridiagonal.
    """
    F = np.empty_like(phi)
    F[0] = phi[0] - left_value
    F[1:-1] = ((phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) / h**2
               + c * (phi[2:] - phi[:-2]) / (2.0 * h)
               + phi[1:-1] * (a[1:-1] - phi[1:-1]))
    if pin_value is not None:
        F[-1] = phi[-1] - pin_value
    else:
        F[-1] = ((2.0 * phi[-2] - 2.0 * phi[-1] + 2.0 * h * sigma_R * phi[-1]) / h**2
                 + c * sigma_R * phi[-1]
                 + phi[-1] * (a[-1] - phi[-1]))
    return F


def _jacobian_ab(phi: np.ndarray, a: np.ndarray, h: float, c: float,
                 sigma_R: Optional[float], pin_value: Optional[float]) -> np.ndarray:
    """Tridiagonal Jacobian in solve_banded's (3, N) layout."""
    n = len(phi)
    ab = np.zeros((3, n))
    # row 0: superdiagonal shifted right; row 1: diagonal; row 2: subdiagonal shifted left
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[2, :-2] = 1.0 / h**2 - c / (2.0 * h)
    ab[1, 1:-1] = -2.0 / h**2 + a[1:-1] - 2.0 * phi[1:-1]
    ab[0, 2:] = 1.0 / h**2 + c / (2.0 * h)
    if pin_value is not None:
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
    else:
        ab[2, -2] = 2.0 / h**2
        ab[1, -1] = (-2.0 + 2.0 * h * sigma_R) / h**2 + c * sigma_R + a[-1] - 2.0 * phi[-1]
    return ab


def _monotone_sweeps(phi0, a, h, c, left_value, sigma_R, pin_value,
                     max_sweeps=2000, target_resid=1e-5):
    """Monotone fixed-point sweeps u <- (M - d2 - c d1)^{-1} (M u + u (a - u)).

    With M >= sup |a - 2u| the matrix is an M-matrix and the map preserves the
    sub/super-solution ordering, so iterates started from an oracle
    sub-solution climb monotonically toward the minimal discrete solution.
    Used to carry Newton starts across the unstable near-zero region, where
    the Jacobian u'' + c u' + a u has near-zero oscillatory modes and damped
    Newton stalls.
    """
    n = len(phi0)
    M = 2.0 * float(np.max(np.abs(phi0))) + float(np.max(a)) + 1.0
    ab = np.zeros((3, n))
    ab[1, 0] = 1.0
    ab[2, :-2] = -(1.0 / h**2 - c / (2.0 * h))
    ab[1, 1:-1] = 2.0 / h**2 + M
    ab[0, 2:] = -(1.0 / h**2 + c / (2.0 * h))
    if pin_value is not None:
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
    else:
        ab[2, -2] = -2.0 / h**2
        ab[1, -1] = (2.0 - 2.0 * h * sigma_R) / h**2 - c * sigma_R + M
    phi = phi0.astype(float).copy()
    for _ in range(max_sweeps):
        rhs = M * phi + phi * (a - phi)
        rhs[0] = left_value
        if pin_value is not None:
            rhs[-1] = pin_value
        new = solve_banded((1, 1), ab, rhs)
        dmax = float(np.max(np.abs(new - phi)))
        phi = new
        if dmax < 1e-13:
            break
        F = discrete_residual(phi, a, h, c, left_value, sigma_R, pin_value)
        if float(np.max(np.abs(F))) <= target_resid:
            break
    return phi


def _newton(phi0, a, h, c, left_value, sigma_R, pin_value, cfg: SolverConfig):
    phi = phi0.astype(float).copy()
    history = []
    F = discrete_residual(phi, a, h, c, left_value, sigma_R, pin_value)
    nrm = float(np.max(np.abs(F)))
    history.append(nrm)
    for it in range(1, cfg.newton_max_iter + 1):
        if nrm <= cfg.newton_tol:
            return phi, nrm, it - 1, history
        if not math.isfinite(nrm):
            raise NewtonDivergenceError("residual became non-finite",
                                        last_iterate=phi, residual_history=history)
        ab = _jacobian_ab(phi, a, h, c, sigma_R, pin_value)
        try:
            delta = solve_banded((1, 1), ab, -F)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergenceError(f"singular Jacobian: {exc}",
                                        last_iterate=phi, residual_history=history)
        step = 1.0
        for _ in range(cfg.max_halvings + 1):
            trial = phi + step * delta
            Ft = discrete_residual(trial, a, h, c, left_value, sigma_R, pin_value)
            nt = float(np.max(np.abs(Ft)))
            if math.isfinite(nt) and nt < nrm:
                phi, F, nrm = trial, Ft, nt
                break
            step *= 0.5
        else:
            raise NewtonDivergenceError(
                f"no residual decrease after {cfg.max_halvings} halvings "
                f"(residual {nrm:.3e})", last_iterate=phi, residual_history=history)
        history.append(nrm)
    if nrm <= cfg.newton_tol:
        return phi, nrm, cfg.newton_max_iter, history
    raise NewtonDivergenceError(
        f"not converged after {cfg.newton_max_iter} iterations (residual {nrm:.3e})",
        last_iterate=phi, residual_history=history)


# ---------------------------------------------------------------------------
# targets and starts
# ---------------------------------------------------------------------------

def resolve_target(profile: EnvironmentProfile, c: float,
                   target: Union[DecayAnsatz, str]) -> tuple[str, Optional[DecayAnsatz], float]:
    """(tag, ansatz-or-None, sigma_R at L-independent callable input).

    Accepts either a constructed ansatz or one of the tags pure_exp / sigma1 /
    tilde_a / slow_maximal / profile_itself.  slow_maximal in a regime where
    int tilde_a diverges has no ansatz; its Robin coefficient degenerates to
    the tilde_a value -a(L)/c, which is returned via a None ansatz.
    """
    if isinstance(target, DecayAnsatz):
        return target.tag, target, math.nan
    tag = str(target)
    if tag not in TARGET_TAGS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGET_TAGS}")
    try:
        if tag == "pure_exp":
            ansatz = PureExp(K=1.0, c=c, z0=profile.z_switch)
        elif tag == "sigma1":
            ansatz = Sigma1Int(profile, c)
        elif tag == "tilde_a":
            ansatz = TildeA(profile, c)
        elif tag == "slow_maximal":
            ansatz = SlowMaximal(profile, c)
        else:
            ansatz = ProfileItself(profile)
    except AnsatzUnavailableError:
        return tag, None, math.nan
    return tag, ansatz, math.nan


def _sigma_R_for(profile: EnvironmentProfile, c: float, tag: str,
                 ansatz: Optional[DecayAnsatz], L: float) -> float:
    if ansatz is not None:
        return float(ansatz.log_derivative(L))
    if tag in ("tilde_a", "slow_maximal"):
        # limiting coefficient of the slow family when the ansatz itself is
        # unavailable (int tilde_a = inf): log-derivative -> -a/c
        return -float(profile.a(L)) / c
    raise ValueError(f"no Robin coefficient for target {tag}")


def _target_predicted(profile: EnvironmentProfile, c: float, tag: str) -> bool:
    """Whether the classifier predicts a wave with this decay exists.

    The monotone-rescue globalization only runs for predicted targets: for a
    target ruled out by the regime classification, a plain Newton failure is
    the meaningful outcome and must not be papered over.
    """
    report = classify(profile, c)
    predicted = set()
    if report.minimal_decay is not None:
        predicted.add(report.minimal_decay.tag)
        predicted.add("pure_exp")
        predicted.add("sigma1")
    if report.maximal_decay is not None:
        predicted.add(report.maximal_decay.tag)
    if report.case_123 in ("2", "3"):
        predicted.add("tilde_a")
    return tag in predicted


SLOW_TAGS = ("tilde_a", "slow_maximal", "profile_itself")


def standard_starts(profile: EnvironmentProfile, c: float,
                    grid: np.ndarray) -> dict[str, np.ndarray]:
    """The three canonical Newton starts: oracle sub-solution, tanh front,
    oracle super-solution."""
    alpha = profile.alpha
    starts: dict[str, np.ndarray] = {}

    sub = np.zeros_like(grid)
    try:
        sub = np.maximum(sub, oracles.cos_bump_sub(alpha, c, profile).on_grid(grid))
    except oracles.ConstructionError:
        pass
    try:
        sub = np.maximum(sub, oracles.slow_sub(profile, c).on_grid(grid))
    except oracles.ConstructionError:
        pass
    starts["sub"] = sub

    w = max(1.0, profile.transition_width / 2.0)
    starts["tanh"] = 0.5 * alpha * (1.0 - np.tanh((grid - profile.transition_center) / w))

    eps = 0.5 * c
    starts["super"] = oracles.exp_super(alpha, c, eps, profile).on_grid(grid)
    return starts


def _ansatz_start(profile: EnvironmentProfile, ansatz: DecayAnsatz,
                  grid: np.ndarray) -> np.ndarray:
    """Plateau glued to the target's own decay shape.

    Slow waves have tails orders of magnitude fatter than the exponential
    minimal wave; a front-shaped start underflows on the tail and Newton
    collapses into the minimal wave's basin (the Robin row loses its gradient
    signal at that scale).  Starting on the target shape keeps the tail rows
    alive.
    """
    z_lo = profile.z_switch
    vals = np.asarray(ansatz.value(np.maximum(grid, z_lo)), dtype=float)
    return np.minimum(profile.alpha, vals)


# ---------------------------------------------------------------------------
# solver entry points
# ---------------------------------------------------------------------------

def solve_wave(profile: EnvironmentProfile, c: float,
               target: Union[DecayAnsatz, str], cfg: Optional[SolverConfig] = None,
               initial_guess: Optional[np.ndarray] = None,
               pin_amplitude: Optional[float] = None) -> WaveSolution:
    """Solve the truncated boundary value problem for one targeted wave.

    pin_amplitude, when given, replaces the Robin row by the Dirichlet
    condition phi(L) = pin_amplitude (used by wave_family to separate slow
    family members, which share the same Robin coefficient).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    cfg = SolverConfig.default_for(profile) if cfg is None else cfg
    grid = cfg.grid()
    h = float(grid[1] - grid[0])
    a = np.asarray(profile.a(grid), dtype=float)
    left_value = float(a[0])

    tag, ansatz, _ = resolve_target(profile, c, target)
    sigma_R: Optional[float] = None
    if pin_amplitude is None:
        sigma_R = _sigma_R_for(profile, c, tag, ansatz, float(grid[-1]))

    if initial_guess is None:
        initial_guess = standard_starts(profile, c, grid)["tanh"]
    phi0 = np.asarray(initial_guess, dtype=float)
    if phi0.shape != grid.shape:
        raise ValueError("initial guess does not match the grid")

    def run(start):
        return _newton(start, a, h, c, left_value, sigma_R, pin_amplitude, cfg)

    def rescue():
        base = phi0
        if tag in SLOW_TAGS and ansatz is not None:
            # a start whose tail underflowed cannot feel the slow Robin row;
            # lift it onto the target decay shape before sweeping
            base = np.maximum(base, _ansatz_start(profile, ansatz, grid))
        lifted = _monotone_sweeps(base, a, h, c, left_value, sigma_R,
                                  pin_amplitude,
                                  target_resid=max(cfg.newton_tol, 1e-6) * 10.0)
        return run(lifted)

    rescued = False
    try:
        phi, nrm, iters, history = run(phi0)
    except NewtonDivergenceError:
        if not _target_predicted(profile, c, tag):
            raise
        phi, nrm, iters, history = rescue()
        rescued = True
    if float(np.min(phi)) <= 0.0 and not rescued and _target_predicted(profile, c, tag):
        # sign-violating convergence from a start in the wrong basin; retry
        # once via the monotone lift, which cannot cross zero
        phi, nrm, iters, history = rescue()
    if float(np.min(phi)) <= 0.0:
        raise NoPositiveWaveError(
            f"converged state has min phi = {float(np.min(phi)):.3e} <= 0: "
            "no positive wave with this target",
            phi=phi, residual_norm=nrm, residual_history=history)
    # a forced wave holds the plateau at the left wall; a state whose first
    # grid cell already leaves alpha is a truncation artifact (the boundary
    # layer "wave" that exists on any finite domain even where the infinite-
    # domain problem has no solution)
    if abs(phi[1] - phi[0]) > 1e-6 * profile.alpha:
        raise NoPositiveWaveError(
            f"converged state has a boundary layer at the left wall "
            f"(|phi' (-L)| h = {abs(phi[1] - phi[0]):.3e}): it does not "
            "connect to the plateau equilibrium, so it is not a forced wave",
            phi=phi, residual_norm=nrm, residual_history=history)
    return WaveSolution(c=c, grid=grid, phi=phi, residual_norm=nrm,
                        decay_tag=tag, bc_right=sigma_R, target=ansatz,
                        pinned_amplitude=pin_amplitude, iterations=iters,
                        config=cfg)


@dataclass(frozen=True)
class FailureRecord:
    c: float
    kind: str  # "divergence" | "no_positive_wave"
    message: str


@dataclass
class ContinuationResult:
    c_values: np.ndarray
    solutions: list  # converged WaveSolutions in c order
    failures: list   # FailureRecords in c order

    @property
    def first_failure(self) -> Optional[FailureRecord]:
        return self.failures[0] if self.failures else None

    def solved_c(self) -> list:
        return [w.c for w in self.solutions]

    def failed_c(self) -> list:
        return [f.c for f in self.failures]


def continuation_in_c(profile: EnvironmentProfile, c_start: float, c_end: float,
                      steps: int, target: Union[DecayAnsatz, str],
                      cfg: Optional[SolverConfig] = None) -> ContinuationResult:
    """March c over `steps` uniform values, warm-starting from the last success.

    All points are attempted; failures are recorded and do not stop the march
    (each later point falls back to the standard tanh start if the warm start
    is stale).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cs = np.linspace(c_start, c_end, steps)
    cfg = SolverConfig.default_for(profile) if cfg is None else cfg
    warm: Optional[np.ndarray] = None
    solutions, failures = [], []
    for cv in cs:
        try:
            w = solve_wave(profile, float(cv), target, cfg, initial_guess=warm)
            solutions.append(w)
            warm = w.phi
        except NoPositiveWaveError as exc:
            failures.append(FailureRecord(float(cv), "no_positive_wave", str(exc)))
        except NewtonDivergenceError as exc:
            failures.append(FailureRecord(float(cv), "divergence", str(exc)))
    return ContinuationResult(c_values=cs, solutions=solutions, failures=failures)


def wave_family(profile: EnvironmentProfile, c: float, K_values: Sequence[float],
                cfg: Optional[SolverConfig] = None) -> list:
    """Slow-family members selected by amplitude pinning phi(L) = K tilde_a(L).

    Only meaningful when the classifier predicts non-exponential multiplicity
    (case 2 or 3).  Returned in ascending-K order.
    """
    report = classify(profile, c)
    if report.case_123 not in ("2", "3"):
        raise ValueError(
            f"wave_family needs case 2 or 3 (got case {report.case_123}): "
            "the slow family does not exist here")
    cfg = SolverConfig.default_for(profile) if cfg is None else cfg
    L = cfg.L
    ansatz0 = TildeA(profile, c)
    out = []
    for K in sorted(float(k) for k in K_values):
        pin = K * float(ansatz0.value(L))
        w = solve_wave(profile, c, TildeA(profile, c, K=K), cfg, pin_amplitude=pin)
        out.append(w)
    return out


@dataclass(frozen=True)
class OrderingResult:
    ordered: bool
    max_violation: float
    direction: str  # "first<=second" | "second<=first" | "none"


def ordering_check(w1: WaveSolution, w2: WaveSolution,
                   tolerance: float = 1e-8) -> OrderingResult:
    if w1.grid.shape != w2.grid.shape or not np.allclose(w1.grid, w2.grid, atol=0, rtol=0):
        raise ValueError("grid mismatch: ordering is defined on a shared grid")
    if w1.c != w2.c:
        raise ValueError("speed mismatch: ordering compares waves at the same c")
    v12 = float(np.max(w1.phi - w2.phi))  # violation of w1 <= w2
    v21 = float(np.max(w2.phi - w1.phi))
    if v12 <= tolerance:
        return OrderingResult(True, max(v12, 0.0), "first<=second")
    if v21 <= tolerance:
        return OrderingResult(True, max(v21, 0.0), "second<=first")
    return OrderingResult(False, min(v12, v21), "none")


def continuum_residual(wave: WaveSolution, profile: EnvironmentProfile,
                       margin: float = 5.0, n_probe: int = 2000) -> float:
    """Max |phi'' + c phi' + phi (a - phi)| of the quintic-spline interpolant,
    probed away from the boundaries.  Scales like h^2 for the second-order
    scheme, which is what the grid-convergence check measures."""
    spl = make_interp_spline(wave.grid, wave.phi, k=5)
    lo, hi = wave.grid[0] + margin, wave.grid[-1] - margin
    zz = np.linspace(lo, hi, n_probe)
    phi = spl(zz)
    d1 = spl.derivative(1)(zz)
    d2 = spl.derivative(2)(zz)
    a = np.asarray(profile.a(zz), dtype=float)
    return float(np.max(np.abs(d2 + wave.c * d1 + phi * (a - phi))))
