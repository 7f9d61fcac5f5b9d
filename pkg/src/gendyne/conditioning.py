"""Continuous Gaussian measurements and the conditional steady state.

Diffusive monitoring of the bath channels is parameterized by the pair
(Theta, Upsilon): the measurement record enters the conditional dynamics
through L complex Wiener increments dz with correlations

    dz dz^dag = Theta dt,     dz dz^T = Upsilon dt,

Theta Hermitian and Upsilon (complex) symmetric. Splitting dz into real and
imaginary parts gives the real 2L x 2L noise-correlation matrix

    U = 1/2 [[Re Theta + Re Upsilon,  Im Upsilon - Im Theta],
             [Im Upsilon + Im Theta,  Re Theta - Re Upsilon]]

which must be positive semidefinite. (For real Theta this reduces to the
familiar [[Theta + Re Upsilon, Im Upsilon], [Im Upsilon, Theta - Re Upsilon]]/2
form; the Im Theta terms matter once phases rotate the monitored channels.)

Given couplings with real stacking C_bar and pair form S, a monitoring
choice U yields the measurement matrices

    C     = (2 U)^(1/2) C_bar          (current sensitivity)
    Gamma = (2 U)^(1/2) S C_bar Omega  (back-action cross term)

and the conditional covariance matrix obeys the deterministic Riccati flow

    d sigma/dt = A sigma + sigma A^T + D
                 - (sigma C^T + Gamma^T)(C sigma + Gamma).

Detector efficiency eta in [0, 1] models a beam splitter with vacuum on the
idle port in front of each detector. The signal carried by the record lives
on the squeezed output band, whose scale is the best reachable conditional
variance lam* = alpha_1 / delta_1 (smallest eigenvalue of -(A + A^T) over
largest of D), so admixing (1 - eta) of vacuum rescales the extracted
information by

    s(eta) = eta lam* / (eta lam* + 1 - eta),

implemented as U -> s U. eta = 1 leaves U untouched, eta = 0 recovers the
unmonitored (Lyapunov) dynamics, and the zero crossings of the achievable
log-negativity land at (1 + 2N)/(2(1 + N)) for the free system. Because
lam* depends on the dynamics, building measurement matrices at eta < 1
requires the drift/diffusion pair.

Translation rule used by the named constructors below: a measurement term
sqrt(k) H[o exp(i phi)] dw acting through jump operator c = sqrt(k') o
contributes sqrt(k / k') exp(-i phi) dw to the increment dz of that channel;
the (Theta, Upsilon) entries then follow from the dw correlations. Channels
whose jump operator vanishes are left unmonitored (their correlation entries
are set to zero), which makes the constructors continuous in the bath
occupation. Correctness is enforced behaviourally by the fixed-point and
log-negativity tests rather than symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .dynamics import (
    CouplingOperators,
    DriftDiffusion,
    ThermalBath,
    lyapunov_steady_state,
    stability_check,
)
from .errors import ConvergenceError, NotStabilisingError, PhysicalityError, UnstableSystemError
from .linalg import (
    max_abs,
    min_eigenvalue,
    psd_sqrt,
    psd_tolerance,
    solve_bilinear,
    symmetrize,
)
from .symplectic import CovarianceMatrix, as_matrix, physicality_check, symplectic_form

UNRAVELLING_KINDS = (
    "optimal_squeeze",
    "optimal_entangle",
    "homodyne_single",
    "homodyne_nonlocal",
)


@dataclass(frozen=True)
class UnravellingMatrix:
    """Noise-correlation blocks (Theta, Upsilon) plus detector efficiency."""

    theta: np.ndarray = field(repr=False)
    upsilon: np.ndarray = field(repr=False)
    eta: float = 1.0

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=complex)
        upsilon = np.asarray(self.upsilon, dtype=complex)
        if theta.shape != upsilon.shape or theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise ValueError("Theta and Upsilon must be square with equal shape")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        theta.setflags(write=False)
        upsilon.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "upsilon", upsilon)

    @property
    def num_ops(self) -> int:
        return self.theta.shape[0]

    @property
    def u_matrix(self) -> np.ndarray:
        """The real 2L x 2L correlation matrix at unit efficiency."""
        re_t, im_t = self.theta.real, self.theta.imag
        re_u, im_u = self.upsilon.real, self.upsilon.imag
        return 0.5 * np.block(
            [[re_t + re_u, im_u - im_t], [im_u + im_t, re_t - re_u]]
        )

    @classmethod
    def zero(cls, num_ops: int) -> "UnravellingMatrix":
        """No monitoring: all correlations vanish."""
        z = np.zeros((num_ops, num_ops))
        return cls(z, z)

    @classmethod
    def from_u_matrix(cls, u: np.ndarray, eta: float = 1.0) -> "UnravellingMatrix":
        """Recover (Theta, Upsilon) from a real symmetric 2L x 2L matrix."""
        u = np.asarray(u, dtype=float)
        ell = u.shape[0] // 2
        u11, u12 = u[:ell, :ell], u[:ell, ell:]
        u21, u22 = u[ell:, :ell], u[ell:, ell:]
        theta = (u11 + u22) + 1j * (u21 - u12)
        upsilon = (u11 - u22) + 1j * (u12 + u21)
        return cls(theta, upsilon, eta)


class UnravellingDiagnostics(NamedTuple):
    valid: bool
    u_min_eigenvalue: float
    theta_hermitian: bool
    upsilon_symmetric: bool
    eta_in_range: bool


def validate_unravelling(u: UnravellingMatrix) -> UnravellingDiagnostics:
    """Check U >= 0, Theta Hermitian, Upsilon symmetric and eta in [0, 1]."""
    theta_ok = max_abs(u.theta - u.theta.conj().T) <= 1e-10 * max(1.0, max_abs(u.theta))
    upsilon_ok = max_abs(u.upsilon - u.upsilon.T) <= 1e-10 * max(1.0, max_abs(u.upsilon))
    eta_ok = 0.0 <= u.eta <= 1.0
    umat = u.u_matrix
    min_eig = min_eigenvalue(symmetrize(umat)) if theta_ok and upsilon_ok else -np.inf
    valid = theta_ok and upsilon_ok and eta_ok and min_eig >= -psd_tolerance(umat)
    return UnravellingDiagnostics(valid, float(min_eig), theta_ok, upsilon_ok, eta_ok)


def apply_efficiency(u: UnravellingMatrix, eta: float) -> UnravellingMatrix:
    """Place a lossy channel (transmittivity eta) before the detectors."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    return replace(u, eta=u.eta * eta)


@dataclass(frozen=True)
class MeasurementSetup:
    """Current sensitivity C and back-action cross term Gamma (2L x 2n)."""

    c: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if c.shape != gamma.shape or c.ndim != 2:
            raise ValueError("C and Gamma must share a 2L x 2n shape")
        c.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gamma)

    @property
    def is_trivial(self) -> bool:
        return max_abs(self.c) == 0.0 and max_abs(self.gamma) == 0.0


def efficiency_information_scale(eta: float, dd: DriftDiffusion) -> float:
    """Fraction of record information surviving detector loss (see module docs).

    Vacuum admixed at the detectors competes with the squeezed output band,
    whose scale is the squeezing limit lam* = alpha_1 / delta_1 of (A, D).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    if eta == 1.0:
        return 1.0
    stability = stability_check(dd)
    if not stability.stable:
        raise UnstableSystemError("efficiency model requires a stable system")
    lam_star = stability.alphas[0] / np.linalg.eigvalsh(dd.d)[-1]
    return eta * lam_star / (eta * lam_star + 1.0 - eta)


def measurement_matrices(
    couplings: CouplingOperators,
    unravelling: UnravellingMatrix,
    dd: Optional[DriftDiffusion] = None,
) -> MeasurementSetup:
    """Build (C, Gamma) for a monitored system.

    C = (2 U_eta)^(1/2) C_bar and Gamma = (2 U_eta)^(1/2) S C_bar Omega, with
    U_eta = s(eta) U and the square root taken by symmetric eigendecomposition
    (eigenvalues in [-1e-12, 0) clipped to zero; anything lower is rejected).
    The drift/diffusion pair is only needed when eta < 1 (it sets the squeezed
    output scale entering the efficiency model).
    """
    diag = validate_unravelling(unravelling)
    if not diag.valid:
        raise ValueError(f"invalid unravelling matrix: {diag}")
    if unravelling.num_ops != couplings.num_ops:
        raise ValueError("unravelling and couplings disagree on channel count")
    if unravelling.eta < 1.0:
        if dd is None:
            raise ValueError("eta < 1 requires the drift/diffusion pair")
        scale = efficiency_information_scale(unravelling.eta, dd)
    else:
        scale = 1.0
    root = psd_sqrt(2.0 * scale * unravelling.u_matrix)
    c_bar = couplings.c_bar
    omega = symplectic_form(couplings.n)
    c = root @ c_bar
    gamma = root @ couplings.s_matrix @ c_bar @ omega
    return MeasurementSetup(c, gamma)


def riccati_rhs(sigma, dd: DriftDiffusion, m: MeasurementSetup) -> np.ndarray:
    """Right-hand side of the conditional covariance flow, symmetrized."""
    s = as_matrix(sigma)
    if s.shape != dd.a.shape:
        raise ValueError("covariance and drift dimensions disagree")
    if m.c.shape[1] != s.shape[0]:
        raise ValueError("measurement and covariance dimensions disagree")
    k = m.c @ s + m.gamma
    return symmetrize(dd.a @ s + s @ dd.a.T + dd.d - k.T @ k)


class StabilisingResult(NamedTuple):
    stabilising: bool
    margin: float


def stabilising_check(sigma, dd: DriftDiffusion) -> StabilisingResult:
    """Test A sigma + sigma A^T + D >= 0.

    This is the reachability condition: exactly the CMs satisfying it (and
    the uncertainty relation) arise as conditional steady states of some
    valid monitoring.
    """
    s = as_matrix(sigma)
    w = symmetrize(dd.a @ s + s @ dd.a.T + dd.d)
    margin = min_eigenvalue(w)
    return StabilisingResult(margin >= -psd_tolerance(w), float(margin))


@dataclass(frozen=True)
class RiccatiSolution:
    sigma: np.ndarray
    residual: float
    flow_steps: int
    newton_steps: int
    unique: Optional[bool]


def _newton_iterations(
    sigma: np.ndarray,
    a_tilde: np.ndarray,
    ctc: np.ndarray,
    rhs_fn,
    atol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Damped Newton iterations on the algebraic Riccati equation.

    Each step solves the vectorized linearization F dX + dX F^T = -R(sigma)
    with F = A_tilde - sigma C^T C. Returns (sigma, residual, steps, converged).
    """
    res = rhs_fn(sigma)
    res_norm = max_abs(res)
    steps = 0
    for _ in range(max_iter):
        if res_norm <= atol:
            return sigma, res_norm, steps, True
        f = a_tilde - sigma @ ctc
        try:
            delta = solve_bilinear(f, -res)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        improved = False
        for _ in range(5):
            trial = symmetrize(sigma + scale * delta)
            trial_res = rhs_fn(trial)
            trial_norm = max_abs(trial_res)
            if np.isfinite(trial_norm) and trial_norm < res_norm:
                sigma, res, res_norm = trial, trial_res, trial_norm
                improved = True
                break
            scale /= 2.0
        steps += 1
        if not improved:
            break
    return sigma, res_norm, steps, res_norm <= atol


def solve_riccati(
    dd: DriftDiffusion,
    m: MeasurementSetup,
    sigma0=None,
    *,
    method: str = "hybrid",
    max_flow_steps: int = 4000,
    newton_iters: int = 10,
    probe_uniqueness: bool = True,
) -> RiccatiSolution:
    """Steady state of the conditional covariance flow.

    Default strategy: adaptive semi-implicit integration of the flow from
    sigma0 (the unmonitored Lyapunov steady state unless given), with step
    halving whenever the residual grows, until ||rhs||_max stays below
    1e-10 * ||D||_max for three consecutive accepted steps; then at most
    `newton_iters` Newton corrections on the algebraic equation.

    method="integrate" runs the flow phase only (step capped at 1.0);
    method="newton" runs Newton only. Both serve as mutual cross-checks.

    The returned solution is verified to be physical and stabilising. When
    `probe_uniqueness` is set, Newton is restarted from sigma0 + 0.1*identity
    and `unique=False` is reported if it lands elsewhere (difference above
    1e-6 elementwise).
    """
    if method not in ("hybrid", "integrate", "newton"):
        raise ValueError(f"unknown method {method!r}")
    if not stability_check(dd).stable:
        raise UnstableSystemError("drift matrix admits no steady state")

    if m.is_trivial:
        # No information gained: conditional and unconditional states agree.
        sigma = lyapunov_steady_state(dd).matrix
        res = max_abs(riccati_rhs(sigma, dd, m))
        return RiccatiSolution(sigma, res, 0, 0, True)

    if sigma0 is None:
        sigma0 = lyapunov_steady_state(dd).matrix
    sigma0 = symmetrize(as_matrix(sigma0))

    atol = 1e-10 * max_abs(dd.d)
    a_tilde = dd.a - m.gamma.T @ m.c
    ctc = m.c.T @ m.c

    def rhs_fn(s):
        return riccati_rhs(s, dd, m)

    sigma = sigma0.copy()
    res = rhs_fn(sigma)
    res_norm = max_abs(res)
    flow_steps = 0
    newton_steps = 0

    if method in ("hybrid", "integrate"):
        h = 0.1
        h_max = 1.0 if method == "integrate" else 1e6
        consecutive = 3 if res_norm <= atol else 0
        eye = np.eye(sigma.shape[0])
        while consecutive < 3:
            if flow_steps >= max_flow_steps:
                raise ConvergenceError(
                    f"conditional flow did not converge in {max_flow_steps} steps "
                    f"(residual {res_norm:.3e})"
                )
            f = a_tilde - sigma @ ctc
            try:
                delta = solve_bilinear(eye / (2.0 * h) - f, res)
            except np.linalg.LinAlgError:
                h /= 2.0
                continue
            trial = symmetrize(sigma + delta)
            trial_res = rhs_fn(trial)
            trial_norm = max_abs(trial_res)
            accept = (
                np.isfinite(trial_norm)
                and trial_norm <= res_norm
                and min_eigenvalue(trial) > 0.0
            )
            flow_steps += 1
            if accept:
                sigma, res, res_norm = trial, trial_res, trial_norm
                h = min(h * 1.6, h_max)
                consecutive = consecutive + 1 if res_norm <= atol else 0
            else:
                h /= 2.0
                if h < 1e-10:
                    raise ConvergenceError(
                        f"conditional flow step size underflow (residual {res_norm:.3e})"
                    )

    if method in ("hybrid", "newton"):
        iters = newton_iters if method == "hybrid" else 100
        sigma, res_norm, newton_steps, converged = _newton_iterations(
            sigma, a_tilde, ctc, rhs_fn, 0.01 * atol, iters
        )
        if not converged and res_norm > atol:
            raise ConvergenceError(
                f"Newton refinement stalled at residual {res_norm:.3e} "
                f"(tolerance {atol:.3e})"
            )

    if res_norm > atol:
        raise ConvergenceError(
            f"conditional steady state residual {res_norm:.3e} exceeds {atol:.3e}"
        )

    phys = physicality_check(sigma)
    if not phys.physical:
        raise PhysicalityError(
            f"converged conditional CM violates the uncertainty relation "
            f"(margin {phys.margin:.3e})"
        )
    stab = stabilising_check(sigma, dd)
    if not stab.stabilising:
        raise NotStabilisingError(
            f"converged conditional CM is not stabilising (margin {stab.margin:.3e})"
        )

    unique: Optional[bool] = None
    if probe_uniqueness:
        probe0 = sigma0 + 0.1 * np.eye(sigma.shape[0])
        probe, probe_res, _, probe_conv = _newton_iterations(
            probe0, a_tilde, ctc, rhs_fn, atol, 50
        )
        unique = not (probe_conv and max_abs(probe - sigma) > 1e-6)

    return RiccatiSolution(sigma, float(res_norm), flow_steps, newton_steps, unique)


def riccati_steady_state(
    dd: DriftDiffusion, m: MeasurementSetup, sigma0=None, **kwargs
) -> CovarianceMatrix:
    """Conditional steady-state CM (see solve_riccati for the contract)."""
    return CovarianceMatrix(solve_riccati(dd, m, sigma0, **kwargs).sigma)


def optimal_squeezing_unravelling(bath: ThermalBath, phi: float = 0.0) -> UnravellingMatrix:
    """Single-mode monitoring that squeezes the quadrature at angle phi.

    Both the loss and the gain channel are monitored along a fixed phase:
    dz_1 = exp(-i phi) dw_1, dz_2 = exp(+i phi) dw_2 with independent real
    increments. At steady state the monitored quadrature variance reaches
    1/(1 + 2N) while the conjugate one stays at the thermal value, so the
    state is pure.
    """
    if bath.n != 1:
        raise ValueError("optimal_squeeze is a single-mode unravelling")
    occ = bath.occupations[0]
    gain_on = 1.0 if occ > 0 else 0.0
    theta = np.diag([1.0, gain_on]).astype(complex)
    upsilon = np.diag([np.exp(-2j * phi), gain_on * np.exp(2j * phi)])
    return UnravellingMatrix(theta, upsilon)


def homodyne_single_unravelling(bath: ThermalBath, phi: float = 0.0) -> UnravellingMatrix:
    """Single-current homodyne monitoring of the bath at angle phi.

    One real increment drives both channels:
    dz_1 = c1 exp(-i phi) dw, dz_2 = -c2 exp(+i phi) dw with
    c1^2 = (N+1)/(2N+1), c2^2 = N/(2N+1). The conditional steady state is
    the thermal CM itself, so this strategy produces no squeezing; at N = 0
    it coincides with the optimal single-mode unravelling.
    """
    if bath.n != 1:
        raise ValueError("homodyne_single is a single-mode unravelling")
    occ = bath.occupations[0]
    c1s = (occ + 1.0) / (2.0 * occ + 1.0)
    c2s = occ / (2.0 * occ + 1.0)
    c12 = np.sqrt(c1s * c2s)
    theta = np.array(
        [
            [c1s, -c12 * np.exp(-2j * phi)],
            [-c12 * np.exp(2j * phi), c2s],
        ]
    )
    upsilon = np.array(
        [
            [c1s * np.exp(-2j * phi), -c12],
            [-c12, c2s * np.exp(2j * phi)],
        ]
    )
    return UnravellingMatrix(theta, upsilon)


def _pure_tms_cm(n_small: float) -> np.ndarray:
    """Pure two-mode squeezed CM, squeezed in (x1 - x2, p1 + p2), with
    smallest partially transposed symplectic eigenvalue 1/(1 + 2 n_small)."""
    r = 0.5 * np.log(1.0 + 2.0 * n_small)
    ch, sh = np.cosh(2.0 * r), np.sinh(2.0 * r)
    sigma = np.diag([ch, ch, ch, ch])
    sigma[0, 2] = sigma[2, 0] = sh
    sigma[1, 3] = sigma[3, 1] = -sh
    return sigma


def optimal_entangling_unravelling(bath: ThermalBath) -> UnravellingMatrix:
    """Nonlocal two-mode monitoring whose steady state is a pure two-mode
    squeezed state.

    Four real currents track the joint quadratures x_1 - x_2 and p_1 + p_2
    (the pair conjugate to the amplified one when a two-mode squeezing
    Hamiltonian is present, which is what lets the monitoring reach the
    spectral entanglement limit). For equal baths the achieved
    log-negativity is log2(1 + 2N); for unequal occupations the reachable
    target is the pure two-mode squeezed state set by N_s = min(N_1, N_2)
    and the correlations are synthesized from that target. Channel ordering
    is (loss_1, gain_1, loss_2, gain_2).
    """
    if bath.n != 2:
        raise ValueError("optimal_entangle is a two-mode unravelling")
    n1, n2 = bath.occupations
    if abs(n1 - n2) <= 1e-12:
        gain_on = 1.0 if n1 > 0 else 0.0
        theta = np.diag([1.0, gain_on, 1.0, gain_on]).astype(complex)
        upsilon = np.zeros((4, 4), dtype=complex)
        upsilon[0, 2] = upsilon[2, 0] = -1.0
        upsilon[1, 3] = upsilon[3, 1] = -gain_on
        return UnravellingMatrix(theta, upsilon)

    # Unequal baths: no simple closed form; build the correlations that make
    # the reachable pure two-mode squeezed state the conditional fixed point.
    from .dynamics import thermal_drift_diffusion
    from .feedback import unravelling_for_target

    dd, couplings = thermal_drift_diffusion(None, bath)
    target = _pure_tms_cm(min(n1, n2))
    return unravelling_for_target(target, dd, couplings)


def nonlocal_homodyne_unravelling(bath: ThermalBath) -> UnravellingMatrix:
    """Two-current homodyne monitoring of x_1 - x_2 and p_1 + p_2.

    Defined for equal baths; the conditional steady state of the free system
    is the thermal CM, so no entanglement is produced. Coincides with the
    optimal entangling unravelling at N = 0.
    """
    if bath.n != 2:
        raise ValueError("homodyne_nonlocal is a two-mode unravelling")
    n1, n2 = bath.occupations
    if abs(n1 - n2) > 1e-12:
        raise ValueError("homodyne_nonlocal requires equal bath occupations")
    occ = n1
    a2 = (occ + 1.0) / (2.0 * (2.0 * occ + 1.0))
    b2 = occ / (2.0 * (2.0 * occ + 1.0))
    ab = np.sqrt(a2 * b2)
    theta = np.zeros((4, 4), dtype=complex)
    theta[0, 0] = theta[2, 2] = 2.0 * a2
    theta[1, 1] = theta[3, 3] = 2.0 * b2
    theta[0, 3] = theta[3, 0] = 2.0 * ab
    theta[1, 2] = theta[2, 1] = 2.0 * ab
    upsilon = np.zeros((4, 4), dtype=complex)
    upsilon[0, 2] = upsilon[2, 0] = -2.0 * a2
    upsilon[1, 3] = upsilon[3, 1] = -2.0 * b2
    upsilon[0, 1] = upsilon[1, 0] = -2.0 * ab
    upsilon[2, 3] = upsilon[3, 2] = -2.0 * ab
    return UnravellingMatrix(theta, upsilon)


def named_unravelling(kind: str, bath: ThermalBath, phi: float = 0.0) -> UnravellingMatrix:
    """Dispatch to one of the standard monitoring schemes by name."""
    if kind == "optimal_squeeze":
        return optimal_squeezing_unravelling(bath, phi)
    if kind == "homodyne_single":
        return homodyne_single_unravelling(bath, phi)
    if kind == "optimal_entangle":
        return optimal_entangling_unravelling(bath)
    if kind == "homodyne_nonlocal":
        return nonlocal_homodyne_unravelling(bath)
    raise ValueError(f"unknown unravelling kind {kind!r}; choose from {UNRAVELLING_KINDS}")
