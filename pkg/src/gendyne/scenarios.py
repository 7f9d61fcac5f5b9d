"""Canned physical scenarios and comparison reports.

Four system families are covered: a single damped mode, two damped modes
with equal or unequal thermal baths, and two modes coupled by a two-mode
squeezing interaction H = chi (x1 p2 + p1 x2) (stable for chi < 1/2).
For each, a monitoring strategy (optimal, homodyne, or none) is turned into
a full report: spectral limits, the achieved conditional steady state, the
cancelling feedback gain with its closed-loop verification, saturation
flags and threshold values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bounds import (
    SpectralData,
    eig_product_bound,
    entanglement_bound,
    pt_nu_lower_bound,
    squeezing_bound,
    tightness_entanglement,
    tightness_squeezing,
)
from .conditioning import (
    UnravellingMatrix,
    apply_efficiency,
    measurement_matrices,
    named_unravelling,
    solve_riccati,
    stabilising_check,
)
from .dynamics import (
    CouplingOperators,
    DriftDiffusion,
    ThermalBath,
    lyapunov_steady_state,
    stability_check,
    thermal_drift_diffusion,
)
from .errors import UnstableSystemError
from .feedback import closed_loop, feedback_gain
from .linalg import max_abs
from .symplectic import (
    Bipartition,
    log_negativity,
    physicality_check,
    pt_min_symplectic_eigenvalue,
    purity,
    symplectic_eigenvalues,
)

SCENARIO_KINDS = ("free_single", "free_two_mode", "free_unequal_baths", "parametric")
STRATEGIES = ("optimal", "homodyne", "none")


def parametric_hamiltonian(chi: float) -> np.ndarray:
    """Two-mode squeezing interaction chi (x1 p2 + p1 x2)."""
    h = np.zeros((4, 4))
    h[0, 3] = h[3, 0] = chi
    h[1, 2] = h[2, 1] = chi
    return h


@dataclass(frozen=True)
class ScenarioSpec:
    """A named system plus monitoring strategy.

    n_th is a single occupation except for free_unequal_baths, which takes
    the pair (N1, N2). chi is required (and < 1/2) for the parametric kind.
    """

    kind: str
    n_th: float | tuple[float, float]
    strategy: str = "optimal"
    chi: Optional[float] = None
    eta: float = 1.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.kind == "free_unequal_baths":
            if np.ndim(self.n_th) != 1 or len(self.n_th) != 2:
                raise ValueError("free_unequal_baths takes an occupation pair")
            object.__setattr__(self, "n_th", (float(self.n_th[0]), float(self.n_th[1])))
        else:
            if np.ndim(self.n_th) != 0:
                raise ValueError(f"{self.kind} takes a single occupation")
            object.__setattr__(self, "n_th", float(self.n_th))
        occs = self.occupations
        if any(x < 0 for x in occs):
            raise ValueError("thermal occupations must be non-negative")
        if self.kind == "parametric":
            if self.chi is None:
                raise ValueError("parametric scenario needs chi")
            if self.chi < 0.0:
                raise ValueError("parametric coupling must be non-negative")
            # chi >= 1/2 destabilizes the dynamics; the stability gate in
            # run_scenario reports it as a numerical condition, not a typo.
        elif self.chi is not None:
            raise ValueError("chi only applies to the parametric scenario")
        if self.kind == "free_unequal_baths" and self.strategy == "homodyne":
            raise ValueError("the nonlocal homodyne scheme assumes equal baths")

    @property
    def occupations(self) -> tuple[float, ...]:
        if self.kind == "free_single":
            return (self.n_th,)
        if self.kind == "free_unequal_baths":
            return self.n_th
        return (self.n_th, self.n_th)

    @property
    def n_modes(self) -> int:
        return len(self.occupations)


def build_system(spec: ScenarioSpec) -> tuple[DriftDiffusion, CouplingOperators, ThermalBath]:
    bath = ThermalBath(spec.occupations)
    h = parametric_hamiltonian(spec.chi) if spec.kind == "parametric" else None
    dd, couplings = thermal_drift_diffusion(h, bath)
    return dd, couplings, bath


def build_unravelling(spec: ScenarioSpec, bath: ThermalBath) -> UnravellingMatrix:
    if spec.strategy == "none":
        return UnravellingMatrix.zero(2 * bath.n)
    if spec.n_modes == 1:
        kind = "optimal_squeeze" if spec.strategy == "optimal" else "homodyne_single"
        u = named_unravelling(kind, bath, spec.phi)
    else:
        kind = "optimal_entangle" if spec.strategy == "optimal" else "homodyne_nonlocal"
        u = named_unravelling(kind, bath)
    return apply_efficiency(u, spec.eta)


@dataclass(frozen=True)
class Report:
    """Everything a scenario run produces, bounds next to achieved values."""

    spec: ScenarioSpec
    stable: bool
    alphas: np.ndarray
    deltas: np.ndarray
    squeezing_bound: float
    eig_product_bound: float
    entanglement_bound: Optional[float]
    pt_nu_lower_bound: Optional[float]
    sigma_c: np.ndarray
    achieved_min_eigenvalue: float
    achieved_log_negativity: Optional[float]
    achieved_pt_nu: Optional[float]
    symplectic_eigenvalues: np.ndarray
    pure: bool
    purity: float
    tightness_squeezing: bool
    tightness_entanglement: Optional[bool]
    physicality_margin: float
    stabilising_margin: float
    riccati_residual: float
    closed_loop_residual: float
    unique_solution: Optional[bool]
    threshold_eta: Optional[float]
    threshold_chi: Optional[float]

    def to_dict(self) -> dict:
        def arr(x):
            return np.asarray(x).tolist()

        return {
            "scenario": {
                "kind": self.spec.kind,
                "n_th": arr(self.spec.n_th) if self.spec.kind == "free_unequal_baths" else self.spec.n_th,
                "strategy": self.spec.strategy,
                "chi": self.spec.chi,
                "eta": self.spec.eta,
                "phi": self.spec.phi,
            },
            "stable": self.stable,
            "spectral": {"alphas": arr(self.alphas), "deltas": arr(self.deltas)},
            "bounds": {
                "squeezing": self.squeezing_bound,
                "eig_product": self.eig_product_bound,
                "entanglement": self.entanglement_bound,
                "pt_nu_lower": self.pt_nu_lower_bound,
            },
            "sigma_c": arr(self.sigma_c),
            "achieved": {
                "min_eigenvalue": self.achieved_min_eigenvalue,
                "log_negativity": self.achieved_log_negativity,
                "pt_nu": self.achieved_pt_nu,
                "symplectic_eigenvalues": arr(self.symplectic_eigenvalues),
                "pure": self.pure,
                "purity": self.purity,
            },
            "tightness": {
                "squeezing": self.tightness_squeezing,
                "entanglement": self.tightness_entanglement,
            },
            "margins": {
                "physicality": self.physicality_margin,
                "stabilising": self.stabilising_margin,
            },
            "residuals": {
                "riccati": self.riccati_residual,
                "closed_loop": self.closed_loop_residual,
            },
            "unique_solution": self.unique_solution,
            "thresholds": {"eta": self.threshold_eta, "chi": self.threshold_chi},
        }


def run_scenario(spec: ScenarioSpec, *, numeric_thresholds: bool = False) -> Report:
    """Assemble system, monitoring, bounds, steady state and verification.

    With numeric_thresholds the entangling scenarios also carry the
    bisection estimate of the efficiency threshold (closed form scenarios
    always do).
    """
    dd, couplings, bath = build_system(spec)
    stability = stability_check(dd)
    if not stability.stable:
        raise UnstableSystemError(
            f"scenario {spec.kind} is unstable (stability check failed)"
        )
    spectral = SpectralData.from_drift_diffusion(dd)
    two_mode = spec.n_modes == 2
    bipartition = Bipartition.last_modes(2) if two_mode else None

    unravelling = build_unravelling(spec, bath)
    m = measurement_matrices(couplings, unravelling, dd)
    sol = solve_riccati(dd, m)
    sigma_c = sol.sigma

    eigs = np.linalg.eigvalsh(sigma_c)
    nus = symplectic_eigenvalues(sigma_c)
    phys = physicality_check(sigma_c)
    stab = stabilising_check(sigma_c, dd)

    fb = feedback_gain(sigma_c, m)
    loop = closed_loop(dd, m, fb)
    sigma_loop = lyapunov_steady_state(loop.as_drift_diffusion()).matrix
    loop_residual = max_abs(sigma_loop - sigma_c)

    threshold_eta: Optional[float] = None
    if two_mode and spec.strategy == "optimal":
        if spec.kind == "free_two_mode":
            threshold_eta = threshold_efficiency(spec)
        elif numeric_thresholds:
            threshold_eta = threshold_efficiency(spec)
    threshold_chi = (
        threshold_coupling(spec.n_th) if spec.kind == "parametric" else None
    )

    return Report(
        spec=spec,
        stable=True,
        alphas=stability.alphas,
        deltas=spectral.deltas,
        squeezing_bound=squeezing_bound(dd),
        eig_product_bound=eig_product_bound(dd),
        entanglement_bound=entanglement_bound(dd) if two_mode else None,
        pt_nu_lower_bound=pt_nu_lower_bound(dd) if two_mode else None,
        sigma_c=sigma_c,
        achieved_min_eigenvalue=float(eigs[0]),
        achieved_log_negativity=(
            log_negativity(sigma_c, bipartition) if two_mode else None
        ),
        achieved_pt_nu=(
            pt_min_symplectic_eigenvalue(sigma_c, bipartition) if two_mode else None
        ),
        symplectic_eigenvalues=nus,
        pure=bool(np.max(np.abs(nus - 1.0)) <= 1e-8),
        purity=purity(sigma_c),
        tightness_squeezing=tightness_squeezing(dd),
        tightness_entanglement=(
            tightness_entanglement(dd, bipartition) if two_mode else None
        ),
        physicality_margin=phys.margin,
        stabilising_margin=stab.margin,
        riccati_residual=sol.residual,
        closed_loop_residual=loop_residual,
        unique_solution=sol.unique,
        threshold_eta=threshold_eta,
        threshold_chi=threshold_chi,
    )


def threshold_efficiency(spec: ScenarioSpec, xtol: float = 1e-4) -> float:
    """Efficiency below which the optimal strategy entangles nothing.

    Closed form (1 + 2N)/(2(1 + N)) for the free two-mode system with equal
    baths; otherwise the zero of the unclamped log-negativity
    -log2(nu_pt(eta)) located by bisection on [1/2, 1] (the threshold always
    lies above 1/2).
    """
    if spec.strategy != "optimal" or spec.n_modes != 2:
        raise ValueError("efficiency threshold applies to optimal entangling scenarios")
    if spec.kind == "free_two_mode":
        occ = spec.n_th
        return (1.0 + 2.0 * occ) / (2.0 * (1.0 + occ))

    dd, couplings, bath = build_system(spec)
    base = build_unravelling(replace(spec, eta=1.0), bath)
    bipartition = Bipartition.last_modes(2)

    def unclamped(eta: float) -> float:
        m = measurement_matrices(couplings, apply_efficiency(base, eta), dd)
        sigma = solve_riccati(dd, m, probe_uniqueness=False).sigma
        return -float(np.log2(pt_min_symplectic_eigenvalue(sigma, bipartition)))

    lo, hi = 0.5, 1.0
    f_lo, f_hi = unclamped(lo), unclamped(hi)
    if f_lo > 0 or f_hi < 0:
        raise ValueError("no sign change for the efficiency threshold in [1/2, 1]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if unclamped(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_coupling(occupation: float) -> float:
    """Coupling above which homodyne-based driving entangles: N/(1 + 2N)."""
    if occupation < 0:
        raise ValueError("occupation must be non-negative")
    return occupation / (1.0 + 2.0 * occupation)


def sweep(spec: ScenarioSpec, parameter: str, grid) -> list[Report]:
    """One report per grid value of `parameter` (N, eta or chi), in order."""
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty sweep grid")
    reports = []
    for value in grid:
        if parameter == "N":
            row_spec = replace(spec, n_th=value)
        elif parameter == "eta":
            row_spec = replace(spec, eta=value)
        elif parameter == "chi":
            row_spec = replace(spec, chi=value)
        else:
            raise ValueError(f"unknown sweep parameter {parameter!r}")
        reports.append(run_scenario(row_spec))
    return reports
