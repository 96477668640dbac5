"""Closed-form values of the irregularity and the dimension, used directly and as oracles."""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import config
from .errors import ModelSpecError
from .ncalg import GeneratorSystem, NCPoly
from .quadrature import Density, NodeSet, SemicircleDensity, StaircaseDensity, TableDensity, UniformDensity
from .scalars import QQi
from .schemas import DegreeScheme, DiscrepancyReport, GraphSpec, RadulescuSpec
from .trace import MeasureModel

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, float]


@dataclass(frozen=True)
class OneVariable:
    irregularity_sq: Number
    sigma: Number


@dataclass(frozen=True)
class RadulescuValues:
    t: Fraction
    irregularity_sq: Fraction
    sigma: Fraction
    identity_holds: bool


@dataclass(frozen=True)
class GraphValues:
    t: Fraction
    irregularity_sq: Fraction
    sigma_xb: Fraction
    sigma_y: Fraction
    directed_edges: int
    identity_holds: bool
    loops: bool = False


@dataclass(frozen=True)
class EpsKernel:
    eps: float
    bound: float
    g_norm: float
    g_atoms: list[tuple[float, float]] = field(default_factory=list)
    g_grid: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class LogEnergy:
    value: float
    diverges: bool
    partial_sums: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class EpsPlateau:
    eps: float
    fit: tuple[NCPoly, ...]
    report: DiscrepancyReport
    g_norm: float


def one_var_sigma(measure: MeasureModel) -> OneVariable:
    """Σ*(x)² is the sum of squared atom masses."""
    squared = measure.atom_mass_squares()
    return OneVariable(irregularity_sq=squared, sigma=1.0 - squared)


def eigenvalue_sigma(eigenvalues: Sequence[float], tol: float = 1e-9) -> OneVariable:
    """Exact one-variable values for a self-adjoint N×N matrix, from its eigenvalue multiplicities."""
    values = sorted(float(v) for v in eigenvalues)
    if not values:
        raise ModelSpecError("eigenvalues", "at least one eigenvalue is required")
    multiplicities = [1]
    for a, b in zip(values, values[1:]):
        if b - a <= tol:
            multiplicities[-1] += 1
        else:
            multiplicities.append(1)
    N = len(values)
    squared = sum(Fraction(m * m, N * N) for m in multiplicities)
    return OneVariable(irregularity_sq=squared, sigma=1 - squared)


def fd_sigma(blocks: Sequence[tuple[int, Number]]) -> Fraction:
    """1 − Σ λ_i²/k_i² for ⊕ (M_k_i, λ_i tr)."""
    total = Fraction(0)
    weights = Fraction(0)
    for k, lam in blocks:
        lam = Fraction(lam).limit_denominator(10 ** 12) if isinstance(lam, float) else Fraction(lam)
        if k < 1 or lam <= 0:
            raise ModelSpecError("blocks", f"invalid block ({k}, {lam})")
        weights += lam
        total += lam * lam / (k * k)
    if weights != 1:
        raise ModelSpecError("blocks", f"weights sum to {weights}, not 1")
    return 1 - total


def group_sigma(beta0: Number, beta1: Number) -> Fraction:
    return Fraction(beta1) - Fraction(beta0) + 1


def finite_group_sigma(order: int) -> Fraction:
    if order < 1:
        raise ModelSpecError("order", "must be at least 1")
    # β₀ = 1/|Γ| and β₁ = 0 for finite groups
    return group_sigma(Fraction(1, order), 0)


def radulescu(spec: RadulescuSpec) -> RadulescuValues:
    K = 0
    t = Fraction(1)
    for pair in spec.pairs:
        k = 1 if pair.equal else 2
        K += k
        t += k * pair.tau_e * pair.tau_f
    squared = K + 1 - t
    sigma = K - squared
    # σ(s₀) = 1
    return RadulescuValues(t=t, irregularity_sq=squared, sigma=sigma, identity_holds=sigma + 1 == t)


def _connected(size: int, adjacency: dict[tuple[int, int], int]) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for (a, b) in adjacency:
            if a == v and b not in seen:
                seen.add(b)
                queue.append(b)
    return len(seen) == size


def graph_sigma(g: GraphSpec) -> GraphValues:
    """Values for the free graph algebra; a loop is one directed edge counted once in the double sum."""
    mu = g.weights
    n_vw = g.multiplicities()
    if not n_vw:
        raise ModelSpecError("edges", "the graph needs at least one edge")
    if not _connected(len(mu), n_vw):
        raise ModelSpecError("edges", "the graph is not connected")
    loops = any(a == b for a, b in n_vw)
    if loops:
        logger.warning("graph has loops: each counts as a single directed edge")
    directed = sum(n_vw.values())
    double_sum = sum((mu[a] * n * mu[b] for (a, b), n in n_vw.items()), Fraction(0))
    sigma_y = 1 - sum(w * w for w in mu)
    t = sigma_y + double_sum
    squared = directed - double_sum
    sigma_xb = directed - squared
    return GraphValues(t=t, irregularity_sq=squared, sigma_xb=sigma_xb, sigma_y=sigma_y,
                       directed_edges=directed, identity_holds=sigma_xb + sigma_y == t, loops=loops)


def subadditivity_check(sigma_xy: Number, sigma_x: Number, sigma_y: Number, slack: float = 1e-10) -> bool:
    return sigma_xy <= sigma_x + sigma_y + slack


# ε-regularized kernel

def _continuous_nodes(measure: MeasureModel, degree: int) -> NodeSet:
    if measure.density is None:
        return NodeSet.empty()
    return measure.density.node_set(degree, measure.tol)


def _g_eps(measure: MeasureModel, eps: float, t: float) -> float:
    total = 0.0
    for a, m in measure.atoms:
        u = t - a
        total += m * 2.0 * u / (u * u + eps * eps)
    if measure.density is not None:
        total += 2.0 * measure.density.integrate_against(
            lambda s: (t - s) / ((t - s) ** 2 + eps * eps), around=t, scale=eps)
    return total


def eps_kernel(measure: MeasureModel, eps: float, degree: int = 2 * config.DEFAULT_DEGREE_CAP) -> EpsKernel:
    """∬ ε⁴/((t−s)²+ε²)² dμdμ together with g_ε(t) = 2∫ (t−s)/((t−s)²+ε²) dμ(s)."""
    if eps <= 0:
        raise ModelSpecError("eps", "must be positive")

    def kernel(t, s):
        return eps ** 4 / ((t - s) ** 2 + eps * eps) ** 2

    bound = sum(ma * mb * kernel(a, b) for a, ma in measure.atoms for b, mb in measure.atoms)
    grid = _continuous_nodes(measure, degree)
    density = measure.density
    if density is not None:
        for a, ma in measure.atoms:
            bound += 2.0 * ma * density.integrate_against(lambda s: kernel(a, s), around=a, scale=eps)
        for t, w in zip(grid.nodes, grid.weights):
            bound += w * density.integrate_against(lambda s: kernel(t, s), around=t, scale=eps)
    g_atoms = [(a, _g_eps(measure, eps, a)) for a, _ in measure.atoms]
    g_grid = [(float(t), _g_eps(measure, eps, t)) for t in grid.nodes]
    norm_sq = sum(m * g * g for (_, m), (_, g) in zip(measure.atoms, g_atoms))
    norm_sq += sum(w * g * g for w, (_, g) in zip(grid.weights, g_grid))
    logger.info("eps kernel bound %.6g at eps=%.1e", bound, eps)
    return EpsKernel(eps=eps, bound=float(bound), g_norm=math.sqrt(norm_sq), g_atoms=g_atoms, g_grid=g_grid)


def eps_plateau(measure: MeasureModel, eps: float, degree: int, scheme: DegreeScheme) -> EpsPlateau:
    """Fit g_ε by a polynomial in L²(μ) and hand the fit to the discrepancy as Ξ."""
    from .stein import discrepancy

    k = eps_kernel(measure, eps)
    grid = _continuous_nodes(measure, 2 * config.DEFAULT_DEGREE_CAP)
    points = np.array([a for a, _ in measure.atoms] + list(grid.nodes), dtype=float)
    weights = np.array([m for _, m in measure.atoms] + list(grid.weights), dtype=float)
    values = np.array([g for _, g in k.g_atoms] + [g for _, g in k.g_grid], dtype=float)
    root = np.sqrt(weights)
    V = root[:, None] * points[:, None] ** np.arange(degree + 1)[None, :]
    coeffs, *_ = np.linalg.lstsq(V, root * values, rcond=None)
    system = measure.system
    x = NCPoly.variable(system, 0)
    fit = NCPoly.zero(system)
    power = NCPoly.one(system)
    for c in coeffs:
        fit = fit + power * QQi.from_complex(complex(c))
        power = power * x
    report = discrepancy(measure, (fit,), scheme)
    return EpsPlateau(eps=eps, fit=(fit,), report=report, g_norm=k.g_norm)


# Logarithmic energy

def _uniform_self_energy(length: float, mass: float) -> float:
    return mass * mass * (math.log(length) - 1.5)


def _staircase_energy(levels: int) -> float:
    pieces = StaircaseDensity(levels).pieces()
    total = 0.0
    for j, (cj, log_lj, mj) in enumerate(pieces):
        # log|x−y| over a piece of length ℓ averages to log ℓ − 3/2
        total += mj * mj * (log_lj - 1.5)
        lj = math.exp(log_lj)
        for ck, log_lk, mk in pieces[j + 1:]:
            lk = math.exp(log_lk)
            dist = abs(cj - ck)
            total += 2.0 * mj * mk * (math.log(dist) - (lj * lj + lk * lk) / (24.0 * dist * dist))
    return total


def quadrature_log_energy(density: Density, degree: int = 2 * config.DEFAULT_DEGREE_CAP,
                          tol: float = config.QUADRATURE_TOL) -> float:
    # outer integral on the density's node set, inner one adaptive around the log singularity
    grid = density.node_set(degree, tol)
    total = 0.0
    for t, w in zip(grid.nodes, grid.weights):
        total += w * density.integrate_against(lambda s: math.log(abs(t - s)) if s != t else 0.0, around=t)
    return float(total)


def log_energy(measure: MeasureModel, level: Optional[int] = None,
               degree: int = 2 * config.DEFAULT_DEGREE_CAP) -> LogEnergy:
    """∬ log|x−y| dμ(x)dμ(y); any atom sends it to −∞."""
    if measure.atoms:
        return LogEnergy(value=-math.inf, diverges=True)
    density = measure.density
    if isinstance(density, StaircaseDensity):
        levels = density.levels if level is None else level
        partial = [_staircase_energy(k) for k in range(1, levels + 1)]
        return LogEnergy(value=partial[-1], diverges=False, partial_sums=partial)
    if isinstance(density, UniformDensity):
        return LogEnergy(value=_uniform_self_energy(density.b - density.a, density.mass), diverges=False)
    if isinstance(density, (SemicircleDensity, TableDensity)):
        return LogEnergy(value=quadrature_log_energy(density, degree, measure.tol), diverges=False)
    raise ModelSpecError("density", f"no log-energy rule for {type(density).__name__}")
