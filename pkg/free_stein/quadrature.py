"""Densities of spectral measures and the node sets that integrate their moments."""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from . import config
from .errors import ModelSpecError, NumericalDiagnostic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeSet:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def moments(self, max_degree: int) -> np.ndarray:
        powers = self.nodes[:, None] ** np.arange(max_degree + 1)[None, :]
        return self.weights @ powers

    def __add__(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(np.concatenate([self.nodes, other.nodes]),
                       np.concatenate([self.weights, other.weights]))

    @classmethod
    def empty(cls) -> "NodeSet":
        return cls(np.zeros(0), np.zeros(0))


def gauss_legendre(a: float, b: float, order: int) -> NodeSet:
    x, w = leggauss(order)
    half = (b - a) / 2.0
    return NodeSet(half * x + (a + b) / 2.0, half * w)


def refine(build: Callable[[int], NodeSet], max_degree: int, tol: float = config.QUADRATURE_TOL,
           start: int = 16, max_order: int = 4096) -> NodeSet:
    """Double the order of ``build`` until moments up to max_degree settle."""
    order = start
    current = build(order)
    moments = current.moments(max_degree)
    while order < max_order:
        order *= 2
        candidate = build(order)
        updated = candidate.moments(max_degree)
        if np.all(np.abs(updated - moments) <= tol * np.maximum(1.0, np.abs(moments))):
            logger.debug("moments up to degree %d settled at order %d", max_degree, order)
            return candidate
        current, moments = candidate, updated
    raise NumericalDiagnostic(f"quadrature did not settle below {tol:g} by order {max_order}")


class Density(ABC):
    """Absolutely continuous part of a measure; ``pdf`` already carries the mass."""

    mass: float

    @abstractmethod
    def support(self) -> tuple[float, float]:
        ...

    @abstractmethod
    def pdf(self, t):
        ...

    @abstractmethod
    def node_set(self, max_degree: int, tol: float = config.QUADRATURE_TOL) -> NodeSet:
        ...

    def integrate_against(self, kernel: Callable[[float], float], around: float | None = None,
                          scale: float = 0.0) -> float:
        """∫ kernel(s) dν(s), resolving a feature of width ``scale`` at ``around``."""
        a, b = self.support()
        points = []
        if around is not None:
            points = sorted({p for p in (around - 50.0 * scale, around, around + 50.0 * scale) if a < p < b})
        value, error = integrate.quad(lambda s: kernel(s) * float(self.pdf(s)), a, b,
                                      points=points or None, limit=500)
        if error > config.QUADRATURE_TOL:
            logger.debug("quad error estimate %.3e on [%g, %g] around %s", error, a, b, around)
        return value


class SemicircleDensity(Density):
    def __init__(self, center: float = 0.0, radius: float = 2.0, mass: float = 1.0):
        if radius <= 0:
            raise ModelSpecError("density.radius", "must be positive")
        if mass <= 0:
            raise ModelSpecError("density.mass", "must be positive")
        self.center = center
        self.radius = radius
        self.mass = mass

    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def pdf(self, t):
        u = np.asarray(t, dtype=float) - self.center
        inside = np.clip(self.radius ** 2 - u ** 2, 0.0, None)
        return self.mass * 2.0 / (math.pi * self.radius ** 2) * np.sqrt(inside)

    def node_set(self, max_degree, tol=config.QUADRATURE_TOL):
        # t = c + r cos θ turns the density into (2/π) sin²θ dθ on [0, π]
        def build(order):
            theta = gauss_legendre(0.0, math.pi, order)
            weights = self.mass * (2.0 / math.pi) * np.sin(theta.nodes) ** 2 * theta.weights
            return NodeSet(self.center + self.radius * np.cos(theta.nodes), weights)

        return refine(build, max_degree, tol)


class UniformDensity(Density):
    def __init__(self, a: float = 0.0, b: float = 1.0, mass: float = 1.0):
        if not b > a:
            raise ModelSpecError("density.b", "must exceed density.a")
        if mass <= 0:
            raise ModelSpecError("density.mass", "must be positive")
        self.a = a
        self.b = b
        self.mass = mass

    def support(self):
        return (self.a, self.b)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= self.a) & (t <= self.b), self.mass / (self.b - self.a), 0.0)

    def node_set(self, max_degree, tol=config.QUADRATURE_TOL):
        def build(order):
            rule = gauss_legendre(self.a, self.b, order)
            return NodeSet(rule.nodes, rule.weights * self.mass / (self.b - self.a))

        return refine(build, max_degree, tol)


class TableDensity(Density):
    """A sampled density, integrated by the trapezoid rule on its own grid."""

    def __init__(self, points, values):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        if points.ndim != 1 or points.shape != values.shape or len(points) < 2:
            raise ModelSpecError("density.points", "needs at least two samples matching density.values")
        if np.any(np.diff(points) <= 0):
            raise ModelSpecError("density.points", "must be strictly increasing")
        if np.any(values < 0):
            raise ModelSpecError("density.values", "must be nonnegative")
        self.points = points
        self.values = values
        self.mass = float(integrate.trapezoid(values, points))

    def support(self):
        return (float(self.points[0]), float(self.points[-1]))

    def pdf(self, t):
        return np.interp(t, self.points, self.values, left=0.0, right=0.0)

    def node_set(self, max_degree, tol=config.QUADRATURE_TOL):
        gaps = np.diff(self.points)
        weights = np.zeros_like(self.points)
        weights[:-1] += gaps / 2.0
        weights[1:] += gaps / 2.0
        return NodeSet(self.points.copy(), weights * self.values)


class StaircaseDensity(Density):
    """Uniform pieces of mass 2^-k and length exp(-12^k - 1) sitting at 2^-k.

    The last piece absorbs the tail mass so the measure stays a probability
    measure. Lengths are carried as logarithms; most of them underflow.
    """

    def __init__(self, levels: int = 40):
        if levels < 1:
            raise ModelSpecError("density.levels", "must be at least 1")
        self.levels = levels
        self.mass = 1.0

    def pieces(self) -> list[tuple[float, float, float]]:
        """(center, log length, mass) per level."""
        out = []
        for k in range(1, self.levels + 1):
            mass = 2.0 ** -k
            if k == self.levels:
                mass *= 2.0
            out.append((2.0 ** -k, -(12.0 ** k) - 1.0, mass))
        return out

    def support(self):
        center, log_length, _ = self.pieces()[0]
        return (0.0, center + math.exp(log_length) / 2.0)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for center, log_length, mass in self.pieces():
            length = math.exp(log_length)
            if length > 0.0:
                out = out + np.where(np.abs(t - center) <= length / 2.0, mass / length, 0.0)
        return out

    def node_set(self, max_degree, tol=config.QUADRATURE_TOL):
        total = NodeSet.empty()
        for center, log_length, mass in self.pieces():
            half = math.exp(log_length) / 2.0
            if half == 0.0:
                total = total + NodeSet(np.array([center]), np.array([mass]))
                continue
            rule = gauss_legendre(center - half, center + half, 4)
            total = total + NodeSet(rule.nodes, rule.weights / rule.weights.sum() * mass)
        return total

    def integrate_against(self, kernel, around=None, scale=0.0):
        # pieces are far narrower than any feature we resolve
        rule = self.node_set(0)
        return float(sum(w * kernel(t) for t, w in zip(rule.nodes, rule.weights)))
