"""Exact eigenvalue counting for strings with purely atomic mass.

For an atomic measure the equation -y'' = lam * mu * y forces y to be linear
between atoms, with the slope dropping by lam * mass * y(x) at each atom.
Shooting from the left boundary condition therefore propagates the pair
(y, y') exactly, and Sturm oscillation theory converts the sign pattern of
the shot into the number of eigenvalues strictly below lam:

    N(lam) = Z + [B * y(b) < 0  or  y(b) == 0],

where Z counts sign changes of y strictly inside (a, b) and
B = y'(b) + gamma1 * y(b) is the right boundary functional.  The correction
term is the phase-plane statement that the boundary ray has already been
crossed since the last interior zero.  Eigenvalues are then extracted by
bisection on this integer count, which is immune to the ill-conditioning of
the determinant itself.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateError, RangeError, ToleranceError
from .measure import AtomicMeasure

EPS = float(np.finfo(np.float64).eps)
DEFAULT_REL_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryConditions:
    """Robin parameters: y'(a) - gamma0 y(a) = 0, y'(b) + gamma1 y(b) = 0.

    gamma0 = gamma1 = 0 is the Neumann problem.
    """

    gamma0: float = 0.0
    gamma1: float = 0.0

    def __post_init__(self):
        for name, g in (("gamma0", self.gamma0), ("gamma1", self.gamma1)):
            if not math.isfinite(g) or g < 0.0:
                raise RangeError(f"{name} must be finite and >= 0, got {g}")

    @property
    def is_neumann(self) -> bool:
        return self.gamma0 == 0.0 and self.gamma1 == 0.0


NEUMANN = BoundaryConditions()


@dataclass(frozen=True)
class StringProblem:
    measure: AtomicMeasure
    bc: BoundaryConditions = NEUMANN

    @property
    def n_atoms(self) -> int:
        return len(self.measure)

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.measure.positions.tobytes())
        h.update(self.measure.masses.tobytes())
        a, b = self.measure.carrier
        h.update(np.array([a, b, self.bc.gamma0, self.bc.gamma1]).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues plus a fingerprint of the problem solved."""

    values: tuple[float, ...]
    fingerprint: str
    n_atoms: int

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise RangeError("eigenvalues must be strictly ascending (all simple)")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("n,lambda\n")
            for n, lam in enumerate(self.values):
                fh.write(f"{n},{lam!r}\n")


@njit(cache=True)
def _count_kernel(pos, mass, a, b, lam, g0, g1):  # pragma: no cover - jitted
    y = 1.0
    yp = g0
    positive = True
    zeros = 0
    x_prev = a
    for i in range(pos.shape[0]):
        x = pos[i]
        y = y + yp * (x - x_prev)
        if x < b:
            if y == 0.0:
                zeros += 1
                positive = not positive
            elif (y > 0.0) != positive:
                zeros += 1
                positive = not positive
        yp = yp - lam * mass[i] * y
        s = abs(y)
        if abs(yp) > s:
            s = abs(yp)
        y = y / s
        yp = yp / s
        x_prev = x
    yb = y + yp * (b - x_prev)
    if yb == 0.0:
        return zeros + 1
    if (yb > 0.0) != positive:
        zeros += 1
    if (yp + g1 * yb) * yb < 0.0:
        return zeros + 1
    return zeros


@njit(cache=True)
def _values_kernel(pos, mass, a, b, lam, g0, out):  # pragma: no cover - jitted
    y = 1.0
    yp = g0
    x_prev = a
    for i in range(pos.shape[0]):
        x = pos[i]
        y = y + yp * (x - x_prev)
        out[i] = y
        yp = yp - lam * mass[i] * y
        s = abs(y)
        if abs(yp) > s:
            s = abs(yp)
        if s > 1e100:
            y = y / s
            yp = yp / s
        x_prev = x
    yb = y + yp * (b - x_prev)
    return yb, yp


def count_below(problem: StringProblem, lam: float) -> int:
    """Number of eigenvalues strictly below lam (exact integer)."""
    lam = float(lam)
    mu = problem.measure
    if len(mu) == 0:
        if problem.bc.is_neumann:
            return 0
        raise DegenerateError("empty measure with Robin ends has no discrete spectrum")
    a, b = mu.carrier
    return int(_count_kernel(mu.positions, mu.masses, a, b, lam,
                             problem.bc.gamma0, problem.bc.gamma1))


def _bracket_scale(mu: AtomicMeasure) -> float:
    a, b = mu.carrier
    pos = mu.positions
    gaps = [pos[0] - a, b - pos[-1]]
    if len(pos) > 1:
        gaps.append(float(np.diff(pos).min()))
    g_min = min((g for g in gaps if g > 0.0), default=b - a)
    return 4.0 / (float(mu.masses.min()) * g_min)


def eigenvalue(problem: StringProblem, n: int, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """n-th eigenvalue by bisection on the counting function.

    The bracket [lo, hi] keeps the invariant N(lo) <= n < N(hi) and shrinks
    until its relative width is below rel_tol.  The Neumann ground state is
    returned as exactly zero (constant eigenfunction).
    """
    n = int(n)
    if not 0 <= n < problem.n_atoms:
        raise IndexError(f"eigenvalue index {n} out of range for {problem.n_atoms} atoms")
    if rel_tol < 64.0 * EPS:
        raise ToleranceError(f"rel_tol={rel_tol} below the 64*eps floor")
    if n == 0 and problem.bc.is_neumann:
        return 0.0
    lo = 0.0
    hi = max(_bracket_scale(problem.measure), 1.0)
    for _ in range(2048):
        if count_below(problem, hi) > n:
            break
        hi *= 2.0
    else:  # pragma: no cover - mathematically unreachable
        raise RangeError("failed to bracket the eigenvalue from above")
    for _ in range(20000):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if count_below(problem, mid) <= n:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spectrum(problem: StringProblem, count: int | None = None,
             lam_max: float | None = None,
             rel_tol: float = DEFAULT_REL_TOL) -> Spectrum:
    """All eigenvalues (or the first ``count``, or those below ``lam_max``)."""
    if lam_max is not None:
        count = count_below(problem, lam_max)
    if count is None:
        count = problem.n_atoms
    count = min(int(count), problem.n_atoms)
    values = [eigenvalue(problem, k, rel_tol) for k in range(count)]
    return Spectrum(values=tuple(values), fingerprint=problem.fingerprint(),
                    n_atoms=problem.n_atoms)


def eigenfunction_values(problem: StringProblem, lam: float):
    """Nodal values of the shot at the atoms, plus (y(b), y'(b)).

    Magnitudes beyond 1e100 are rescaled in flight, so only the sign pattern
    is meaningful at extreme lam; for moderate lam the values are the true
    piecewise-linear solution sampled at the atoms.
    """
    mu = problem.measure
    a, b = mu.carrier
    out = np.empty(len(mu))
    yb, ypb = _values_kernel(mu.positions, mu.masses, a, b, float(lam),
                             problem.bc.gamma0, out)
    return out, float(yb), float(ypb)


def eigenfunction_zero_count(problem: StringProblem, n: int,
                             rel_tol: float = DEFAULT_REL_TOL) -> int:
    """Interior sign changes of the n-th eigenfunction; equals n.

    A nodal value of exactly zero counts as a zero and flips the tracked
    sign (the solution must cross, since (y, y') never vanishes jointly).
    Zeros at the carrier endpoints are not interior and are excluded.
    """
    lam = eigenvalue(problem, n, rel_tol)
    mu = problem.measure
    a, b = mu.carrier
    values, yb, _ = eigenfunction_values(problem, lam)
    positive = True
    zeros = 0
    for x, v in zip(mu.positions, values):
        if x >= b:
            break
        if v == 0.0:
            zeros += 1
            positive = not positive
        elif (v > 0.0) != positive:
            zeros += 1
            positive = not positive
    if yb != 0.0 and (yb > 0.0) != positive:
        zeros += 1
    return zeros
