"""Generalized Cantor ladders and atomic discretizations of their measures.

A ladder is built from ``m`` affine contractions carrying [0,1] onto
sub-segments [a_i, b_i] (optionally orientation-reversing) together with
positive weights ``rho_i`` summing to one.  Iterating the associated
refinement operator on f(t) = t converges uniformly to a continuous,
non-decreasing staircase C with C(0) = 0, C(1) = 1; its distributional
derivative is a singular measure mu without atoms.  ``discretize`` replaces
mu by one point mass per depth-n cell, which is the finite string handed to
the eigenvalue solver.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DepthError, OverlapError, RangeError, WeightError

ENDPOINT_TOL = 1e-12
WEIGHT_TOL = 1e-12
DEFAULT_ATOM_BUDGET = 10**7
ATOM_BUDGET_ENV = "FSS_ATOM_BUDGET"


def atom_budget() -> int:
    """Atom cap for discretization; overridable via FSS_ATOM_BUDGET."""
    raw = os.environ.get(ATOM_BUDGET_ENV)
    if raw is None:
        return DEFAULT_ATOM_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise RangeError(f"{ATOM_BUDGET_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise RangeError(f"{ATOM_BUDGET_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class LadderSpec:
    """Validated ladder parameters; construct via :func:`validate_spec`.

    ``orientations[i] == 1`` means the i-th contraction reverses direction.
    ``strict_gap`` records whether all intermediate intervals have positive
    length (touching segments are legal but flagged, since several spectral
    identities need genuine gaps).
    """

    segments: tuple[tuple[float, float], ...]
    weights: tuple[float, ...]
    orientations: tuple[int, ...]
    strict_gap: bool

    @property
    def m(self) -> int:
        return len(self.segments)

    def lengths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in self.segments)

    def map_params(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-segment affine images S_i(t) = alpha_i + beta_i * t."""
        alpha = np.empty(self.m)
        beta = np.empty(self.m)
        for i, ((a, b), e) in enumerate(zip(self.segments, self.orientations)):
            if e:
                alpha[i] = b
                beta[i] = -(b - a)
            else:
                alpha[i] = a
                beta[i] = b - a
        return alpha, beta

    def barycenter(self) -> float:
        """First moment of the ladder measure, from its fixed-point equation.

        The barycenter satisfies b* = sum_i rho_i * S_i(b*), which is linear
        in b* because every S_i is affine.
        """
        alpha, beta = self.map_params()
        w = np.asarray(self.weights)
        return float((w * alpha).sum() / (1.0 - (w * beta).sum()))

    def to_json_dict(self) -> dict:
        return {
            "segments": [[a, b] for a, b in self.segments],
            "weights": list(self.weights),
            "orientations": list(self.orientations),
        }


def validate_spec(segments, weights, orientations=None) -> LadderSpec:
    """Validate and normalize raw ladder parameters.

    Weights are renormalized to sum to one exactly after passing the 1e-12
    gate, so downstream mass identities hold to machine precision.  Touching
    segments (b_i == a_{i+1}) are accepted; overlap is rejected.
    """
    segs = [(float(a), float(b)) for a, b in segments]
    w = [float(x) for x in weights]
    m = len(segs)
    if m < 2:
        raise RangeError(f"need at least two segments, got {m}")
    if len(w) != m:
        raise WeightError(f"{m} segments but {len(w)} weights")
    if orientations is None:
        e = [0] * m
    else:
        e = []
        for val in orientations:
            if val in (0, 1, False, True):
                e.append(int(val))
            else:
                raise RangeError(f"orientation flags must be 0 or 1, got {val!r}")
        if len(e) != m:
            raise RangeError(f"{m} segments but {len(e)} orientation flags")

    for i, (a, b) in enumerate(segs):
        if not (math.isfinite(a) and math.isfinite(b)):
            raise RangeError(f"segment {i} is not finite: {(a, b)}")
        if not a < b:
            raise RangeError(f"segment {i} is degenerate or reversed: {(a, b)}")
        if a < -ENDPOINT_TOL or b > 1.0 + ENDPOINT_TOL:
            raise RangeError(f"segment {i} leaves [0,1]: {(a, b)}")
    if abs(segs[0][0]) > ENDPOINT_TOL:
        raise RangeError(f"first segment must start at 0, got {segs[0][0]}")
    if abs(segs[-1][1] - 1.0) > ENDPOINT_TOL:
        raise RangeError(f"last segment must end at 1, got {segs[-1][1]}")
    segs[0] = (0.0, segs[0][1])
    segs[-1] = (segs[-1][0], 1.0)
    segs = [(max(a, 0.0), min(b, 1.0)) for a, b in segs]

    for i in range(m - 1):
        if segs[i][1] > segs[i + 1][0]:
            raise OverlapError(
                f"segments {i} and {i + 1} overlap: "
                f"b_{i}={segs[i][1]} > a_{i + 1}={segs[i + 1][0]}"
            )

    for i, x in enumerate(w):
        if not math.isfinite(x) or x <= 0.0:
            raise WeightError(f"weight {i} must be positive and finite, got {x}")
    total = math.fsum(w)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise WeightError(f"weights must sum to 1 within {WEIGHT_TOL}, got {total}")
    w = [x / total for x in w]
    w[-1] = 1.0 - math.fsum(w[:-1])

    strict_gap = all(segs[i + 1][0] - segs[i][1] > 0.0 for i in range(m - 1))
    return LadderSpec(
        segments=tuple(segs),
        weights=tuple(w),
        orientations=tuple(e),
        strict_gap=strict_gap,
    )


def spec_from_dict(data) -> LadderSpec:
    try:
        segments = data["segments"]
        weights = data["weights"]
    except (KeyError, TypeError) as exc:
        raise RangeError("ladder JSON needs 'segments' and 'weights' keys") from exc
    return validate_spec(segments, weights, data.get("orientations"))


def load_spec(path) -> LadderSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def save_spec(spec: LadderSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_json_dict(), fh, indent=2)
        fh.write("\n")


def cantor_ladder() -> LadderSpec:
    """The classical middle-thirds staircase with equal weights."""
    return validate_spec([(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)], [0.5, 0.5])


def eval_ladder(spec: LadderSpec, t: float, depth: int) -> float:
    """Evaluate the depth-fold refinement of f(t) = t at a point.

    Descends through nested cells: while t lies inside some segment the value
    recursion value = offset + rho_i * (e_i + (-1)^{e_i} f(S_i^{-1}(t)))
    applies; once t falls into a gap the accumulated plateau constant is
    final, and when the depth is exhausted the identity seed takes over.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise RangeError(f"t must lie in [0,1], got {t}")
    if depth < 0:
        raise RangeError(f"depth must be >= 0, got {depth}")
    base = 0.0
    scale = 1.0
    u = t
    for _ in range(depth):
        hit = -1
        below = 0.0
        for i, (a, b) in enumerate(spec.segments):
            if a <= u <= b:
                hit = i
                break
            if u > b:
                below += spec.weights[i]
        if hit < 0:
            # u sits in a gap: the refinement is flat there at every
            # deeper level, so the plateau value is exact.
            return base + scale * below
        a, b = spec.segments[hit]
        rho = spec.weights[hit]
        prefix = math.fsum(spec.weights[:hit])
        if spec.orientations[hit]:
            base += scale * (prefix + rho)
            scale *= -rho
            u = (b - u) / (b - a)
        else:
            base += scale * prefix
            scale *= rho
            u = (u - a) / (b - a)
    return base + scale * u


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite point-mass measure on a carrier interval.

    Positions are strictly increasing and confined to [a, b]; all masses are
    positive.  Instances are immutable (arrays are locked) so they can be
    shared freely across threads.
    """

    positions: np.ndarray
    masses: np.ndarray
    carrier: tuple[float, float]

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        mas = np.ascontiguousarray(self.masses, dtype=np.float64)
        a, b = float(self.carrier[0]), float(self.carrier[1])
        if pos.ndim != 1 or mas.shape != pos.shape:
            raise RangeError("positions and masses must be 1-d arrays of equal length")
        if not a < b:
            raise RangeError(f"carrier must be a nondegenerate interval, got {(a, b)}")
        if pos.size:
            if not np.all(np.diff(pos) > 0.0):
                raise RangeError("atom positions must be strictly increasing")
            if pos[0] < a or pos[-1] > b:
                raise RangeError("atoms must lie within the carrier")
            if not np.all(mas > 0.0):
                raise WeightError("atom masses must be positive")
        pos.flags.writeable = False
        mas.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", mas)
        object.__setattr__(self, "carrier", (a, b))

    def __len__(self) -> int:
        return int(self.positions.size)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("position,mass\n")
            for x, m in zip(self.positions, self.masses):
                fh.write(f"{x!r},{m!r}\n")

    @classmethod
    def from_csv(cls, path, carrier=None) -> "AtomicMeasure":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
        if data.size == 0:
            pos = np.empty(0)
            mas = np.empty(0)
        else:
            pos, mas = data[:, 0], data[:, 1]
        if carrier is None:
            lo = float(pos[0]) if pos.size else 0.0
            hi = float(pos[-1]) if pos.size else 1.0
            carrier = (min(lo, 0.0), max(hi, 1.0))
        return cls(positions=pos, masses=mas, carrier=carrier)


def discretize(spec: LadderSpec, depth: int, placement: str = "midpoint",
               budget: int | None = None) -> AtomicMeasure:
    """Collapse each depth-n cell of the ladder onto a single atom.

    The atom for cell (i_1, ..., i_n) carries mass rho_{i_1} ... rho_{i_n}
    and sits at the image of the anchor point under S_{i_1} o ... o S_{i_n}.
    The midpoint anchor is 1/2; the barycenter anchor is the measure's first
    moment, which for mirror-symmetric ladders coincides with the midpoint.
    """
    if depth < 1:
        raise RangeError(f"depth must be >= 1, got {depth}")
    if placement not in ("midpoint", "barycenter"):
        raise RangeError(f"placement must be 'midpoint' or 'barycenter', got {placement!r}")
    cap = atom_budget() if budget is None else int(budget)
    count = spec.m**depth
    if count > cap:
        raise DepthError(f"m^depth = {count} exceeds the atom budget {cap}")

    alpha, beta = spec.map_params()
    rho = np.asarray(spec.weights)
    offsets = np.zeros(1)
    slopes = np.ones(1)
    masses = np.ones(1)
    for _ in range(depth):
        offsets = (offsets[:, None] + slopes[:, None] * alpha[None, :]).ravel()
        slopes = (slopes[:, None] * beta[None, :]).ravel()
        masses = (masses[:, None] * rho[None, :]).ravel()
    anchor = 0.5 if placement == "midpoint" else spec.barycenter()
    positions = offsets + slopes * anchor
    order = np.argsort(positions, kind="stable")
    return AtomicMeasure(positions=positions[order], masses=masses[order],
                         carrier=(0.0, 1.0))


def restrict(measure: AtomicMeasure, c: float, d: float) -> AtomicMeasure:
    """Atoms with position in [c, d], re-carried to (c, d).  May be empty."""
    c, d = float(c), float(d)
    a, b = measure.carrier
    if not c < d:
        raise RangeError(f"need c < d, got c={c}, d={d}")
    if c < a or d > b:
        raise RangeError(f"[{c}, {d}] leaves the carrier [{a}, {b}]")
    lo = int(np.searchsorted(measure.positions, c, side="left"))
    hi = int(np.searchsorted(measure.positions, d, side="right"))
    return AtomicMeasure(positions=measure.positions[lo:hi].copy(),
                         masses=measure.masses[lo:hi].copy(),
                         carrier=(c, d))
