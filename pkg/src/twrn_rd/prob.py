"""Finite-alphabet probability arithmetic.

All public information measures are in bits.  The conventions
``0 log 0 = 0`` and ``0 log(0/0) = 0`` are used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    NegativeProbability,
    NonNormalDistortion,
    NotNormalized,
    ShapeMismatch,
    ValidationError,
)

#: Relative drift in total mass that is silently renormalized.
NORMALIZE_DRIFT = 1e-9
#: Entries below this are treated as exact zeros.
CLAMP = 1e-15


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _clean_pmf(p: np.ndarray, axis=None, what: str = "pmf") -> np.ndarray:
    """Check sign and mass of ``p``; clamp tiny entries and renormalize."""
    p = np.array(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(p < -CLAMP):
        raise NegativeProbability(f"{what} has negative entries (min {p.min():.3g})")
    p = np.where(p < CLAMP, 0.0, p)
    tot = p.sum(axis=axis, keepdims=axis is not None)
    if np.any(np.abs(tot - 1.0) >= NORMALIZE_DRIFT):
        worst = float(np.max(np.abs(tot - 1.0)))
        raise NotNormalized(f"{what} mass differs from 1 by {worst:.3g}")
    return p / tot


def _xlogx_sum(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(np.sum(p * np.log2(p)))


# ----------------------------------------------------------------------------
# Domain types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class JointSource:
    """Two correlated discrete sources with their distortion measures.

    ``q_xy[x, y]`` is the joint pmf, ``delta1[x, xhat]`` and
    ``delta2[y, yhat]`` are the distortion matrices.  Build instances through
    :func:`validate_joint_source` (or :meth:`from_arrays`) so that the
    invariants are checked.
    """

    x_alphabet: tuple
    y_alphabet: tuple
    q_xy: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    xhat_alphabet: tuple
    yhat_alphabet: tuple

    @classmethod
    def from_arrays(cls, q_xy, delta1=None, delta2=None) -> "JointSource":
        """Validated source with integer labels; Hamming distortion by default."""
        q = np.asarray(q_xy, dtype=float)
        if q.ndim != 2:
            raise ShapeMismatch("q_xy must be a matrix")
        nx, ny = q.shape
        d1 = hamming(nx) if delta1 is None else delta1
        d2 = hamming(ny) if delta2 is None else delta2
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        return validate_joint_source(
            {
                "x_alphabet": list(range(nx)),
                "y_alphabet": list(range(ny)),
                "q_xy": q,
                "delta1": d1,
                "delta2": d2,
                "xhat_alphabet": list(range(d1.shape[1])) if d1.ndim == 2 else [],
                "yhat_alphabet": list(range(d2.shape[1])) if d2.ndim == 2 else [],
            }
        )

    @property
    def nx(self) -> int:
        return self.q_xy.shape[0]

    @property
    def ny(self) -> int:
        return self.q_xy.shape[1]

    @property
    def nxh(self) -> int:
        return self.delta1.shape[1]

    @property
    def nyh(self) -> int:
        return self.delta2.shape[1]

    @property
    def q_x(self) -> np.ndarray:
        return self.q_xy.sum(axis=1)

    @property
    def q_y(self) -> np.ndarray:
        return self.q_xy.sum(axis=0)

    @property
    def d1_max(self) -> float:
        """Smallest distortion reachable by a constant reconstruction of X."""
        return float(np.min(self.q_x @ self.delta1))

    @property
    def d2_max(self) -> float:
        return float(np.min(self.q_y @ self.delta2))

    def swapped(self) -> "JointSource":
        """The same source with the roles of X and Y exchanged."""
        return JointSource(
            self.y_alphabet,
            self.x_alphabet,
            _readonly(self.q_xy.T),
            self.delta2,
            self.delta1,
            self.yhat_alphabet,
            self.xhat_alphabet,
        )

    def is_hamming(self) -> bool:
        return (
            self.delta1.shape == (self.nx, self.nx)
            and self.delta2.shape == (self.ny, self.ny)
            and np.array_equal(self.delta1, hamming(self.nx))
            and np.array_equal(self.delta2, hamming(self.ny))
        )

    def to_json_dict(self) -> dict:
        return {
            "x_alphabet": list(self.x_alphabet),
            "y_alphabet": list(self.y_alphabet),
            "q_xy": self.q_xy.tolist(),
            "delta1": self.delta1.tolist(),
            "delta2": self.delta2.tolist(),
            "xhat_alphabet": list(self.xhat_alphabet),
            "yhat_alphabet": list(self.yhat_alphabet),
        }


@dataclass(frozen=True)
class Channel:
    """Conditional pmf tensor.

    The first ``n_in`` axes index the conditioning variables and the
    remaining axes the outputs; every input slice sums to one.
    """

    probs: np.ndarray
    n_in: int = 1

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim <= self.n_in or self.n_in < 1:
            raise ShapeMismatch("channel needs at least one input and one output axis")
        if np.any(p < -CLAMP):
            raise NegativeProbability("channel has negative entries")
        p = np.where(p < CLAMP, 0.0, p)
        out_axes = tuple(range(self.n_in, p.ndim))
        tot = p.sum(axis=out_axes, keepdims=True)
        if np.any(np.abs(tot - 1.0) >= NORMALIZE_DRIFT):
            raise NotNormalized("a channel slice does not sum to 1")
        object.__setattr__(self, "probs", _readonly(p / tot))

    @property
    def in_shape(self) -> tuple:
        return self.probs.shape[: self.n_in]

    @property
    def out_shape(self) -> tuple:
        return self.probs.shape[self.n_in :]


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings shared by the solvers.

    ``tol`` is in bits and is the reporting tolerance for rates;
    ``gap_tol`` is the duality gap below which a convex solve is called
    converged.
    """

    max_iters: int = 10_000
    tol: float = 1e-9
    n_starts: int = 32
    grid_resolution: int = 20
    seed: int = 0
    gap_tol: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.n_starts < 1:
            raise ValidationError("n_starts must be at least 1")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if int(self.grid_resolution) != self.grid_resolution or self.grid_resolution < 1:
            raise ValidationError("grid_resolution must be a positive integer")

    def replace(self, **kw) -> "SolverConfig":
        from dataclasses import replace

        return replace(self, **kw)


# ----------------------------------------------------------------------------
# Construction and validation
# ----------------------------------------------------------------------------


def hamming(n: int, m: int | None = None) -> np.ndarray:
    """Hamming distortion matrix of shape ``(n, m)``."""
    m = n if m is None else m
    return 1.0 - np.eye(n, m)


def _check_distortion(delta, n_rows: int, name: str) -> np.ndarray:
    d = np.array(delta, dtype=float)
    if d.ndim != 2 or d.shape[0] != n_rows:
        raise ShapeMismatch(f"{name} must have {n_rows} rows, got shape {d.shape}")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValidationError(f"{name} entries must be finite and nonnegative")
    bad = np.where(~np.any(d == 0, axis=1))[0]
    if bad.size:
        raise NonNormalDistortion(f"{name} row {int(bad[0])} has no zero entry")
    return d


def validate_joint_source(raw: JointSource | Mapping[str, Any]) -> JointSource:
    """Check a candidate source and return a frozen :class:`JointSource`.

    Accepts a mapping following the JSON source schema or an existing
    instance.  Mass drift below ``1e-9`` is renormalized away.
    """
    if isinstance(raw, JointSource):
        raw = raw.to_json_dict()
    try:
        q = np.array(raw["q_xy"], dtype=float)
        d1 = raw["delta1"]
        d2 = raw["delta2"]
    except KeyError as e:
        raise ValidationError(f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ValidationError(f"q_xy is not a numeric matrix: {e}") from None
    if q.ndim != 2:
        raise ShapeMismatch("q_xy must be a matrix")
    q = _clean_pmf(q, what="q_xy")
    nx, ny = q.shape
    d1 = _check_distortion(d1, nx, "delta1")
    d2 = _check_distortion(d2, ny, "delta2")
    xa = tuple(raw.get("x_alphabet", range(nx)))
    ya = tuple(raw.get("y_alphabet", range(ny)))
    xha = tuple(raw.get("xhat_alphabet", range(d1.shape[1])))
    yha = tuple(raw.get("yhat_alphabet", range(d2.shape[1])))
    for lab, n, name in ((xa, nx, "x"), (ya, ny, "y"), (xha, d1.shape[1], "xhat"), (yha, d2.shape[1], "yhat")):
        if len(lab) != n:
            raise ShapeMismatch(f"{name}_alphabet has {len(lab)} labels, expected {n}")
    return JointSource(xa, ya, _readonly(q), _readonly(d1), _readonly(d2), xha, yha)


def validate_pmf(p, what: str = "pmf") -> np.ndarray:
    """Return a cleaned copy of the pmf ``p`` (any shape, total mass one)."""
    return _clean_pmf(p, what=what)


# ----------------------------------------------------------------------------
# Information measures (bits)
# ----------------------------------------------------------------------------


def entropy(p) -> float:
    """Shannon entropy of a pmf (any shape, flattened)."""
    p = np.asarray(p, dtype=float)
    return max(0.0, -_xlogx_sum(p))


def mutual_information(joint) -> float:
    """I(A;B) for a joint pmf matrix ``joint[a, b]``."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise ShapeMismatch("mutual_information expects a matrix")
    v = entropy(j.sum(axis=1)) + entropy(j.sum(axis=0)) - entropy(j)
    return max(0.0, v)


def conditional_mutual_information(joint, axis: int = 1) -> float:
    """I(A;C|B) for a 3-way pmf, where ``axis`` is the conditioning axis B.

    The two remaining axes, in order, play the roles of A and C.
    """
    j = np.asarray(joint, dtype=float)
    if j.ndim != 3:
        raise ShapeMismatch("conditional_mutual_information expects a 3-way pmf")
    if axis not in (0, 1, 2, -1, -2, -3):
        raise ShapeMismatch("axis must index one of the three dimensions")
    axis %= 3
    j = np.moveaxis(j, axis, 1)  # (A, B, C)
    v = entropy(j.sum(axis=2)) + entropy(j.sum(axis=0)) - entropy(j.sum(axis=(0, 2))) - entropy(j)
    return max(0.0, v)


def binary_entropy(lam: float) -> float:
    """h(lam) in bits, with h(0) = h(1) = 0."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"binary_entropy needs lam in [0, 1], got {lam}")
    if lam in (0.0, 1.0):
        return 0.0
    return float(-lam * np.log2(lam) - (1 - lam) * np.log2(1 - lam))


def binary_convolution(a: float, b: float) -> float:
    """Crossover of two cascaded binary symmetric channels, a(1-b) + (1-a)b."""
    a, b = float(a), float(b)
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise DomainError("binary_convolution arguments must lie in [0, 1]")
    return a * (1 - b) + (1 - a) * b


def info_terms(q_xy, p_c_xy) -> dict:
    """Information quantities of an auxiliary C drawn through ``p(c|x,y)``.

    ``p_c_xy`` has shape ``(|X|, |Y|, ...)``; trailing output axes are
    flattened into one variable C.  Returns a dict with keys ``xc_y``
    (I(X;C|Y)), ``yc_x`` (I(Y;C|X)), ``xy_c`` (I(XY;C)), ``x_c`` and ``y_c``.
    """
    q = np.asarray(q_xy, dtype=float)
    p = np.asarray(p_c_xy, dtype=float)
    p = p.reshape(q.shape + (-1,))
    P = q[:, :, None] * p
    h_xy = entropy(q)
    h_x = entropy(q.sum(1))
    h_y = entropy(q.sum(0))
    h_c = entropy(P.sum((0, 1)))
    h_xc = entropy(P.sum(1))
    h_yc = entropy(P.sum(0))
    h_xyc = entropy(P)
    return {
        "xc_y": max(0.0, h_xy + h_yc - h_y - h_xyc),
        "yc_x": max(0.0, h_xy + h_xc - h_x - h_xyc),
        "xy_c": max(0.0, h_xy + h_c - h_xyc),
        "x_c": max(0.0, h_x + h_c - h_xc),
        "y_c": max(0.0, h_y + h_c - h_yc),
    }


def conditional_entropy_xy(q_xy) -> tuple[float, float]:
    """(H(X|Y), H(Y|X)) for a joint pmf matrix."""
    q = np.asarray(q_xy, dtype=float)
    h = entropy(q)
    return h - entropy(q.sum(0)), h - entropy(q.sum(1))


# ----------------------------------------------------------------------------
# Distortion bookkeeping
# ----------------------------------------------------------------------------


def expected_distortion(source: JointSource, channel: Channel | np.ndarray, which: int) -> float:
    """Average distortion of one reconstruction under a test channel.

    Accepted channel shapes for ``which == 1`` (``which == 2`` is symmetric):
    ``p(xhat|x)`` as ``(|X|, |Xh|)``, ``p(xhat|x,y)`` as ``(|X|, |Y|, |Xh|)``
    and ``p(xhat,yhat|x,y)`` as ``(|X|, |Y|, |Xh|, |Yh|)``.
    """
    if which not in (1, 2):
        raise ValidationError("which must be 1 or 2")
    p = channel.probs if isinstance(channel, Channel) else np.asarray(channel, dtype=float)
    q = source.q_xy
    nx, ny, nxh, nyh = source.nx, source.ny, source.nxh, source.nyh
    if p.ndim == 2:
        if which == 1 and p.shape == (nx, nxh):
            return float(np.einsum("x,xa,xa->", source.q_x, p, source.delta1))
        if which == 2 and p.shape == (ny, nyh):
            return float(np.einsum("y,yb,yb->", source.q_y, p, source.delta2))
    elif p.ndim == 3:
        if which == 1 and p.shape == (nx, ny, nxh):
            return float(np.einsum("xy,xya,xa->", q, p, source.delta1))
        if which == 2 and p.shape == (nx, ny, nyh):
            return float(np.einsum("xy,xyb,yb->", q, p, source.delta2))
    elif p.ndim == 4 and p.shape == (nx, ny, nxh, nyh):
        if which == 1:
            return float(np.einsum("xy,xyab,xa->", q, p, source.delta1))
        return float(np.einsum("xy,xyab,yb->", q, p, source.delta2))
    raise ShapeMismatch(f"channel shape {p.shape} does not match source alphabets")


def random_pmf(rng: np.random.Generator, shape: Sequence[int] | int, alpha: float = 1.0) -> np.ndarray:
    """Dirichlet sample normalized over the last axis."""
    shape = (int(shape),) if np.ndim(shape) == 0 else tuple(int(n) for n in shape)
    g = rng.gamma(alpha, size=shape)
    g = np.maximum(g, 1e-300)
    return g / g.sum(axis=-1, keepdims=True)


__all__ = [
    "JointSource",
    "Channel",
    "SolverConfig",
    "hamming",
    "validate_joint_source",
    "validate_pmf",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "binary_entropy",
    "binary_convolution",
    "info_terms",
    "conditional_entropy_xy",
    "expected_distortion",
    "random_pmf",
]
