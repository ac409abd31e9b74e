"""Discrete probability containers, seeded generators, and JSON parsing.

``ProbVec`` and ``JointTable`` are validated wrappers around numpy arrays.
Constructors never renormalize silently; use ``ProbVec.normalized`` when a
renormalization is intended.  Conditionals on zero-probability slices are
left as all-zero rows, and all downstream sums in this package weight by
the joint mass, so those undefined slices never contribute.

Randomness flows through :func:`make_rng`: identical ``(seed, stream)``
pairs reproduce identical draws across runs and platforms, because the
generator is pinned to PCG64 seeded via ``SeedSequence(seed, spawn_key=(stream,))``.
"""

import json

import numpy as np

#: Largest tolerated |sum - 1| accepted by constructors.
NORM_TOL = 1e-9


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for a (master seed, stream id) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def _validate_mass(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} entries must be finite")
    if (arr < 0).any():
        raise ValueError(f"{what} entries must be nonnegative, min was {arr.min():.6g}")
    total = float(arr.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(
            f"{what} must sum to 1 within {NORM_TOL:g}; got {total!r} "
            f"(off by {total - 1.0:.3g})"
        )


class ProbVec:
    """A finite discrete distribution with optional outcome labels."""

    __slots__ = ("p", "labels")

    def __init__(self, p, labels=None):
        arr = np.array(p, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("ProbVec expects a non-empty 1-D array")
        _validate_mass(arr, "ProbVec")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != arr.size:
                raise ValueError("labels length must match the distribution")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("ProbVec is immutable")

    @classmethod
    def normalized(cls, values, labels=None) -> "ProbVec":
        """Explicitly rescale nonnegative weights to total mass one."""
        arr = np.asarray(values, dtype=float)
        total = arr.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError("cannot normalize: total mass must be positive and finite")
        return cls(arr / total, labels)

    @classmethod
    def coerce(cls, x) -> "ProbVec":
        return x if isinstance(x, cls) else cls(x)

    def __len__(self) -> int:
        return int(self.p.size)

    def __repr__(self) -> str:
        return f"ProbVec({self.p.tolist()!r})"

    def to_json_dict(self) -> dict:
        d = {"p": self.p.tolist()}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ProbVec":
        if "p" not in d:
            raise ValueError('distribution JSON must contain a "p" array')
        return cls(d["p"], d.get("labels"))

    @classmethod
    def from_json(cls, text: str) -> "ProbVec":
        return cls.from_json_dict(json.loads(text))


class JointTable:
    """A nonnegative joint-probability table of rank 2 to 4."""

    __slots__ = ("t",)

    def __init__(self, t):
        arr = np.array(t, dtype=float)
        if arr.ndim < 2 or arr.ndim > 4:
            raise ValueError(f"JointTable supports rank 2..4, got rank {arr.ndim}")
        if min(arr.shape) == 0:
            raise ValueError("JointTable axes must be non-empty")
        _validate_mass(arr, "JointTable")
        arr.setflags(write=False)
        object.__setattr__(self, "t", arr)

    def __setattr__(self, name, value):
        raise AttributeError("JointTable is immutable")

    @classmethod
    def coerce(cls, x) -> "JointTable":
        return x if isinstance(x, cls) else cls(x)

    @property
    def shape(self):
        return self.t.shape

    @property
    def rank(self) -> int:
        return self.t.ndim

    def marginal(self, axis: int) -> ProbVec:
        """Distribution of the variable on ``axis`` (sum over the others)."""
        axes = tuple(a for a in range(self.rank) if a != axis)
        return ProbVec(self.t.sum(axis=axes))

    def marginal_array(self, keep_axes) -> np.ndarray:
        """Joint mass of a subset of axes, as a bare array (axis order kept)."""
        keep = (keep_axes,) if isinstance(keep_axes, int) else tuple(keep_axes)
        drop = tuple(a for a in range(self.rank) if a not in keep)
        out = self.t.sum(axis=drop) if drop else self.t
        # np.sum may reorder nothing here: remaining axes keep relative order.
        return out

    def conditional(self, given_axes) -> np.ndarray:
        """Conditional table p(rest | given).

        Slices whose conditioning marginal is zero are undefined; they are
        returned as all-zero blocks and must be excluded from downstream
        sums (every measure in this package weights by the joint mass, so
        that exclusion is automatic).
        """
        given = (given_axes,) if isinstance(given_axes, int) else tuple(given_axes)
        if not given or not all(0 <= a < self.rank for a in given):
            raise ValueError(f"given_axes {given!r} invalid for rank {self.rank}")
        other = tuple(a for a in range(self.rank) if a not in given)
        if not other:
            raise ValueError("conditioning on every axis leaves nothing to condition")
        marg = self.t.sum(axis=other, keepdims=True)
        out = np.zeros_like(self.t)
        np.divide(self.t, marg, out=out, where=marg > 0)
        return out

    def __repr__(self) -> str:
        return f"JointTable(shape={self.shape})"

    def to_json_dict(self) -> dict:
        return {"table": self.t.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "JointTable":
        if "table" not in d:
            raise ValueError('joint-table JSON must contain a "table" array')
        return cls(d["table"])

    @classmethod
    def from_json(cls, text: str) -> "JointTable":
        return cls.from_json_dict(json.loads(text))


def marginal(j, axis: int) -> ProbVec:
    return JointTable.coerce(j).marginal(axis)


def conditional(j, given_axes) -> np.ndarray:
    return JointTable.coerce(j).conditional(given_axes)


def product_dist(p, r) -> JointTable:
    """Rank-2 table of two independent marginals."""
    pv = ProbVec.coerce(p)
    rv = ProbVec.coerce(r)
    return JointTable(np.outer(pv.p, rv.p))


def random_dist(m: int, rng: np.random.Generator) -> ProbVec:
    """Flat-Dirichlet draw: normalized independent unit exponentials."""
    if m < 1:
        raise ValueError("need at least one outcome")
    e = rng.standard_exponential(m)
    return ProbVec(e / e.sum())


def random_joint(shape, rng: np.random.Generator) -> JointTable:
    """Flat-Dirichlet draw over all cells of the given shape."""
    e = rng.standard_exponential(shape)
    return JointTable(e / e.sum())


def random_markov_triple(shapes, rng: np.random.Generator) -> JointTable:
    """Rank-3 table built as p(x) p(y|x) p(z|y).

    The middle variable separates the outer two by construction, i.e.
    p(x,y,z) p(y) = p(x,y) p(y,z) holds cellwise up to roundoff.
    """
    mx, my, mz = (int(s) for s in shapes)
    px = random_dist(mx, rng).p
    py_rows = np.stack([random_dist(my, rng).p for _ in range(mx)])
    pz_rows = np.stack([random_dist(mz, rng).p for _ in range(my)])
    t = px[:, None, None] * py_rows[:, :, None] * pz_rows[None, :, :]
    return JointTable(t)
