"""Deformed logarithm and exponential kernel.

``ln_q`` and ``exp_q`` generalize the natural log/exp pair with a single
real index q; q = 1 recovers the classical pair (taken whenever
``|q - 1| <= SHANNON_TOL``).  The deformed logarithm of a product picks up
a cross term,

    ln_q(x * y) = ln_q(x) + ln_q(y) + (1 - q) * ln_q(x) * ln_q(y),

and every correction term appearing in the higher-level measures of this
package is an instance of that expansion.  ``pseudo_additivity_residual``
evaluates both sides so tests and fuzz campaigns can confirm the identity
numerically.

Conventions
-----------
* ``ln_q(0)`` is the one-sided limit: ``-1 / (1 - q)`` for q < 1 (finite)
  and ``-inf`` for q >= 1.
* Negative (or NaN) arguments raise :class:`~qit.errors.QDomainError`.
* ``exp_q(x)`` requires ``1 + (1 - q) * x > 0``; outside that region a
  :class:`~qit.errors.QDomainError` is raised carrying the boundary value.

All operations accept scalars or numpy arrays and apply elementwise.
Validity ranges for q are *not* enforced here; each downstream operation
documents and enforces the range in which its own guarantees hold.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import QDomainError

#: Half-width of the q-interval treated as the classical (Shannon) branch.
SHANNON_TOL = 1e-12


@dataclass(frozen=True)
class QParam:
    """Entropic index.

    A thin validated wrapper around the real index q.  Most functions in
    this package accept either a plain float or a ``QParam``.
    """

    q: float

    def __post_init__(self):
        q = float(self.q)
        if not math.isfinite(q):
            raise ValueError(f"entropic index must be finite, got {self.q!r}")
        object.__setattr__(self, "q", q)

    @property
    def is_shannon(self) -> bool:
        """True when q falls inside the classical branch."""
        return abs(self.q - 1.0) <= SHANNON_TOL


def q_value(q) -> float:
    """Return the float index from a ``QParam`` or a bare real."""
    if isinstance(q, QParam):
        return q.q
    return QParam(float(q)).q


def _as_checked_array(x, *, what: str):
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise QDomainError(f"{what} must not contain NaN")
    return arr


def ln_q(x, q):
    """Deformed logarithm ``(x**(1-q) - 1) / (1-q)``.

    Parameters
    ----------
    x : scalar or array_like
        Nonnegative argument(s).  Zeros map to the one-sided limit
        (finite for q < 1, ``-inf`` for q >= 1).
    q : float or QParam
        Entropic index; ``|q - 1| <= SHANNON_TOL`` selects ``log(x)``.

    Returns
    -------
    float or ndarray
    """
    qv = q_value(q)
    arr = _as_checked_array(x, what="ln_q argument")
    if (arr < 0).any():
        raise QDomainError("ln_q requires nonnegative arguments")
    scalar = arr.ndim == 0
    eps = 1.0 - qv
    with np.errstate(divide="ignore"):
        if abs(eps) <= SHANNON_TOL:
            out = np.log(arr)
        else:
            # 0**eps is 0 for q < 1 and +inf for q > 1, so both zero
            # conventions fall out of the same expression.
            out = (np.power(arr, eps) - 1.0) / eps
    return float(out) if scalar else out


def exp_q(x, q):
    """Deformed exponential ``(1 + (1-q) x) ** (1/(1-q))``, inverse of ln_q.

    Raises
    ------
    QDomainError
        If ``1 + (1-q) x <= 0`` anywhere; the error carries the smallest
        boundary value encountered in its ``boundary`` attribute.
    """
    qv = q_value(q)
    arr = _as_checked_array(x, what="exp_q argument")
    scalar = arr.ndim == 0
    eps = 1.0 - qv
    if abs(eps) <= SHANNON_TOL:
        out = np.exp(arr)
    else:
        base = 1.0 + eps * arr
        if (base <= 0).any():
            raise QDomainError(
                f"exp_q argument outside domain: 1 + (1-q)x reached {base.min():.6g}",
                boundary=float(base.min()),
            )
        out = np.power(base, 1.0 / eps)
    return float(out) if scalar else out


def pseudo_additivity_residual(x, y, q):
    """Two-sided evaluation of the deformed product rule.

    Returns ``ln_q(x*y) - ln_q(x) - ln_q(y) - (1-q) ln_q(x) ln_q(y)``,
    which is zero in exact arithmetic for any positive x, y and any q.
    The returned value is the floating-point residual (not its absolute
    value), useful for checking both magnitude and sign behaviour.
    """
    qv = q_value(q)
    ax = _as_checked_array(x, what="pseudo-additivity argument")
    ay = _as_checked_array(y, what="pseudo-additivity argument")
    if (ax <= 0).any() or (ay <= 0).any():
        raise QDomainError("pseudo_additivity_residual requires strictly positive x, y")
    lx = ln_q(ax, qv)
    ly = ln_q(ay, qv)
    out = ln_q(ax * ay, qv) - lx - ly - (1.0 - qv) * np.asarray(lx) * np.asarray(ly)
    return float(out) if np.ndim(out) == 0 else out
