"""Bound functions and verification predicates for numerical radius inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oprep import ModuleOperator, adjoint, op_norm, spectral_radius
from .radius import AscentConfig, DEFAULT_TOL, module_nr, snr


@dataclass
class BoundReport:
    """One verified inequality ``lhs <= rhs``.

    Two-sided checks report the link with the smallest slack as ``lhs``/``rhs``
    and keep every link in ``components``.
    """

    lhs: float
    rhs: float
    tol: float
    components: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -self.tol

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "holds": self.holds,
                "tol": self.tol, "components": dict(self.components)}


def _chain(links: list[tuple[str, float, float]], tol: float, **components) -> BoundReport:
    """Report for a chain of inequalities ``(name, lhs, rhs)``."""
    name, lhs, rhs = min(links, key=lambda link: link[2] - link[1])
    comps = {f"slack_{n}": r - l for n, l, r in links}
    comps.update(components)
    comps["tightest"] = name
    return BoundReport(lhs, rhs, tol, comps)


def f_merge(x: float, y: float, a: float) -> float:
    """``(x + y + sqrt((x - y)^2 + 4a)) / 2``."""
    if x < 0 or y < 0 or a < 0:
        raise ValueError(f"f_merge needs non-negative inputs, got x={x}, y={y}, a={a}")
    return 0.5 * (x + y + math.sqrt((x - y) ** 2 + 4 * a))


def f_monotone_check(samples: int = 10_000, seed=0, a_max: float = 10.0,
                     x_max: float = 10.0, tol: float = 1e-12) -> BoundReport:
    """Sample ``0 <= x1 <= x2``, ``0 <= y1 <= y2``, ``a >= 0`` and check ``f(x1,y1) <= f(x2,y2)``."""
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, x_max, size=(samples, 2)), axis=1)
    y = np.sort(rng.uniform(0, x_max, size=(samples, 2)), axis=1)
    a = rng.uniform(0, a_max, size=samples)
    # a few samples on the boundary of the ordering
    x[::7, 1] = x[::7, 0]
    y[::11, 1] = y[::11, 0]
    a[::13] = 0.0
    lo = np.array([f_merge(*args) for args in zip(x[:, 0], y[:, 0], a)])
    hi = np.array([f_merge(*args) for args in zip(x[:, 1], y[:, 1], a)])
    slack = hi - lo
    i = int(np.argmin(slack))
    return BoundReport(float(lo[i]), float(hi[i]), tol, {
        "samples": samples,
        "violations": int((slack < -tol).sum()),
        "worst_case": [float(x[i, 0]), float(y[i, 0]), float(x[i, 1]), float(y[i, 1]), float(a[i])],
    })


def kittaneh_check(t: ModuleOperator, tol: float = 1e-7, radius_tol: float = DEFAULT_TOL,
                   wtilde: float | None = None) -> BoundReport:
    """``||T*T + TT*|| / 4 <= wt(T)^2 <= ||T*T + TT*|| / 2``."""
    th = adjoint(t)
    s = op_norm(th @ t + t @ th)
    wt = snr(t, radius_tol).value if wtilde is None else wtilde
    return _chain([("lower", s / 4, wt**2), ("upper", wt**2, s / 2)], tol, norm_S=s, wtilde=wt)


def mixed_radius_bound_check(a1: ModuleOperator, b1: ModuleOperator, a2: ModuleOperator,
                             b2: ModuleOperator, tol: float = 1e-7, radius_tol: float = DEFAULT_TOL,
                             ascent: AscentConfig | None = None) -> BoundReport:
    """``r(A1 B1 + A2 B2) <= f(wt(B1 A1), wt(B2 A2), ||B1 A2|| ||B2 A1||)``.

    The asserted right-hand side uses spatial radii.  The same bound with
    module radius estimates is recorded in ``components`` only: those
    estimates are lower bounds, so asserting it would not be sound.
    """
    lhs = spectral_radius(a1 @ b1 + a2 @ b2)
    a = op_norm(b1 @ a2) * op_norm(b2 @ a1)
    sx, sy = snr(b1 @ a1, radius_tol), snr(b2 @ a2, radius_tol)
    x, y = sx.value, sy.value
    rhs = f_merge(x, y, a)
    comps = {"alpha": (x - y) ** 2 + 4 * a, "a": a, "wtilde_B1A1": x, "wtilde_B2A2": y}
    if ascent is not None:
        wx = module_nr(b1 @ a1, ascent, spatial=sx).value
        wy = module_nr(b2 @ a2, ascent, spatial=sy).value
        rhs_w = f_merge(wx, wy, a)
        comps.update(w_B1A1=wx, w_B2A2=wy, rhs_w=rhs_w, rhs_monotone=rhs <= rhs_w + tol)
    return BoundReport(lhs, rhs, tol, comps)


def basic_bounds_check(t: ModuleOperator, tol: float = 1e-7, radius_tol: float = DEFAULT_TOL,
                       ascent: AscentConfig | None = None) -> BoundReport:
    """``||T|| / 2 <= wt(T) <= w(T) <= ||T||`` with ``w`` the fused module radius."""
    nrm = op_norm(t)
    sn = snr(t, radius_tol)
    wt = sn.value
    w = module_nr(t, ascent or AscentConfig(tol=radius_tol), spatial=sn).value
    return _chain([("half_norm", nrm / 2, wt), ("comparison", wt, w), ("norm", w, nrm)], tol,
                  norm=nrm, wtilde=wt, w=w)
