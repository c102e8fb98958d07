"""Numerical radii.

* ``classical_nr``: numerical radius of a complex matrix.
* ``snr_sweep`` / ``snr_rep`` / ``snr``: spatial numerical radius of a module
  operator, once as ``sup_theta ||Re(e^{i theta} T)||`` and once as the
  classical radius of the representing block matrices.
* ``module_nr``: the module numerical radius ``sup ||<Tx, x>||``, estimated by
  projected ascent over contractions and fused with the spatial radius.
* ``nr_sampled_lb`` / ``snr_sampled_lb``: Monte-Carlo lower bounds straight
  from the two supremum definitions.

Theta sweeps maximise the support function ``g(theta)`` of a compact convex
set.  A Lipschitz grid plus golden-section refinement finds a candidate
``best``.  It is certified by a level-set test (no ``theta`` has ``g(theta) =
best + tol/2``).  When the test finds crossing angles, the arcs between them
are searched next; the last resort is branch-and-bound over the grid
intervals, where the convex set lies in the wedge cut out by the two endpoint
half-planes, which bounds ``g`` from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

import scipy.linalg

from .calg import State, _sample_densities
from .hmodule import Frame, identity_frame, inner_product, vec_norm
from .oprep import ModuleOperator, apply, is_normal, op_norm

DEFAULT_TOL = 1e-8
GRID_TOL = 2e-2

CERTIFIED = "certified-within-tol"
LOWER_BOUND = "lower-bound-only"

_INV_PHI = (math.sqrt(5) - 1) / 2


class CrossCheckError(RuntimeError):
    """Two independent routes to the same quantity disagree."""


@dataclass
class RadiusResult:
    value: float
    method: str
    witness: Any = None
    exactness: str = LOWER_BOUND
    tol: float = DEFAULT_TOL
    upper: Optional[float] = None
    info: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.exactness == CERTIFIED


@dataclass
class SweepResult:
    value: float
    theta: float
    upper: float
    evaluations: int

    @property
    def gap(self) -> float:
        return self.upper - self.value


def _golden_max(f: Callable[[float], float], a: float, b: float, xtol: float):
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def _interval_upper(a, b, ga, gb, lip):
    """Upper bound of a support function ``g`` on each ``[a, b]``."""
    h = b - a
    lip_ub = (ga + gb + lip * h) / 2
    s = np.sin(h)
    # vertex z0 of {z : <z, u(a)> <= ga, <z, u(b)> <= gb}, u(t) = (cos t, -sin t)
    x = (ga * np.sin(b) - gb * np.sin(a)) / s
    y = (ga * np.cos(b) - gb * np.cos(a)) / s
    phi = np.arctan2(-y, x)
    inside = np.mod(phi - a, 2 * np.pi) <= h
    wedge_ub = np.where(inside, np.hypot(x, y), np.maximum(ga, gb))
    return np.minimum(lip_ub, wedge_ub)


UNIMODULAR_TOL = 1e-6


def level_set_angles(m: np.ndarray, r: float, unimodular_tol: float = UNIMODULAR_TOL) -> np.ndarray:
    """Angles ``theta`` in ``[0, 2 pi)`` where ``r`` is an eigenvalue of ``Re(e^{i theta} M)``.

    ``r`` is an eigenvalue of ``Re(e^{i theta} M)`` iff ``z = e^{i theta}``
    solves ``det(z^2 M - 2 r z I + M*) = 0``; the quadratic pencil is
    linearised to size ``2n``.  Eigenvalues within ``unimodular_tol`` of the
    unit circle count as crossings, so rounding can only add spurious angles,
    never lose real ones.
    """
    n = m.shape[0]
    eye, zero = np.eye(n), np.zeros((n, n))
    a = np.block([[zero, eye], [-m.conj().T, 2 * r * eye]])
    b = np.block([[eye, zero], [zero, m]])
    alpha, beta = scipy.linalg.eigvals(a, b, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-14 * np.maximum(np.abs(alpha), 1e-300)
    z = alpha[finite] / beta[finite]
    on_circle = np.abs(np.abs(z) - 1) <= unimodular_tol
    return np.sort(np.mod(np.angle(z[on_circle]), 2 * np.pi))


def level_set_clear(m: np.ndarray, r: float, unimodular_tol: float = UNIMODULAR_TOL) -> bool:
    """True if ``lambda_max(Re(e^{i theta} M)) != r`` for every ``theta``."""
    return level_set_angles(m, r, unimodular_tol).size == 0


def certified_sweep(objective, lipschitz: float, tol: float = DEFAULT_TOL,
                    grid_tol: float = GRID_TOL, max_grid: int = 1 << 14,
                    max_intervals: int = 1 << 21, level_set=None,
                    period: float = 2 * math.pi, level_rounds: int = 8) -> SweepResult:
    """Maximise a support-type function over one period.

    ``objective`` maps an array of angles to an array of values.
    ``level_set(r)``, when given, returns every angle where ``g`` may equal
    ``r`` (an empty array means ``g`` never takes the value ``r``).  On return
    ``value <= max g <= upper``; ``upper - value <= tol`` unless the interval
    budget ran out.
    """
    lip = float(lipschitz)
    n = int(min(max_grid, max(16, math.ceil(period * lip / grid_tol))))
    grid = period * np.arange(n) / n
    g = np.asarray(objective(grid), dtype=float)
    evals = n
    i = int(np.argmax(g))
    best, theta = float(g[i]), float(grid[i])
    if lip == 0:
        return SweepResult(best, theta, best, evals)

    def scalar(s):
        return float(objective(np.array([s]))[0])

    h = period / n
    xtol = min(h, math.sqrt(tol / lip)) * 1e-2
    t, v, k = _golden_max(scalar, theta - h, theta + h, xtol)
    evals += k
    if v > best:
        best, theta = v, float(np.mod(t, period))

    if level_set is not None:
        for _ in range(level_rounds):
            cross = np.sort(np.mod(np.asarray(level_set(best + tol / 2), dtype=float), period))
            if cross.size == 0:
                return SweepResult(best, theta, best + tol / 2, evals)
            # every component of {g > best + tol/2} lies between consecutive crossings
            nxt = np.append(cross[1:], cross[0] + period)
            mids = (cross + nxt) / 2
            gm = np.asarray(objective(mids), dtype=float)
            evals += mids.size
            j = int(np.argmax(gm))
            if gm[j] <= best:
                break
            best, theta = float(gm[j]), float(np.mod(mids[j], period))
            t, v, k = _golden_max(scalar, cross[j], nxt[j], xtol)
            evals += k
            if v > best:
                best, theta = v, float(np.mod(t, period))

    a, b = grid, grid + h
    ga, gb = g, np.roll(g, -1)
    slack = 1e-14 * (1 + lip)
    upper = best
    while a.size:
        ub = _interval_upper(a, b, ga, gb, lip) + slack
        keep = ub > best + tol
        upper = max(best, float(ub.max()))
        if not keep.any():
            upper = max(best, float(ub.max(initial=best)))
            break
        a, b, ga, gb = a[keep], b[keep], ga[keep], gb[keep]
        if a.size * 2 > max_intervals or (b - a).min() < 1e-13:
            upper = float(ub[keep].max())
            break
        mid = (a + b) / 2
        gm = np.asarray(objective(mid), dtype=float)
        evals += mid.size
        j = int(np.argmax(gm))
        if gm[j] > best:
            best, theta = float(gm[j]), float(np.mod(mid[j], period))
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        ga, gb = np.concatenate([ga, gm]), np.concatenate([gm, gb])
    return SweepResult(best, theta, max(upper, best), evals)


def _re_rotations(m: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    e = np.exp(1j * np.asarray(thetas, dtype=float))[:, None, None]
    return (e * m + np.conj(e) * m.conj().T) / 2


def lam_max_objective(m: np.ndarray):
    """``theta -> lambda_max(Re(e^{i theta} M))`` (vectorised)."""
    m = np.asarray(m, dtype=complex)
    return lambda thetas: np.linalg.eigvalsh(_re_rotations(m, thetas))[:, -1]


def re_norm_objective(t: ModuleOperator):
    """``theta -> ||Re(e^{i theta} T)||`` over all blocks (vectorised).

    The rotated real parts are Hermitian, so the operator norm is the
    largest absolute eigenvalue.
    """
    blocks = [np.asarray(b) for b in t.blocks]

    def f(thetas):
        return np.max([np.abs(np.linalg.eigvalsh(_re_rotations(b, thetas))).max(axis=1) for b in blocks],
                      axis=0)

    return f


def _check_finite(m):
    if m.size == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


def classical_nr(m, tol: float = DEFAULT_TOL, grid_tol: float = GRID_TOL) -> RadiusResult:
    """Numerical radius ``max {|z| : z in W(M)}`` of a square matrix.

    Maximises ``lambda_max(Re(e^{i theta} M))`` over ``theta``; the
    ``theta -> theta + pi`` symmetry takes care of ``lambda_min``.  Witness is
    the maximising angle.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    _check_finite(m)
    sw = certified_sweep(lam_max_objective(m), np.linalg.norm(m, 2), tol, grid_tol,
                         level_set=lambda r: level_set_angles(m, r))
    return _sweep_result(sw, "classical-sweep", tol)


def _sweep_result(sw: SweepResult, method: str, tol: float) -> RadiusResult:
    exact = CERTIFIED if sw.gap <= tol else LOWER_BOUND
    return RadiusResult(max(sw.value, 0.0), method, sw.theta, exact, tol, sw.upper,
                        {"evaluations": sw.evaluations})


def _check_operator(t: ModuleOperator):
    for b in t.blocks:
        _check_finite(np.asarray(b))


def snr_sweep(t: ModuleOperator, tol: float = DEFAULT_TOL, grid_tol: float = GRID_TOL) -> RadiusResult:
    _check_operator(t)
    blocks = [np.asarray(b) for b in t.blocks]
    # ||Re(e^{i theta} T)|| has period pi; its level set collects the
    # lambda_max crossings of every block together with their shifts by pi
    sw = certified_sweep(re_norm_objective(t), op_norm(t), tol, grid_tol, period=math.pi,
                         level_set=lambda r: np.concatenate([level_set_angles(m, r) for m in blocks]))
    return _sweep_result(sw, "snr-sweep", tol)


def snr_rep(t: ModuleOperator, tol: float = DEFAULT_TOL, grid_tol: float = GRID_TOL) -> RadiusResult:
    _check_operator(t)
    per_block = [classical_nr(b, tol, grid_tol) for b in t.blocks]
    j = max(range(len(per_block)), key=lambda i: per_block[i].value)
    best = per_block[j]
    certified = all(r.certified for r in per_block)
    return RadiusResult(best.value, "snr-rep", best.witness, CERTIFIED if certified else LOWER_BOUND,
                        tol, max(r.upper for r in per_block), {"block": j})


def snr(t: ModuleOperator, tol: float = DEFAULT_TOL, grid_tol: float = GRID_TOL) -> RadiusResult:
    """Spatial numerical radius, cross-checked between both routes."""
    sweep = snr_sweep(t, tol, grid_tol)
    rep = snr_rep(t, tol, grid_tol)
    diff = abs(sweep.value - rep.value)
    if diff > 10 * tol:
        raise CrossCheckError(
            f"spatial radius routes disagree: sweep={sweep.value!r} rep={rep.value!r} (|diff|={diff:.3e})"
        )
    rep.info.update(sweep_value=sweep.value, sweep_theta=sweep.witness, route_diff=diff)
    return rep


def rank_one_lift(t: ModuleOperator, block: int, theta: float) -> Frame:
    """Unit frame ``p e_1^*`` in ``block``, ``p`` the top eigenvector of ``Re(e^{i theta} M)``.

    Then ``||<Tx, x>|| = |p* M p| >= lambda_max(Re(e^{i theta} M))``.
    """
    m = np.asarray(t.blocks[block])
    _, vecs = np.linalg.eigh(_re_rotations(m, [theta])[0])
    p = vecs[:, -1]
    blocks = []
    for j, n in enumerate(t.signature):
        x = np.zeros((t.k * n, n), dtype=complex)
        if j == block:
            x[:, 0] = p
        blocks.append(x)
    return Frame(t.signature, t.k, tuple(blocks))


def frame_value(t: ModuleOperator, x: Frame) -> float:
    """``||<Tx, x>|| / ||x||^2``."""
    nrm = vec_norm(x)
    if nrm == 0:
        return 0.0
    return max(float(np.linalg.norm(b, 2)) for b in inner_product(apply(t, x), x).blocks) / nrm**2


def state_frame_value(t: ModuleOperator, rho: State, x: Frame) -> float:
    """``|rho<x, Tx>| / rho<x, x>``."""
    num = sum(np.einsum("ij,ji->", d, b) for d, b in zip(rho.densities, inner_product(x, apply(t, x)).blocks))
    den = sum(np.einsum("ij,ji->", d, b) for d, b in zip(rho.densities, inner_product(x, x).blocks)).real
    return abs(num) / den


def evaluate_witness(t, result: RadiusResult) -> float:
    """Re-evaluate a result's witness a posteriori.

    ``t`` is a ``ModuleOperator``, or a plain matrix for ``classical_nr`` results.
    """
    w = result.witness
    if w is None:
        raise ValueError("result carries no witness")
    if not isinstance(t, ModuleOperator):
        return float(lam_max_objective(t)(np.array([w]))[0])
    if isinstance(w, Frame):
        return frame_value(t, w)
    if isinstance(w, tuple):
        return state_frame_value(t, *w)
    if result.method == "snr-rep":
        block = result.info.get("block", 0)
        return float(lam_max_objective(t.blocks[block])(np.array([w]))[0])
    return float(re_norm_objective(t)(np.array([w]))[0])


# -- module numerical radius -------------------------------------------------

@dataclass
class AscentConfig:
    restarts: int = 64
    iters: int = 200
    step: float = 0.5
    max_step: float = 64.0
    min_step: float = 1e-12
    rel_improvement: float = 1e-10
    seed: int = 0
    tol: float = DEFAULT_TOL
    # successive halving: every `prune_every` iterations only the better half
    # of the active starts keeps climbing, down to `keep_min`
    prune_every: int = 10
    keep_min: int = 4


def _top_pair(m, x):
    a = np.swapaxes(x.conj(), 1, 2) @ m @ x
    u, s, vh = np.linalg.svd(a)
    return s[:, 0], u[:, :, 0], vh[:, 0, :].conj()


def _project(x):
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    return (u * np.minimum(s, 1.0)[:, None, :]) @ vh


def _ascend(m: np.ndarray, x0: np.ndarray, cfg: AscentConfig, ceiling: float = np.inf):
    """Projected ascent on ``X -> sigma_max(X* M X)`` over contractions, batched over starts.

    Each start keeps its own step: doubled after an accepted move (up to
    ``max_step``), halved on rejection.  Stops early once some start reaches
    ``ceiling - tol / 10``.
    """
    mh = m.conj().T
    x = _project(x0)
    f, u, v = _top_pair(m, x)
    active = np.ones(len(x), dtype=bool)
    steps = np.full(len(x), cfg.step)
    for it in range(cfg.iters):
        if f.max() >= ceiling - cfg.tol / 10:
            break
        idx = np.flatnonzero(active)
        if cfg.prune_every and it and it % cfg.prune_every == 0 and idx.size > cfg.keep_min:
            keep = max(cfg.keep_min, idx.size // 2)
            # stable sort so ties keep the lower start index
            order = idx[np.argsort(-f[idx], kind="stable")]
            active[order[keep:]] = False
            idx = np.sort(order[:keep])
        if idx.size == 0:
            break
        xa, ua, va = x[idx], u[idx], v[idx]
        # gradient of X -> Re(u* X* M X v)
        grad = (m @ xa @ va[:, :, None] @ ua.conj()[:, None, :]
                + mh @ xa @ ua[:, :, None] @ va.conj()[:, None, :])
        eta = steps[idx].copy()
        pending = np.ones(idx.size, dtype=bool)
        while pending.any():
            p = np.flatnonzero(pending)
            xt = _project(xa[p] + eta[p, None, None] * grad[p])
            ft, ut, vt = _top_pair(m, xt)
            ok = ft > f[idx[p]]
            good, r = p[ok], idx[p[ok]]
            gain = (ft[ok] - f[r]) / np.maximum(f[r], 1e-300)
            x[r], f[r], u[r], v[r] = xt[ok], ft[ok], ut[ok], vt[ok]
            steps[r] = np.minimum(2 * eta[good], cfg.max_step)
            pending[good] = False
            active[r[gain < cfg.rel_improvement]] = False
            bad = p[~ok]
            eta[bad] /= 2
            stuck = bad[eta[bad] < cfg.min_step]
            pending[stuck] = False
            active[idx[stuck]] = False
    best = int(np.argmax(f))
    return float(f[best]), x[best]


def module_nr(t: ModuleOperator, cfg: Optional[AscentConfig] = None, spatial: Optional[RadiusResult] = None,
              **overrides) -> RadiusResult:
    """Module numerical radius ``w(T) = sup {||<Tx, x>|| : ||x|| = 1}``.

    Fast paths certify ``w(T) = ||T||`` for ``k = 1`` (identity witness) and
    for normal ``T``.  Otherwise the value is the larger of the ascent value
    and the spatial radius (which never exceeds ``w``); it is reported as a
    lower bound unless it already reaches ``||T||`` within tolerance.
    ``spatial`` may pass in an already computed ``snr(t)``.
    """
    cfg = cfg or AscentConfig()
    for name, val in overrides.items():
        setattr(cfg, name, val)
    _check_operator(t)
    tol = cfg.tol
    nrm = op_norm(t)
    if t.k == 1:
        x = identity_frame(t.signature, 1)
        return RadiusResult(nrm, "fast-path-k1", x, CERTIFIED, tol, nrm)

    sn = spatial if spatial is not None else snr(t, tol)
    lift = rank_one_lift(t, sn.info["block"], sn.witness)
    if is_normal(t):
        return RadiusResult(nrm, "fast-path-normal", lift, CERTIFIED, tol, nrm, {"snr": sn.value})

    starts = []
    for i in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, i])
        starts.append([rng.standard_normal((t.k * n, n)) + 1j * rng.standard_normal((t.k * n, n))
                       for n in t.signature])
    best_val, best_block, best_x = -1.0, 0, None
    for j, (n, m) in enumerate(zip(t.signature, t.blocks)):
        m = np.asarray(m)
        seeds = [np.eye(t.k * n, n, dtype=complex), np.asarray(lift.blocks[j])]
        for s in starts:
            xs = s[j]
            seeds.append(xs / np.linalg.norm(xs, 2))
        val, x = _ascend(m, np.array(seeds), cfg, ceiling=np.linalg.norm(m, 2))
        if val > best_val:
            best_val, best_block, best_x = val, j, x
        if best_val >= nrm - tol / 10:
            break

    if best_val >= sn.value:
        blocks = [np.zeros((t.k * n, n), dtype=complex) for n in t.signature]
        blocks[best_block] = best_x
        witness = Frame(t.signature, t.k, tuple(blocks))
    else:
        witness = lift
    value = max(best_val, sn.value)
    exact = CERTIFIED if value >= nrm - tol else LOWER_BOUND
    info = {"ascent": best_val, "snr": sn.value, "norm_gap": nrm - value}
    if cfg.restarts == 0:
        info["flag"] = "no random restarts"
    return RadiusResult(value, "module-opt", witness, exact, tol, nrm, info)


# -- sampling oracles -------------------------------------------------------

def _gaussian_frames(rng, t: ModuleOperator, samples: int):
    return [rng.standard_normal((samples, t.k * n, n)) + 1j * rng.standard_normal((samples, t.k * n, n))
            for n in t.signature]


def nr_sampled_lb(t: ModuleOperator, samples: int = 1000, seed=0) -> RadiusResult:
    """Max of ``||<Tx, x>||`` over random unit frames."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    xs = _gaussian_frames(rng, t, samples)
    scale = np.max([np.linalg.norm(x, 2, axis=(1, 2)) for x in xs], axis=0)
    vals = np.zeros(samples)
    for m, x in zip(t.blocks, xs):
        q = np.swapaxes(x.conj(), 1, 2) @ np.asarray(m) @ x
        vals = np.maximum(vals, np.linalg.norm(q, 2, axis=(1, 2)))
    vals = vals / scale**2
    i = int(np.argmax(vals))
    witness = Frame(t.signature, t.k, tuple(x[i] / scale[i] for x in xs))
    return RadiusResult(float(vals[i]), "sampled-lb", witness, LOWER_BOUND, 0.0)


def snr_sampled_lb(t: ModuleOperator, samples: int = 1000, seed=0) -> RadiusResult:
    """Max of ``|rho<x, Tx>|`` over random states and frames with ``rho<x, x> = 1``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    xs = _gaussian_frames(rng, t, samples)
    dens = _sample_densities(rng, t.signature, samples)
    num = np.zeros(samples, dtype=complex)
    den = np.zeros(samples)
    for m, x, d in zip(t.blocks, xs, dens):
        xh = np.swapaxes(x.conj(), 1, 2)
        num += np.einsum("sij,sji->s", d, xh @ np.asarray(m) @ x)
        den += np.einsum("sij,sji->s", d, xh @ x).real
    ok = den > 1e-12
    vals = np.where(ok, np.abs(num) / np.where(ok, den, 1.0), -np.inf)
    i = int(np.argmax(vals))
    if not np.isfinite(vals[i]):
        return RadiusResult(0.0, "sampled-lb", None, LOWER_BOUND, 0.0, info={"rejected": samples})
    lam = math.sqrt(den[i])
    rho = State(t.signature, tuple(d[i] for d in dens))
    x = Frame(t.signature, t.k, tuple(xb[i] / lam for xb in xs))
    return RadiusResult(float(vals[i]), "sampled-lb", (rho, x), LOWER_BOUND, 0.0,
                        info={"rejected": int((~ok).sum())})
