"""Random operator families, the property suite, and the M_2(C) counterexample."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import calg
from .calg import AlgebraElement, AlgebraSignature
from .hmodule import identity_frame
from .inequalities import (BoundReport, f_merge, f_monotone_check, kittaneh_check,
                           mixed_radius_bound_check)
from .oprep import (ModuleOperator, amplify, left_mult, op_norm, spectral_radius,
                    zero_operator)
from .radius import (AscentConfig, evaluate_witness, module_nr, nr_sampled_lb, snr, snr_rep,
                     snr_sampled_lb, snr_sweep)
from .serialize import operator_from_json, operator_to_json

SCHEMA = "modnr.suite/1"
KINDS = ("generic", "selfadjoint", "normal", "nilpotent2", "leftmult")

# Tolerances of the asserted checks.
THRESHOLDS = {
    "route_agreement": 1e-6,
    "sandwich": 1e-7,
    "exact_class": 1e-7,
    "nilpotent_half_norm": 1e-6,
    "kittaneh": 1e-7,
    "kittaneh_tight": 1e-7,
    "spectral_vs_snr": 1e-6,
    "nilpotent_spectral": 1e-6,
    "amplify": 1e-6,
    "oracle_dominance": 1e-9,
    "witness": 10.0,  # multiples of the radius tolerance
    "mixed_bound": 1e-7,
    "algebra": 1e-9,
    "f_monotone": 1e-12,
}
MAX_PAYLOADS = 5


class DegenerateInstanceWarning(UserWarning):
    pass


def _gauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _nilpotent_block(rng, d: int) -> np.ndarray:
    if d < 2:
        warnings.warn(f"no non-zero square-zero matrix of size {d}; using zero", DegenerateInstanceWarning)
        return np.zeros((d, d), dtype=complex)
    r = int(rng.integers(1, d // 2 + 1))
    x, y = _gauss(rng, d, r), _gauss(rng, d, r)
    for _ in range(2):
        y = y - x @ (np.linalg.pinv(x) @ y)
    m = x @ y.conj().T
    return m / np.linalg.norm(m, 2)


def gen_operator(sig, k: int, kind: str, seed=None) -> ModuleOperator:
    """Random operator of the requested family; deterministic per seed."""
    sig = AlgebraSignature.of(sig)
    rng = np.random.default_rng(seed)
    if kind == "leftmult":
        return left_mult(calg.random_element(sig, rng), k)
    blocks = []
    for n in sig:
        d = k * n
        if kind == "generic":
            m = _gauss(rng, d, d) / math.sqrt(2 * d)
        elif kind == "selfadjoint":
            g = _gauss(rng, d, d) / math.sqrt(2 * d)
            m = (g + g.conj().T) / 2
        elif kind == "normal":
            q, r = np.linalg.qr(_gauss(rng, d, d))
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            m = (q * (_gauss(rng, d) / math.sqrt(2))) @ q.conj().T
        elif kind == "nilpotent2":
            m = _nilpotent_block(rng, d)
        else:
            raise ValueError(f"unknown operator kind {kind!r}")
        blocks.append(m)
    return ModuleOperator(sig, k, tuple(blocks))


@dataclass
class SuiteConfig:
    signatures: list = field(default_factory=lambda: [[2], [3], [2, 3]])
    ks: list = field(default_factory=lambda: [1, 2, 3])
    trials: int = 200
    seed: int = 7
    tol: float = 1e-8
    restarts: int = 64
    samples: int = 1000
    f_samples: int = 10_000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        self.signatures = [AlgebraSignature.of(s).to_list() for s in self.signatures]
        self.ks = [int(k) for k in self.ks]


@dataclass
class CheckTally:
    passed: int = 0
    failed: int = 0
    worst_slack: float = math.inf
    worst_case: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def add(self, report: BoundReport, where: dict, payload):
        if report.slack < self.worst_slack:
            self.worst_slack = report.slack
            self.worst_case = dict(where)
        if report.holds:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < MAX_PAYLOADS:
                self.failures.append({**where, "report": report.to_dict(), **payload()})

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failed": self.failed,
                "worst_slack": None if math.isinf(self.worst_slack) else self.worst_slack,
                "worst_case": self.worst_case, "failures": self.failures}


@dataclass
class SuiteReport:
    config: dict
    checks: dict
    records: dict
    counterexample: dict
    wall_clock: float = 0.0

    @property
    def failed(self) -> int:
        return sum(c["failed"] for c in self.checks.values())

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.counterexample.get("ok", False)

    def to_json(self) -> dict:
        # wall-clock is left out so that reports are byte-reproducible
        return {"schema": SCHEMA, "config": self.config, "checks": self.checks,
                "records": self.records, "counterexample": self.counterexample,
                "failed": self.failed, "ok": self.ok}


def _le(lhs, rhs, tol, **comps) -> BoundReport:
    return BoundReport(float(lhs), float(rhs), tol, comps)


def _close(a, b, tol, **comps) -> BoundReport:
    return BoundReport(abs(float(a) - float(b)), 0.0, tol, comps)


def _family_checks(t: ModuleOperator, kind: str, cfg: SuiteConfig, seed) -> dict[str, BoundReport]:
    """Every per-operator check, keyed by check name."""
    th = THRESHOLDS
    out = {}
    nrm = op_norm(t)
    sweep, rep = snr_sweep(t, cfg.tol), snr_rep(t, cfg.tol)
    out["route_agreement"] = _close(sweep.value, rep.value, th["route_agreement"])
    wt = rep.value
    w = module_nr(t, AscentConfig(restarts=cfg.restarts, seed=_int_seed(seed), tol=cfg.tol), spatial=rep)
    tol = th["sandwich"]
    out["sandwich"] = BoundReport(0, min(wt - nrm / 2, w.value - wt, nrm - w.value), tol,
                                  {"norm": nrm, "wtilde": wt, "w": w.value})
    if w.witness is not None:
        ev = evaluate_witness(t, w)
        bound = th["witness"] * cfg.tol
        # witness never beats the claimed value; certified ones reproduce it
        lhs = max(ev - w.value, (w.value - ev) if w.certified else 0.0)
        out["witness"] = _le(lhs, 0.0, bound, method=w.method, evaluated=ev)

    if kind in ("selfadjoint", "normal"):
        out["exact_class"] = _le(max(abs(wt - nrm), abs(w.value - nrm)), 0.0, th["exact_class"],
                                 wtilde=wt, w=w.value, norm=nrm)
    elif kind == "nilpotent2":
        out["exact_class"] = _close(wt, nrm / 2, th["nilpotent_half_norm"], wtilde=wt, norm=nrm)
    elif kind == "leftmult":
        ident = identity_frame(t.signature, t.k)
        exact = (w.method == "fast-path-k1" and w.value == nrm
                 and all(np.array_equal(p, q) for p, q in zip(w.witness.blocks, ident.blocks)))
        # the witness value is ||M^*||, equal to ||M|| up to rounding
        ev = evaluate_witness(t, w)
        out["exact_class"] = _le(0.0 if exact else 1.0, 0.0, 0.0, method=w.method, w=w.value, norm=nrm)
        out["k1_witness"] = _close(ev, nrm, 8 * np.finfo(float).eps * max(nrm, 1.0))

    kit = kittaneh_check(t, th["kittaneh"], cfg.tol, wtilde=wt)
    out["kittaneh"] = kit
    if kind == "nilpotent2":
        out["kittaneh_tight"] = _le(abs(kit.components["slack_lower"]), 0.0, th["kittaneh_tight"], side="lower")
    elif kind == "selfadjoint":
        out["kittaneh_tight"] = _le(abs(kit.components["slack_upper"]), 0.0, th["kittaneh_tight"], side="upper")

    r = spectral_radius(t)
    out["spectral_vs_snr"] = _le(r, wt, th["spectral_vs_snr"], srad=r)
    if kind == "nilpotent2":
        out["nilpotent_spectral"] = _le(r, 0.0, th["nilpotent_spectral"] * nrm, srad=r, norm=nrm)

    amp = amplify(t, 2)
    drift = max(abs(op_norm(amp) - nrm), abs(spectral_radius(amp) - r), abs(snr_sweep(amp, cfg.tol).value - wt))
    out["amplify"] = _le(drift, 0.0, th["amplify"])

    lb_w = nr_sampled_lb(t, cfg.samples, seed=_int_seed(seed) + 1).value
    lb_wt = snr_sampled_lb(t, cfg.samples, seed=_int_seed(seed) + 2).value
    out["oracle_dominance"] = _le(max(lb_w - w.value, lb_wt - wt), 0.0, th["oracle_dominance"],
                                  nr_sampled=lb_w, snr_sampled=lb_wt)
    out["_record"] = {"norm": nrm, "wtilde": wt, "w": w.value, "w_certified": w.certified}
    return out


def _mixed_checks(ops: dict, cfg: SuiteConfig, seed) -> dict[str, BoundReport]:
    asc = AscentConfig(restarts=min(cfg.restarts, 8), seed=_int_seed(seed), tol=cfg.tol)
    rep = mixed_radius_bound_check(ops["A1"], ops["B1"], ops["A2"], ops["B2"],
                                   THRESHOLDS["mixed_bound"], cfg.tol, asc)
    mono = rep.components["rhs_monotone"]
    out = {"mixed_bound": rep,
           "mixed_monotone": _le(0.0 if mono else 1.0, 0.0, 0.0)}
    a1, b1 = ops["A1"], ops["B1"]
    z = zero_operator(a1.signature, a1.k)
    out["mixed_single"] = mixed_radius_bound_check(a1, b1, z, z, THRESHOLDS["mixed_bound"], cfg.tol)
    return out


def _algebra_checks(sig, seed) -> dict[str, BoundReport]:
    tol = THRESHOLDS["algebra"]
    a = calg.random_element(sig, seed)
    rho = calg.random_state(sig, _int_seed(seed) + 1)
    nrm = calg.norm(a)
    sup = calg.state_sup(a)
    h = calg.real_part(a)
    return {
        "c_star_identity": _le(calg.c_star_defect(a), 0.0, 1e-10 * (1 + nrm**2)),
        "state_trace": _close(sum(np.trace(d).real for d in rho.densities), 1.0, 1e-12),
        "state_bound": _le(abs(calg.state_eval(rho, a)), sup, tol),
        "state_sup_norm": _le(sup, nrm, tol),
        "state_sup_selfadjoint": _close(calg.state_sup(h), calg.norm(h), tol),
    }


def _int_seed(seed) -> int:
    """Collapse a seed tuple into one integer for the sub-generators."""
    return int(np.random.SeedSequence(seed).generate_state(1)[0])


def _shape_kinds(k: int):
    return [kind for kind in KINDS if kind != "leftmult" or k == 1]


def _op_payload(seed, **ops):
    return lambda: {"seed": list(seed), "operators": {name: operator_to_json(t) for name, t in ops.items()}}


def run_suite(cfg: SuiteConfig | None = None) -> SuiteReport:
    """Run every check over the configured shapes and families.

    Failures are recorded with serialized operators, never raised.
    """
    cfg = cfg or SuiteConfig()
    start = time.perf_counter()
    tallies: dict[str, CheckTally] = {}
    records: dict = {}

    def tally(name, report, where, payload):
        tallies.setdefault(name, CheckTally()).add(report, where, payload)

    for si, sig in enumerate(cfg.signatures):
        for trial in range(cfg.trials):
            seed = (cfg.seed, si, 99, trial)
            where = {"sig": sig, "trial": trial, "family": "algebra"}
            for name, rep in _algebra_checks(sig, seed).items():
                tally(name, rep, where, lambda: {"seed": list(seed)})

        for k in cfg.ks:
            shape = f"sig={sig} k={k}"
            gaps, cert = [], 0
            for fi, kind in enumerate(_shape_kinds(k)):
                for trial in range(cfg.trials):
                    seed = (cfg.seed, si, k, fi, trial)
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", DegenerateInstanceWarning)
                        t = gen_operator(sig, k, kind, seed)
                    where = {"sig": sig, "k": k, "family": kind, "trial": trial}
                    results = _family_checks(t, kind, cfg, seed)
                    rec = results.pop("_record")
                    if rec["norm"] > 0:
                        gaps.append((rec["w"] - rec["wtilde"]) / rec["norm"])
                    cert += rec["w_certified"]
                    for name, rep in results.items():
                        tally(name, rep, where, _op_payload(seed, T=t))
            for trial in range(cfg.trials):
                seed = (cfg.seed, si, k, 77, trial)
                ops = {name: gen_operator(sig, k, "generic", (*seed, i))
                       for i, name in enumerate(("A1", "B1", "A2", "B2"))}
                where = {"sig": sig, "k": k, "family": "quadruple", "trial": trial}
                for name, rep in _mixed_checks(ops, cfg, seed).items():
                    tally(name, rep, where, _op_payload(seed, **ops))
            records[shape] = {"max_relative_gap_w_minus_wtilde": max(gaps, default=0.0),
                              "w_certified": cert, "instances": len(gaps)}

    fm = f_monotone_check(cfg.f_samples, seed=cfg.seed, tol=THRESHOLDS["f_monotone"])
    tally("f_monotone", fm, {"family": "f"}, lambda: {})
    for x, y in [(0.0, 0.0), (1.0, 2.0), (3.5, 0.25), (7.0, 7.0)]:
        tally("f_max_at_zero", _close(f_merge(x, y, 0.0), max(x, y), 1e-12), {"x": x, "y": y}, lambda: {})

    try:
        ce = counterexample(cfg.tol)
    except CounterexampleError as exc:
        ce = {"ok": False, "error": str(exc)}
    checks = {name: tallies[name].to_dict() for name in sorted(tallies)}
    return SuiteReport(asdict(cfg), checks, records, ce, time.perf_counter() - start)


def recheck(payload: dict, cfg: SuiteConfig | None = None) -> BoundReport:
    """Re-run the check that produced a failure payload, from its serialized operators."""
    cfg = cfg or SuiteConfig()
    check = payload["check"]
    ops = {name: operator_from_json(obj) for name, obj in payload["operators"].items()}
    seed = tuple(payload["seed"])
    if payload.get("family") == "quadruple":
        results = _mixed_checks(ops, cfg, seed)
    else:
        results = _family_checks(ops["T"], payload["family"], cfg, seed)
    return results[check]


def failure_payloads(report: SuiteReport):
    for name, check in report.checks.items():
        for failure in check["failures"]:
            yield {**failure, "check": name}


# -- the M_2(C) counterexample ----------------------------------------------

class CounterexampleError(AssertionError):
    pass


def lemma_elements() -> dict[str, AlgebraElement]:
    """``a``, ``b``, ``e1``, ``e2`` in ``M_2(C)``; ``a = e1 + b``."""
    e1 = AlgebraElement.from_matrix([[1, 0], [0, 0]])
    b = AlgebraElement.from_matrix([[0, 0], [1, 0]])
    return {"a": e1 + b, "b": b, "e1": e1, "e2": calg.identity([2]) - e1}


def counterexample(tol: float = 1e-8) -> dict:
    """Reproduce the two failures of Hilbert-space identities on ``H = M_2(C)``.

    With ``T1 = L_b`` (square zero) and ``T2 = L_a``:

    (i)   ``w(T1) = ||T1|| = 1`` while ``wt(T1) = 1/2``;
    (ii)  ``w(T2) = sqrt 2`` (identity witness) but ``sup ||Re(e^{i t} T2)|| = (1 + sqrt 2)/2``;
    (iii) ``sup |rho(a)| <= 5/4 < sqrt 2``;
    (iv)  ``sup ||Re(e^{i t} T2)|| <= sup |rho(a)|``.

    Raises ``CounterexampleError`` with diagnostics if any fact fails.
    """
    el = lemma_elements()
    a, b = el["a"], el["b"]
    t1, t2 = left_mult(b), left_mult(a)
    w1, w2 = module_nr(t1, tol=tol), module_nr(t2, tol=tol)
    wt1, sw2 = snr(t1, tol), snr_sweep(t2, tol)
    n1, n2 = op_norm(t1), op_norm(t2)
    sup_a = calg.state_sup(a, tol)
    sqrt2, half_gap = math.sqrt(2), (1 + math.sqrt(2)) / 2

    facts = {
        "i": {
            "norm_T1": n1, "w_T1": w1.value, "wtilde_T1": wt1.value,
            "T1_squared_zero": op_norm(t1 @ t1) == 0.0,
            "holds": (abs(n1 - 1) <= 1e-9 and abs(w1.value - 1) <= 1e-9
                      and abs(wt1.value - 0.5) <= 1e-8 and abs(w1.value - n1 / 2) > 1e-3),
        },
        "ii": {
            "norm_T2": n2, "w_T2": w2.value, "w_T2_method": w2.method,
            "w_T2_witness_value": evaluate_witness(t2, w2), "sup_re_T2": sw2.value,
            "gap": w2.value - sw2.value,
            "holds": (abs(n2 - sqrt2) <= 1e-9 and abs(w2.value - sqrt2) <= 1e-9
                      and w2.method == "fast-path-k1" and abs(sw2.value - half_gap) <= 1e-8
                      and sw2.value < w2.value),
        },
        "iii": {
            "state_sup_a": sup_a, "bound": 1.25, "norm_a": calg.norm(a),
            "holds": sup_a <= 1.25 < sqrt2 and abs(calg.norm(a) - sqrt2) <= 1e-9,
        },
        "iv": {
            "sup_re_T2": sw2.value, "state_sup_a": sup_a,
            "holds": sw2.value <= sup_a + tol,
        },
    }
    bad = [name for name, fact in facts.items() if not fact["holds"]]
    if bad:
        raise CounterexampleError(f"counterexample facts failed: {bad}; details: {facts}")
    return {"ok": True, "facts": facts,
            "operators": {"T1": operator_to_json(t1), "T2": operator_to_json(t2)}}
