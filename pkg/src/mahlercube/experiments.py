"""Sample symmetric bodies near the cube and run the local-minimality pipeline.

Per trial: sample -> canonical position -> contact pairs -> the flag
polytopes P, P', Q, Q' -> escape dichotomy with the witness point ->
volume product of K.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy import stats

from . import linalg as la
from .contact import canonicalize_with_map, contact_pairs, facet_touch_certificate
from .flags import (AlphaWeights, FlagPoints, base_dual_points, base_points, build_Q_pair,
                    cube_mahler, dual_center, face_dim, g_volume)
from .geometry import (HPolytope, VPolytope, contains, convex_hull, cube, gauge,
                       polar, vertices_from_halfspaces, volume_product)
from .io import polytope_to_json, scalar_out

log = logging.getLogger(__name__)

DELTA_CAP = Fraction(1, 20)
GENERATORS = ("corner", "pull", "halfspace")
_DENOM = 2 ** 16


class AnomalyError(RuntimeError):
    """A trial broke a postcondition; ``repro`` holds the serialized input."""

    def __init__(self, message: str, repro: dict):
        super().__init__(message)
        self.repro = repro


@dataclass(frozen=True)
class TrialConfig:
    n: int
    delta_max: Fraction = Fraction(1, 100)
    trials: int = 1
    seed: int = 0
    backend: str = "exact"
    c_probe: Fraction | None = None
    generator: str | None = None  # None: round-robin over GENERATORS

    def __post_init__(self):
        object.__setattr__(self, "delta_max", Fraction(self.delta_max))
        if not 0 <= self.delta_max <= DELTA_CAP:
            raise ValueError(f"delta_max must lie in [0, {DELTA_CAP}]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.backend not in ("exact", "float"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.generator is not None and self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.c_probe is None:
            object.__setattr__(self, "c_probe", min(Fraction(1, 10), witness_constants(self.n)[1] / 4))
        else:
            object.__setattr__(self, "c_probe", Fraction(self.c_probe))


# --- sampling -----------------------------------------------------------------

def _unit(rng) -> Fraction:
    """Uniform rational in (0, 1]."""
    return Fraction(int(rng.integers(1, _DENOM + 1)), _DENOM)


def _cast(points, backend):
    if backend == "float":
        return [tuple(float(x) for x in p) for p in points]
    return points


def _pairs(n):
    return [v for v in product((-1, 1), repeat=n) if v[0] == 1]


def sample_body_near_cube(cfg: TrialConfig, trial_index: int):
    """Symmetric ``K`` with ``(1 - delta) B_inf^n`` inside ``K`` inside ``B_inf^n``.

    Returns ``(K, generator_name)``.
    """
    n = cfg.n
    if cfg.delta_max == 0:
        return cube(n, cfg.backend), "cube"
    rng = np.random.default_rng([cfg.seed, trial_index])
    gen = cfg.generator or GENERATORS[trial_index % len(GENERATORS)]
    pairs = _pairs(n)
    k = int(rng.integers(1, len(pairs) + 1))
    chosen = [pairs[i] for i in sorted(rng.choice(len(pairs), size=k, replace=False))]
    one = Fraction(1)
    if gen == "corner":
        rows = [tuple(one * (i == j) for j in range(n)) for i in range(n)]
        rows += [tuple(-x for x in r) for r in rows]
        for v in chosen:
            t = cfg.delta_max * _unit(rng)
            a = tuple(Fraction(s) / (n * (1 - t)) for s in v)
            rows += [a, tuple(-x for x in a)]
        H = HPolytope(n, tuple(_cast(rows, cfg.backend)), cfg.backend)
        return vertices_from_halfspaces(H.irredundant()), gen
    if gen == "pull":
        pulled = {}
        for v in chosen:
            t = cfg.delta_max * _unit(rng)
            r = [_unit(rng) for _ in range(n)]
            w = tuple(s * (1 - t * ri) for s, ri in zip(v, r))
            pulled[v] = w
            pulled[tuple(-s for s in v)] = tuple(-x for x in w)
        verts = [pulled.get(v, tuple(Fraction(s) for s in v)) for v in product((-1, 1), repeat=n)]
        return convex_hull(_cast(verts, cfg.backend), cfg.backend, symmetric=True), gen
    rows = [tuple(one * (i == j) for j in range(n)) for i in range(n)]
    rows += [tuple(-x for x in r) for r in rows]
    limit = 1 / (1 - cfg.delta_max)
    for v in chosen:
        weights = [int(rng.integers(0, _DENOM + 1)) for _ in range(n)]
        if sum(weights) == 0:
            weights[0] = 1
        s = 1 + (limit - 1) * _unit(rng)
        a = tuple(Fraction(sg * w, sum(weights)) * s for sg, w in zip(v, weights))
        rows += [a, tuple(-x for x in a)]
    H = HPolytope(n, tuple(_cast(rows, cfg.backend)), cfg.backend)
    return vertices_from_halfspaces(H.irredundant()), gen


# --- the flag polytopes -------------------------------------------------------

def build_P_pair(K: VPolytope, pairs: dict | None = None):
    """Flag points of contact: ``P`` from the ``y``'s, ``P'`` from the ``y*``'s."""
    if pairs is None:
        pairs = contact_pairs(K)
    P = FlagPoints(K.dim, {F: p.y for F, p in pairs.items()})
    Pp = FlagPoints(K.dim, {F: p.y_star for F, p in pairs.items()})
    return P, Pp


def alpha_from_pairs(n: int, pairs: dict) -> AlphaWeights:
    return AlphaWeights(n, {F: p.alpha for F, p in pairs.items()})


# --- witness point --------------------------------------------------------------

def witness_constants(n: int):
    """``(c', c'')`` with ``c' = 1/(n - 5/4)`` and ``c'' = 1/(4n - 5)``."""
    return Fraction(4, 4 * n - 5), Fraction(1, 4 * n - 5)


def witness_point(delta, n: int):
    """``(1 - delta, c' delta, ..., c' delta)`` in the normalised frame, and ``c''``."""
    c1, c2 = witness_constants(n)
    if isinstance(delta, float):
        c1, c2 = float(c1), float(c2)
    return (1 - delta,) + tuple(c1 * delta for _ in range(n - 1)), c2


@dataclass(frozen=True)
class Frame:
    """Signed permutation sending the chosen vertex face to (1, ..., 1) with the
    small coordinate first."""

    order: tuple
    signs: tuple

    def to_frame(self, x) -> tuple:
        return tuple(self.signs[k] * x[i] for k, i in enumerate(self.order))

    def from_frame(self, x) -> tuple:
        out = [None] * len(x)
        for k, i in enumerate(self.order):
            out[i] = self.signs[k] * x[k]
        return tuple(out)


def choose_frame(P: FlagPoints, delta):
    """Vertex face whose contact point has the smallest coordinate in absolute
    value; ``None`` if no coordinate is at most ``1 - delta``."""
    best = None
    for F in sorted(P):
        if face_dim(F) != 0:
            continue
        x = P[F]
        for i, xi in enumerate(x):
            val = abs(xi)
            if best is None or val < best[0]:
                best = (val, F, i)
    if best is None or not la.leq(best[0], 1 - delta):
        return None, None
    _, F, i = best
    order = (i,) + tuple(j for j in range(len(F)) if j != i)
    return F, Frame(order, tuple(F[j] for j in order))


def witness_certificate(K: VPolytope, P: FlagPoints, Pp: FlagPoints, delta, c, C_prime):
    """Check the witness-point argument for a body that does not escape ``P``."""
    n = K.dim
    F0, frame = choose_frame(P, delta)
    if frame is None:
        return {"frame_found": False}
    xt, c2 = witness_point(delta, n)
    if isinstance(delta, float):
        c = float(c)
    x_orig = frame.from_frame(xt)
    bound = 1 - c2 * delta
    vertex_case = la.leq(la.dot(xt, frame.to_frame(P[F0])), bound)
    other_case = all(la.leq(la.dot(xt, frame.to_frame(P[F])), bound) for F in P if F != F0)
    in_Kstar = all(la.leq(la.dot(x_orig, v), 1) for v in K.vertices)
    hull_Pp = convex_hull(list(Pp.values()), K.backend)
    outside = not la.leq(gauge(hull_Pp, x_orig), 1 + c * delta)

    def functional(x):
        y = frame.to_frame(x)
        return abs(y[0]) + (1 - C_prime * delta) * sum(abs(t) for t in y[1:])

    functional_ok = (all(la.leq(functional(x), 1) for x in Pp.values())
                     and not la.leq(functional(x_orig), 1 + c * delta))
    return {
        "frame_found": True,
        "face": list(F0),
        "witness": x_orig,
        "vertex_case": vertex_case,
        "other_case": other_case,
        "in_Kstar": in_Kstar,
        "outside_scaled_Pp": outside,
        "functional_ok": functional_ok,
    }


def dichotomy_check(K: VPolytope, P: FlagPoints, Pp: FlagPoints, delta, c, C_prime=0):
    """Return ``(outcome, certificate)``.

    Containment is tested against the convex hulls of the flag points; the
    hull contains the flag union, so escaping the hull implies escaping the
    union.
    """
    scale = 1 + c * delta
    if isinstance(delta, float):
        scale = float(scale)
    hull_P = convex_hull(list(P.values()), K.backend)
    if not contains(hull_P, K, scale):
        return "body_escapes", None
    cert = witness_certificate(K, P, Pp, delta, c, C_prime)
    hull_Pp = convex_hull(list(Pp.values()), K.backend)
    if not contains(hull_Pp, polar(K), scale):
        return "polar_escapes", cert
    return "neither", cert


# --- a single trial ---------------------------------------------------------------

def _fl(x):
    return float(x)


def run_trial(cfg: TrialConfig, trial_index: int) -> dict:
    n = cfg.n
    K, gen = sample_body_near_cube(cfg, trial_index)
    repro = {"config": config_to_json(cfg), "trial": trial_index, "body": polytope_to_json(K)}
    Khat, delta, T = canonicalize_with_map(K)
    touch_ok = all(facet_touch_certificate(K, T))
    PB = cube_mahler(n)
    if K.backend == "float":
        PB = float(PB)
    PK = volume_product(Khat)
    report = {
        "trial": trial_index,
        "generator": gen,
        "delta": delta,
        "touch_ok": touch_ok,
    }
    if la.is_zero(delta):
        vol, dual_vol = g_volume(base_points(n)), g_volume(base_dual_points(n))
        zero = 0.0 if K.backend == "float" else Fraction(0)
        if K.backend == "float":
            vol, dual_vol = float(vol), float(dual_vol)
        report.update(volP=vol, volPp=dual_vol, volQ=vol, volQp=dual_vol,
                      PK=PK, PB=PB, gap_PQ=zero, gap_PpQp=zero, chain_slack=zero,
                      dichotomy="trivial", witness_in_Kstar=None, witness=None,
                      contact_slope=0.0, dual_contact_slope=0.0, P_in_K=True,
                      Pp_in_Kstar=True, mahler_excess=PK - PB)
        return report
    try:
        pairs = contact_pairs(Khat)
    except Exception as exc:  # surfaced as an anomaly with its repro case
        raise AnomalyError(f"contact construction failed: {exc}", repro) from exc
    P, Pp = build_P_pair(Khat, pairs)
    Q, Qp = build_Q_pair(alpha_from_pairs(n, pairs))
    volP, volPp, volQ, volQp = g_volume(P), g_volume(Pp), g_volume(Q), g_volume(Qp)
    slope = max(_fl(la.norm2_sq(la.sub(p.y, F))) ** 0.5 for F, p in pairs.items()) / _fl(delta)
    dual_slope = max(_fl(la.norm2_sq(la.sub(p.y_star, dual_center(F)))) ** 0.5
                     for F, p in pairs.items()) / _fl(delta)
    P_in_K = contains(Khat, list(P.values()))
    Kstar = HPolytope(n, Khat.vertices, Khat.backend)
    Pp_in_Kstar = contains(Kstar, list(Pp.values()))
    C_prime = 3 * n * (Fraction(dual_slope) if K.backend == "exact" else dual_slope)
    outcome, cert = dichotomy_check(Khat, P, Pp, delta, cfg.c_probe, C_prime)
    report.update(
        volP=volP, volPp=volPp, volQ=volQ, volQp=volQp, PK=PK, PB=PB,
        gap_PQ=abs(volP - volQ), gap_PpQp=abs(volPp - volQp), chain_slack=None,
        dichotomy=outcome,
        witness_in_Kstar=None if cert is None else cert.get("in_Kstar"),
        witness=_cert_out(cert),
        contact_slope=slope, dual_contact_slope=dual_slope,
        P_in_K=P_in_K, Pp_in_Kstar=Pp_in_Kstar,
        mahler_excess=PK - PB,
    )
    if outcome == "neither":
        raise AnomalyError("dichotomy returned neither", repro)
    return report


def _cert_out(cert):
    if cert is None:
        return None
    out = dict(cert)
    if "witness" in out:
        out["witness"] = [scalar_out(x) for x in out["witness"]]
    return out


def _run_one(args):
    cfg, i = args
    return run_trial(cfg, i)


def run_trials(cfg: TrialConfig, workers: int = 1):
    """Run every trial; returns ``(reports, aggregate)``.

    Results are ordered by trial index whatever ``workers`` is.
    """
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reports = [_run_one(j) for j in jobs]
    agg = aggregate(reports, cfg)
    C = agg["_C_chain"]
    for r in reports:
        if r["dichotomy"] != "trivial":
            r["chain_slack"] = r["volP"] * r["volPp"] - (r["PB"] - C * r["delta"] ** 2)
    del agg["_C_chain"]
    return reports, agg


def aggregate(reports, cfg: TrialConfig) -> dict:
    active = [r for r in reports if r["dichotomy"] != "trivial"]
    exact = cfg.backend == "exact"
    zero = Fraction(0) if exact else 0.0
    C_chain, C_gap = zero, zero
    for r in active:
        d2 = r["delta"] ** 2
        C_chain = max(C_chain, (r["volQ"] * r["volQp"] - r["volP"] * r["volPp"]) / d2)
        C_gap = max(C_gap, max(r["gap_PQ"], r["gap_PpQp"]) / d2)
    deltas = np.array([float(r["delta"]) for r in active])
    excess = np.array([float(r["mahler_excess"]) for r in active])
    out = {
        "n": cfg.n,
        "trials": len(reports),
        "backend": cfg.backend,
        "c_probe": scalar_out(cfg.c_probe),
        "outcomes": {k: sum(1 for r in reports if r["dichotomy"] == k)
                     for k in ("body_escapes", "polar_escapes", "neither", "trivial")},
        "min_excess": scalar_out(min((r["mahler_excess"] for r in reports), default=zero)),
        "C_gap": scalar_out(C_gap),
        "C_chain": scalar_out(C_chain),
        "C_contact": max((r["contact_slope"] for r in active), default=0.0),
        "C_dual_contact": max((r["dual_contact_slope"] for r in active), default=0.0),
        "_C_chain": C_chain,
    }
    if len(active) >= 3 and np.ptp(deltas) > 0:
        fit = stats.linregress(deltas, excess)
        out["excess_slope"] = float(fit.slope)
        out["excess_intercept"] = float(fit.intercept)
        out["excess_slope_pvalue"] = float(fit.pvalue)
    ratios = excess / deltas if len(active) else np.array([])
    out["min_excess_over_delta"] = float(ratios.min()) if len(ratios) else None
    by_family = {}
    for gen in GENERATORS:
        sel = [i for i, r in enumerate(active) if r["generator"] == gen]
        if sel:
            fam = ratios[sel]
            bad = [float(deltas[i]) for i in sel if ratios[i] <= 0]
            by_family[gen] = {"count": len(sel), "min_excess_over_delta": float(fam.min()),
                              "linearity_break_delta": min(bad) if bad else None}
    out["families"] = by_family
    return out


# --- serialisation --------------------------------------------------------------

def config_to_json(cfg: TrialConfig) -> dict:
    return {"n": cfg.n, "delta_max": scalar_out(cfg.delta_max), "trials": cfg.trials,
            "seed": cfg.seed, "backend": cfg.backend, "c_probe": scalar_out(cfg.c_probe),
            "generator": cfg.generator}


_REPORT_KEYS = ("trial", "generator", "delta", "volP", "volPp", "volQ", "volQp", "PK", "PB",
                "gap_PQ", "gap_PpQp", "chain_slack", "dichotomy", "witness_in_Kstar",
                "mahler_excess", "touch_ok", "P_in_K", "Pp_in_Kstar", "contact_slope",
                "dual_contact_slope", "witness")


def report_to_json(r: dict) -> dict:
    out = {}
    for k in _REPORT_KEYS:
        v = r.get(k)
        if isinstance(v, (Fraction, float)) and not isinstance(v, bool):
            v = scalar_out(v)
        out[k] = v
    return out


CSV_COLUMNS = ("trial", "delta", "volP", "volPp", "volQ", "volQp", "PK", "excess", "dichotomy")


def report_csv_row(r: dict) -> list:
    j = report_to_json(r)
    return [j["trial"], j["delta"], j["volP"], j["volPp"], j["volQ"], j["volQp"], j["PK"],
            j["mahler_excess"], j["dichotomy"]]
