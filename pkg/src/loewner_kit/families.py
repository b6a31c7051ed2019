"""Verification harness for evolution families and Loewner chains.

A family is a handle (s, t) -> evaluator rather than a precomputed grid, so
every check can choose its own probe times.  The checks are report-only:
they measure residuals of the algebraic axioms (identity at equal times,
the two-parameter composition law, a Lipschitz-in-time proxy for the
regularity axiom), the association identity f_t o phi_{s,t} = f_s, the
normalized-derivative quotient beta and its long-time limit, conformal
radii along a chain, conjugation by boundary-derivative schedules, and the
capacity-regularity structure of hydrodynamically normalized families.

Absolute-continuity claims are tested as numerical proxies and labelled as
such in the reports; nothing here certifies regularity.  The common
boundary fixed point is only ever checked at the declared location.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .classes import ell, is_p0
from .errors import DomainEscape, InvalidMap, ScheduleInvalid
from .maps import (
    Affine,
    CAYLEY,
    CAYLEY_INV,
    Domain,
    MapEvaluator,
    Moebius,
    compose,
    conjugate_by_cayley,
    invert_numeric,
)
from .regularity import ac_proxy

__all__ = [
    "FamilyHandle",
    "ChainHandle",
    "DerivativeSchedule",
    "EfReport",
    "AssociationReport",
    "BetaClassification",
    "GoryainovBaReport",
    "verify_ef_axioms",
    "verify_chain_association",
    "beta",
    "classify_beta_limit",
    "standard_range_radius",
    "alternate_chain",
    "conformal_radius_along_chain",
    "conjugate_family",
    "goryainov_ba_check",
    "radial_family",
    "radial_chain",
    "translation_family",
    "translation_chain",
    "chordal_family",
    "chordal_chain",
    "broken_family",
]

_DISK_PROBES = (0.1 + 0.0j, -0.3 + 0.2j, 0.5j, -0.4 - 0.35j, 0.25 + 0.5j)
_HP_PROBES = (0.5j, 1.0 + 1.0j, -2.0 + 0.5j, 0.3 + 2.0j, -1.0 + 3.0j)


def _default_probes(domain: Domain):
    return _DISK_PROBES if domain is Domain.DISK else _HP_PROBES


@dataclass(frozen=True)
class FamilyHandle:
    """Two-parameter family of self-maps given by ``maker(s, t)``.

    The identity axiom is probed at construction: maker(s, s) must be the
    identity to 1e-12 on a small interior grid.  ``fixed_point`` declares
    the common boundary fixed point when there is one (checks never search
    for an undeclared one).
    """

    maker: Callable[[float, float], MapEvaluator]
    domain: Domain = Domain.DISK
    fixed_point: Optional[complex] = None
    order: float = math.inf

    def __post_init__(self):
        probes = np.asarray(_default_probes(self.domain))
        for s in (0.0, 0.37, 1.0):
            m = self.maker(s, s)
            res = float(np.max(np.abs(m.evaluate(probes) - probes)))
            if res > 1e-12:
                raise InvalidMap(
                    f"maker({s}, {s}) deviates from the identity by {res:.2e}"
                )

    def __call__(self, s: float, t: float) -> MapEvaluator:
        return self.maker(s, t)

    def disk_side(self) -> "FamilyHandle":
        """Same family conjugated to the disk (no-op when already there).

        A half-plane family fixing infinity lands at the boundary point 1.
        """
        if self.domain is Domain.DISK:
            return self
        if self.fixed_point is None:
            fp: Optional[complex] = 1.0 + 0.0j
        elif self.fixed_point.imag > 0:
            fp = complex(CAYLEY_INV.evaluate(self.fixed_point))
        else:
            fp = complex((self.fixed_point - 1j) / (self.fixed_point + 1j))
        return FamilyHandle(
            lambda s, t: conjugate_by_cayley(self.maker(s, t)),
            Domain.DISK,
            fp,
            self.order,
        )

    def half_plane_side(self) -> "FamilyHandle":
        if self.domain is Domain.HALF_PLANE:
            return self
        return FamilyHandle(
            lambda s, t: conjugate_by_cayley(self.maker(s, t)),
            Domain.HALF_PLANE,
            None,
            self.order,
        )


@dataclass(frozen=True)
class ChainHandle:
    """One-parameter chain of univalent maps of the disk, ``maker(t)``.

    Univalence is declared by construction.  Range monotonicity is probed
    at construction: samples of f_s(D) must have preimages under f_t for
    s <= t.
    """

    maker: Callable[[float], MapEvaluator]
    normalized: bool = False
    probe_pairs: Tuple[Tuple[float, float], ...] = ((0.0, 0.7), (0.7, 1.4))

    def __post_init__(self):
        if self.normalized:
            f0 = self.maker(0.0)
            v0 = complex(f0.evaluate(0.0 + 0.0j))
            d0 = complex(f0.derivative(0.0 + 0.0j))
            if abs(v0) > 1e-10 or abs(d0 - 1.0) > 1e-10:
                raise InvalidMap(
                    f"declared normalized chain has f0(0) = {v0}, f0'(0) = {d0}"
                )
        for s, t in self.probe_pairs:
            fs, ft = self.maker(s), self.maker(t)
            for z in _DISK_PROBES[:3]:
                w = complex(fs.evaluate(z))
                pre = invert_numeric(ft, w, z)
                if abs(pre) >= 1.0:
                    raise InvalidMap(
                        f"range monotonicity probe failed: f_{s}({z}) has no "
                        f"preimage in the disk under f_{t}"
                    )

    def __call__(self, t: float) -> MapEvaluator:
        return self.maker(t)


@dataclass(frozen=True)
class DerivativeSchedule:
    """Nondecreasing real schedule controlling boundary derivatives.

    Distinct from the driving term of the chordal equation: this lambda
    prescribes the derivative exp(lambda(s) - lambda(t)) of a conjugated
    family at its boundary fixed point.  Knots interpolate linearly and the
    last value extends to all later times.
    """

    knots: Tuple[Tuple[float, float], ...]
    order: float = math.inf

    def __post_init__(self):
        ts = [t for t, _ in self.knots]
        vs = [v for _, v in self.knots]
        if not self.knots or ts[0] != 0.0 or vs[0] != 0.0:
            raise ScheduleInvalid("schedule must start with knot (0, 0)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ScheduleInvalid("schedule knot times must increase")
        if any(b < a - 1e-15 for a, b in zip(vs, vs[1:])):
            raise ScheduleInvalid("schedule values must be nondecreasing")
        if not all(math.isfinite(t) and math.isfinite(v) for t, v in self.knots):
            raise ScheduleInvalid("schedule knots must be finite")

    @classmethod
    def from_function(cls, fn, horizon: float, n: int = 129, order: float = math.inf):
        ts = np.linspace(0.0, horizon, n)
        return cls(tuple((float(t), float(fn(t))) for t in ts), order)

    def value(self, t: float) -> float:
        ts = [k[0] for k in self.knots]
        i = bisect.bisect_right(ts, t) - 1
        i = max(i, 0)
        if i == len(self.knots) - 1:
            return self.knots[i][1]
        t0, v0 = self.knots[i]
        t1, v1 = self.knots[i + 1]
        if t <= t0:
            return v0
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * v0 + w * v1

    def blaschke_parameter(self, t: float) -> float:
        """a(t) = (e^{lambda(t)} - 1)/(e^{lambda(t)} + 1) in (-1, 1)."""
        e = math.exp(self.value(t))
        return (e - 1.0) / (e + 1.0)


# ---------------------------------------------------------------------------
# axiom reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EfReport:
    ef1_residual: float
    ef2_residual: float
    ef3_modulus: float
    thresholds: dict
    passed: dict

    def to_dict(self):
        return {
            "ef1_residual": self.ef1_residual,
            "ef2_residual": self.ef2_residual,
            "ef3_lipschitz_modulus": self.ef3_modulus,
            "thresholds": dict(self.thresholds),
            "passed": dict(self.passed),
        }


def verify_ef_axioms(
    fam: FamilyHandle,
    probes: Optional[Sequence[complex]] = None,
    triples: Optional[Sequence[Tuple[float, float, float]]] = None,
    t_grid: Optional[Sequence[float]] = None,
    ef1_tol: float = 1e-12,
    ef2_tol: float = 1e-7,
    seed: int = 0,
) -> EfReport:
    """Measure the evolution-family axioms numerically (report only).

    The identity and composition residuals are hard numbers; the regularity
    axiom is probed through finite-difference Lipschitz moduli over a time
    grid and labelled a proxy.
    """
    rng = np.random.default_rng(seed)
    z = np.asarray(probes if probes is not None else _default_probes(fam.domain))
    if triples is None:
        pts = np.sort(rng.uniform(0.0, 1.5, (8, 3)), axis=1)
        triples = [tuple(row) for row in pts]
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.5, 16)

    ef1 = 0.0
    for s in (0.0, 0.5, 1.0):
        m = fam(s, s)
        ef1 = max(ef1, float(np.max(np.abs(m.evaluate(z) - z))))

    ef2 = 0.0
    for s, u, t in triples:
        left = fam(u, t).evaluate(fam(s, u).evaluate(z))
        right = fam(s, t).evaluate(z)
        ef2 = max(ef2, float(np.max(np.abs(left - right))))

    ef3 = 0.0
    vals = np.stack([fam(0.0, float(t)).evaluate(z) for t in t_grid])
    dts = np.diff(np.asarray(t_grid))
    quot = np.abs(np.diff(vals, axis=0)) / dts[:, None]
    ef3 = float(np.max(quot))

    thresholds = {"ef1": ef1_tol, "ef2": ef2_tol}
    passed = {"ef1": ef1 <= ef1_tol, "ef2": ef2 <= ef2_tol, "ef3_proxy_finite": math.isfinite(ef3)}
    return EfReport(ef1, ef2, ef3, thresholds, passed)


@dataclass(frozen=True)
class AssociationReport:
    max_residual: float
    pairs: Tuple[Tuple[float, float], ...]

    def to_dict(self):
        return {"max_residual": self.max_residual, "pairs": [list(p) for p in self.pairs]}


def verify_chain_association(
    chain: ChainHandle,
    fam: FamilyHandle,
    probes: Optional[Sequence[complex]] = None,
    pairs: Optional[Sequence[Tuple[float, float]]] = None,
) -> AssociationReport:
    """Max residual of f_t(phi_{s,t}(z)) - f_s(z) over probes and (s, t)."""
    z = np.asarray(probes if probes is not None else _DISK_PROBES)
    fam = fam.disk_side()
    if pairs is None:
        pairs = ((0.0, 0.4), (0.3, 1.0), (0.0, 1.4), (0.9, 1.3))
    worst = 0.0
    for s, t in pairs:
        lhs = chain(t).evaluate(fam(s, t).evaluate(z))
        rhs = chain(s).evaluate(z)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return AssociationReport(worst, tuple(pairs))


# ---------------------------------------------------------------------------
# beta and chain geometry
# ---------------------------------------------------------------------------


def beta(fam: FamilyHandle, z: complex, t: float) -> float:
    """Normalized derivative quotient |phi'_{0,t}(z)| / (1 - |phi_{0,t}(z)|^2)."""
    phi = fam.disk_side()(0.0, t)
    w = complex(phi.evaluate(z))
    d = complex(phi.derivative(z))
    return abs(d) / (1.0 - abs(w) ** 2)


@dataclass(frozen=True)
class BetaClassification:
    samples: Tuple[Tuple[float, float], ...]
    limit: float
    kind: str  # "plane" or "disk"
    radius: float

    def to_dict(self):
        return {
            "samples": [list(p) for p in self.samples],
            "limit": self.limit,
            "kind": self.kind,
            "radius": None if math.isinf(self.radius) else self.radius,
        }


def classify_beta_limit(
    fam: FamilyHandle,
    z: complex = 0.0 + 0.0j,
    t_max: float = 64.0,
    plane_tol: float = 1e-4,
) -> BetaClassification:
    """Long-time limit of beta_t(z), Aitken-accelerated over a dyadic tail.

    A vanishing limit classifies the standard chain range as the whole
    plane; a positive limit beta gives the disk of radius 1/beta.
    """
    ts = (t_max / 4.0, t_max / 2.0, t_max)
    vals = [beta(fam, z, t) for t in ts]
    x0, x1, x2 = vals
    d1, d2 = x1 - x0, x2 - x1
    denom = d2 - d1
    if abs(denom) <= 1e-9 * (abs(d1) + abs(d2) + 1e-300):
        # equal successive differences: either converged (flat) or still
        # decreasing linearly across the window, which cannot stabilize at
        # a positive value since beta is nonincreasing
        extrap = x2 if abs(d2) <= 1e-12 * (1.0 + x2) else 0.0
    else:
        extrap = x2 - d2 * d2 / denom
    limit = max(extrap, 0.0)
    if limit <= plane_tol:
        return BetaClassification(tuple(zip(ts, vals)), 0.0, "plane", math.inf)
    return BetaClassification(tuple(zip(ts, vals)), limit, "disk", 1.0 / limit)


def standard_range_radius(beta_limit: float) -> float:
    """Radius 1/beta of the standard chain range; inf flags the plane."""
    if beta_limit < 0:
        raise InvalidMap("beta limit must be nonnegative")
    return math.inf if beta_limit == 0.0 else 1.0 / beta_limit


def alternate_chain(
    chain: ChainHandle,
    h: MapEvaluator,
    beta_value: float,
    probe_times: Sequence[float] = (0.0, 0.5, 1.0),
) -> ChainHandle:
    """Chain g_t = h(beta f_t)/beta associated with the same family.

    ``h`` must be normalized (h(0) = 0, h'(0) = 1).  Probes raise
    :class:`DomainEscape` when beta f_t leaves the disk, which signals an
    inconsistent beta.
    """
    if beta_value <= 0:
        raise InvalidMap("alternate chain needs beta > 0")
    h0 = complex(h.evaluate(0.0 + 0.0j))
    h1 = complex(h.derivative(0.0 + 0.0j))
    if abs(h0) > 1e-10 or abs(h1 - 1.0) > 1e-10:
        raise InvalidMap(f"h is not normalized: h(0) = {h0}, h'(0) = {h1}")
    z = np.asarray(_DISK_PROBES)
    for t in probe_times:
        scaled = beta_value * chain(float(t)).evaluate(z)
        top = float(np.max(np.abs(scaled)))
        if top >= 1.0:
            raise DomainEscape(
                f"beta f_t leaves the disk at t = {t}: |beta f_t| reaches {top:.3f}"
            )

    scale = Affine(beta_value, 0.0, Domain.PLANE, Domain.DISK)
    unscale = Affine(1.0 / beta_value, 0.0, Domain.PLANE, Domain.PLANE)

    def maker(t: float) -> MapEvaluator:
        return compose(unscale, h, scale, chain(t))

    return ChainHandle(maker, normalized=chain.normalized, probe_pairs=())


def conformal_radius_along_chain(
    chain: ChainHandle, fam: FamilyHandle, z0: complex, t: float
) -> float:
    """Conformal radius of the chain range at time t w.r.t. f_0(z0).

    Computed as |f_0'(z0)| / beta_t(z0); at t = 0 this reduces to the
    distortion identity |f_0'(z0)| (1 - |z0|^2).
    """
    d0 = complex(chain(0.0).derivative(z0))
    return abs(d0) / beta(fam, z0, t)


# ---------------------------------------------------------------------------
# conjugation by a derivative schedule
# ---------------------------------------------------------------------------


def _schedule_mobius(a: float, tau: complex) -> MapEvaluator:
    # tau (z - tau a) / (tau - a z), a disk automorphism fixing tau
    return Moebius(
        tau,
        -tau * tau * a,
        -a,
        tau,
        Domain.DISK,
        Domain.DISK,
        self_map_of=Domain.DISK,
    )


def conjugate_family(
    fam: FamilyHandle,
    schedule: DerivativeSchedule,
    tau: complex = 1.0 + 0.0j,
    check_derivative: bool = False,
) -> FamilyHandle:
    """Impose a boundary-derivative schedule on a parabolic-type family.

    The input family must fix tau with angular derivative 1 there (declared
    by construction).  The output family fixes tau with derivative
    exp(lambda(s) - lambda(t)), realized by sandwiching between the disk
    automorphisms with Blaschke parameter a(t) = (e^lambda - 1)/(e^lambda + 1).

    With ``check_derivative`` the construction verifies the derivative at
    tau through the Cayley-side angular-derivative estimator.
    """
    if abs(abs(tau) - 1.0) > 1e-12:
        raise InvalidMap("conjugation point must lie on the unit circle")
    base = fam.disk_side()

    def maker(s: float, t: float) -> MapEvaluator:
        h_t_inv = _schedule_mobius(schedule.blaschke_parameter(t), tau).closed_inverse()
        h_s = _schedule_mobius(schedule.blaschke_parameter(s), tau)
        return compose(h_t_inv, base(s, t), h_s)

    out = FamilyHandle(maker, Domain.DISK, tau, schedule.order)
    if check_derivative:
        from .classes import boundary_derivative

        for s, t in ((0.0, 0.8), (0.4, 1.2)):
            want = math.exp(schedule.value(s) - schedule.value(t))
            got = boundary_derivative(out(s, t), tau)
            if abs(got - want) > 1e-4 * (1.0 + want):
                raise InvalidMap(
                    f"conjugated derivative at tau is {got:.8f}, expected {want:.8f}"
                )
    return out


# ---------------------------------------------------------------------------
# capacity-regular families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoryainovBaReport:
    v_table: Tuple[Tuple[float, float], ...]
    monotone: bool
    bound_ok: bool
    worst_bound_margin: float
    ac_proxy_passed: bool
    p0_flags: Tuple[bool, ...]
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "v_table": [list(p) for p in self.v_table],
            "monotone": self.monotone,
            "bound_ok": self.bound_ok,
            "worst_bound_margin": self.worst_bound_margin,
            "ac_proxy_passed": self.ac_proxy_passed,
            "p0_flags": list(self.p0_flags),
            "diagnostics": dict(self.diagnostics),
        }


def goryainov_ba_check(
    fam: FamilyHandle,
    t_max: float = 1.0,
    n_grid: int = 9,
    n_random: int = 12,
    seed: int = 0,
    slack: float = 1e-9,
) -> GoryainovBaReport:
    """Capacity-regularity report for a hydrodynamically normalized family.

    Builds the table v(t) = ell(Phi_{0,t}), checks monotonicity, tests the
    regularity bound |Phi_{s,t}(z) - Phi_{s,u}(z)| <= (v(t) - v(u))/Im z on
    random configurations, runs an AC proxy on v, and spot-checks class
    membership of a few transition maps.
    """
    from .errors import Diverging, Unstable

    hp = fam.half_plane_side()
    ts = np.linspace(0.0, t_max, n_grid)
    flags = tuple(is_p0(hp(0.0, float(t))).member for t in (0.5 * t_max, t_max))
    diagnostics: dict = {}

    def v_of(tarr):
        out = []
        for t in np.atleast_1d(tarr):
            if t <= 0:
                out.append(0.0)
                continue
            try:
                out.append(ell(hp(0.0, float(t))))
            except (Diverging, Unstable) as exc:
                diagnostics.setdefault("capacity_errors", []).append(str(exc))
                out.append(math.nan)
        return np.array(out)

    v_vals = v_of(ts)
    if np.any(np.isnan(v_vals)):
        # outside the hydrodynamic class; nothing further to bound
        return GoryainovBaReport(
            tuple((float(t), float(v)) for t, v in zip(ts, v_vals)),
            False,
            False,
            -math.inf,
            False,
            flags,
            diagnostics,
        )
    monotone = bool(np.all(np.diff(v_vals) >= -1e-12))

    rng = np.random.default_rng(seed)
    worst = math.inf
    ok = True
    vmap = {float(t): float(v) for t, v in zip(ts, v_vals)}
    for _ in range(n_random):
        s, u, t = np.sort(rng.choice(ts[1:-1] if n_grid > 4 else ts, size=3, replace=False))
        z = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.5))
        lhs = abs(complex(hp(s, t).evaluate(z)) - complex(hp(s, u).evaluate(z)))
        rhs = (vmap[float(t)] - vmap[float(u)]) / z.imag
        margin = rhs + slack - lhs
        worst = min(worst, margin)
        ok = ok and margin >= 0.0
    proxy = ac_proxy(v_of, 0.0, t_max, d=1.0, n=81, refine=3)
    diagnostics["ac"] = proxy.to_dict()
    return GoryainovBaReport(
        tuple((float(t), float(v)) for t, v in zip(ts, v_vals)),
        monotone,
        ok,
        worst,
        proxy.passed,
        flags,
        diagnostics,
    )


# ---------------------------------------------------------------------------
# built-in families and chains
# ---------------------------------------------------------------------------


def radial_family() -> FamilyHandle:
    """phi_{s,t}(z) = e^{s-t} z, the model family with interior fixed point."""
    return FamilyHandle(
        lambda s, t: Affine(math.exp(s - t), 0.0, Domain.DISK, Domain.DISK),
        Domain.DISK,
        fixed_point=0.0 + 0.0j,
    )


def radial_chain() -> ChainHandle:
    """f_t(z) = e^t z, associated with the radial model family."""
    return ChainHandle(
        lambda t: Affine(math.exp(t), 0.0, Domain.DISK, Domain.PLANE),
        normalized=True,
    )


def translation_family() -> FamilyHandle:
    """Disk conjugate of w -> w + i (t - s), fixing the boundary point 1."""

    def maker(s: float, t: float) -> MapEvaluator:
        shift = Affine(1.0, 1j * (t - s), Domain.HALF_PLANE, Domain.HALF_PLANE)
        return compose(CAYLEY_INV, shift, CAYLEY)

    return FamilyHandle(maker, Domain.DISK, fixed_point=1.0 + 0.0j)


def translation_chain() -> ChainHandle:
    """f_t = H - i t, associated with the translation family."""

    def maker(t: float) -> MapEvaluator:
        return compose(Affine(1.0, -1j * t, Domain.HALF_PLANE, Domain.PLANE), CAYLEY)

    return ChainHandle(maker, probe_pairs=())


def chordal_family(driving, side: str = "disk", n_sub: int = 64) -> FamilyHandle:
    """Evolution family of the chordal solver for the given driving term."""
    from .chordal import evolution_operator

    def hp_maker(s: float, t: float) -> MapEvaluator:
        return evolution_operator(driving, s, t, n_sub)

    if side == "half_plane":
        return FamilyHandle(hp_maker, Domain.HALF_PLANE)
    return FamilyHandle(
        lambda s, t: conjugate_by_cayley(hp_maker(s, t)),
        Domain.DISK,
        fixed_point=1.0 + 0.0j,
    )


def chordal_chain(driving, n_sub: int = 64) -> ChainHandle:
    """Chain of partially erased slit domains for the chordal solver.

    f_t maps the disk onto the half-plane minus the not-yet-erased part of
    the curve; its evolution family is the Cayley conjugate of the solver
    transitions.
    """
    from .chordal import evolution_operator

    def maker(t: float) -> MapEvaluator:
        return compose(evolution_operator(driving, t, driving.horizon, n_sub), CAYLEY)

    return ChainHandle(maker, probe_pairs=())


def broken_family() -> FamilyHandle:
    """Deliberately wrong composition law (automorphism parameters add)."""

    def maker(s: float, t: float) -> MapEvaluator:
        from .maps import DiskAutomorphism

        return DiskAutomorphism(min(t - s, 0.95))

    return FamilyHandle(maker, Domain.DISK)
