"""Composable holomorphic-map evaluators on the disk and the half-plane.

The central object is :class:`MapEvaluator`: an immutable tree of closed-form
primitives (affine, Moebius, Cayley, square-root slit step, measure-integral
maps, ...) closed under composition.  Every evaluator knows

* its declared domain (unit disk or upper half-plane) and a codomain hint,
* exact pointwise values and exact derivatives (chain rule over primitives;
  finite differences are used only as a test oracle),
* optionally an exact Laurent tail ``a z + b + c / z`` near infinity.

Compositions are stored as a flat tuple of factors in application order, so
``(f o g) o h`` and ``f o (g o h)`` evaluate bit-for-bit identically.

Boundary evaluation is rejected: angular limits are computed by the
estimators in :mod:`loewner_kit.classes`, never by evaluating at the
boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    BoundaryEvaluation,
    DerivativeVanishes,
    InvalidMap,
    NoConvergence,
    ParseError,
)

__all__ = [
    "Domain",
    "Tail",
    "MapEvaluator",
    "Identity",
    "Affine",
    "Moebius",
    "Cayley",
    "CayleyInverse",
    "SlitStep",
    "DiskAutomorphism",
    "GenericCallable",
    "Composition",
    "CAYLEY",
    "CAYLEY_INV",
    "sqrt_upper",
    "cayley",
    "cayley_inverse",
    "pseudo_hyperbolic",
    "compose",
    "conjugate_by_cayley",
    "invert_numeric",
    "map_to_spec",
    "map_from_spec",
]

_DISK_EDGE = 1.0 - 1e-14


class Domain(str, Enum):
    DISK = "disk"
    HALF_PLANE = "half_plane"
    PLANE = "plane"


def sqrt_upper(u):
    """Square root with values in the closed upper half-plane.

    The branch is cut along the positive real axis; nonnegative real inputs
    get the nonnegative root.  This is the one branch rule shared by every
    slit step, so all elementary Loewner maps land in the half-plane.
    """
    s = np.sqrt(np.asarray(u, dtype=complex))
    return np.where(s.imag < 0.0, -s, s)


def _as_complex(z):
    """Return (array, was_scalar) view of complex input."""
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _scalar(values, was_scalar):
    return complex(values[()]) if was_scalar else values


@dataclass(frozen=True)
class Tail:
    """Exact expansion ``a z + b + c / z + o(1/z)`` near infinity."""

    a: complex
    b: complex
    c: complex

    def after(self, inner: "Tail") -> Optional["Tail"]:
        """Tail of ``outer o inner`` (self is the outer map)."""
        if inner.a == 0:
            return None
        return Tail(
            self.a * inner.a,
            self.a * inner.b + self.b,
            self.a * inner.c + self.c / inner.a,
        )


class MapEvaluator:
    """Base class for all holomorphic-map evaluators.

    Instances are immutable after construction and safe to share across
    threads; no operation mutates state.
    """

    # plain class attributes on purpose: dataclass subclasses must not
    # inherit these as fields
    kind = "abstract"
    domain = Domain.HALF_PLANE
    codomain = Domain.HALF_PLANE
    tail = None

    # -- evaluation ------------------------------------------------------

    def _eval(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_domain(self, z: np.ndarray) -> None:
        if self.domain is Domain.DISK:
            if np.any(np.abs(z) >= _DISK_EDGE):
                raise BoundaryEvaluation(
                    "evaluation requires |z| < 1 - 1e-14 in the unit disk"
                )
        elif self.domain is Domain.HALF_PLANE:
            if np.any(z.imag <= 0.0):
                raise BoundaryEvaluation("evaluation requires Im z > 0")

    def evaluate(self, z):
        arr, scalar = _as_complex(z)
        self._check_domain(arr)
        return _scalar(self._eval(arr), scalar)

    __call__ = evaluate

    def derivative(self, z):
        arr, scalar = _as_complex(z)
        self._check_domain(arr)
        return _scalar(self._deriv(arr), scalar)

    # -- structure -------------------------------------------------------

    @property
    def factors(self) -> tuple:
        return (self,)

    def closed_inverse(self) -> Optional["MapEvaluator"]:
        """Exact inverse evaluator when one exists in closed form."""
        return None

    def to_spec(self) -> dict:
        raise NotImplementedError(f"{self.kind} does not serialize")

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"<{type(self).__name__} {self.domain.value}->{self.codomain.value}>"


@dataclass(frozen=True, repr=False)
class Identity(MapEvaluator):
    kind = "identity"
    domain: Domain = Domain.HALF_PLANE

    @property
    def codomain(self):
        return self.domain

    tail = Tail(1.0, 0.0, 0.0)

    def _eval(self, z):
        return z

    def _deriv(self, z):
        return np.ones_like(z)

    def closed_inverse(self):
        return self

    def to_spec(self):
        return {"kind": "identity", "domain": self.domain.value}


@dataclass(frozen=True, repr=False)
class Affine(MapEvaluator):
    """z -> a z + b."""

    kind = "affine"
    a: complex = 1.0
    b: complex = 0.0
    domain: Domain = Domain.HALF_PLANE
    codomain: Domain = Domain.HALF_PLANE

    def __post_init__(self):
        if self.a == 0:
            raise InvalidMap("affine map needs a != 0")

    @property
    def tail(self):
        return Tail(self.a, self.b, 0.0)

    def _eval(self, z):
        return self.a * z + self.b

    def _deriv(self, z):
        return np.full_like(z, self.a)

    def closed_inverse(self):
        return Affine(1.0 / self.a, -self.b / self.a, self.codomain, self.domain)

    def to_spec(self):
        return {
            "kind": "affine",
            "a": _c_pair(self.a),
            "b": _c_pair(self.b),
            "domain": self.domain.value,
            "codomain": self.codomain.value,
        }


_BOUNDARY_PROBES = {
    Domain.DISK: (1.0 + 0.0j, 1.0j, -1.0 + 0.0j),
    Domain.HALF_PLANE: (0.0 + 0.0j, 1.0 + 0.0j, -1.0 + 0.0j),
}


@dataclass(frozen=True, repr=False)
class Moebius(MapEvaluator):
    """z -> (a z + b)/(c z + d), ad - bc != 0."""

    kind = "moebius"
    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0
    domain: Domain = Domain.HALF_PLANE
    codomain: Domain = Domain.HALF_PLANE
    self_map_of: Optional[Domain] = None

    def __post_init__(self):
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if abs(self.det) <= 1e-14 * scale * scale:
            raise InvalidMap("degenerate Moebius parameters, ad - bc ~ 0")
        if self.self_map_of is not None:
            self._check_self_map()

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def _check_self_map(self):
        # three boundary samples must land on the boundary, up to 1e-10
        for z in _BOUNDARY_PROBES[Domain(self.self_map_of)]:
            w = (self.a * z + self.b) / (self.c * z + self.d)
            if Domain(self.self_map_of) is Domain.DISK:
                err = abs(abs(w) - 1.0)
            else:
                err = abs(w.imag)
            if err > 1e-10:
                raise InvalidMap(
                    f"declared self map of {self.self_map_of} moves boundary "
                    f"point {z} off the boundary by {err:.2e}"
                )

    @property
    def tail(self):
        if self.c == 0:
            return Tail(self.a / self.d, self.b / self.d, 0.0)
        return None

    def _eval(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def _deriv(self, z):
        den = self.c * z + self.d
        return self.det / (den * den)

    def closed_inverse(self):
        return Moebius(self.d, -self.b, -self.c, self.a, self.codomain, self.domain)

    def to_spec(self):
        return {
            "kind": "moebius",
            "a": _c_pair(self.a),
            "b": _c_pair(self.b),
            "c": _c_pair(self.c),
            "d": _c_pair(self.d),
            "domain": self.domain.value,
            "codomain": self.codomain.value,
            "self_map_of": None if self.self_map_of is None else Domain(self.self_map_of).value,
        }


@dataclass(frozen=True, repr=False)
class Cayley(MapEvaluator):
    """Cayley map H(z) = i (1 + z)/(1 - z), disk onto half-plane, H(0) = i."""

    kind = "cayley"
    domain = Domain.DISK
    codomain = Domain.HALF_PLANE

    def _eval(self, z):
        return 1j * (1.0 + z) / (1.0 - z)

    def _deriv(self, z):
        one_minus = 1.0 - z
        return 2j / (one_minus * one_minus)

    def closed_inverse(self):
        return CayleyInverse()

    def to_spec(self):
        return {"kind": "cayley"}


@dataclass(frozen=True, repr=False)
class CayleyInverse(MapEvaluator):
    """H^{-1}(w) = (w - i)/(w + i), half-plane onto disk."""

    kind = "cayley_inverse"
    domain = Domain.HALF_PLANE
    codomain = Domain.DISK

    def _eval(self, z):
        return (z - 1j) / (z + 1j)

    def _deriv(self, z):
        den = z + 1j
        return 2j / (den * den)

    def closed_inverse(self):
        return Cayley()

    def to_spec(self):
        return {"kind": "cayley_inverse"}


CAYLEY = Cayley()
CAYLEY_INV = CayleyInverse()


@dataclass(frozen=True, repr=False)
class SlitStep(MapEvaluator):
    """Elementary vertical-slit step of the chordal equation.

    ``erase``: w -> lam + sqrt((w - lam)^2 - 2 cap), the flow of
    dw/dt = 1/(lam - w) over capacity ``cap`` (points move up, a boundary
    slit of height sqrt(2 cap) is opened in the image).

    ``grow``: the inverse map, w -> lam + sqrt((w - lam)^2 + 2 cap).

    Both use the shared upper-half-plane square-root branch and are total on
    the closed half-plane.
    """

    kind = "slit_step"
    lam: float = 0.0
    cap: float = 0.0
    direction: str = "erase"
    domain = Domain.HALF_PLANE
    codomain = Domain.HALF_PLANE

    def __post_init__(self):
        if self.cap < 0:
            raise InvalidMap("slit step needs capacity >= 0")
        if self.direction not in ("erase", "grow"):
            raise InvalidMap("direction must be 'erase' or 'grow'")

    @property
    def _sign(self) -> float:
        return -1.0 if self.direction == "erase" else 1.0

    @property
    def tail(self):
        return Tail(1.0, 0.0, self._sign * self.cap)

    def _eval(self, z):
        u = z - self.lam
        return self.lam + sqrt_upper(u * u + 2.0 * self._sign * self.cap)

    def _deriv(self, z):
        u = z - self.lam
        root = sqrt_upper(u * u + 2.0 * self._sign * self.cap)
        return u / root

    def closed_inverse(self):
        flipped = "grow" if self.direction == "erase" else "erase"
        return SlitStep(self.lam, self.cap, flipped)

    def to_spec(self):
        return {
            "kind": "slit_step",
            "lam": self.lam,
            "capacity": self.cap,
            "direction": self.direction,
        }


@dataclass(frozen=True, repr=False)
class DiskAutomorphism(MapEvaluator):
    """Unit-disk automorphism z -> (z - a)/(1 - conj(a) z), |a| < 1."""

    kind = "disk_automorphism"
    a: complex = 0.0
    domain = Domain.DISK
    codomain = Domain.DISK

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise InvalidMap("disk automorphism needs |a| < 1")

    def _eval(self, z):
        return (z - self.a) / (1.0 - np.conj(self.a) * z)

    def _deriv(self, z):
        den = 1.0 - np.conj(self.a) * z
        return (1.0 - abs(self.a) ** 2) / (den * den)

    def closed_inverse(self):
        return DiskAutomorphism(-self.a)

    def to_spec(self):
        return {"kind": "disk_automorphism", "a": _c_pair(self.a)}


@dataclass(frozen=True, repr=False)
class GenericCallable(MapEvaluator):
    """Wraps a user-supplied holomorphic callable.

    Derivatives use the supplied ``dfunc`` when given, otherwise a small
    central difference (the only non-closed-form derivative in the tree).
    Unless ``assume_univalent`` is set, a 200-point spot injectivity check
    runs at construction.
    """

    kind = "generic"
    func: Callable = None
    domain: Domain = Domain.HALF_PLANE
    codomain: Domain = Domain.HALF_PLANE
    dfunc: Optional[Callable] = None
    assume_univalent: bool = False

    def __post_init__(self):
        if self.func is None:
            raise InvalidMap("generic map needs a callable")
        if not self.assume_univalent:
            self._spot_injectivity()

    def _probe_grid(self, n=200):
        rng = np.random.default_rng(1837)
        if self.domain is Domain.DISK:
            r = np.sqrt(rng.uniform(0.0, 0.9025, n))
            th = rng.uniform(0.0, 2.0 * math.pi, n)
            return r * np.exp(1j * th)
        x = rng.uniform(-3.0, 3.0, n)
        y = rng.uniform(0.05, 3.0, n)
        return x + 1j * y

    def _spot_injectivity(self):
        z = self._probe_grid()
        w = self._eval(z)
        order = np.lexsort((w.imag, w.real))
        ws = w[order]
        gaps = np.abs(np.diff(ws))
        seps = np.abs(np.diff(z[order]))
        if np.any((gaps < 1e-12) & (seps > 1e-9)):
            raise InvalidMap("spot injectivity check failed on 200-point grid")

    def _eval(self, z):
        out = np.asarray(self.func(z), dtype=complex)
        return np.broadcast_to(out, np.shape(z)).copy() if out.shape != np.shape(z) else out

    def _deriv(self, z):
        if self.dfunc is not None:
            return np.asarray(self.dfunc(z), dtype=complex)
        h = 1e-6 * (1.0 + np.abs(z))
        return (self._eval(z + h) - self._eval(z - h)) / (2.0 * h)


def _cancels(first: MapEvaluator, second: MapEvaluator) -> bool:
    a, b = first.kind, second.kind
    return (a, b) in (("cayley", "cayley_inverse"), ("cayley_inverse", "cayley"))


def _flatten(factors) -> tuple:
    flat = []
    for f in factors:
        flat.extend(f.factors)
    # cancel adjacent Cayley / inverse pairs; repeat until stable
    changed = True
    while changed:
        changed = False
        for i in range(len(flat) - 1):
            if _cancels(flat[i], flat[i + 1]):
                del flat[i : i + 2]
                changed = True
                break
    return tuple(flat)


@dataclass(frozen=True, repr=False)
class Composition(MapEvaluator):
    """Flattened composition; ``parts`` are applied first to last."""

    kind = "compose"
    parts: tuple = ()

    @property
    def factors(self):
        return self.parts

    @property
    def domain(self):
        return self.parts[0].domain if self.parts else Domain.HALF_PLANE

    @property
    def codomain(self):
        return self.parts[-1].codomain if self.parts else Domain.HALF_PLANE

    @property
    def tail(self):
        if not self.parts:
            return Tail(1.0, 0.0, 0.0)
        running = self.parts[0].tail
        for f in self.parts[1:]:
            outer = f.tail
            if running is None or outer is None:
                return None
            running = outer.after(running)
            if running is None:
                return None
        return running

    def _eval(self, z):
        for f in self.parts:
            z = f._eval(z)
        return z

    def _deriv(self, z):
        d = np.ones_like(z)
        for f in self.parts:
            d = d * f._deriv(z)
            z = f._eval(z)
        return d

    def closed_inverse(self):
        inv = []
        for f in reversed(self.parts):
            fi = f.closed_inverse()
            if fi is None:
                return None
            inv.append(fi)
        return Composition(tuple(inv))

    def to_spec(self):
        return {"kind": "compose", "parts": [f.to_spec() for f in self.parts]}


def compose(*maps: MapEvaluator) -> MapEvaluator:
    """Compose evaluators: ``compose(f, g)(z) == f(g(z))``.

    The result stores a canonical flat factor tuple, which makes composition
    associative bit-for-bit.
    """
    if not maps:
        raise InvalidMap("compose needs at least one map")
    flat = _flatten(tuple(reversed(maps)))
    if not flat:
        return Identity(maps[-1].domain)
    if len(flat) == 1:
        return flat[0]
    return Composition(flat)


# ---------------------------------------------------------------------------
# standalone geometry operations
# ---------------------------------------------------------------------------


def cayley(z):
    """H(z) = i (1 + z)/(1 - z); rejects |z| >= 1 - 1e-14."""
    return CAYLEY.evaluate(z)


def cayley_inverse(w):
    """H^{-1}(w) = (w - i)/(w + i); rejects Im w <= 0."""
    return CAYLEY_INV.evaluate(w)


def pseudo_hyperbolic(z: complex, w: complex) -> float:
    """Pseudo-hyperbolic distance |(z - w)/(z - conj(w))| on the half-plane."""
    if z.imag <= 0 or w.imag <= 0:
        raise BoundaryEvaluation("pseudo_hyperbolic needs both points in Im > 0")
    return abs((z - w) / (z - w.conjugate()))


def conjugate_by_cayley(m: MapEvaluator) -> MapEvaluator:
    """Conjugate a disk map to the half-plane (H o m o H^{-1}) or back."""
    if m.domain is Domain.DISK:
        return compose(CAYLEY, m, CAYLEY_INV)
    return compose(CAYLEY_INV, m, CAYLEY)


def invert_numeric(
    m: MapEvaluator,
    w: complex,
    seed: complex,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> complex:
    """Solve m(z) = w by Newton iteration from ``seed``.

    Falls back to the exact inverse when the whole tree is invertible in
    closed form.  Raises :class:`NoConvergence` after ``max_iter`` steps and
    :class:`DerivativeVanishes` when |m'| < 1e-14 at an iterate.
    """
    inv = m.closed_inverse()
    if inv is not None:
        return complex(inv._eval(np.asarray(w, dtype=complex))[()])
    z = complex(seed)
    target = tol * (1.0 + abs(w))
    for _ in range(max_iter):
        arr = np.asarray(z, dtype=complex)
        val = complex(m._eval(arr)[()])
        if abs(val - w) <= target:
            return z
        der = complex(m._deriv(arr)[()])
        if abs(der) < 1e-14:
            raise DerivativeVanishes(f"|m'| = {abs(der):.2e} at iterate {z}")
        z = z - (val - w) / der
    raise NoConvergence(f"Newton did not reach |m(z) - w| <= {target:.2e} in {max_iter} steps")


# ---------------------------------------------------------------------------
# JSON map specs
# ---------------------------------------------------------------------------


def _c_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _c_from(pair) -> complex:
    return complex(pair[0], pair[1])


def map_to_spec(m: MapEvaluator) -> dict:
    """Serialize an evaluator tree to its JSON map spec."""
    return m.to_spec()


def map_from_spec(spec: dict) -> MapEvaluator:
    """Rebuild an evaluator from a JSON map spec (see README for the schema)."""
    from .measures import MeasureSpec  # local import to avoid a cycle
    from .classes import MeasureMap, NevanlinnaMap

    kind = spec.get("kind")
    if kind == "identity":
        return Identity(Domain(spec.get("domain", "half_plane")))
    if kind == "affine":
        return Affine(
            _c_from(spec["a"]),
            _c_from(spec["b"]),
            Domain(spec.get("domain", "half_plane")),
            Domain(spec.get("codomain", spec.get("domain", "half_plane"))),
        )
    if kind == "moebius":
        sm = spec.get("self_map_of")
        return Moebius(
            _c_from(spec["a"]),
            _c_from(spec["b"]),
            _c_from(spec["c"]),
            _c_from(spec["d"]),
            Domain(spec.get("domain", "half_plane")),
            Domain(spec.get("codomain", "half_plane")),
            None if sm is None else Domain(sm),
        )
    if kind == "cayley":
        return CAYLEY
    if kind == "cayley_inverse":
        return CAYLEY_INV
    if kind == "slit_step":
        return SlitStep(spec["lam"], spec["capacity"], spec.get("direction", "erase"))
    if kind == "disk_automorphism":
        return DiskAutomorphism(_c_from(spec["a"]))
    if kind == "measure_map":
        return MeasureMap(MeasureSpec.from_spec(spec["measure"]))
    if kind == "nevanlinna":
        return NevanlinnaMap(
            spec["beta"], spec["alpha"], MeasureSpec.from_spec(spec["measure"])
        )
    if kind == "compose":
        parts = [map_from_spec(p) for p in spec["parts"]]
        return compose(*reversed(parts))
    raise ParseError(f"unknown map spec kind: {kind!r}")
