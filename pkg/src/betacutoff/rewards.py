"""Static reward functions R(t), where t is the time since the parent block.

Every supported reward is a sum of a constant block reward, a linear-in-time
fee stream and independent Bernoulli bonuses, so the law of R(t) at a fixed t
is a finite set of atoms. All queries below are exact sums over those atoms.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

MERGE_TOL = 1e-12

# breakdown component order used throughout the package
COMPONENTS = ("block", "linear", "bernoulli")


@dataclass(frozen=True)
class Constant:
    """Fixed block reward paid to every block."""

    c: float = 1.0

    def __post_init__(self):
        _check_nonneg("c", self.c)


@dataclass(frozen=True)
class Linear:
    """Fees accruing at ``rate`` per unit time since the parent block."""

    rate: float = 1.0

    def __post_init__(self):
        _check_nonneg("rate", self.rate)


@dataclass(frozen=True)
class Bernoulli:
    """Bonus of size ``e`` paid with probability ``p``, independently per block."""

    p: float
    e: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0 or math.isnan(self.p):
            raise ValueError(f"Bernoulli p must lie in [0, 1], got {self.p}")
        _check_nonneg("e", self.e)


@dataclass(frozen=True, init=False)
class Composite:
    """Sum of reward sources.

    Nested composites are flattened, constants are merged into one term and
    linear rates into another. Bernoulli terms stay separate since each is its
    own trial.
    """

    parts: tuple

    def __init__(self, parts: Iterable["RewardSpec"]):
        flat = []
        for part in parts:
            if isinstance(part, Composite):
                flat.extend(part.parts)
            elif isinstance(part, (Constant, Linear, Bernoulli)):
                flat.append(part)
            else:
                raise TypeError(f"unsupported reward source {part!r}")
        if not flat:
            raise ValueError("Composite needs at least one reward source")
        consts = [p.c for p in flat if isinstance(p, Constant)]
        rates = [p.rate for p in flat if isinstance(p, Linear)]
        merged = []
        if consts:
            merged.append(Constant(math.fsum(consts)))
        if rates:
            merged.append(Linear(math.fsum(rates)))
        merged.extend(p for p in flat if isinstance(p, Bernoulli))
        object.__setattr__(self, "parts", tuple(merged))


RewardSpec = Union[Constant, Linear, Bernoulli, Composite]


def _check_nonneg(name, value):
    if not (value >= 0.0) or math.isinf(value):
        raise ValueError(f"{name} must be finite and >= 0, got {value}")


def combined(c: float = 1.0, rate: float = 1.0, p: float = 0.25, e: float = 4.0) -> Composite:
    """Block reward + linear fees + Bernoulli bonus (defaults: C=1, a=1, p=0.25, E=4)."""
    return Composite([Constant(c), Linear(rate), Bernoulli(p, e)])


def _parts(spec: RewardSpec) -> tuple:
    if isinstance(spec, Composite):
        return spec.parts
    if isinstance(spec, (Constant, Linear, Bernoulli)):
        return (spec,)
    raise TypeError(f"not a reward spec: {spec!r}")


@dataclass(frozen=True)
class Terms:
    """Canonical decomposition ``R(t) = constant + rate * t + sum of bonuses``."""

    constant: float
    rate: float
    bernoullis: tuple  # of Bernoulli

    @property
    def mean_bonus(self) -> float:
        return math.fsum(b.p * b.e for b in self.bernoullis)

    @property
    def max_bonus(self) -> float:
        return math.fsum(b.e for b in self.bernoullis)


def terms(spec: RewardSpec) -> Terms:
    parts = _parts(spec)
    return Terms(
        constant=math.fsum(p.c for p in parts if isinstance(p, Constant)),
        rate=math.fsum(p.rate for p in parts if isinstance(p, Linear)),
        bernoullis=tuple(p for p in parts if isinstance(p, Bernoulli)),
    )


def bonus_atoms(spec: RewardSpec) -> tuple[np.ndarray, np.ndarray]:
    """Support and probabilities of the summed Bernoulli bonuses.

    These do not depend on t; the law of R(t) is these atoms shifted by
    ``constant + rate * t``.
    """
    bern = terms(spec).bernoullis
    table: dict[float, float] = {}
    for outcome in itertools.product((0, 1), repeat=len(bern)):
        prob = 1.0
        value = 0.0
        for hit, b in zip(outcome, bern):
            prob *= b.p if hit else 1.0 - b.p
            value += b.e if hit else 0.0
        if prob == 0.0:
            continue
        key = next((v for v in table if abs(v - value) <= MERGE_TOL), value)
        table[key] = table.get(key, 0.0) + prob
    values = np.array(sorted(table))
    probs = np.array([table[v] for v in values])
    return values, probs


@dataclass(frozen=True)
class AtomSet:
    """Finite conditional law of R(t): ``values[k]`` occurs with ``probs[k]``."""

    values: np.ndarray
    probs: np.ndarray

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self):
        return len(self.values)


def atoms_at(spec: RewardSpec, t: float) -> AtomSet:
    _check_time(t)
    tm = terms(spec)
    values, probs = bonus_atoms(spec)
    return AtomSet(values + tm.constant + tm.rate * t, probs)


def _check_time(t):
    if not t >= 0:
        raise ValueError(f"time since parent must be >= 0, got {t}")


def cdf_at(spec: RewardSpec, t: float, x: float) -> float:
    """Pr[R(t) <= x]."""
    atoms = atoms_at(spec, t)
    return float(atoms.probs[atoms.values <= x].sum())


def cdf_below(spec: RewardSpec, t: float, x: float) -> float:
    """Pr[R(t) < x], the left limit of :func:`cdf_at`."""
    atoms = atoms_at(spec, t)
    return float(atoms.probs[atoms.values < x].sum())


def mean_at(spec: RewardSpec, t: float) -> float:
    atoms = atoms_at(spec, t)
    return float(np.dot(atoms.values, atoms.probs))


def censored_mean_below(spec: RewardSpec, t: float, beta: float, inclusive: bool = True) -> float:
    """E[R(t); R(t) <= beta] (or ``< beta`` when ``inclusive`` is False)."""
    atoms = atoms_at(spec, t)
    mask = atoms.values <= beta if inclusive else atoms.values < beta
    return float(np.dot(atoms.values[mask], atoms.probs[mask]))


def censored_mean_above(spec: RewardSpec, t: float, beta: float, inclusive: bool = False) -> float:
    """E[R(t); R(t) > beta]; complements :func:`censored_mean_below`."""
    atoms = atoms_at(spec, t)
    mask = atoms.values >= beta if inclusive else atoms.values > beta
    return float(np.dot(atoms.values[mask], atoms.probs[mask]))


def sample_at(spec: RewardSpec, t: float, rng: np.random.Generator, size: int | None = None):
    """Draw R(t). Each Bernoulli term consumes one uniform from ``rng`` per draw.

    With ``size`` an array of draws is returned, identical to ``size`` scalar calls.
    """
    _check_time(t)
    tm = terms(spec)
    base = tm.constant + tm.rate * t
    k = len(tm.bernoullis)
    if size is None:
        if not k:
            return base
        u = rng.random(k)
        return base + sum(b.e for b, ui in zip(tm.bernoullis, u) if ui < b.p)
    if not k:
        return np.full(size, base)
    u = rng.random((size, k))
    p = np.array([b.p for b in tm.bernoullis])
    e = np.array([b.e for b in tm.bernoullis])
    return base + (u < p) @ e


# -- vectorised helpers used by the quadrature engine -------------------------


def component_means(spec: RewardSpec, t: np.ndarray) -> np.ndarray:
    """E[R(t)] split into (block, linear, bernoulli), shape ``(3,) + t.shape``."""
    tm = terms(spec)
    t = np.asarray(t, dtype=float)
    return np.stack(
        [
            np.full_like(t, tm.constant),
            tm.rate * t,
            np.full_like(t, tm.mean_bonus),
        ]
    )


def censored_components(spec: RewardSpec, t: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mass and component means of R(t) split at the hiding cutoff.

    Returns ``(below_prob, below, above)`` where ``below_prob = Pr[R(t) < beta]``
    and ``below``/``above`` are ``(3,) + t.shape`` arrays holding
    E[component; R(t) < beta] and E[component; R(t) >= beta].
    """
    tm = terms(spec)
    t = np.asarray(t, dtype=float)
    bonus, probs = bonus_atoms(spec)
    base = tm.constant + tm.rate * t
    below_prob = np.zeros_like(t)
    below = np.zeros((3,) + t.shape)
    above = np.zeros((3,) + t.shape)
    for s, q in zip(bonus, probs):
        hidden = (base + s) < beta
        w = np.where(hidden, q, 0.0)
        below_prob += w
        below += w * np.stack([np.full_like(t, tm.constant), tm.rate * t, np.full_like(t, s)])
        w = q - w
        above += w * np.stack([np.full_like(t, tm.constant), tm.rate * t, np.full_like(t, s)])
    return below_prob, below, above


def crossing_times(spec: RewardSpec, beta: float) -> list[float]:
    """Times t > 0 at which some atom of R(t) crosses ``beta``."""
    tm = terms(spec)
    if tm.rate == 0.0 or math.isinf(beta):
        return []
    bonus, _ = bonus_atoms(spec)
    out = sorted({(beta - tm.constant - s) / tm.rate for s in bonus})
    return [x for x in out if x > 0.0]


# -- JSON ----------------------------------------------------------------------


def to_dict(spec: RewardSpec) -> dict:
    """``{"constant": C, "linear": a, "bernoulli": {"p": p, "e": E}}``.

    Absent components are omitted; several Bernoulli terms become a list.
    """
    tm = terms(spec)
    out: dict = {}
    parts = _parts(spec)
    if any(isinstance(p, Constant) for p in parts):
        out["constant"] = tm.constant
    if any(isinstance(p, Linear) for p in parts):
        out["linear"] = tm.rate
    bern = [{"p": b.p, "e": b.e} for b in tm.bernoullis]
    if len(bern) == 1:
        out["bernoulli"] = bern[0]
    elif bern:
        out["bernoulli"] = bern
    return out


def from_dict(data: dict) -> RewardSpec:
    unknown = set(data) - {"constant", "linear", "bernoulli"}
    if unknown:
        raise ValueError(f"unknown reward keys: {sorted(unknown)}")
    parts: list = []
    if data.get("constant") is not None:
        parts.append(Constant(float(data["constant"])))
    if data.get("linear") is not None:
        parts.append(Linear(float(data["linear"])))
    bern = data.get("bernoulli")
    if isinstance(bern, dict):
        bern = [bern]
    for b in bern or []:
        parts.append(Bernoulli(float(b["p"]), float(b["e"])))
    if not parts:
        raise ValueError("reward description has no components")
    return parts[0] if len(parts) == 1 else Composite(parts)


def dumps(spec: RewardSpec) -> str:
    return json.dumps(to_dict(spec), sort_keys=True)


def loads(text: str) -> RewardSpec:
    return from_dict(json.loads(text))


def describe(spec: RewardSpec) -> str:
    tm = terms(spec)
    bits = []
    if tm.constant:
        bits.append(f"C={tm.constant:g}")
    if tm.rate:
        bits.append(f"a={tm.rate:g}")
    bits += [f"Bern(p={b.p:g}, E={b.e:g})" for b in tm.bernoullis]
    return " + ".join(bits) or "0"


def from_fields(c: float = 0.0, rate: float = 0.0, p: float = 0.0, e: float = 0.0) -> RewardSpec:
    """Build a spec from flat fields, dropping zero components."""
    parts: list = []
    if c:
        parts.append(Constant(c))
    if rate:
        parts.append(Linear(rate))
    if p and e:
        parts.append(Bernoulli(p, e))
    if not parts:
        return Constant(0.0)
    return parts[0] if len(parts) == 1 else Composite(parts)

