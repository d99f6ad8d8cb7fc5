"""Deterministic builder for the bundled MSKG dataset.

The distributed MSKG snapshot is a 13,240-entity property graph whose
aggregate shape is public: per-label and per-relation totals, the answer
cohorts behind the reference question set, and a handful of
manufacturers cited by name. This module rebuilds a graph with exactly
that shape. Pinned cohorts (for example the 25 Michigan additive
manufacturers, or the per-service counts inside North Carolina) are laid
down first; seeded background manufacturers fill the remaining counts
and are barred from every pinned predicate, so cohort numbers are exact
by construction rather than by chance.

Same seed, same records, byte for byte.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import entities
from .dataset import PUBLISHED_MANIFEST, Manifest, export_graph
from .graph import (
    CATEGORY_ROOTS,
    Edge,
    Graph,
    Node,
    NodeLabel,
    RelationType,
    canonical_manufacturer_id,
)

DEFAULT_SEED = 1405

# Background manufacturers stay out of these states entirely; every
# resident is part of a pinned cohort.
_PINNED_STATES = ("Michigan", "California", "North Carolina")

# Literal "additive manufacturing" providers per state may not exceed
# this outside the pinned cohorts, keeping Michigan's 25 the maximum.
_ADDITIVE_CAP = 18

# Per-service manufacturer counts inside North Carolina, largest first.
_NC_SERVICES = (
    ("machining", 123),
    ("welding", 77),
    ("assembly", 75),
    ("inspection", 60),
    ("forming", 52),
    ("molding", 44),
    ("turning", 38),
    ("casting", 31),
    ("milling", 27),
    ("heat treatment", 22),
)

# injection molding + AS9100 per state, descending.
_MOLDING_AS9100 = (
    ("California", 14),
    ("Texas", 12),
    ("Connecticut", 10),
    ("Washington", 9),
    ("Ontario", 8),
)

# additive manufacturing + casting per state; California must lead.
_ADDITIVE_CASTING = (("California", 9), ("Texas", 4), ("Ohio", 3))

# (state, count) of manufacturers providing additive manufacturing.
_ADDITIVE_COHORTS = (("Michigan", 25), ("Oregon", 10), ("Ontario", 17))

_MICHIGAN_WELDERS_NO_AWS = 173
_MICHIGAN_WELDERS_AWS = 40

_NAME_PREFIXES = (
    "apex", "summit", "pioneer", "keystone", "liberty", "cascade",
    "granite", "vertex", "titan", "falcon", "redwood", "ridge", "harbor",
    "lakeside", "northstar", "ironclad", "bluegrass", "crown", "delta",
    "eagle", "frontier", "gateway", "horizon", "integrity", "javelin",
    "legacy", "meridian", "nova", "olympic", "paragon", "quantum",
    "regal", "sterling", "trident", "united", "valley", "westfield",
    "zenith", "allied", "beacon", "citadel", "dynamic", "elite",
    "fortress", "global", "heritage", "imperial", "junction", "kinetic",
    "lonestar", "midland", "national", "omega", "prairie", "quality",
    "river", "superior", "tristate", "urban", "vanguard", "windsor",
    "yorktown", "atlas", "bridger", "cobalt", "durango", "everest",
    "flint", "garnet", "hudson", "ironwood",
)

_NAME_STEMS = (
    "machine", "machining", "mfg", "fab", "fabrication", "tool",
    "tooling", "metal", "metals", "works", "industries", "manufacturing",
    "gear", "forge", "castings", "molding", "proto", "cnc", "laser",
    "weld", "welding", "stamping", "precision", "components", "parts",
    "products", "systems", "solutions", "tech", "engineering", "alloy",
    "plastics", "composites", "spring", "wire", "sheet", "tube",
    "milling", "grinding", "finishing",
)

_TLDS = (".com", ".com", ".com", ".com", ".com", ".net", ".us", ".ca")


def _service_rollup() -> dict[str, frozenset[str]]:
    """Category roots reachable from each service via its parent chains."""
    roots = set(CATEGORY_ROOTS)
    memo: dict[str, frozenset[str]] = {}

    def climb(name: str) -> frozenset[str]:
        if name in memo:
            return memo[name]
        if name in roots:
            memo[name] = frozenset([name])
            return memo[name]
        found: set[str] = set()
        for parent in entities.SERVICE_PARENTS[name]:
            found |= climb(parent)
        memo[name] = frozenset(found)
        return memo[name]

    return {name: climb(name) for name in entities.SERVICES}

_ROLLUP = _service_rollup()

# Pools for background portfolio drawing: one per category holding the
# services that roll up to that category alone, plus the multi-category
# and unrooted leftovers.
_PURE_POOLS: dict[str, tuple[str, ...]] = {
    root: tuple(s for s in entities.SERVICES if _ROLLUP[s] == frozenset([root]))
    for root in CATEGORY_ROOTS
}
_FUSION_POOL = tuple(s for s in entities.SERVICES if len(_ROLLUP[s]) > 1)
_SURFACE_POOL = tuple(s for s in entities.SERVICES if not _ROLLUP[s])

_POPULAR = {
    "milling", "turning", "cnc machining", "welding", "stamping",
    "injection molding", "3d printing", "sand casting", "mechanical assembly",
    "cmm inspection", "annealing",
}

_CATEGORY_WEIGHTS = (
    ("machining", 0.30),
    ("forming", 0.12),
    ("joining", 0.10),
    ("molding", 0.10),
    ("assembly", 0.08),
    ("inspection", 0.08),
    ("casting", 0.08),
    ("additive manufacturing", 0.06),
    ("heat treatment", 0.04),
    ("other", 0.04),
)

_STATE_BOOSTS = {
    "Texas": 5.0, "Ohio": 5.0, "Illinois": 4.5, "Pennsylvania": 4.0,
    "New York": 4.0, "Indiana": 3.5, "Wisconsin": 3.5, "Minnesota": 3.0,
    "Georgia": 3.0, "Tennessee": 2.5, "Florida": 2.5, "Massachusetts": 2.5,
    "New Jersey": 2.5, "Ontario": 3.0, "Quebec": 2.0,
    "British Columbia": 2.0, "Oregon": 2.0, "Washington": 2.5,
    "Connecticut": 2.0, "Missouri": 2.0, "Alabama": 1.8,
    "South Carolina": 1.8, "Virginia": 1.8, "Arizona": 1.8,
    "Colorado": 1.8, "Iowa": 1.5, "Kansas": 1.5, "Kentucky": 1.5,
    "Oklahoma": 1.5, "Utah": 1.5,
}


@dataclass
class _Maker:
    """One manufacturer under construction."""

    id: str
    services: dict[str, float] = field(default_factory=dict)
    certs: dict[str, float] = field(default_factory=dict)
    states: list[str] = field(default_factory=list)
    pinned: bool = False  # pinned cohort membership: repairs must not touch
    category: Optional[str] = None


class _Builder:
    def __init__(self, seed: int):
        self.seed = seed
        self.makers: list[_Maker] = []
        self.taken: set[str] = set()  # canonical manufacturer ids
        self.additive_by_state: dict[str, int] = {}
        self.manifest = PUBLISHED_MANIFEST

    def rng(self, stage: str) -> np.random.Generator:
        return np.random.default_rng((self.seed, zlib.crc32(stage.encode())))

    # -- manufacturer id minting ------------------------------------------

    def mint_ids(self, count: int, stage: str) -> list[str]:
        rng = self.rng(f"ids:{stage}")
        out: list[str] = []
        while len(out) < count:
            prefix = _NAME_PREFIXES[rng.integers(len(_NAME_PREFIXES))]
            stem = _NAME_STEMS[rng.integers(len(_NAME_STEMS))]
            tld = _TLDS[rng.integers(len(_TLDS))]
            base = f"{prefix}{stem}"
            if rng.random() < 0.25:
                base = f"{base}{rng.integers(2, 100)}"
            domain = f"{base}{tld}"
            if rng.random() < 0.15:
                domain = f"www.{domain}"
            key = canonical_manufacturer_id(domain)
            if key in self.taken:
                continue
            self.taken.add(key)
            out.append(domain)
        return out

    def add(self, maker: _Maker) -> _Maker:
        # minted ids are pre-reserved; hardcoded ids reserve here
        self.taken.add(canonical_manufacturer_id(maker.id))
        self.makers.append(maker)
        for state in maker.states:
            if "additive manufacturing" in maker.services:
                self.additive_by_state[state] = self.additive_by_state.get(state, 0) + 1
        return maker

    # -- weight drawing ----------------------------------------------------

    def _weight(self, rng, lo: float) -> float:
        if rng.random() < 0.7:
            return 0.8
        return round(float(rng.uniform(lo, 0.99)), 2)

    def service_weight(self, rng) -> float:
        return self._weight(rng, 0.40)

    def cert_weight(self, rng) -> float:
        return self._weight(rng, 0.25)

    def location_weight(self, rng) -> float:
        return self._weight(rng, 0.40)


def _pinned(builder: _Builder, id_: str, services: Iterable[str], certs: Iterable[str],
            states: Iterable[str], rng) -> _Maker:
    maker = _Maker(id=id_, pinned=True)
    for s in services:
        maker.services[s] = builder.service_weight(rng)
    for c in certs:
        maker.certs[c] = builder.cert_weight(rng)
    maker.states = list(states)
    return builder.add(maker)


def _named_manufacturers(builder: _Builder) -> None:
    rng = builder.rng("named")
    rows = [
        ("110metalworks.com", ["machining", "welding", "sheet metal fabrication"],
         ["ISO 9001"], ["Ohio"]),
        ("3d-cam.com",
         ["milling", "turning", "injection molding", "die casting",
          "3d printing", "stereolithography"],
         ["ISO 9001"], ["California"]),
        ("1stmanufacturing.com", ["machining", "cnc machining"],
         ["ISO 9001"], ["California", "South Dakota"]),
        ("acufab.com", ["sheet metal fabrication", "bending", "welding"],
         [], ["Georgia"]),
        ("3axis.us", ["cnc machining", "milling"], ["ISO 9001"], ["Arizona"]),
        ("janewaymachine.com", ["machining", "milling"], ["ITAR"], ["Missouri"]),
        ("qtmfg.com", ["cnc machining", "turning"], ["ITAR"], ["Kansas"]),
        ("www.klsteven.com", ["machining"], ["ITAR"], ["Massachusetts"]),
        ("www.quartziteprocessing.com", ["grinding", "machining"],
         ["ITAR", "ISO 9001"], ["Massachusetts"]),
        ("tooltechinc.com", ["machining", "edm"],
         ["ITAR", "ISO 9001"], ["Indiana"]),
        ("www.wecomfg.com", ["cnc machining", "milling", "turning"],
         ["ITAR", "ISO 9001"], ["Wisconsin"]),
        ("thieman.com", ["welding", "sheet metal fabrication"],
         ["AWS"], ["Ohio"]),
        ("www.southernmetalfab.com", ["welding", "bending"],
         ["AWS", "ISO 9001"], ["Alabama"]),
        ("carolinafab.com", ["welding", "stamping"], ["AWS"], ["South Carolina"]),
        ("www.mossprecision.com", ["machining", "milling"],
         ["ISO 9001"], ["California"]),
        ("www.iconn-ems.com", ["machining", "electronic assembly"],
         ["ISO 9001"], ["California"]),
        ("www.juellmachine.com", ["machining", "turning"],
         ["ISO 9001"], ["California"]),
        ("alliedplastics.com", ["injection molding", "blow molding"],
         [], ["Wisconsin"]),
        ("www.jonesfabmachine.com",
         ["machining", "welding", "sheet metal fabrication"], [], ["Tennessee"]),
        ("www.advancedmfgservice.com", ["machining", "welding"], [], ["Ohio"]),
        ("modelcraft.net", ["machining", "sheet metal fabrication"],
         [], ["New York"]),
    ]
    for id_, services, certs, states in rows:
        _pinned(builder, id_, services, certs, states, rng)
    # extraction sample weights are carried verbatim for this one
    example = _Maker(id="3dmouldmfgltd.com", pinned=True)
    example.services = {
        "additive manufacturing": 0.46, "forming": 0.80, "machining": 0.80,
    }
    example.states = ["British Columbia"]
    builder.add(example)


_ADDITIVE_EXTRAS = (
    "3d printing", "stereolithography", "selective laser sintering",
    "fused deposition modeling", "direct metal laser sintering",
    "binder jetting",
)
_JOINING_EXTRAS = ("tig welding", "mig welding", "brazing", "riveting",
                   "adhesive bonding")
_MOLDING_EXTRAS = ("insert molding", "overmolding", "blow molding",
                   "compression molding", "rotational molding", "molding")
_MACHINING_EXTRAS = ("milling", "turning", "drilling", "grinding",
                     "cnc machining", "swiss machining", "edm", "cnc milling",
                     "cnc turning", "wire edm")
_CASTING_EXTRAS = ("sand casting", "die casting", "investment casting",
                   "permanent mold casting", "centrifugal casting")


def _draw(rng, pool: tuple[str, ...], k: int, exclude: set[str] = frozenset()) -> list[str]:
    candidates = [s for s in pool if s not in exclude]
    k = min(k, len(candidates))
    picks = rng.choice(len(candidates), size=k, replace=False)
    return [candidates[i] for i in picks]


def _additive_cohorts(builder: _Builder) -> None:
    rng = builder.rng("additive")
    for state, count in _ADDITIVE_COHORTS:
        for id_ in builder.mint_ids(count, f"additive:{state}"):
            services = ["additive manufacturing"] + _draw(rng, _ADDITIVE_EXTRAS, 2)
            certs = []
            if rng.random() < 0.30:
                certs.append("ISO 9001")
            if rng.random() < 0.10:
                certs.append("ISO 13485")
            _pinned(builder, id_, services, certs, [state], rng)


def _michigan_welders(builder: _Builder) -> None:
    rng = builder.rng("welders")
    for id_ in builder.mint_ids(_MICHIGAN_WELDERS_NO_AWS, "welders:plain"):
        services = ["welding"] + _draw(rng, _JOINING_EXTRAS, int(rng.integers(1, 3)))
        certs = []
        if rng.random() < 0.30:
            certs.append("ISO 9001")
        if rng.random() < 0.10:
            certs.append("IATF 16949")
        _pinned(builder, id_, services, certs, ["Michigan"], rng)
    for id_ in builder.mint_ids(_MICHIGAN_WELDERS_AWS, "welders:aws"):
        services = ["welding"] + _draw(rng, _JOINING_EXTRAS, int(rng.integers(1, 3)))
        certs = ["AWS"]
        if rng.random() < 0.25:
            certs.append("ISO 9001")
        _pinned(builder, id_, services, certs, ["Michigan"], rng)


def _additive_casters(builder: _Builder) -> None:
    rng = builder.rng("addcast")
    for state, count in _ADDITIVE_CASTING:
        for id_ in builder.mint_ids(count, f"addcast:{state}"):
            extra = _draw(rng, _CASTING_EXTRAS + ("3d printing", "binder jetting"), 1)
            services = ["additive manufacturing", "casting"] + extra
            certs = ["ISO 9001"] if rng.random() < 0.30 else []
            _pinned(builder, id_, services, certs, [state], rng)


def _molders(builder: _Builder) -> None:
    rng = builder.rng("molders")
    for state, count in _MOLDING_AS9100:
        for id_ in builder.mint_ids(count, f"molders:{state}"):
            services = ["injection molding"] + _draw(rng, _MOLDING_EXTRAS, 2)
            certs = ["AS9100"]
            if rng.random() < 0.30:
                certs.append("ISO 9001")
            if rng.random() < 0.10:
                certs.append("NADCAP")
            _pinned(builder, id_, services, certs, [state], rng)


# California ITAR shops: service sets chosen so the per-service tallies
# come out machining 20, inspection 14, turning 11, milling 9, grinding 5.
def _california_itar(builder: _Builder) -> None:
    rng = builder.rng("caitar")
    sets: list[list[str]] = []
    sets.append(["machining", "turning", "inspection", "grinding"])
    sets.extend(["machining", "turning", "inspection"] for _ in range(4))
    sets.extend(["machining", "turning"] for _ in range(6))
    sets.extend(["machining", "milling", "inspection"] for _ in range(5))
    sets.extend(["machining", "milling"] for _ in range(4))
    sets.extend(["inspection", "grinding"] for _ in range(4))
    ids = builder.mint_ids(len(sets), "caitar")
    for i, (id_, services) in enumerate(zip(ids, sets)):
        if i in (2, 7, 13):  # a sprinkle of cmm work, below the top five
            services = services + ["cmm inspection"]
        _pinned(builder, id_, services, ["ITAR", "ISO 9001"], ["California"], rng)


def _california_machinists(builder: _Builder) -> None:
    rng = builder.rng("camach")
    for id_ in builder.mint_ids(25, "camach"):
        services = ["machining"] + _draw(rng, _MACHINING_EXTRAS, 2, {"machining"})
        _pinned(builder, id_, services, ["ISO 9001"], ["California"], rng)


def _itar_shops(builder: _Builder) -> None:
    rng = builder.rng("itar")
    ids = builder.mint_ids(57, "itar")
    for i, id_ in enumerate(ids):
        first = "machining" if rng.random() < 0.6 else "cnc machining"
        services = [first] + _draw(rng, _MACHINING_EXTRAS, 2, {first})
        certs = ["ITAR"]
        if i < 32:
            certs.append("ISO 9001")
        elif rng.random() < 0.20:
            certs.append("NADCAP")
        state = _safe_state(builder, rng)
        _pinned(builder, id_, services, certs, [state], rng)


def _aws_welders(builder: _Builder) -> None:
    rng = builder.rng("aws")
    for id_ in builder.mint_ids(17, "aws"):
        services = ["welding"] + _draw(rng, _JOINING_EXTRAS, int(rng.integers(1, 3)))
        certs = ["AWS"]
        if rng.random() < 0.20:
            certs.append("ISO 9001")
        state = _safe_state(builder, rng)
        _pinned(builder, id_, services, certs, [state], rng)


def _north_carolina(builder: _Builder) -> None:
    rng = builder.rng("nc")
    for service, count in _NC_SERVICES:
        for id_ in builder.mint_ids(count, f"nc:{service}"):
            certs = []
            roll = rng.random()
            if roll < 0.25:
                certs.append("ISO 9001")
            elif roll < 0.33:
                certs.append("AS9100")  # never paired with injection molding here
            elif roll < 0.38 and service == "welding":
                certs.append("AWS")
            _pinned(builder, id_, [service], certs, ["North Carolina"], rng)


_SAFE_STATES = tuple(s for s in entities.LOCATIONS if s not in _PINNED_STATES)
_SAFE_WEIGHTS = np.array([_STATE_BOOSTS.get(s, 1.0) for s in _SAFE_STATES])
_SAFE_WEIGHTS = _SAFE_WEIGHTS / _SAFE_WEIGHTS.sum()


def _safe_state(builder: _Builder, rng) -> str:
    return _SAFE_STATES[int(rng.choice(len(_SAFE_STATES), p=_SAFE_WEIGHTS))]


_SIZE_P = np.array([0.18, 0.22, 0.22, 0.15, 0.10, 0.06, 0.04, 0.03])


def _background(builder: _Builder, count: int) -> None:
    rng = builder.rng("background")
    cats = [c for c, _ in _CATEGORY_WEIGHTS]
    cat_p = np.array([w for _, w in _CATEGORY_WEIGHTS])
    cat_p = cat_p / cat_p.sum()
    ids = builder.mint_ids(count, "background")
    for id_ in ids:
        maker = _Maker(id=id_)
        maker.states = [_safe_state(builder, rng)]
        category = cats[int(rng.choice(len(cats), p=cat_p))]
        maker.category = category
        pool = _SURFACE_POOL if category == "other" else _PURE_POOLS[category]
        size = int(rng.choice(8, p=_SIZE_P)) + 1
        weights = np.array(
            [3.0 if s == category else (2.0 if s in _POPULAR else 1.0) for s in pool]
        )
        take = min(size, len(pool))
        picks = rng.choice(len(pool), size=take, replace=False, p=weights / weights.sum())
        chosen = [pool[i] for i in picks]
        if rng.random() < 0.15:
            extra_pool = _FUSION_POOL + _SURFACE_POOL
            extra = extra_pool[int(rng.integers(len(extra_pool)))]
            if extra not in chosen:
                chosen.append(extra)
        chosen = _apply_bans(builder, maker.states, chosen)
        for s in chosen:
            maker.services[s] = builder.service_weight(rng)
        for c in _draw_certs(rng, chosen):
            maker.certs[c] = builder.cert_weight(rng)
        builder.add(maker)


def _apply_bans(builder: _Builder, states: list[str], services: list[str]) -> list[str]:
    out = list(dict.fromkeys(services))
    if "additive manufacturing" in out and "casting" in out:
        out.remove("casting")
    if "additive manufacturing" in out:
        for state in states:
            cap = 0 if state in ("Oregon", "Ontario") else _ADDITIVE_CAP
            if builder.additive_by_state.get(state, 0) >= cap:
                out.remove("additive manufacturing")
                if "3d printing" not in out:
                    out.append("3d printing")
                break
    return out


_CERT_COUNT_P = np.array([0.75, 0.18, 0.05, 0.02])
_CERT_POPULARITY = (
    ("ISO 9001", 0.33), ("ISO 14001", 0.10), ("AS9100", 0.08), ("ITAR", 0.07),
    ("IATF 16949", 0.06), ("ISO 13485", 0.06), ("AWS", 0.05), ("NADCAP", 0.05),
    ("ASME", 0.05), ("UL", 0.04), ("FDA", 0.03), ("RoHS", 0.03),
    ("ISO 17025", 0.03), ("CMMI", 0.02), ("ISO 45001", 0.03),
)


def _draw_certs(rng, services: list[str]) -> list[str]:
    n = int(rng.choice(4, p=_CERT_COUNT_P))
    if n == 0:
        return []
    names = [c for c, _ in _CERT_POPULARITY]
    p = np.array([w for _, w in _CERT_POPULARITY])
    picks = rng.choice(len(names), size=min(n, len(names)), replace=False, p=p / p.sum())
    chosen = [names[i] for i in picks]
    if "injection molding" in services and "AS9100" in chosen:
        chosen.remove("AS9100")
    return chosen


# -- exact-count repair --------------------------------------------------------


def _provider_counts(makers: list[_Maker]) -> dict[str, int]:
    counts = {s: 0 for s in entities.SERVICES}
    for m in makers:
        for s in m.services:
            counts[s] += 1
    return counts


def _ensure_coverage(builder: _Builder) -> None:
    """Every catalog service gets at least one provider."""
    rng = builder.rng("coverage")
    counts = _provider_counts(builder.makers)
    background = [m for m in builder.makers if not m.pinned]
    for service in entities.SERVICES:
        if counts[service] > 0:
            continue
        for _ in range(200):
            maker = background[int(rng.integers(len(background)))]
            if _can_add(builder, maker, service):
                maker.services[service] = builder.service_weight(rng)
                _note_added(builder, maker, service)
                counts[service] += 1
                break
        else:
            raise RuntimeError(f"could not place a provider for {service!r}")


def _can_add(builder: _Builder, maker: _Maker, service: str) -> bool:
    if service in maker.services:
        return False
    if service == "casting" and "additive manufacturing" in maker.services:
        return False
    if service == "additive manufacturing":
        if "casting" in maker.services:
            return False
        for state in maker.states:
            cap = 0 if state in ("Oregon", "Ontario") else _ADDITIVE_CAP
            if builder.additive_by_state.get(state, 0) >= cap:
                return False
    if service == "injection molding" and "AS9100" in maker.certs:
        return False
    return True


def _note_added(builder: _Builder, maker: _Maker, service: str) -> None:
    if service == "additive manufacturing":
        for state in maker.states:
            builder.additive_by_state[state] = builder.additive_by_state.get(state, 0) + 1


def _repair_provides(builder: _Builder) -> None:
    rng = builder.rng("repair:provides")
    target = builder.manifest.relations[RelationType.PROVIDES]
    background = [m for m in builder.makers if not m.pinned]
    counts = _provider_counts(builder.makers)
    total = sum(counts.values())
    order = rng.permutation(len(background))
    guard = 0
    i = 0
    while total != target:
        guard += 1
        if guard > 500_000:
            raise RuntimeError("provides repair did not converge")
        maker = background[order[i % len(order)]]
        i += 1
        if total < target:
            pool = _PURE_POOLS.get(maker.category or "", ()) or _SURFACE_POOL
            candidates = [s for s in pool if _can_add(builder, maker, s)]
            if not candidates:
                candidates = [s for s in entities.SERVICES if _can_add(builder, maker, s)]
            if not candidates:
                continue
            service = candidates[int(rng.integers(len(candidates)))]
            maker.services[service] = builder.service_weight(rng)
            _note_added(builder, maker, service)
            counts[service] += 1
            total += 1
        else:
            if len(maker.services) < 2:
                continue
            removable = [s for s in maker.services if counts[s] > 1]
            if not removable:
                continue
            service = removable[int(rng.integers(len(removable)))]
            del maker.services[service]
            if service == "additive manufacturing":
                for state in maker.states:
                    builder.additive_by_state[state] -= 1
            counts[service] -= 1
            total -= 1


def _repair_certs(builder: _Builder) -> None:
    rng = builder.rng("repair:certs")
    target = builder.manifest.relations[RelationType.CERTIFIED_WITH]
    background = [m for m in builder.makers if not m.pinned]
    total = sum(len(m.certs) for m in builder.makers)
    order = rng.permutation(len(background))
    names = [c for c, _ in _CERT_POPULARITY]
    p = np.array([w for _, w in _CERT_POPULARITY])
    p = p / p.sum()
    guard = 0
    i = 0
    while total != target:
        guard += 1
        if guard > 500_000:
            raise RuntimeError("certs repair did not converge")
        maker = background[order[i % len(order)]]
        i += 1
        if total < target:
            cert = names[int(rng.choice(len(names), p=p))]
            if cert in maker.certs:
                continue
            if cert == "AS9100" and "injection molding" in maker.services:
                continue
            maker.certs[cert] = builder.cert_weight(rng)
            total += 1
        else:
            if not maker.certs:
                continue
            cert = next(iter(maker.certs))
            del maker.certs[cert]
            total -= 1


def _second_locations(builder: _Builder) -> None:
    rng = builder.rng("second-loc")
    target = builder.manifest.relations[RelationType.LOCATED_IN]
    current = sum(len(m.states) for m in builder.makers)
    needed = target - current
    if needed < 0:
        raise RuntimeError("located_in overshoot before second homes")
    background = [m for m in builder.makers if not m.pinned]
    order = rng.permutation(len(background))
    placed = 0
    for idx in order:
        if placed == needed:
            break
        maker = background[idx]
        if len(maker.states) != 1:
            continue
        choices = [s for s in _SAFE_STATES if s != maker.states[0]]
        if "additive manufacturing" in maker.services:
            choices = [
                s for s in choices
                if s not in ("Oregon", "Ontario")
                and builder.additive_by_state.get(s, 0) < _ADDITIVE_CAP
            ]
        if not choices:
            continue
        state = choices[int(rng.integers(len(choices)))]
        maker.states.append(state)
        if "additive manufacturing" in maker.services:
            builder.additive_by_state[state] = builder.additive_by_state.get(state, 0) + 1
        placed += 1
    if placed != needed:
        raise RuntimeError(f"placed {placed} of {needed} second locations")


# -- assembly ------------------------------------------------------------------


def build_graph(seed: int = DEFAULT_SEED) -> Graph:
    """Build the full dataset graph; counts match the published manifest."""
    builder = _Builder(seed)
    _named_manufacturers(builder)
    _additive_cohorts(builder)
    _michigan_welders(builder)
    _additive_casters(builder)
    _molders(builder)
    _california_itar(builder)
    _california_machinists(builder)
    _itar_shops(builder)
    _aws_welders(builder)
    _north_carolina(builder)

    remaining = builder.manifest.labels[NodeLabel.MANUFACTURER] - len(builder.makers)
    if remaining < 0:
        raise RuntimeError(f"pinned cohorts overflow the manufacturer budget by {-remaining}")
    _background(builder, remaining)
    _ensure_coverage(builder)
    _repair_provides(builder)
    _repair_certs(builder)
    _second_locations(builder)

    graph = Graph()
    for name in entities.SERVICES:
        graph.add_node(Node(id=name, label=NodeLabel.SERVICE, name=name,
                            wikidata_id=entities.service_wikidata_id(name)))
    for name in entities.CERTIFICATIONS:
        graph.add_node(Node(id=name.lower(), label=NodeLabel.CERTIFICATION, name=name))
    for name in entities.LOCATIONS:
        graph.add_node(Node(id=name.lower(), label=NodeLabel.LOCATION, name=name))
    for child, parent in entities.SUBCLASS_EDGES:
        graph.add_edge(Edge(child, parent, RelationType.SUBCLASS_OF, 1.0))

    loc_rng = builder.rng("locweights")
    for maker in builder.makers:
        graph.add_node(Node(id=maker.id, label=NodeLabel.MANUFACTURER, name=maker.id))
        for service, weight in maker.services.items():
            graph.add_edge(Edge(maker.id, service, RelationType.PROVIDES, weight))
        for cert, weight in maker.certs.items():
            graph.add_edge(Edge(maker.id, cert.lower(), RelationType.CERTIFIED_WITH, weight))
        for state in maker.states:
            graph.add_edge(Edge(maker.id, state.lower(), RelationType.LOCATED_IN,
                                builder.location_weight(loc_rng)))
    graph.freeze()

    actual = Manifest.of_graph(graph)
    if actual != builder.manifest:
        raise RuntimeError(
            f"built graph does not match the manifest: {actual} vs {builder.manifest}"
        )
    return graph


def write_dataset(path: str, seed: int = DEFAULT_SEED) -> str:
    """Write canonical records for the built graph; returns the file path."""
    data = export_graph(build_graph(seed), "canonical-records")
    with open(path, "wb") as fh:
        fh.write(data)
    return path
