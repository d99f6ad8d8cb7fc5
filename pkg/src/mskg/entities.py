"""Canonical entity vocabulary: the service hierarchy, certifications,
and locations used by the bundled dataset tooling.

77 services (9 category roots plus 68 specializations, 8 of them with
two parents, giving exactly 76 subclass_of edges), 15 certifications,
and 63 locations (50 US states, 10 Canadian provinces, 3 territories).
"""

from __future__ import annotations

from .graph import CATEGORY_ROOTS

# service name -> parent service names (empty tuple = top-level)
SERVICE_PARENTS: dict[str, tuple[str, ...]] = {
    # category roots
    "machining": (),
    "assembly": (),
    "joining": (),
    "inspection": (),
    "forming": (),
    "molding": (),
    "casting": (),
    "additive manufacturing": (),
    "heat treatment": (),
    # machining
    "milling": ("machining",),
    "turning": ("machining",),
    "drilling": ("machining",),
    "grinding": ("machining",),
    "cnc machining": ("machining",),
    "swiss machining": ("machining",),
    "edm": ("machining",),
    "cnc milling": ("milling", "cnc machining"),
    "5 axis milling": ("milling",),
    "cnc turning": ("turning", "cnc machining"),
    "swiss turning": ("turning", "swiss machining"),
    "wire edm": ("edm",),
    "sinker edm": ("edm",),
    # assembly
    "mechanical assembly": ("assembly",),
    "electronic assembly": ("assembly",),
    "cable assembly": ("assembly",),
    "pcb assembly": ("electronic assembly",),
    "kitting": ("assembly",),
    # joining
    "welding": ("joining",),
    "brazing": ("joining",),
    "soldering": ("joining", "electronic assembly"),
    "riveting": ("joining",),
    "adhesive bonding": ("joining",),
    "spot welding": ("welding", "assembly"),
    "tig welding": ("welding",),
    "mig welding": ("welding",),
    # inspection
    "cmm inspection": ("inspection",),
    "first article inspection": ("inspection",),
    "nondestructive testing": ("inspection",),
    "x ray inspection": ("nondestructive testing",),
    "ultrasonic testing": ("nondestructive testing",),
    "dimensional inspection": ("inspection",),
    # forming
    "stamping": ("forming",),
    "metal stamping": ("stamping",),
    "deep drawing": ("forming",),
    "bending": ("forming",),
    "roll forming": ("forming",),
    "hydroforming": ("forming",),
    "sheet metal fabrication": ("forming", "joining"),
    "tube bending": ("bending",),
    # molding
    "injection molding": ("molding",),
    "blow molding": ("molding",),
    "compression molding": ("molding",),
    "rotational molding": ("molding",),
    "insert molding": ("injection molding",),
    "overmolding": ("injection molding",),
    "thermoforming": ("molding", "forming"),
    # casting
    "sand casting": ("casting",),
    "die casting": ("casting",),
    "investment casting": ("casting",),
    "permanent mold casting": ("casting",),
    "centrifugal casting": ("casting",),
    "metal injection molding": ("molding", "casting"),
    # additive manufacturing
    "3d printing": ("additive manufacturing",),
    "stereolithography": ("3d printing",),
    "selective laser sintering": ("3d printing",),
    "fused deposition modeling": ("3d printing",),
    "direct metal laser sintering": ("3d printing",),
    "binder jetting": ("additive manufacturing",),
    "rapid prototyping": ("additive manufacturing", "machining"),
    # heat treatment
    "annealing": ("heat treatment",),
    "tempering": ("heat treatment",),
    "quenching": ("heat treatment",),
    "case hardening": ("heat treatment",),
    "stress relieving": ("heat treatment",),
    # surface work, deliberately outside the nine categories
    "surface finishing": (),
    "anodizing": ("surface finishing",),
    "plating": ("surface finishing",),
}

SERVICES: tuple[str, ...] = tuple(SERVICE_PARENTS)

SUBCLASS_EDGES: tuple[tuple[str, str], ...] = tuple(
    (child, parent)
    for child, parents in SERVICE_PARENTS.items()
    for parent in parents
)

CERTIFICATIONS: tuple[str, ...] = (
    "ISO 9001",
    "AS9100",
    "ISO 13485",
    "ISO 14001",
    "IATF 16949",
    "ITAR",
    "CMMI",
    "NADCAP",
    "AWS",
    "ASME",
    "ISO 17025",
    "UL",
    "FDA",
    "RoHS",
    "ISO 45001",
)

US_STATES: tuple[str, ...] = (
    "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado",
    "Connecticut", "Delaware", "Florida", "Georgia", "Hawaii", "Idaho",
    "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky", "Louisiana",
    "Maine", "Maryland", "Massachusetts", "Michigan", "Minnesota",
    "Mississippi", "Missouri", "Montana", "Nebraska", "Nevada",
    "New Hampshire", "New Jersey", "New Mexico", "New York",
    "North Carolina", "North Dakota", "Ohio", "Oklahoma", "Oregon",
    "Pennsylvania", "Rhode Island", "South Carolina", "South Dakota",
    "Tennessee", "Texas", "Utah", "Vermont", "Virginia", "Washington",
    "West Virginia", "Wisconsin", "Wyoming",
)

CANADIAN_PROVINCES: tuple[str, ...] = (
    "Alberta", "British Columbia", "Manitoba", "New Brunswick",
    "Newfoundland and Labrador", "Nova Scotia", "Ontario",
    "Prince Edward Island", "Quebec", "Saskatchewan",
)

CANADIAN_TERRITORIES: tuple[str, ...] = (
    "Yukon", "Northwest Territories", "Nunavut",
)

LOCATIONS: tuple[str, ...] = US_STATES + CANADIAN_PROVINCES + CANADIAN_TERRITORIES


def service_wikidata_id(name: str) -> str:
    """Stable synthetic catalog id for a service."""
    return f"Q{9000000 + SERVICES.index(name)}"


assert len(SERVICES) == 77, len(SERVICES)
assert len(SUBCLASS_EDGES) == 76, len(SUBCLASS_EDGES)
assert len(CERTIFICATIONS) == 15
assert len(LOCATIONS) == 63
assert all(root in SERVICE_PARENTS for root in CATEGORY_ROOTS)
