"""Issue catalog and maker repair-complexity tables for Vehicle Claims."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence


@dataclass(frozen=True)
class IssueEntry:
    issue: str
    base_hours: tuple[float, ...]
    cost_ratios: tuple[float, ...]

    def __post_init__(self):
        if len(self.base_hours) != len(self.cost_ratios) or not self.base_hours:
            raise ValueError(f"{self.issue}: base_hours and cost_ratios must be equal-length and non-empty")
        if any(h <= 0 for h in self.base_hours):
            raise ValueError(f"{self.issue}: base hours must be positive")
        if any(not 0 < r < 1 for r in self.cost_ratios):
            raise ValueError(f"{self.issue}: cost ratios must lie in (0, 1)")

    @property
    def sub_count(self) -> int:
        return len(self.base_hours)


@dataclass(frozen=True)
class IssueCatalog:
    entries: tuple[IssueEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("issue catalog is empty")
        names = [e.issue for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate issue names in catalog")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def issues(self) -> list[str]:
        return [e.issue for e in self.entries]

    def entry(self, issue: str) -> IssueEntry:
        for e in self.entries:
            if e.issue == issue:
                return e
        raise KeyError(f"unknown issue {issue!r}")

    def _check(self, issue: str, issue_id: int) -> IssueEntry:
        e = self.entry(issue)
        if not 1 <= issue_id <= e.sub_count:
            raise KeyError(f"unknown issue/issue_id pair ({issue!r}, {issue_id})")
        return e

    def base_hours(self, issue: str, issue_id: int) -> float:
        return self._check(issue, issue_id).base_hours[issue_id - 1]

    def cost_ratio(self, issue: str, issue_id: int) -> float:
        return self._check(issue, issue_id).cost_ratios[issue_id - 1]

    @classmethod
    def from_records(cls, records: Sequence[Mapping]) -> "IssueCatalog":
        return cls(tuple(
            IssueEntry(r["issue"], tuple(float(h) for h in r["base_hours"]),
                       tuple(float(c) for c in r["cost_ratios"]))
            for r in records
        ))

    def to_records(self) -> list[dict]:
        return [{"issue": e.issue, "base_hours": list(e.base_hours), "cost_ratios": list(e.cost_ratios)}
                for e in self.entries]


# Warning Light ratios 7 and 8 are printed run together as "0.004.0.01" in the source table.
DEFAULT_CATALOG = IssueCatalog((
    IssueEntry("Brake Pads Worn", (2,), (0.0005,)),
    IssueEntry("Alternator Failing", (2,), (0.02,)),
    IssueEntry("Windscreen Crack", (1,), (0.0006,)),
    IssueEntry("Gear Box Issue", (2,), (0.01,)),
    IssueEntry("Flat Tyres", (1,), (0.0003,)),
    IssueEntry("Radiator Leaking", (2,), (0.02,)),
    IssueEntry("Excessive Emissions", (1,), (0.0009,)),
    IssueEntry("Steering Wheel Shaking", (1,), (0.001,)),
    IssueEntry("Tyre Alignment", (0.5,), (0.0001,)),
    IssueEntry("Starter Motor Issue", (3,), (0.01,)),
    IssueEntry("Sensor Malfunction", (3,), (0.05,)),
    IssueEntry("Electrical Issue", (2, 0.5, 1, 2, 3), (0.001, 0.002, 0.005, 0.003, 0.001)),
    IssueEntry("Warning Light", (1, 0.5, 2, 5, 3, 2, 1, 9),
               (0.001, 0.005, 0.003, 0.005, 0.004, 0.002, 0.004, 0.01)),
    IssueEntry("Engine Issue", (8, 16, 12, 10), (0.2, 0.15, 0.1, 0.05)),
    IssueEntry("Transmission Issue", (1, 2, 8), (0.003, 0.007, 0.009)),
))


_MAKERS_BY_COMPLEXITY = {
    1: ["Audi", "BMW", "Chevrolet", "Dacia", "Daewoo", "Daimler", "Fiat", "Ford",
        "GMC", "Honda", "Hyundai", "Jeep", "Kia", "Lexus", "Mazda", "Mercedes-Benz",
        "Mitsubishi", "Nissan", "Opel", "Peugeot", "Renault", "SKODA", "Santana",
        "Smart", "Suzuki", "Toyota", "Vauxhall", "Volkswagen"],
    2: ["Brooke", "Caterham", "Citroen", "DAX", "DS", "Abarth",
        "Ginetta", "Great Wall", "Grinnall", "Infiniti", "Isuzu", "Jensen",
        "Koenigsegg", "London Taxis International", "MEV", "MG", "MINI",
        "Morgan", "Noble", "Perodua", "Pilgrim", "Proton", "Radical", "Raw",
        "Reva", "SEAT", "Saab", "Sebring", "Ssangyong", "TVR", "Tiger", "Westfield", "Zenos"],
    3: ["Alfa Romeo", "Aston Martin", "Bentley", "Cadillac", "Chrysler", "Daihatsu",
        "Ferrari", "Jaguar", "KTM", "Land Rover", "Lincoln", "Lotus", "McLaren", "Porsche",
        "Rolls-Royce", "Rover", "Subaru", "Volvo"],
    4: ["Corvette", "Buggati", "Dodge", "Hummer", "Lamborghini", "Maserati", "Maybach",
        "Pagani", "Tesla"],
}


@dataclass(frozen=True)
class ComplexityTable:
    mapping: Mapping[str, int]
    default_complexity: int = 2
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for maker, c in self.mapping.items():
            if c not in (1, 2, 3, 4):
                raise ValueError(f"complexity for {maker!r} must be in 1..4, got {c}")
        if self.default_complexity not in (1, 2, 3, 4):
            raise ValueError("default_complexity must be in 1..4")
        object.__setattr__(self, "_lookup", {_norm(k): int(v) for k, v in self.mapping.items()})

    def complexity_of(self, maker) -> int:
        return self._lookup.get(_norm(maker), self.default_complexity)

    @property
    def makers(self) -> list[str]:
        return list(self.mapping)

    def with_overrides(self, overrides: Mapping[str, int], default_complexity: int | None = None) -> "ComplexityTable":
        merged = dict(self.mapping)
        merged.update({k: int(v) for k, v in overrides.items()})
        return ComplexityTable(merged, self.default_complexity if default_complexity is None else default_complexity)


def _norm(maker) -> str:
    return str(maker).strip().casefold()


DEFAULT_COMPLEXITY = ComplexityTable(
    {m: c for c, makers in _MAKERS_BY_COMPLEXITY.items() for m in makers},
    default_complexity=2,
)


def complexity_of(maker, table: ComplexityTable = DEFAULT_COMPLEXITY) -> int:
    """Repair complexity for ``maker``; unknown makers get the table default."""
    return table.complexity_of(maker)


def compute_repair_hours(issue: str, issue_id: int, complexity: int,
                         catalog: IssueCatalog = DEFAULT_CATALOG) -> float:
    if complexity not in (1, 2, 3, 4):
        raise ValueError(f"complexity must be in 1..4, got {complexity}")
    return catalog.base_hours(issue, issue_id) * complexity


LABOR_RATE = 20.0


def compute_repair_cost(repair_hours: float, price: float, issue: str, issue_id: int,
                        catalog: IssueCatalog = DEFAULT_CATALOG) -> float:
    if repair_hours < 0:
        raise ValueError("repair_hours must be non-negative")
    if price <= 0:
        raise ValueError("price must be positive")
    return repair_hours * LABOR_RATE + catalog.cost_ratio(issue, issue_id) * price
