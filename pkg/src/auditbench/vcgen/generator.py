"""Vehicle Claims dataset synthesis.

The pipeline is: base vehicles -> issue assignment -> repair complexity ->
clean repair hours/cost -> numeric anomaly injection -> sentinel substitution
-> labels (-> optional ratio adjustment).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from os import PathLike
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from ..rng import CounterRNG
from .catalog import (
    DEFAULT_CATALOG, DEFAULT_COMPLEXITY, LABOR_RATE, ComplexityTable, IssueCatalog,
)

log = logging.getLogger(__name__)

BASE_COLUMNS = ["maker", "model", "color", "reg_year", "body_type", "door_num",
                "engine_size", "gearbox", "fuel_type", "price"]
CLAIM_COLUMNS = ["issue", "issue_id", "repair_complexity", "repair_hours", "repair_cost"]
OUTPUT_COLUMNS = BASE_COLUMNS + CLAIM_COLUMNS + ["label"]
DATE_COLUMNS = ["breakdown_date", "repair_date"]
MANDATORY_COLUMNS = ("maker", "price")
INT_COLUMNS = ("reg_year", "door_num")

SENTINELS: dict[str, object] = {
    "color": "Gelb",
    "reg_year": 3010,
    "body_type": "Wood",
    "door_num": 0,
    "engine_size": "999.0L",
    "gearbox": "Hybrid",
    "fuel_type": "Hydrogen",
}

_ALIASES = {
    "make": "maker", "manufacturer": "maker", "genmodel": "model", "colour": "color",
    "year": "reg_year", "bodytype": "body_type", "doors": "door_num", "door": "door_num",
    "engin_size": "engine_size", "engine": "engine_size", "fuel": "fuel_type",
    "transmission": "gearbox", "entry_price": "price",
}


class BaseSourceError(ValueError):
    """Raised when a base vehicle table cannot be used."""


@dataclass(frozen=True)
class BaseVehicle:
    maker: str
    model: str
    color: str
    reg_year: int
    body_type: str
    door_num: int
    engine_size: str
    gearbox: str
    fuel_type: str
    price: float


@dataclass(frozen=True)
class ClaimRecord:
    base: BaseVehicle
    issue: str
    issue_id: int
    repair_complexity: int
    repair_hours: float
    repair_cost: float
    label: int
    breakdown_date: date | None = None
    repair_date: date | None = None


def iter_records(frame: pd.DataFrame):
    """Yield :class:`ClaimRecord` objects for the rows of a generated table."""
    has_dates = all(c in frame for c in DATE_COLUMNS)
    for row in frame.itertuples(index=False):
        d = row._asdict()
        base = BaseVehicle(**{c: d[c] for c in BASE_COLUMNS})
        yield ClaimRecord(
            base, d["issue"], int(d["issue_id"]), int(d["repair_complexity"]),
            float(d["repair_hours"]), float(d["repair_cost"]), int(d["label"]),
            *((d["breakdown_date"], d["repair_date"]) if has_dates else ()),
        )


@dataclass
class SynthSpec:
    """Parameters for synthesising a base vehicle population."""
    n_rows: int
    seed: int = 0
    # relative weight of a maker, by repair complexity
    complexity_weights: Mapping[int, float] = field(default_factory=lambda: {1: 10.0, 2: 2.0, 3: 2.0, 4: 1.0})
    # median model price by repair complexity
    price_medians: Mapping[int, float] = field(
        default_factory=lambda: {1: 18000.0, 2: 24000.0, 3: 55000.0, 4: 110000.0})
    makers: Sequence[str] | None = None


@dataclass
class AnomalyConfig:
    cost_period: int = 10
    hours_period: int = 20
    cost_sigma_range: tuple[float, float] = (3.0, 6.0)
    hours_sigma_range: tuple[float, float] = (3.0, 4.0)
    # fraction of all rows that receive one sentinel categorical value; the default
    # adds 0.1116 to the 0.10 numeric anomalies for an overall ratio near 0.21
    missing_rate: float = 0.1116
    target_ratio: float | None = None
    seed: int = 0
    with_dates: bool = False

    def __post_init__(self):
        self.cost_sigma_range = tuple(float(v) for v in self.cost_sigma_range)
        self.hours_sigma_range = tuple(float(v) for v in self.hours_sigma_range)
        for name in ("cost_sigma_range", "hours_sigma_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must satisfy 0 <= low <= high, got {(lo, hi)}")
        if self.cost_period < 1 or self.hours_period < 1:
            raise ValueError("periods must be >= 1")
        if not 0 <= self.missing_rate < 1:
            raise ValueError("missing_rate must lie in [0, 1)")
        if self.target_ratio is not None and not 0 < self.target_ratio < 1:
            raise ValueError("target_ratio must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnomalyConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


# ---------------------------------------------------------------- base tables

_COLORS = ["Black", "Blue", "Bronze", "Brown", "Burgundy", "Gold", "Green", "Grey", "Indigo",
           "Magenta", "Maroon", "Multicolour", "Navy", "Orange", "Pink", "Purple", "Red",
           "Silver", "Turquoise", "White", "Yellow"]
_BODY_TYPES = ["Convertible", "Coupe", "Estate", "Hatchback", "Limousine", "MPV", "Minibus",
               "Panel Van", "Pickup", "SUV", "Saloon"]
_DOORS = [2, 3, 4, 5]
_GEARBOXES = ["Automatic", "Manual", "Semi-Automatic"]
_FUELS = ["Bi Fuel", "Diesel", "Electric", "Petrol", "Petrol Hybrid", "Petrol Plug-in Hybrid"]
_ENGINES = [f"{0.8 + 0.2 * i:.1f}L" for i in range(27)]
_YEARS = list(range(2001, 2021))
_MODEL_STEMS = ["Alpha", "City", "Cross", "Sport", "Tour", "GT", "Eco", "Grand", "Compact",
                "Coupe", "Estate", "Active", "Prime", "Vision", "Trail", "Urban", "Classic",
                "Edge", "Nova", "Zeta"]
_MODEL_CATALOG_SEED = 20220811


def _model_catalog(makers: Sequence[str], complexity: ComplexityTable, medians: Mapping[int, float]):
    """Fixed model list and list price per maker, independent of the user seed."""
    rng = CounterRNG(_MODEL_CATALOG_SEED)
    idx = np.arange(len(makers))
    counts = 6 + rng.integers("model_count", idx, 20)
    catalog = []
    for i, maker in enumerate(makers):
        k = int(counts[i])
        names = [f"{maker} {_MODEL_STEMS[j % len(_MODEL_STEMS)]}"
                 + ("" if j < len(_MODEL_STEMS) else f" {j // len(_MODEL_STEMS) + 1}") for j in range(k)]
        med = medians[complexity.complexity_of(maker)]
        spread = rng.uniform(f"model_price:{maker}", np.arange(k), -0.6, 0.6)
        catalog.append((names, med * np.exp(spread)))
    return catalog


def synthesize_base(spec: SynthSpec, complexity: ComplexityTable = DEFAULT_COMPLEXITY) -> pd.DataFrame:
    if spec.n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    makers = list(spec.makers) if spec.makers is not None else complexity.makers
    weights = [spec.complexity_weights[complexity.complexity_of(m)] for m in makers]
    models = _model_catalog(makers, complexity, spec.price_medians)
    rng = CounterRNG(spec.seed)
    rows = np.arange(spec.n_rows)

    maker_idx = rng.choice("maker", rows, weights)
    n_models = np.array([len(models[i][0]) for i in range(len(makers))])
    model_idx = np.minimum((rng.uniform("model", rows) * n_models[maker_idx]).astype(np.int64),
                           n_models[maker_idx] - 1)
    list_price = np.array([models[m][1][j] for m, j in zip(maker_idx, model_idx)])
    price = np.round(list_price * rng.uniform("price", rows, 0.85, 1.15))

    def pick(name, values):
        return np.asarray(values, dtype=object)[rng.integers(name, rows, len(values))]

    frame = pd.DataFrame({
        "maker": np.asarray(makers, dtype=object)[maker_idx],
        "model": [models[m][0][j] for m, j in zip(maker_idx, model_idx)],
        "color": pick("color", _COLORS),
        "reg_year": pd.array(np.asarray(_YEARS)[rng.integers("reg_year", rows, len(_YEARS))], dtype="Int64"),
        "body_type": pick("body_type", _BODY_TYPES),
        "door_num": pd.array(np.asarray(_DOORS)[rng.integers("door_num", rows, len(_DOORS))], dtype="Int64"),
        "engine_size": pick("engine_size", _ENGINES),
        "gearbox": pick("gearbox", _GEARBOXES),
        "fuel_type": pick("fuel_type", _FUELS),
        "price": price.astype(np.float64),
    })
    return frame


def _normalize_header(name: str) -> str:
    key = str(name).strip().lower().replace(" ", "_").replace("-", "_")
    return _ALIASES.get(key, key)


def read_base_csv(path: str | PathLike) -> pd.DataFrame:
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise BaseSourceError(f"cannot read base table {path}: {exc}") from exc
    raw.columns = [_normalize_header(c) for c in raw.columns]
    missing = [c for c in MANDATORY_COLUMNS if c not in raw.columns]
    if missing:
        raise BaseSourceError(f"missing mandatory column(s): {', '.join(missing)}")
    frame = pd.DataFrame(index=raw.index)
    for col in BASE_COLUMNS:
        values = raw[col].str.strip() if col in raw else pd.Series(pd.NA, index=raw.index, dtype=object)
        if col == "price":
            frame[col] = pd.to_numeric(values, errors="coerce").astype(np.float64)
        elif col in INT_COLUMNS:
            num = pd.to_numeric(values, errors="coerce")
            num = num.where(num == np.round(num))
            frame[col] = num.astype("Int64")
        else:
            frame[col] = values.replace("", pd.NA).astype(object)
    invalid = (~(frame["price"] > 0)).sum()
    if len(frame) and invalid > 0.5 * len(frame):
        raise BaseSourceError(
            f"{invalid} of {len(frame)} rows have a non-positive or unparsable price; check the column mapping")
    return frame.reset_index(drop=True)


def acquire_base(source, complexity: ComplexityTable = DEFAULT_COMPLEXITY) -> pd.DataFrame:
    """Load a base vehicle table from a CSV path or synthesise one from a :class:`SynthSpec`."""
    if isinstance(source, SynthSpec):
        return synthesize_base(source, complexity)
    return read_base_csv(source)


# ------------------------------------------------------------ claim columns

def _catalog_arrays(catalog: IssueCatalog):
    width = max(e.sub_count for e in catalog.entries)
    hours = np.full((len(catalog), width), np.nan)
    ratios = np.full((len(catalog), width), np.nan)
    for i, e in enumerate(catalog.entries):
        hours[i, :e.sub_count] = e.base_hours
        ratios[i, :e.sub_count] = e.cost_ratios
    subs = np.array([e.sub_count for e in catalog.entries])
    return hours, ratios, subs


def assign_issues(rng: CounterRNG, catalog: IssueCatalog, rows) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised issue draws: uniform over issues, then uniform over sub-ids."""
    rows = np.asarray(rows)
    subs = np.array([e.sub_count for e in catalog.entries])
    issue_idx = rng.integers("issue", rows, len(catalog))
    ids = 1 + np.minimum((rng.uniform("issue_id", rows) * subs[issue_idx]).astype(np.int64),
                         subs[issue_idx] - 1)
    return issue_idx, ids


def assign_issue(rng: CounterRNG, catalog: IssueCatalog = DEFAULT_CATALOG, row: int = 0) -> tuple[str, int]:
    if len(catalog) == 0:
        raise ValueError("catalog is empty")
    idx, ids = assign_issues(rng, catalog, [row])
    return catalog.entries[int(idx[0])].issue, int(ids[0])


def _clean_stats(frame: pd.DataFrame) -> dict[str, dict[str, float]]:
    stats = {}
    for col in ("repair_cost", "repair_hours"):
        v = frame[col].to_numpy(dtype=np.float64)
        stats[col] = {"mean": float(v.mean()), "std": float(v.std())}
    return stats


def inject_anomalies(records: pd.DataFrame, cfg: AnomalyConfig) -> pd.DataFrame:
    """Overwrite every ``cost_period``-th cost and ``hours_period``-th hours value
    with a value a uniform number of standard deviations above the clean mean."""
    n = len(records)
    if n < cfg.cost_period:
        raise ValueError(f"need at least cost_period={cfg.cost_period} rows, got {n}")
    stats = _clean_stats(records)
    for col in ("repair_cost", "repair_hours"):
        if stats[col]["std"] == 0:
            raise ValueError(f"{col} is constant; the base population looks misconfigured")
    out = records.copy()
    if "label" not in out:
        out["label"] = 0
    rng = CounterRNG(cfg.seed)
    plan = (("repair_cost", cfg.cost_period, cfg.cost_sigma_range),
            ("repair_hours", cfg.hours_period, cfg.hours_sigma_range))
    for col, period, (lo, hi) in plan:
        pos = np.arange(period, n + 1, period) - 1
        s = rng.uniform(f"sigma:{col}", pos, lo, hi)
        values = out[col].to_numpy(dtype=np.float64).copy()
        values[pos] = stats[col]["mean"] + s * stats[col]["std"]
        out[col] = values
        labels = out["label"].to_numpy().copy()
        labels[pos] = 1
        out["label"] = labels
    return out


def _is_missing(series: pd.Series) -> np.ndarray:
    m = series.isna().to_numpy()
    if series.dtype == object:
        m |= (series.astype(str).str.strip() == "").to_numpy() & ~m
    return m


def _smallest_keys(rng: CounterRNG, stream: str, candidates: np.ndarray, k: int) -> np.ndarray:
    """Seeded sample without replacement that only depends on the row ids."""
    if k <= 0 or len(candidates) == 0:
        return candidates[:0]
    keys = rng.bits(stream, candidates)
    order = np.lexsort((candidates, keys))
    return np.sort(candidates[order[:k]])


def _set_cell(frame: pd.DataFrame, col: str, mask: np.ndarray, value) -> None:
    if col in INT_COLUMNS:
        arr = frame[col].astype("Int64").to_numpy(dtype=object, na_value=pd.NA)
    else:
        arr = frame[col].to_numpy(dtype=object).copy()
    arr[mask] = value
    frame[col] = pd.array(arr, dtype="Int64") if col in INT_COLUMNS else arr


def substitute_missing(records: pd.DataFrame, cfg: AnomalyConfig) -> pd.DataFrame:
    """Replace missing categorical cells by their sentinel value and label the rows.

    A column that is missing in every row is treated as not supplied and left
    alone. When no supplied cell is missing, ``missing_rate * n`` normal rows get
    one uniformly chosen column blanked and substituted.
    """
    out = records.copy()
    if "label" not in out:
        out["label"] = 0
    n = len(out)
    supplied = [c for c in SENTINELS if c in out and not _is_missing(out[c]).all()]
    masks = {c: _is_missing(out[c]) for c in supplied}
    labels = out["label"].to_numpy().copy()

    if any(m.any() for m in masks.values()):
        for col, m in masks.items():
            if m.any():
                _set_cell(out, col, m, SENTINELS[col])
                labels[m] = 1
    elif cfg.missing_rate > 0 and supplied:
        rng = CounterRNG(cfg.seed)
        eligible = np.flatnonzero(labels == 0)
        want = int(round(cfg.missing_rate * n))
        if want > len(eligible):
            log.warning("missing_rate asks for %d sentinel rows but only %d normal rows exist", want, len(eligible))
        chosen = _smallest_keys(rng, "missing_rows", eligible, want)
        col_pick = rng.integers("missing_col", chosen, len(supplied))
        for j, col in enumerate(supplied):
            mask = np.zeros(n, dtype=bool)
            mask[chosen[col_pick == j]] = True
            if mask.any():
                _set_cell(out, col, mask, SENTINELS[col])
        labels[chosen] = 1

    labels[sentinel_mask(out)] = 1
    out["label"] = labels
    return out


def sentinel_mask(frame: pd.DataFrame) -> np.ndarray:
    """Rows holding at least one sentinel value."""
    mask = np.zeros(len(frame), dtype=bool)
    for col, value in SENTINELS.items():
        if col not in frame:
            continue
        if col in INT_COLUMNS:
            mask |= (frame[col].astype("Int64") == value).fillna(False).to_numpy(dtype=bool)
        else:
            mask |= (frame[col].astype(object) == value).to_numpy(dtype=bool)
    return mask


def _attach_dates(frame: pd.DataFrame, rng: CounterRNG) -> pd.DataFrame:
    rows = np.arange(len(frame))
    start = np.datetime64("2015-01-01")
    breakdown = start + rng.integers("breakdown_date", rows, 6 * 365).astype("timedelta64[D]")
    # 8-hour work days; a repair is returned after ceil(hours / 8) days
    days = np.ceil(frame["repair_hours"].to_numpy(dtype=np.float64) / 8.0).astype(np.int64)
    frame["breakdown_date"] = breakdown.astype(str)
    frame["repair_date"] = (breakdown + days.astype("timedelta64[D]")).astype(str)
    return frame


def _adjust_ratio(frame: pd.DataFrame, target: float, rng: CounterRNG) -> pd.DataFrame:
    labels = frame["label"].to_numpy()
    anomalies = int(labels.sum())
    normals = np.flatnonzero(labels == 0)
    if anomalies == 0 or len(normals) == 0:
        raise ValueError("cannot adjust the anomaly ratio without both classes")
    if abs(anomalies / len(frame) - target) <= 0.005:
        return frame
    want = int(round(anomalies * (1 - target) / target))
    reps = np.zeros(len(frame), dtype=np.int64)
    reps[labels == 1] = 1
    q, r = divmod(want, len(normals))
    reps[normals] = q
    reps[_smallest_keys(rng, "resample", normals, r)] += 1
    return frame.loc[np.repeat(np.arange(len(frame)), reps)].reset_index(drop=True)


def generate_dataset(base: pd.DataFrame,
                     catalog: IssueCatalog = DEFAULT_CATALOG,
                     complexity_table: ComplexityTable = DEFAULT_COMPLEXITY,
                     cfg: AnomalyConfig | None = None) -> tuple[pd.DataFrame, dict]:
    """Build a labeled Vehicle Claims table from a base vehicle table.

    Returns the table and a JSON-serialisable manifest.
    """
    cfg = cfg or AnomalyConfig()
    frame = base.reindex(columns=BASE_COLUMNS).reset_index(drop=True).copy()
    bad_price = ~(frame["price"].astype(np.float64) > 0)
    dropped = int(bad_price.sum())
    if dropped:
        log.warning("dropping %d rows without a positive price", dropped)
        frame = frame.loc[~bad_price].reset_index(drop=True)
    for col in ("maker", "model"):
        frame[col] = frame[col].where(~_is_missing(frame[col]), "Unknown")

    rng = CounterRNG(cfg.seed)
    n = len(frame)
    rows = np.arange(n)
    hours_tab, ratio_tab, _ = _catalog_arrays(catalog)
    issue_idx, issue_id = assign_issues(rng, catalog, rows)
    complexity = np.array([complexity_table.complexity_of(m) for m in frame["maker"]], dtype=np.int64)
    base_hours = hours_tab[issue_idx, issue_id - 1]
    ratio = ratio_tab[issue_idx, issue_id - 1]
    price = frame["price"].to_numpy(dtype=np.float64)

    frame["issue"] = np.asarray(catalog.issues, dtype=object)[issue_idx]
    frame["issue_id"] = issue_id
    frame["repair_complexity"] = complexity
    frame["repair_hours"] = base_hours * complexity
    frame["repair_cost"] = frame["repair_hours"].to_numpy() * LABOR_RATE + ratio * price
    frame["label"] = np.zeros(n, dtype=np.int64)

    clean = _clean_stats(frame)
    frame = inject_anomalies(frame, cfg)
    numeric_anomalies = int(frame["label"].sum())
    frame = substitute_missing(frame, cfg)
    sentinel_rows = int(sentinel_mask(frame).sum())
    if cfg.with_dates:
        frame = _attach_dates(frame, rng)
    base_rows = len(frame)
    if cfg.target_ratio is not None:
        frame = _adjust_ratio(frame, cfg.target_ratio, rng)

    frame["label"] = frame["label"].astype(np.int64)
    columns = OUTPUT_COLUMNS + (DATE_COLUMNS if cfg.with_dates else [])
    frame = frame[columns]
    anomalies = int(frame["label"].sum())
    manifest = {
        "generator": "auditbench.vcgen",
        "seed": cfg.seed,
        "columns": columns,
        "float_format": "%.6f",
        "n_rows": len(frame),
        "n_rows_before_ratio_adjustment": base_rows,
        "counts": {
            "cost_perturbed": n // cfg.cost_period,
            "hours_perturbed": n // cfg.hours_period,
            "numeric_anomaly_rows": numeric_anomalies,
            "sentinel_rows": sentinel_rows,
            "anomalies": anomalies,
            "normals": len(frame) - anomalies,
            "dropped_invalid_price": dropped,
        },
        "achieved_ratio": anomalies / len(frame) if len(frame) else 0.0,
        "clean_stats": clean,
        "column_stats": {c: {"mean": float(frame[c].astype(np.float64).mean()),
                             "std": float(frame[c].astype(np.float64).std(ddof=0))}
                         for c in ("price", "repair_hours", "repair_cost")},
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "catalog": catalog.to_records(),
    }
    return frame, manifest


def write_dataset(frame: pd.DataFrame, path: str | PathLike) -> None:
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")


def read_dataset(path: str | PathLike) -> pd.DataFrame:
    frame = pd.read_csv(path)
    for col in INT_COLUMNS:
        if col in frame:
            frame[col] = frame[col].astype("Int64")
    return frame
