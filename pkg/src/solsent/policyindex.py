"""State renewable-energy policy scores and the seven-covariate profile.

Two derived indices:
  * RPS score: required annual progress toward the renewable portfolio
    target, (target% - 2019 generation%) / (target year - 2019); states
    with no target or an already-achieved target score 0.
  * Net-metering score: additive 0-9 index of five policy design features
    (mechanism 0-4, cap 0-1, subscriber 0-1, compensation 0-1,
    rollover 0-2).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .geolocate import ALL_STATE_CODES, REGIONS

_NEM_RANGES = {
    "mechanism": range(0, 5),
    "cap": range(0, 2),
    "subscriber": range(0, 2),
    "compensation": range(0, 2),
    "rollover": range(0, 3),
}

POLICY_COLUMNS = (
    "state", "renewable_generation", "rps_target_percent", "rps_target_year",
    "nem_mechanism", "nem_cap", "nem_subscriber", "nem_compensation",
    "nem_rollover", "incentives_count", "solar_jobs_per_million",
    "electricity_price", "solar_radiation", "region",
)

#: Predictor order used by the descriptive and regression tables.
PREDICTORS = (
    "renewable_generation", "rps_score", "nem_score", "incentives_count",
    "solar_jobs_per_million", "electricity_price", "solar_radiation",
)


class PolicyLoadError(ValueError):
    """Raised with the offending row/field when the policy CSV is invalid."""


@dataclass(frozen=True)
class RpsInput:
    """Renewable portfolio standard inputs; target fields jointly optional."""

    generation_2019: float
    target_percent: float | None = None
    target_year: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.generation_2019 <= 100.0:
            raise ValueError(f"generation_2019 {self.generation_2019} not in [0, 100]")
        if self.target_percent is not None and not 0.0 <= self.target_percent <= 100.0:
            raise ValueError(f"target_percent {self.target_percent} not in [0, 100]")


@dataclass(frozen=True)
class NemComponents:
    """Five net-metering design features, each within its enumerated range."""

    mechanism: int
    cap: int
    subscriber: int
    compensation: int
    rollover: int

    def __post_init__(self):
        for name, valid in _NEM_RANGES.items():
            value = getattr(self, name)
            if value not in valid:
                raise ValueError(
                    f"nem {name}={value} outside {valid.start}..{valid.stop - 1}"
                )


@dataclass(frozen=True)
class PolicyProfile:
    """One state's row of all seven regression covariates plus raw inputs."""

    state: str
    renewable_generation: float
    rps_input: RpsInput
    rps_score: float
    nem: NemComponents
    nem_score: int
    incentives_count: int
    solar_jobs_per_million: float
    electricity_price: float
    solar_radiation: float
    region: str

    def predictor_values(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in PREDICTORS)


def rps_score(inp: RpsInput) -> float:
    """Required annual percentage-point progress toward the RPS target.

    Zero when there is no target or the 2019 generation share already
    meets it (including targets with no year). An unmet target needs a
    target year after 2019, otherwise the rate is undefined.
    """
    if inp.target_percent is None:
        return 0.0
    if inp.generation_2019 >= inp.target_percent:
        return 0.0
    if inp.target_year is None or inp.target_year <= 2019:
        raise ValueError(
            f"unmet RPS target {inp.target_percent}% needs a target year after 2019 "
            f"(got {inp.target_year})"
        )
    return (inp.target_percent - inp.generation_2019) / (inp.target_year - 2019)


def nem_score(components: NemComponents) -> int:
    """Additive net-metering friendliness index in [0, 9]."""
    return (
        components.mechanism
        + components.cap
        + components.subscriber
        + components.compensation
        + components.rollover
    )


def _parse_row(row: dict, line_no: int) -> PolicyProfile:
    state = row["state"].strip().upper()

    def fail(field: str, why: str):
        raise PolicyLoadError(f"row {line_no} (state {state or '?'}): {field} {why}")

    def number(field: str, positive: bool = False, minimum: float | None = None) -> float:
        raw = row[field].strip()
        try:
            value = float(raw)
        except ValueError:
            fail(field, f"is not a number: {raw!r}")
        if positive and value <= 0:
            fail(field, f"must be > 0, got {value}")
        if minimum is not None and value < minimum:
            fail(field, f"must be >= {minimum}, got {value}")
        return value

    def optional_number(field: str) -> float | None:
        raw = row[field].strip()
        return float(raw) if raw else None

    if not state:
        fail("state", "is empty")
    if state not in ALL_STATE_CODES:
        fail("state", f"is not a U.S. state code: {state!r}")
    try:
        target_percent = optional_number("rps_target_percent")
        target_year_f = optional_number("rps_target_year")
        rps_input = RpsInput(
            generation_2019=number("renewable_generation", minimum=0.0),
            target_percent=target_percent,
            target_year=int(target_year_f) if target_year_f is not None else None,
        )
        nem = NemComponents(
            mechanism=int(number("nem_mechanism")),
            cap=int(number("nem_cap")),
            subscriber=int(number("nem_subscriber")),
            compensation=int(number("nem_compensation")),
            rollover=int(number("nem_rollover")),
        )
        profile = PolicyProfile(
            state=state,
            renewable_generation=rps_input.generation_2019,
            rps_input=rps_input,
            rps_score=rps_score(rps_input),
            nem=nem,
            nem_score=nem_score(nem),
            incentives_count=int(number("incentives_count", minimum=0.0)),
            solar_jobs_per_million=number("solar_jobs_per_million", minimum=0.0),
            electricity_price=number("electricity_price", positive=True),
            solar_radiation=number("solar_radiation", positive=True),
            region=row["region"].strip(),
        )
    except PolicyLoadError:
        raise
    except ValueError as exc:
        raise PolicyLoadError(f"row {line_no} (state {state}): {exc}") from None
    if profile.region not in REGIONS:
        fail("region", f"unknown: {profile.region!r}")
    return profile


def load_profiles(
    path: str | Path, expected_states: set[str] | None = frozenset(ALL_STATE_CODES)
) -> list[PolicyProfile]:
    """Load and validate the per-state policy CSV.

    All 51 jurisdictions are required unless expected_states overrides.
    Derived rps_score/nem_score are always recomputed; score columns in
    the input, if any, are ignored.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(POLICY_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise PolicyLoadError(f"{path.name}: missing columns {sorted(missing)}")
        profiles = []
        seen: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            profile = _parse_row(row, line_no)
            if profile.state in seen:
                raise PolicyLoadError(f"row {line_no}: duplicate state {profile.state}")
            seen.add(profile.state)
            profiles.append(profile)
    if expected_states is not None:
        missing_states = sorted(expected_states - seen)
        if missing_states:
            raise PolicyLoadError(f"{path.name}: missing states {missing_states}")
    return profiles
