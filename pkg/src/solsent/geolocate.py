"""Resolve posts to U.S. states from coordinates or profile strings.

A small gazetteer (state names/aliases, major cities, per-state bounding
boxes and centroids) stands in for an online geocoder. Coordinates take
precedence; free-text profile locations are parsed with a comma-pattern
first, then exact/phrase state-name matches, then a city table.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

REGIONS = ("Northeast", "Midwest", "South", "West")

#: Two-letter codes that are also common English words; they resolve only
#: when comma-adjacent (the "City, ST" pattern), never as bare tokens.
AMBIGUOUS_CODES = frozenset({"IN", "OR", "ME", "OK", "HI", "DE"})

#: Tokens treated as "United States" markers: in-US but unusable alone.
US_TOKENS = frozenset({"usa", "us", "united states", "united states of america", "america"})

#: Foreign countries and globally famous non-US cities. A hit resolves a
#: profile to non_us when no state signal was found first.
FOREIGN_TOKENS = frozenset(
    {
        "canada", "toronto", "vancouver", "montreal", "ottawa", "quebec",
        "mexico", "mexico city", "guadalajara",
        "uk", "united kingdom", "england", "scotland", "wales", "london",
        "manchester uk", "great britain", "britain",
        "ireland", "dublin",
        "france", "paris", "paris france",
        "germany", "berlin", "munich",
        "spain", "madrid", "barcelona",
        "italy", "rome", "milan",
        "netherlands", "amsterdam",
        "belgium", "brussels",
        "switzerland", "zurich", "geneva",
        "sweden", "stockholm", "norway", "oslo", "denmark", "copenhagen",
        "finland", "helsinki",
        "poland", "warsaw", "portugal", "lisbon", "greece", "athens greece",
        "austria", "vienna",
        "russia", "moscow",
        "turkey", "istanbul",
        "india", "mumbai", "delhi", "new delhi", "bangalore", "bengaluru",
        "chennai", "hyderabad india", "kolkata",
        "pakistan", "karachi", "lahore",
        "bangladesh", "dhaka",
        "china", "beijing", "shanghai", "shenzhen", "hong kong",
        "japan", "tokyo", "osaka",
        "south korea", "seoul",
        "singapore", "malaysia", "kuala lumpur",
        "indonesia", "jakarta", "thailand", "bangkok",
        "philippines", "manila", "vietnam", "hanoi",
        "australia", "sydney", "melbourne", "brisbane", "perth",
        "new zealand", "auckland", "wellington",
        "brazil", "sao paulo", "rio de janeiro",
        "argentina", "buenos aires", "chile", "santiago", "colombia", "bogota",
        "peru", "lima", "costa rica", "cuba", "havana", "dominican republic",
        "venezuela", "caracas", "ecuador", "quito",
        "ukraine", "kyiv", "czech republic", "prague", "hungary", "budapest",
        "nigeria", "lagos", "abuja",
        "kenya", "nairobi",
        "ghana", "accra",
        "south africa", "johannesburg", "cape town",
        "egypt", "cairo",
        "israel", "tel aviv", "jerusalem",
        "uae", "united arab emirates", "dubai", "abu dhabi",
        "saudi arabia", "riyadh", "qatar", "doha",
    }
)

_WS_RE = re.compile(r"\s+")
_PUNCT_EDGE_RE = re.compile(r"^[\W_]+|[\W_]+$")


class GazetteerError(ValueError):
    """Raised when gazetteer CSVs fail validation at load time."""


@dataclass(frozen=True)
class BoundingBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


@dataclass(frozen=True)
class GeoResolution:
    """Outcome of resolving one post: a state code, 'non_us', or 'unknown'."""

    post_id: str
    outcome: str
    method: str  # coordinates | profile_exact | profile_city | none

    @property
    def is_state(self) -> bool:
        return self.method != "none"


@dataclass
class Gazetteer:
    codes: tuple[str, ...]
    name_of: dict[str, str]            # code -> display name
    region_of: dict[str, str]          # code -> census region
    boxes: dict[str, BoundingBox]
    centroids: dict[str, tuple[float, float]]
    names: dict[str, str] = field(default_factory=dict)   # folded name/alias -> code
    cities: dict[str, list[tuple[int, str]]] = field(default_factory=dict)
    extent: BoundingBox | None = None

    def __post_init__(self):
        if self.extent is None:
            self.extent = BoundingBox(
                min(b.lat_min for b in self.boxes.values()),
                max(b.lat_max for b in self.boxes.values()),
                min(b.lon_min for b in self.boxes.values()),
                max(b.lon_max for b in self.boxes.values()),
            )


def fold_place(text: str) -> str:
    """Fold a place string for lookup: casefold, drop periods, trim punctuation."""
    text = text.replace(".", "").casefold()
    text = _WS_RE.sub(" ", text).strip()
    return _PUNCT_EDGE_RE.sub("", text)


def _read_csv(path: Path, required: Iterable[str]) -> list[dict]:
    if not path.exists():
        raise GazetteerError(f"missing gazetteer file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or [])
        if missing:
            raise GazetteerError(f"{path.name}: missing columns {sorted(missing)}")
        return list(reader)


def load_gazetteer(directory: str | Path) -> Gazetteer:
    """Load and validate states.csv, cities.csv, and aliases.csv."""
    directory = Path(directory)
    state_rows = _read_csv(
        directory / "states.csv",
        ("code", "name", "region", "lat_min", "lat_max", "lon_min", "lon_max",
         "centroid_lat", "centroid_lon"),
    )
    codes: list[str] = []
    name_of: dict[str, str] = {}
    region_of: dict[str, str] = {}
    boxes: dict[str, BoundingBox] = {}
    centroids: dict[str, tuple[float, float]] = {}
    names: dict[str, str] = {}
    for row in state_rows:
        code = row["code"].strip().upper()
        if code in boxes:
            raise GazetteerError(f"states.csv: duplicate state {code}")
        if row["region"] not in REGIONS:
            raise GazetteerError(f"states.csv: {code}: bad region {row['region']!r}")
        try:
            box = BoundingBox(
                float(row["lat_min"]), float(row["lat_max"]),
                float(row["lon_min"]), float(row["lon_max"]),
            )
            centroid = (float(row["centroid_lat"]), float(row["centroid_lon"]))
        except ValueError:
            raise GazetteerError(f"states.csv: {code}: non-numeric box") from None
        if box.lat_min > box.lat_max or box.lon_min > box.lon_max:
            raise GazetteerError(f"states.csv: {code}: malformed box (min > max)")
        if not (17.0 <= box.lat_min and box.lat_max <= 72.0 and
                -180.0 <= box.lon_min and box.lon_max <= -60.0):
            raise GazetteerError(f"states.csv: {code}: box outside U.S. extent")
        codes.append(code)
        name_of[code] = row["name"].strip()
        region_of[code] = row["region"]
        boxes[code] = box
        centroids[code] = centroid
        folded = fold_place(row["name"])
        if folded in names and names[folded] != code:
            raise GazetteerError(f"states.csv: name {row['name']!r} maps to two states")
        names[folded] = code

    if set(codes) != set(ALL_STATE_CODES):
        missing = sorted(set(ALL_STATE_CODES) - set(codes))
        extra = sorted(set(codes) - set(ALL_STATE_CODES))
        raise GazetteerError(
            f"states.csv: expected the 51 jurisdictions; missing {missing}, unexpected {extra}"
        )

    for row in _read_csv(directory / "aliases.csv", ("alias", "state_code")):
        code = row["state_code"].strip().upper()
        if code not in boxes:
            raise GazetteerError(f"aliases.csv: unknown state {code}")
        folded = fold_place(row["alias"])
        if folded in names and names[folded] != code:
            raise GazetteerError(f"aliases.csv: alias {row['alias']!r} conflicts")
        names[folded] = code

    cities: dict[str, list[tuple[int, str]]] = {}
    for row in _read_csv(directory / "cities.csv", ("city", "state_code", "rank")):
        code = row["state_code"].strip().upper()
        if code not in boxes:
            raise GazetteerError(f"cities.csv: unknown state {code} for {row['city']!r}")
        try:
            rank = int(row["rank"])
        except ValueError:
            raise GazetteerError(f"cities.csv: bad rank for {row['city']!r}") from None
        cities.setdefault(fold_place(row["city"]), []).append((rank, code))
    for entries in cities.values():
        entries.sort()

    return Gazetteer(
        codes=tuple(sorted(codes)),
        name_of=name_of,
        region_of=region_of,
        boxes=boxes,
        centroids=centroids,
        names=names,
        cities=cities,
    )


#: The 51 jurisdictions: 50 states plus the District of Columbia.
ALL_STATE_CODES = tuple(
    (
        "AL AK AZ AR CA CO CT DE DC FL GA HI ID IL IN IA KS KY LA ME MD MA MI MN MS "
        "MO MT NE NV NH NJ NM NY NC ND OH OK OR PA RI SC SD TN TX UT VT VA WA WV WI WY"
    ).split()
)


def default_gazetteer_dir() -> Path:
    return Path(__file__).parent / "data"


def load_default_gazetteer() -> Gazetteer:
    return load_gazetteer(default_gazetteer_dir())


def _resolve_coordinates(lat: float, lon: float, gaz: Gazetteer) -> str:
    """State code, 'non_us', or 'unknown' for a coordinate pair."""
    hits = [code for code in gaz.codes if gaz.boxes[code].contains(lat, lon)]
    if len(hits) == 1:
        return hits[0]
    if hits:
        # Overlapping boxes: nearest centroid, code order breaking exact ties.
        def dist(code: str) -> tuple[float, str]:
            clat, clon = gaz.centroids[code]
            return ((lat - clat) ** 2 + (lon - clon) ** 2, code)

        return min(hits, key=dist)
    assert gaz.extent is not None
    if gaz.extent.contains(lat, lon):
        return "unknown"
    return "non_us"


def _state_token(token: str, gaz: Gazetteer, comma_adjacent: bool) -> str | None:
    """Map one cleaned token to a state code, honoring the ambiguity rules."""
    folded = fold_place(token)
    if not folded:
        return None
    if folded in gaz.names:
        return gaz.names[folded]
    if len(folded) == 2:
        code = folded.upper()
        if code in gaz.boxes:
            if comma_adjacent:
                return code
            # Bare two-letter tokens must be uppercase and unambiguous.
            if token.strip(" .").isupper() and code not in AMBIGUOUS_CODES:
                return code
    return None


def _city_lookup(folded: str, gaz: Gazetteer) -> str | None:
    entries = gaz.cities.get(folded)
    if entries:
        return entries[0][1]
    return None


def _resolve_profile(location: str, gaz: Gazetteer) -> tuple[str, str]:
    """Return (outcome, method) for a free-text profile location."""
    segments = [s for s in (seg.strip() for seg in location.split(",")) if s]
    if not segments:
        return "unknown", "none"

    # (1) "City, ST" / "City, StateName": scan comma segments right to left,
    # skipping country-of-USA markers.
    if len(segments) > 1:
        for seg in reversed(segments[1:]):
            folded = fold_place(seg)
            if folded in US_TOKENS:
                continue
            code = _state_token(seg, gaz, comma_adjacent=True)
            if code:
                return code, "profile_exact"
            if folded in FOREIGN_TOKENS:
                return "non_us", "none"
            break

    # (2) Exact state name/alias, or an unambiguous abbreviation token.
    whole = fold_place(location)
    if whole in US_TOKENS:
        return "unknown", "none"
    code = _state_token(location, gaz, comma_adjacent=False)
    if code:
        return code, "profile_exact"
    for seg in segments:
        code = _state_token(seg, gaz, comma_adjacent=False)
        if code:
            return code, "profile_exact"
    # Word-bounded full-name phrase inside longer text, longest name first;
    # "<name> city" spans defer to the city table (e.g. "Kansas City").
    padded = f" {whole} "
    for name in sorted(gaz.names, key=len, reverse=True):
        if len(name) <= 2:
            continue
        idx = padded.find(f" {name} ")
        if idx >= 0:
            rest = padded[idx + len(name) + 2:].lstrip()
            if rest.startswith("city") and f"{name} city" in gaz.cities:
                continue
            return gaz.names[name], "profile_exact"
    # Uppercase unambiguous code tokens inside longer text ("Austin TX").
    for token in re.findall(r"\b[A-Z]{2}\b", location):
        if token in gaz.boxes and token not in AMBIGUOUS_CODES:
            return token, "profile_exact"

    # (3) City table: whole string, then individual comma segments.
    for candidate in [whole] + [fold_place(s) for s in segments]:
        hit = _city_lookup(candidate, gaz)
        if hit:
            return hit, "profile_city"

    # (4) Foreign country/city token.
    if whole in FOREIGN_TOKENS:
        return "non_us", "none"
    for seg in segments:
        if fold_place(seg) in FOREIGN_TOKENS:
            return "non_us", "none"
    for token in whole.split():
        if token in FOREIGN_TOKENS:
            return "non_us", "none"

    return "unknown", "none"


def resolve(
    location: str | None,
    lat: float | None,
    lon: float | None,
    gaz: Gazetteer,
    post_id: str = "",
) -> GeoResolution:
    """Resolve one post. Coordinates win; profile text is the fallback.

    Coordinate outcomes of non_us (outside the U.S. extent) are terminal;
    a coordinate 'unknown' (inside the extent but in no state box) falls
    through to the profile string.
    """
    if lat is not None and lon is not None:
        outcome = _resolve_coordinates(lat, lon, gaz)
        if outcome == "non_us":
            return GeoResolution(post_id, "non_us", "none")
        if outcome != "unknown":
            return GeoResolution(post_id, outcome, "coordinates")
    if location and location.strip():
        outcome, method = _resolve_profile(location, gaz)
        return GeoResolution(post_id, outcome, method)
    return GeoResolution(post_id, "unknown", "none")


def resolve_post(post, gaz: Gazetteer) -> GeoResolution:
    return resolve(post.user_location, post.latitude, post.longitude, gaz, post_id=post.id)
