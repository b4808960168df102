"""Pipeline orchestration and artifact emission: tables, plots, manifest.

Artifacts land strictly under the configured output directory. CSV and
SVG content is deterministic for a fixed seed and inputs; the manifest
additionally records wall-clock timings and artifact checksums.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from xml.sax.saxutils import escape

from . import aggregate as agg
from . import classify, geolocate, ingest, policyindex, textprep
from . import stats as st

PREDICTOR_LABELS = {
    "renewable_generation": "Renewable generation",
    "rps_score": "RPS",
    "nem_score": "Net metering",
    "incentives_count": "Renewable incentives",
    "solar_jobs_per_million": "Solar market maturity",
    "electricity_price": "Electricity price",
    "solar_radiation": "Solar radiation",
}

#: Tile-grid positions (col, row) for the choropleth; roughly geographic.
TILE_GRID = {
    "AK": (0, 0), "ME": (11, 0),
    "WI": (6, 1), "VT": (10, 1), "NH": (11, 1),
    "WA": (1, 2), "ID": (2, 2), "MT": (3, 2), "ND": (4, 2), "MN": (5, 2),
    "IL": (6, 2), "MI": (7, 2), "NY": (9, 2), "MA": (10, 2), "RI": (11, 2),
    "OR": (1, 3), "NV": (2, 3), "WY": (3, 3), "SD": (4, 3), "IA": (5, 3),
    "IN": (6, 3), "OH": (7, 3), "PA": (8, 3), "NJ": (9, 3), "CT": (10, 3),
    "CA": (1, 4), "UT": (2, 4), "CO": (3, 4), "NE": (4, 4), "MO": (5, 4),
    "KY": (6, 4), "WV": (7, 4), "VA": (8, 4), "MD": (9, 4), "DE": (10, 4),
    "AZ": (2, 5), "NM": (3, 5), "KS": (4, 5), "AR": (5, 5), "TN": (6, 5),
    "NC": (7, 5), "SC": (8, 5), "DC": (9, 5),
    "OK": (4, 6), "LA": (5, 6), "MS": (6, 6), "AL": (7, 6), "GA": (8, 6),
    "HI": (0, 7), "TX": (4, 7), "FL": (8, 7),
}

BIN_COLORS = ("#d73027", "#fc8d59", "#fee090", "#91bfdb", "#4575b4")
NO_DATA_COLOR = "#cccccc"


class ConfigError(ValueError):
    """Invalid or incomplete run configuration; message names the path/field."""


class StageError(RuntimeError):
    """A pipeline stage failed after configuration validated."""


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _fmt3(x: float) -> str:
    return f"{x:.3f}"


@dataclass
class RunConfig:
    corpus: Path
    output_dir: Path
    keywords: Path
    stopphrases: Path
    gazetteer_dir: Path
    population: Path
    policy: Path
    annotations: Path | None = None
    model_path: Path | None = None
    backend_cmd: list[str] | None = None
    backend_addr: str | None = None
    exclude_start: date | None = None
    exclude_end: date | None = None
    seed: int = 0

    @classmethod
    def from_json(cls, path: str | Path, overrides: dict | None = None) -> "RunConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if overrides:
            raw.update({k: v for k, v in overrides.items() if v is not None})
        base = path.parent
        data_dir = geolocate.default_gazetteer_dir()

        def as_path(key: str, default: Path | None = None) -> Path | None:
            value = raw.get(key)
            if value is None:
                return default
            p = Path(value)
            return p if p.is_absolute() else (base / p)

        required = {"corpus", "output_dir"}
        missing = sorted(required - {k for k in raw if raw.get(k) is not None})
        if missing:
            raise ConfigError(f"config {path}: missing fields {missing}")
        # input paths resolve relative to the config file; the output
        # directory resolves relative to the caller's working directory
        out_dir = Path(raw["output_dir"])
        cmd = raw.get("backend_cmd")
        if isinstance(cmd, str):
            cmd = cmd.split()

        def as_date(key: str) -> date | None:
            value = raw.get(key)
            if not value:
                return None
            try:
                return date.fromisoformat(value)
            except ValueError:
                raise ConfigError(f"{key} is not a valid date: {value!r}") from None

        try:
            seed = int(raw.get("seed", 0))
        except (TypeError, ValueError):
            raise ConfigError(f"seed is not an integer: {raw.get('seed')!r}") from None
        return cls(
            corpus=as_path("corpus"),
            output_dir=out_dir,
            keywords=as_path("keywords", data_dir / "keywords.txt"),
            stopphrases=as_path("stopphrases", data_dir / "stopphrases.txt"),
            gazetteer_dir=as_path("gazetteer_dir", data_dir),
            population=as_path("population", data_dir / "population.csv"),
            policy=as_path("policy", data_dir / "demo" / "policy_synthetic.csv"),
            annotations=as_path("annotations"),
            model_path=as_path("model_path"),
            backend_cmd=cmd,
            backend_addr=raw.get("backend_addr"),
            exclude_start=as_date("exclude_start"),
            exclude_end=as_date("exclude_end"),
            seed=seed,
        )

    def validate(self) -> None:
        for name in ("corpus", "keywords", "stopphrases", "population", "policy"):
            p = getattr(self, name)
            if not Path(p).exists():
                raise ConfigError(f"{name} file does not exist: {p}")
        if not Path(self.gazetteer_dir).is_dir():
            raise ConfigError(f"gazetteer_dir does not exist: {self.gazetteer_dir}")
        if (self.exclude_start is None) != (self.exclude_end is None):
            raise ConfigError("exclude_start and exclude_end must be given together")
        if self.exclude_start and self.exclude_end and self.exclude_end < self.exclude_start:
            raise ConfigError("exclusion window end is before its start")
        has_backend = bool(self.backend_cmd or self.backend_addr or self.model_path or self.annotations)
        if not has_backend:
            raise ConfigError("no backend: set model_path, annotations, backend_cmd, or backend_addr")

    def exclusion_window(self) -> tuple[date, date] | None:
        if self.exclude_start and self.exclude_end:
            return (self.exclude_start, self.exclude_end)
        return None

    def echo(self) -> dict:
        return {
            "corpus": str(self.corpus),
            "output_dir": str(self.output_dir),
            "keywords": str(self.keywords),
            "stopphrases": str(self.stopphrases),
            "gazetteer_dir": str(self.gazetteer_dir),
            "population": str(self.population),
            "policy": str(self.policy),
            "annotations": str(self.annotations) if self.annotations else None,
            "model_path": str(self.model_path) if self.model_path else None,
            "backend_cmd": self.backend_cmd,
            "backend_addr": self.backend_addr,
            "exclude_start": self.exclude_start.isoformat() if self.exclude_start else None,
            "exclude_end": self.exclude_end.isoformat() if self.exclude_end else None,
            "seed": self.seed,
        }


@dataclass
class RunManifest:
    config: dict
    stages: dict = field(default_factory=dict)
    stage_seconds: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    status: str = "ok"

    def write(self, path: Path) -> None:
        payload = {
            "config": self.config,
            "stages": self.stages,
            "stage_seconds": self.stage_seconds,
            "artifacts": self.artifacts,
            "status": self.status,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_population(path: str | Path) -> dict[str, int]:
    table: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or {"state_code", "population"} - set(reader.fieldnames):
            raise ConfigError(f"{path}: population CSV needs state_code,population columns")
        for row in reader:
            table[row["state_code"].strip().upper()] = int(row["population"])
    missing = sorted(set(geolocate.ALL_STATE_CODES) - set(table))
    if missing:
        raise ConfigError(f"{path}: population table missing states {missing}")
    return table


# -- backend wiring ------------------------------------------------------------


def make_backend(config: RunConfig):
    """Select the scorer: external command/address, or the baseline model."""
    if config.backend_cmd:
        return classify.ExternalBackend.spawn(config.backend_cmd)
    if config.backend_addr:
        return classify.ExternalBackend.connect(config.backend_addr)
    if config.model_path and Path(config.model_path).exists():
        return classify.BaselineBackend.from_file(config.model_path)
    if config.annotations:
        examples, _ = classify.load_annotations(config.annotations)
        spec = classify.SplitSpec(seed=config.seed)
        train, dev, _test = classify.split(examples, spec)
        model = classify.train_baseline(train, dev, seed=config.seed)
        if config.model_path:
            Path(config.model_path).parent.mkdir(parents=True, exist_ok=True)
            model.save(config.model_path)
        return classify.BaselineBackend(model)
    raise ConfigError(f"baseline model file does not exist: {config.model_path}")


# -- table writers --------------------------------------------------------------


def write_state_scores_csv(path: Path, rows: list[agg.StateSentiment]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["state", "score", "n", "ci_low", "ci_high", "tweets_per_million"])
        for r in rows:
            writer.writerow(
                [r.state, _fmt(r.score), r.n_tweets, _fmt(r.ci_low), _fmt(r.ci_high),
                 _fmt(r.tweets_per_million)]
            )


def write_daily_series_csv(path: Path, points: list[agg.DailyPoint]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "n", "mean_score"])
        for p in points:
            writer.writerow([p.day.isoformat(), p.n_tweets, _fmt(p.mean_score)])


def build_policy_table(
    scores: list[agg.StateSentiment], profiles: list[policyindex.PolicyProfile]
) -> tuple[st.DataMatrix, list[str], list[str]]:
    """Join state scores with policy covariates; returns (matrix, states, regions)."""
    by_state = {p.state: p for p in profiles}
    states = [s.state for s in scores if s.state in by_state]
    columns: dict[str, list[float]] = {"sentiment_score": []}
    for name in policyindex.PREDICTORS:
        columns[name] = []
    regions = []
    for s in scores:
        profile = by_state.get(s.state)
        if profile is None:
            continue
        columns["sentiment_score"].append(s.score)
        for name, value in zip(policyindex.PREDICTORS, profile.predictor_values()):
            columns[name].append(value)
        regions.append(profile.region)
    if not states:
        raise StageError("no states joined between scores and policy table")
    return st.DataMatrix.from_columns(columns), states, regions


def write_table2_csv(path: Path, matrix: st.DataMatrix) -> None:
    """Descriptive statistics plus the lower-triangle correlation matrix."""
    result = st.describe(matrix)
    k = len(result.columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["variable", "obs", "mean", "sd", "min", "max"]
            + [f"({i + 1})" for i in range(k)]
        )
        for i, col in enumerate(result.columns):
            corr_cells = []
            for j in range(k):
                if j > i:
                    corr_cells.append("")
                else:
                    value = result.correlation[i, j]
                    corr_cells.append("" if value != value else _fmt3(value))
            writer.writerow(
                [col.name, col.n, _fmt3(col.mean), _fmt3(col.sd), _fmt3(col.min),
                 _fmt3(col.max)] + corr_cells
            )


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def fit_table3_models(matrix: st.DataMatrix) -> list[st.RegressionResult]:
    """Bivariate models 1..7 plus the full model 8, robust (HC1) SEs."""
    y = matrix.column("sentiment_score")
    models = []
    for name in policyindex.PREDICTORS:
        models.append(
            st.ols(y, matrix.column(name).reshape(-1, 1), names=[name], with_vif=False)
        )
    full_X = st.DataMatrix.from_columns(
        {name: matrix.column(name) for name in policyindex.PREDICTORS}
    )
    models.append(st.ols(y, full_X))
    return models


def write_table3_csv(path: Path, models: list[st.RegressionResult]) -> None:
    headers = ["variable"] + [f"model{i + 1}" for i in range(len(models))]
    rows = []
    for name in policyindex.PREDICTORS:
        coef_cells, se_cells = [], []
        for model in models:
            if name in model.names:
                idx = model.names.index(name)
                coef_cells.append(_fmt3(model.coef[idx]) + _stars(model.p_values[idx]))
                se_cells.append(f"({_fmt3(model.se_robust[idx])})")
            else:
                coef_cells.append("")
                se_cells.append("")
        rows.append([PREDICTOR_LABELS[name]] + coef_cells)
        rows.append([""] + se_cells)
    const_coef, const_se = [], []
    for model in models:
        const_coef.append(_fmt3(model.coef[0]) + _stars(model.p_values[0]))
        const_se.append(f"({_fmt3(model.se_robust[0])})")
    rows.append(["Constant"] + const_coef)
    rows.append([""] + const_se)
    rows.append(["Number of states"] + [str(m.n) for m in models])
    rows.append(["R2"] + [_fmt3(m.r_squared) for m in models])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)


# -- SVG plots -------------------------------------------------------------------


def _svg_document(width: int, height: int, body: list[str]) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        '<style>text{font-family:sans-serif}</style>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def score_bin(score: float) -> int:
    """Fixed 5-bin index over [0, 10]: [0,2), [2,4), [4,6), [6,8), [8,10]."""
    return min(4, int(score / 2.0))


def render_map_svg(scores: list[agg.StateSentiment]) -> str:
    """Tile-grid choropleth of state scores with a 5-bin legend."""
    cell, pad = 56, 10
    cols = 1 + max(c for c, _ in TILE_GRID.values())
    rows = 1 + max(r for _, r in TILE_GRID.values())
    width = pad * 2 + cols * cell
    height = pad * 2 + rows * cell + 70
    by_state = {s.state: s for s in scores}
    body = [f'<text x="{pad}" y="{pad + 8}" font-size="13">State sentiment score (0-10)</text>']
    for code, (col, row) in sorted(TILE_GRID.items()):
        x = pad + col * cell
        y = pad + 16 + row * cell
        entry = by_state.get(code)
        if entry is None:
            color, label = NO_DATA_COLOR, "no data"
        else:
            color, label = BIN_COLORS[score_bin(entry.score)], _fmt(entry.score)
        body.append(
            f'<rect x="{x}" y="{y}" width="{cell - 4}" height="{cell - 4}" '
            f'fill="{color}" stroke="#555"/>'
        )
        body.append(
            f'<text x="{x + (cell - 4) / 2}" y="{y + 20}" font-size="12" '
            f'text-anchor="middle">{escape(code)}</text>'
        )
        body.append(
            f'<text x="{x + (cell - 4) / 2}" y="{y + 36}" font-size="9" '
            f'text-anchor="middle">{escape(label)}</text>'
        )
    legend_y = pad + 16 + rows * cell + 16
    ranges = ["0-2", "2-4", "4-6", "6-8", "8-10"]
    for i, (color, rng) in enumerate(zip(BIN_COLORS, ranges)):
        x = pad + i * 90
        body.append(f'<rect x="{x}" y="{legend_y}" width="16" height="16" fill="{color}" stroke="#555"/>')
        body.append(f'<text x="{x + 22}" y="{legend_y + 12}" font-size="11">{rng}</text>')
    x = pad + 5 * 90
    body.append(f'<rect x="{x}" y="{legend_y}" width="16" height="16" fill="{NO_DATA_COLOR}" stroke="#555"/>')
    body.append(f'<text x="{x + 22}" y="{legend_y + 12}" font-size="11">no data</text>')
    return _svg_document(width, height, body)


def render_bars_svg(scores: list[agg.StateSentiment]) -> str:
    """Per-state bars with 95% CI whiskers, highest score first."""
    ordered = sorted(scores, key=lambda s: (-s.score, s.state))
    bar_h, gap, left, top = 14, 4, 120, 30
    plot_w = 500
    width = left + plot_w + 80
    height = top + len(ordered) * (bar_h + gap) + 30

    def x_of(value: float) -> float:
        return left + value / 10.0 * plot_w

    body = [
        f'<text x="{left}" y="16" font-size="13">Average sentiment score by state '
        "(95% CI)</text>",
        f'<line x1="{left}" y1="{top}" x2="{left}" '
        f'y2="{top + len(ordered) * (bar_h + gap)}" stroke="#333"/>',
    ]
    for tick in range(0, 11, 2):
        body.append(
            f'<text x="{x_of(tick)}" y="{height - 8}" font-size="10" '
            f'text-anchor="middle">{tick}</text>'
        )
    for i, s in enumerate(ordered):
        y = top + i * (bar_h + gap)
        mid = y + bar_h / 2
        body.append(
            f'<text x="{left - 6}" y="{mid + 4}" font-size="10" text-anchor="end">'
            f"{escape(s.state)}</text>"
        )
        body.append(
            f'<rect x="{left}" y="{y}" width="{x_of(s.score) - left:.2f}" '
            f'height="{bar_h}" fill="#4575b4"/>'
        )
        body.append(
            f'<line x1="{x_of(s.ci_low):.2f}" y1="{mid}" x2="{x_of(s.ci_high):.2f}" '
            f'y2="{mid}" stroke="#d73027" stroke-width="2"/>'
        )
        body.append(
            f'<text x="{x_of(10) + 6}" y="{mid + 4}" font-size="10">{_fmt(s.score)}</text>'
        )
    return _svg_document(width, height, body)


def render_trend_svg(points: list[agg.DailyPoint]) -> str:
    """Daily mean sentiment polyline on a 0-10 axis."""
    left, top, plot_w, plot_h = 50, 30, 640, 240
    width, height = left + plot_w + 20, top + plot_h + 50
    body = [f'<text x="{left}" y="16" font-size="13">Daily mean sentiment score</text>']
    for tick in range(0, 11, 2):
        y = top + plot_h - tick / 10.0 * plot_h
        body.append(f'<line x1="{left - 4}" y1="{y}" x2="{left + plot_w}" y2="{y}" stroke="#ddd"/>')
        body.append(f'<text x="{left - 8}" y="{y + 4}" font-size="10" text-anchor="end">{tick}</text>')
    if points:
        first = points[0].day.toordinal()
        last = points[-1].day.toordinal()
        span = max(1, last - first)

        def xy(p: agg.DailyPoint) -> tuple[float, float]:
            x = left + (p.day.toordinal() - first) / span * plot_w
            y = top + plot_h - p.mean_score / 10.0 * plot_h
            return x, y

        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, points))
        body.append(f'<polyline points="{coords}" fill="none" stroke="#4575b4" stroke-width="2"/>')
        for p in (points[0], points[-1]):
            x, y = xy(p)
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#d73027"/>')
            body.append(
                f'<text x="{x:.2f}" y="{top + plot_h + 16}" font-size="10" '
                f'text-anchor="middle">{p.day.isoformat()}</text>'
            )
            body.append(
                f'<text x="{x:.2f}" y="{y - 8:.2f}" font-size="10" '
                f'text-anchor="middle">{_fmt(p.mean_score)}</text>'
            )
    return _svg_document(width, height, body)


# -- pipeline --------------------------------------------------------------------


def run_pipeline(config: RunConfig) -> RunManifest:
    """Execute ingest -> textprep -> geolocate -> classify -> aggregate ->
    policy join -> stats, emitting all artifacts into the output dir.

    On a stage failure the manifest is still written, with status naming
    the failed stage and checksums of whatever artifacts exist.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config.echo())
    try:
        return _run_pipeline_stages(config, out, manifest)
    except Exception as exc:
        manifest.status = f"failed: {type(exc).__name__}: {exc}"
        for artifact in sorted(out.iterdir()):
            if artifact.name != "manifest.json" and artifact.is_file():
                manifest.artifacts[artifact.name] = _sha256(artifact)
        manifest.write(out / "manifest.json")
        raise


def _run_pipeline_stages(config: RunConfig, out: Path, manifest: RunManifest) -> RunManifest:
    timer = time.perf_counter

    t0 = timer()
    read = ingest.read_jsonl(config.corpus)
    keywords = ingest.load_phrase_list(config.keywords)
    stopphrases = ingest.load_phrase_list(config.stopphrases)
    retained, report = ingest.run_filter_chain(read.posts, keywords, stopphrases)
    manifest.stages["ingest"] = {
        "n_lines_rejected": len(read.rejects),
        "filter_report": vars(report).copy(),
    }
    manifest.stage_seconds["ingest"] = timer() - t0

    t0 = timer()
    normalized = [textprep.normalize_post(p) for p in retained]
    nonempty = [nt for nt in normalized if nt.value]
    manifest.stages["textprep"] = {
        "n_in": len(normalized),
        "n_empty_dropped": len(normalized) - len(nonempty),
    }
    manifest.stage_seconds["textprep"] = timer() - t0

    t0 = timer()
    gaz = geolocate.load_gazetteer(config.gazetteer_dir)
    keep_ids = {nt.source_id for nt in nonempty}
    resolutions = {
        p.id: geolocate.resolve_post(p, gaz) for p in retained if p.id in keep_ids
    }
    outcome_counts = {"state": 0, "non_us": 0, "unknown": 0}
    for res in resolutions.values():
        key = res.outcome if res.outcome in ("non_us", "unknown") else "state"
        outcome_counts[key] += 1
    manifest.stages["geolocate"] = {"n_in": len(resolutions), **outcome_counts}
    manifest.stage_seconds["geolocate"] = timer() - t0

    t0 = timer()
    backend = make_backend(config)
    try:
        to_score = [nt for nt in nonempty if resolutions[nt.source_id].is_state]
        predictions = classify.score_batch(backend, to_score)
    finally:
        backend.close()
    manifest.stages["classify"] = {
        "backend_id": getattr(backend, "backend_id", "?"),
        "n_scored": len(predictions),
    }
    manifest.stage_seconds["classify"] = timer() - t0

    t0 = timer()
    population = load_population(config.population)
    by_id = {p.id: p for p in retained}
    timestamps = {
        pid: by_id[pid].created_at
        for pid in resolutions
        if by_id[pid].created_at is not None
    }
    scores = agg.state_scores(predictions, resolutions, population)
    timed_predictions = [p for p in predictions if p.post_id in timestamps]
    daily = agg.daily_series(timed_predictions, timestamps)
    window = config.exclusion_window()
    manifest.stages["aggregate"] = {
        "n_states": len(scores),
        "national_tweet_weighted": agg.national_average(predictions, resolutions, "tweet_weighted"),
        "national_state_mean": agg.national_average(predictions, resolutions, "state_mean"),
        "n_days": len(daily),
    }
    manifest.stage_seconds["aggregate"] = timer() - t0

    t0 = timer()
    profiles = policyindex.load_profiles(config.policy)
    matrix, joined_states, regions = build_policy_table(scores, profiles)
    models = fit_table3_models(matrix)

    score_of = {s.state: s.score for s in scores}
    by_region: dict[str, list[float]] = {}
    for state, region in zip(joined_states, regions):
        by_region.setdefault(region, []).append(score_of[state])
    anova_info: dict = {}
    if len(by_region) >= 2 and sum(len(v) for v in by_region.values()) > len(by_region):
        anova = st.oneway_anova(by_region)
        anova_info = {
            "f": anova.f_stat,
            "df_between": anova.df_between,
            "df_within": anova.df_within,
            "p": anova.p_value,
            "pairwise": [
                {
                    "a": c.group_a, "b": c.group_b, "diff": c.mean_diff,
                    "raw_p": c.raw_p, "bonferroni_p": c.bonferroni_p,
                }
                for c in anova.pairwise
            ],
        }
        try:
            chi2, df, p = st.bartlett(by_region)
            anova_info["bartlett"] = {"chi2": chi2, "df": df, "p": p}
        except ValueError as exc:
            anova_info["bartlett"] = {"error": str(exc)}
    manifest.stages["stats"] = {
        "n_joined_states": len(joined_states),
        "full_model_r2": models[-1].r_squared,
        "mean_vif": models[-1].mean_vif,
        "anova_by_region": anova_info,
    }
    manifest.stage_seconds["stats"] = timer() - t0

    t0 = timer()
    write_state_scores_csv(out / "state_scores.csv", scores)
    write_daily_series_csv(out / "daily_series.csv", daily)
    write_table2_csv(out / "table2.csv", matrix)
    write_table3_csv(out / "table3.csv", models)
    if window is not None:
        kept = [
            p for p in timed_predictions if not agg.in_window(timestamps[p.post_id], window)
        ]
        scores_excl = agg.state_scores(kept, resolutions, population)
        matrix_excl, _, _ = build_policy_table(scores_excl, profiles)
        write_table3_csv(out / "table3_excl.csv", fit_table3_models(matrix_excl))
        manifest.stages["exclusion_window"] = {
            "start": window[0].isoformat(),
            "end": window[1].isoformat(),
            "n_excluded_posts": len(timed_predictions) - len(kept),
        }
    (out / "map.svg").write_text(render_map_svg(scores), encoding="utf-8")
    (out / "bars.svg").write_text(render_bars_svg(scores), encoding="utf-8")
    (out / "trend.svg").write_text(render_trend_svg(daily), encoding="utf-8")
    manifest.stage_seconds["emit"] = timer() - t0

    for artifact in sorted(out.iterdir()):
        if artifact.name != "manifest.json" and artifact.is_file():
            manifest.artifacts[artifact.name] = _sha256(artifact)
    manifest.write(out / "manifest.json")
    return manifest


def train_baseline_command(
    annotations: Path, model_out: Path, metrics_out: Path | None, seed: int = 0
) -> classify.EvalMetrics:
    """Split, train the baseline, persist the model, report test metrics."""
    examples, n_neutral = classify.load_annotations(annotations)
    spec = classify.SplitSpec(seed=seed)
    train, dev, test = classify.split(examples, spec)
    model = classify.train_baseline(train, dev, seed=seed)
    model_out.parent.mkdir(parents=True, exist_ok=True)
    model.save(model_out)
    backend = classify.BaselineBackend(model)
    items = [(f"test-{i}", ex.text) for i, ex in enumerate(test)]
    predictions = backend.score(items)
    gold = {f"test-{i}": ex.label for i, ex in enumerate(test)}
    metrics = classify.evaluate(predictions, gold)
    if metrics_out is not None:
        payload = metrics.as_dict()
        payload.update(
            {
                "n_train": len(train),
                "n_dev": len(dev),
                "n_test": len(test),
                "n_neutral_dropped": n_neutral,
                "seed": seed,
            }
        )
        metrics_out.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return metrics


def eval_backend_command(annotations: Path, backend, seed: int = 0) -> classify.EvalMetrics:
    """Score the held-out test split through any backend."""
    examples, _ = classify.load_annotations(annotations)
    _train, _dev, test = classify.split(examples, classify.SplitSpec(seed=seed))
    items = [(f"test-{i}", ex.text) for i, ex in enumerate(test)]
    predictions = backend.score(items)
    gold = {f"test-{i}": ex.label for i, ex in enumerate(test)}
    return classify.evaluate(predictions, gold)
