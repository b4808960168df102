"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with:  pytest tests/test_acceptance.py -v -s
"""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from solsent import cli
from solsent.aggregate import national_average, state_scores, wilson_interval
from solsent.classify import (
    AnnotatedExample,
    SentimentPrediction,
    SplitSpec,
    split,
    train_baseline,
)
from solsent.geolocate import resolve
from solsent.ingest import RawPost, run_filter_chain
from solsent.policyindex import NemComponents, RpsInput, nem_score, rps_score
from solsent.stats import CollinearityError, bartlett, oneway_anova, ols, vif


def criterion(name: str, checks: list[tuple[str, bool]], detail: str = "") -> None:
    failed = [label for label, ok in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    print(f"[acceptance] {name}: {status}" + (f" ({detail})" if detail else ""))
    assert not failed, f"{name}: failing checks: {failed}"


def test_eq1_rps_oracle_suite():
    """Twelve RPS cases match exact rational arithmetic; runtime < 1s."""
    t0 = time.perf_counter()
    # (generation, target, year) -> expected, via Fraction; None target = no RPS
    cases = [
        ((12.0, None, None), Fraction(0)),            # no RPS
        ((30.0, 25.0, 2030), Fraction(0)),            # already achieved
        ((30.0, 10.0, None), Fraction(0)),            # achieved, no target year
        ((20.0, 50.0, 2030), Fraction(30, 11)),
        ((0.0, 100.0, 2045), Fraction(100, 26)),
        ((5.5, 30.5, 2025), Fraction(25, 6)),
        ((10.0, 10.5, 2050), Fraction(1, 62)),
        ((0.0, 1.0, 2020), Fraction(1, 1)),
        ((99.0, 100.0, 2040), Fraction(1, 21)),
        ((25.0, 75.0, 2035), Fraction(50, 16)),
        ((40.0, 60.0, 2021), Fraction(20, 2)),
        ((33.25, 52.75, 2032), Fraction('19.5') / 13),
    ]
    checks = []
    for (gen, target, year), expected in cases:
        got = rps_score(RpsInput(generation_2019=gen, target_percent=target, target_year=year))
        checks.append((f"rps({gen},{target},{year})", got == float(expected)))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime<1s", elapsed < 1.0))
    criterion("eq1-rps-oracle", checks, f"12 cases in {elapsed:.4f}s")


def test_eq2_nem_exhaustive():
    """All 120 component combinations equal the brute-force sum; range 0..9."""
    combos = list(itertools.product(range(5), range(2), range(2), range(2), range(3)))
    scores = [nem_score(NemComponents(*c)) for c in combos]
    checks = [
        ("120 combinations", len(combos) == 120),
        ("equals brute-force sum", scores == [sum(c) for c in combos]),
        ("min is 0", min(scores) == 0),
        ("max is 9", max(scores) == 9),
    ]
    criterion("eq2-nem-exhaustive", checks)


def _resolution(pid, state):
    from solsent.geolocate import GeoResolution

    return GeoResolution(pid, state, "coordinates")


def test_aggregation_oracle():
    """10k synthetic posts over 51 states; Wilson MC coverage in [93%, 97%]."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    states = [f"S{i:02d}" for i in range(51)]
    counts = rng.multinomial(10_000 - 51 * 20, [1 / 51] * 51) + 20
    preds, resolutions, plan = [], {}, {}
    for state, n in zip(states, counts):
        k = int(rng.integers(0, n + 1))
        plan[state] = (k, int(n))
        for i in range(n):
            pid = f"{state}:{i}"
            label = "positive" if i < k else "negative"
            preds.append(SentimentPrediction(pid, float(i < k), label, "synthetic"))
            resolutions[pid] = _resolution(pid, state)
    population = {s: 2_000_000 for s in states}
    rows = state_scores(preds, resolutions, population)

    score_ok = all(
        abs(row.score - 10.0 * plan[row.state][0] / plan[row.state][1]) <= 1e-12
        for row in rows
    )
    total_k = sum(k for k, _ in plan.values())
    total_n = sum(n for _, n in plan.values())
    tweetw = national_average(preds, resolutions, "tweet_weighted")
    statem = national_average(preds, resolutions, "state_mean")
    brute_sm = sum(10.0 * k / n for k, n in plan.values()) / 51

    draws = rng.binomial(100, 0.8, size=2000)
    covered = 0
    for k in draws:
        lo, hi = wilson_interval(int(k), 100)
        covered += lo <= 0.8 <= hi
    coverage = covered / 2000
    elapsed = time.perf_counter() - t0
    checks = [
        ("n posts = 10000", total_n == 10_000),
        ("state scores within 1e-12", score_ok),
        ("tweet-weighted matches brute force", abs(tweetw - 10.0 * total_k / total_n) <= 1e-12),
        ("state-mean matches brute force", abs(statem - brute_sm) <= 1e-12),
        ("coverage in [0.93, 0.97]", 0.93 <= coverage <= 0.97),
        ("runtime<30s", elapsed < 30.0),
    ]
    criterion("aggregation-oracle", checks, f"coverage={coverage:.4f}, {elapsed:.2f}s")


def test_ols_equivalence_100_instances():
    """100 random n=51,k=7 fits match the normal-equations + sandwich oracle."""
    rng = np.random.default_rng(51)
    rel = lambda a, b: float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
    worst = {"coef": 0.0, "se_c": 0.0, "se_r": 0.0, "r2": 0.0, "vif": 0.0}
    for _ in range(100):
        X = rng.normal(size=(51, 7)) * rng.uniform(0.2, 5.0, size=7) + rng.normal(size=7)
        y = X @ rng.normal(size=7) + rng.normal(size=51) * rng.uniform(0.5, 2.0)
        res = ols(y, X)

        D = np.column_stack([np.ones(51), X])
        xtx_inv = np.linalg.inv(D.T @ D)
        beta = xtx_inv @ D.T @ y
        e = y - D @ beta
        df = 51 - 8
        se_c = np.sqrt(np.diag((e @ e) / df * xtx_inv))
        se_r = np.sqrt(np.diag(xtx_inv @ (D.T @ np.diag(e**2) @ D) @ xtx_inv * 51 / df))
        r2 = 1.0 - (e @ e) / np.sum((y - y.mean()) ** 2)

        worst["coef"] = max(worst["coef"], rel(res.coef, beta))
        worst["se_c"] = max(worst["se_c"], rel(res.se_classical, se_c))
        worst["se_r"] = max(worst["se_r"], rel(res.se_robust, se_r))
        worst["r2"] = max(worst["r2"], abs(res.r_squared - r2) / abs(r2))

        vifs = vif(X)
        for j, v in enumerate(vifs):
            others = np.delete(X, j, axis=1)
            Do = np.column_stack([np.ones(51), others])
            bo = np.linalg.lstsq(Do, X[:, j], rcond=None)[0]
            eo = X[:, j] - Do @ bo
            r2j = 1.0 - (eo @ eo) / np.sum((X[:, j] - X[:, j].mean()) ** 2)
            worst["vif"] = max(worst["vif"], abs(v - 1.0 / (1.0 - r2j)))

    x = rng.normal(size=51)
    collinear_raised = False
    try:
        ols(rng.normal(size=51), np.column_stack([x, x * 3.0, rng.normal(size=51)]))
    except CollinearityError:
        collinear_raised = True
    checks = [
        ("coefficients rel 1e-8", worst["coef"] < 1e-8),
        ("classical SEs rel 1e-8", worst["se_c"] < 1e-8),
        ("HC1 robust SEs rel 1e-8", worst["se_r"] < 1e-8),
        ("R2 rel 1e-8", worst["r2"] < 1e-8),
        ("VIF within 1e-10", worst["vif"] < 1e-10),
        ("collinear design raises rank error", collinear_raised),
    ]
    criterion("ols-equivalence", checks, f"worst rel err {max(worst.values()):.2e}")


def test_anova_bartlett_bonferroni():
    """df=(3,47), F vs hand sums of squares, Bonferroni cap, Bartlett oracle."""
    rng = np.random.default_rng(47)
    groups = {
        "Midwest": list(rng.normal(7.2, 0.8, size=12)),
        "Northeast": list(rng.normal(8.2, 0.6, size=9)),
        "South": list(rng.normal(7.0, 0.9, size=17)),
        "West": list(rng.normal(7.6, 0.7, size=13)),
    }
    res = oneway_anova(groups)
    allv = [v for g in groups.values() for v in g]
    grand = sum(allv) / len(allv)
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups.values())
    ssw = sum(sum((v - sum(g) / len(g)) ** 2 for v in g) for g in groups.values())
    f_hand = (ssb / 3) / (ssw / 47)

    bonferroni_ok = all(
        abs(c.bonferroni_p - min(1.0, 6 * c.raw_p)) <= 1e-15 for c in res.pairwise
    )

    var_groups = {
        "narrow": list(rng.normal(0.0, 1.0, size=25)),
        "wide": list(rng.normal(0.0, 10.0, size=20)),  # variance ratio 100
    }
    stat, df, _p = bartlett(var_groups)
    sizes = {k: len(v) for k, v in var_groups.items()}
    variances = {k: float(np.var(v, ddof=1)) for k, v in var_groups.items()}
    n, k = sum(sizes.values()), 2
    sp2 = sum((sizes[g] - 1) * variances[g] for g in var_groups) / (n - k)
    num = (n - k) * math.log(sp2) - sum(
        (sizes[g] - 1) * math.log(variances[g]) for g in var_groups
    )
    corr = 1 + (sum(1 / (sizes[g] - 1) for g in var_groups) - 1 / (n - k)) / (3 * (k - 1))

    checks = [
        ("df = (3, 47)", (res.df_between, res.df_within) == (3, 47)),
        ("51 observations", len(allv) == 51),
        ("F matches hand SS to 1e-10", abs(res.f_stat - f_hand) <= 1e-10),
        ("all 6 pairs present", len(res.pairwise) == 6),
        ("Bonferroni p = min(1, 6*raw)", bonferroni_ok),
        ("Bartlett matches textbook to 1e-10", abs(stat - num / corr) <= 1e-10),
        ("Bartlett df", df == 1),
    ]
    criterion("anova-bartlett-bonferroni", checks, f"F={res.f_stat:.4f}")


def test_filter_chain_planted_corpus():
    """200 planted posts yield exactly the hand-enumerated retained set."""
    rng = np.random.default_rng(200)
    plan = []  # (category, post)
    for i in range(120):
        plan.append(("clean", RawPost(id=f"c{i:03d}", text=f"solar panel note {i}")))
    for i in range(25):
        plan.append(("nokeyword", RawPost(id=f"n{i:03d}", text=f"weather chat {i}")))
    for i in range(20):
        plan.append(("stopphrase", RawPost(id=f"s{i:03d}",
                                           text=f"solar energy eclipse viewing {i}")))
    for i in range(15):
        plan.append(
            ("profileonly",
             RawPost(id=f"p{i:03d}", text=f"morning run {i}", screen_name="SolarPanelPro",
                     user_description="solar energy fan"))
        )
    order = rng.permutation(len(plan))
    shuffled = [plan[i] for i in order]
    # duplicates: copies of the first 20 clean posts in shuffled order
    clean_in_order = [p for cat, p in shuffled if cat == "clean"]
    shuffled += [("dup", p) for p in clean_in_order[:20]]
    assert len(shuffled) == 200

    # hand enumeration from the plan alone (no filter logic reused)
    expected, seen = [], set()
    for cat, post in shuffled:
        if cat in ("clean", "dup") and post.id not in seen:
            seen.add(post.id)
            expected.append(post.id)

    retained, report = run_filter_chain([p for _, p in shuffled])
    checks = [
        ("retained ids match enumeration", [p.id for p in retained] == expected),
        ("n_input", report.n_input == 200),
        ("n_keyword_matched", report.n_keyword_matched == 120 + 20 + 20),
        ("n_excluded_irrelevant", report.n_excluded_irrelevant == 20),
        ("n_excluded_profile_only", report.n_excluded_profile_only == 0),
        ("n_deduped", report.n_deduped == 20),
        ("n_retained", report.n_retained == 120),
        ("report reconciles", report.reconciles()),
    ]
    criterion("filter-chain-planted-corpus", checks, f"retained {len(retained)}")


PROFILE_FIXTURE = [
    ("Denver, CO", "CO"), ("denver, co", "CO"), ("Boulder, Colorado", "CO"),
    ("Austin, TX", "TX"), ("Austin TX", "TX"), ("Houston, Texas", "TX"),
    ("Brooklyn, New York, USA", "NY"), ("NYC", "NY"), ("upstate New York", "NY"),
    ("New York City", "NY"), ("Buffalo, NY", "NY"),
    ("Los Angeles, CA", "CA"), ("Calif.", "CA"), ("sunny California", "CA"),
    ("San Francisco, California", "CA"), ("Fresno", "CA"),
    ("Chicago", "IL"), ("Chicago, IL", "IL"), ("Springfield", "MO"),
    ("Washington, DC", "DC"), ("washington d.c.", "DC"), ("Washington", "WA"),
    ("Washington State", "WA"), ("Seattle, WA", "WA"), ("Tacoma", "WA"),
    ("Portland", "OR"), ("Portland, ME", "ME"), ("Bangor, Maine", "ME"),
    ("Muncie, IN", "IN"), ("Indianapolis", "IN"), ("OR", "unknown"),
    ("IN", "unknown"), ("ME", "unknown"), ("HI", "unknown"), ("DE", "unknown"),
    ("OK", "unknown"), ("TX", "TX"), ("WY", "WY"), ("tx", "unknown"),
    ("Kansas City", "MO"), ("Kansas City, KS", "KS"), ("Columbus", "OH"),
    ("Columbus, GA", "GA"), ("Augusta", "GA"), ("Augusta, ME", "ME"),
    ("Charleston", "SC"), ("Charleston, WV", "WV"), ("West Virginia", "WV"),
    ("Virginia", "VA"), ("Jackson", "MS"), ("Jackson, WY", "WY"),
    ("Toronto, Canada", "non_us"), ("London", "non_us"), ("London, KY", "KY"),
    ("Paris", "non_us"), ("Paris, TX", "TX"), ("Mumbai, India", "non_us"),
    ("USA", "unknown"), ("United States", "unknown"), ("planet earth", "unknown"),
]

COORDINATE_FIXTURE = [
    (39.74, -104.99, "CO"), (38.58, -121.49, "CA"), (30.27, -97.74, "TX"),
    (28.54, -81.38, "FL"), (39.96, -83.00, "OH"), (33.75, -84.39, "GA"),
    (33.45, -112.07, "AZ"), (40.76, -111.89, "UT"), (43.62, -116.20, "ID"),
    (37.69, -97.34, "KS"), (40.93, -98.34, "NE"), (44.98, -93.27, "MN"),
    (43.04, -87.91, "WI"), (35.47, -97.52, "OK"), (61.22, -149.90, "AK"),
    (21.31, -157.86, "HI"), (38.90, -77.03, "DC"), (44.26, -72.58, "VT"),
    (48.85, 2.35, "non_us"), (26.0, -92.0, "unknown"),
]


def test_geolocation_fixture(gazetteer):
    """60 profile strings + 20 coordinate pairs + 51 centroids, 100% agreement."""
    assert len(PROFILE_FIXTURE) == 60
    assert len(COORDINATE_FIXTURE) == 20
    profile_misses = [
        (loc, want, resolve(loc, None, None, gazetteer).outcome)
        for loc, want in PROFILE_FIXTURE
        if resolve(loc, None, None, gazetteer).outcome != want
    ]
    coord_misses = [
        (lat, lon, want, resolve(None, lat, lon, gazetteer).outcome)
        for lat, lon, want in COORDINATE_FIXTURE
        if resolve(None, lat, lon, gazetteer).outcome != want
    ]
    centroid_misses = [
        code
        for code in gazetteer.codes
        if resolve(None, *gazetteer.centroids[code], gazetteer).outcome != code
    ]
    precedence = resolve("Miami, FL", 39.74, -104.99, gazetteer)
    checks = [
        ("60 profile strings agree", not profile_misses),
        ("20 coordinate pairs agree", not coord_misses),
        ("51 centroids resolve home", not centroid_misses),
        ("coordinates beat conflicting profile",
         (precedence.outcome, precedence.method) == ("CO", "coordinates")),
    ]
    criterion(
        "geolocation-fixture", checks,
        f"misses: {profile_misses or ''}{coord_misses or ''}{centroid_misses or ''}",
    )


def _separable_corpus(n=1000, seed=99):
    rng = np.random.default_rng(seed)
    pos_vocab = [f"glad{i}" for i in range(60)]
    neg_vocab = [f"grim{i}" for i in range(60)]
    out = []
    for _ in range(n):
        positive = bool(rng.integers(2))
        vocab = pos_vocab if positive else neg_vocab
        words = [vocab[int(j)] for j in rng.integers(0, 60, size=9)]
        out.append(AnnotatedExample(" ".join(words), "positive" if positive else "negative"))
    return out


def test_baseline_classifier_separable():
    """>=95% accuracy on 1,000 disjoint-vocabulary examples, <30s, deterministic."""
    examples = _separable_corpus()
    train, dev, test = split(examples, SplitSpec(seed=5))
    t0 = time.perf_counter()
    model = train_baseline(train, dev, seed=5)
    elapsed = time.perf_counter() - t0
    predictions = model.predict([e.text for e in test])
    accuracy = float(np.mean([p == e.label for p, e in zip(predictions, test)]))

    model_again = train_baseline(train, dev, seed=5)
    same_weights = (
        model.vocabulary_ == model_again.vocabulary_
        and np.array_equal(model.weights_, model_again.weights_)
        and model.bias_ == model_again.bias_
    )
    checks = [
        ("test accuracy >= 0.95", accuracy >= 0.95),
        ("training < 30s", elapsed < 30.0),
        ("deterministic refit", same_weights),
    ]
    criterion("baseline-classifier", checks, f"accuracy={accuracy:.4f} in {elapsed:.2f}s")


def test_end_to_end_determinism(tmp_path, demo_dir):
    """Two seeded pipeline runs produce byte-identical CSVs + the A1 rerun."""
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        code = cli.main(
            [
                "pipeline",
                "--config", str(demo_dir / "config.json"),
                "--output-dir", str(out),
                "--exclude-start", "2020-03-23",
                "--exclude-end", "2020-03-25",
                "--seed", "7",
            ]
        )
        assert code == 0
        outs.append(out)
    csvs = ["state_scores.csv", "daily_series.csv", "table2.csv", "table3.csv",
            "table3_excl.csv"]
    identical = {
        name: (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        for name in csvs
    }
    checks = [(f"{name} byte-identical", ok) for name, ok in identical.items()]
    checks.append(
        ("exclusion-window rerun table present", (outs[0] / "table3_excl.csv").exists())
    )
    svg_identical = all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
        for n in ("map.svg", "bars.svg", "trend.svg")
    )
    checks.append(("SVGs byte-identical", svg_identical))
    criterion("end-to-end-determinism", checks)
