#!/usr/bin/env python3
"""Regenerate the bundled synthetic demo dataset (corpus, annotations,
policy CSV, run config). Deterministic for a fixed seed; the outputs are
committed so pipeline runs are byte-stable without rerunning this.

Usage: python scripts/generate_demo_data.py [--seed 20200112]
"""
from __future__ import annotations

import argparse
import csv
import json
import random
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

PKG_DATA = Path(__file__).resolve().parent.parent / "src" / "solsent" / "data"
DEMO_DIR = PKG_DATA / "demo"

POSITIVE_PHRASES = [
    "just installed a solar panel and the savings are amazing",
    "solar energy is the future and I love it",
    "our new solar power setup cut the bill in half, fantastic",
    "so proud of my rooftop solar panel, great investment",
    "solar power keeps winning, cheap and clean",
    "community solar energy program here is wonderful",
    "brilliant day for solar generation, panels humming",
    "finally got the solar battery hooked up, works great",
    "solar subsidies made our install affordable, thrilled",
    "love watching the meter run backwards, solar power rocks",
]
NEGATIVE_PHRASES = [
    "my solar panel broke again, terrible build quality",
    "solar energy is overhyped and overpriced junk",
    "the solar power company scammed my neighbor, awful",
    "solar panel quote was outrageous, waste of money",
    "grid fees ate all my solar generation credits, furious",
    "solar battery died in two years, garbage productized",
    "hate how ugly these solar panel farms look, ruined the view",
    "solar subsidies are a handout we cannot afford, angry",
    "cloudy week and the solar power output is pathetic",
    "solar thermal system leaks constantly, huge regret",
]
NEUTRAL_PHRASES = [
    "the utility released its annual solar energy report today",
    "solar panel inventory report published this quarter",
    "webinar on solar generation interconnection standards at noon",
]
STOPPHRASE_TEXTS = [
    "my solar plexus hurts after that yoga class",
    "watching the solar eclipse with Pokemon cards in hand",
    "Superman absorbs solar energy in the comics",
    "the galaxy brain take on solar power again",
]
IRRELEVANT_TEXTS = [
    "great weather for a picnic today",
    "traffic was brutal on the interstate",
    "new coffee shop opened downtown",
]
HASHTAG_DECOR = ["#GoSolar", "#SolarEnergy", "#cleanenergy", "#renewables"]
URL_DECOR = ["https://t.co/abc123", "https://example.com/solar", "pic.twitter.com/xyz9"]


def load_states() -> list[dict]:
    with open(PKG_DATA / "states.csv", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def load_cities() -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    with open(PKG_DATA / "cities.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["state_code"], []).append(row["city"])
    return out


def load_population() -> dict[str, int]:
    with open(PKG_DATA / "population.csv", newline="", encoding="utf-8") as fh:
        return {r["state_code"]: int(r["population"]) for r in csv.DictReader(fh)}


def make_policy(rng: random.Random, states: list[dict]) -> dict[str, dict]:
    rows = {}
    for st in states:
        code = st["code"]
        gen = round(rng.uniform(1.0, 67.0), 1)
        roll = rng.random()
        if roll < 0.60:
            target = round(min(95.0, gen + rng.uniform(4.0, 40.0)), 1)
            year = rng.randint(2025, 2045)
        elif roll < 0.75:
            target = round(max(0.5, gen - rng.uniform(0.5, 5.0)), 1)
            year = rng.choice([None, rng.randint(2015, 2019)])
        else:
            target, year = None, None
        rows[code] = {
            "state": code,
            "renewable_generation": gen,
            "rps_target_percent": "" if target is None else target,
            "rps_target_year": "" if year is None else year,
            "nem_mechanism": rng.choices([0, 1, 2, 3, 4], weights=[1, 1, 2, 2, 5])[0],
            "nem_cap": rng.randint(0, 1),
            "nem_subscriber": rng.randint(0, 1),
            "nem_compensation": rng.randint(0, 1),
            "nem_rollover": rng.choices([0, 1, 2], weights=[1, 2, 3])[0],
            "incentives_count": rng.randint(13, 217),
            "solar_jobs_per_million": round(rng.uniform(0.0, 2.0), 2),
            "electricity_price": round(rng.uniform(10.0, 33.0), 1),
            "solar_radiation": round(rng.uniform(3.0, 6.0), 2),
            "region": st["region"],
        }
    return rows


def positivity(policy_row: dict, rng: random.Random) -> float:
    """Latent per-state share of positive posts, tied to the covariates."""
    nem = sum(
        int(policy_row[f"nem_{c}"]) for c in ("mechanism", "cap", "subscriber",
                                              "compensation", "rollover")
    )
    target = policy_row["rps_target_percent"]
    year = policy_row["rps_target_year"]
    gen = policy_row["renewable_generation"]
    if target == "" or float(target) <= gen:
        rps = 0.0
    else:
        rps = (float(target) - gen) / (int(year) - 2019)
    z = (
        0.030 * nem
        + 0.05 * rps
        + 0.16 * float(policy_row["solar_jobs_per_million"])
        + 0.0007 * int(policy_row["incentives_count"])
        + rng.gauss(0.0, 0.06)
    )
    return min(0.95, max(0.25, 0.36 + z))


def decorate(text: str, rng: random.Random) -> str:
    if rng.random() < 0.3:
        text += " " + rng.choice(HASHTAG_DECOR)
    if rng.random() < 0.25:
        text += " " + rng.choice(URL_DECOR)
    if rng.random() < 0.1:
        text += " @solarfriend"
    return text


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=20200112)
    args = parser.parse_args()
    rng = random.Random(args.seed)

    DEMO_DIR.mkdir(parents=True, exist_ok=True)
    states = load_states()
    cities = load_cities()
    population = load_population()
    policy = make_policy(rng, states)

    with open(DEMO_DIR / "policy_synthetic.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(next(iter(policy.values())).keys()),
                                lineterminator="\n")
        writer.writeheader()
        for code in sorted(policy):
            writer.writerow(policy[code])

    # Annotations: shared phrase pools so the baseline transfers to the corpus.
    ann_rows = []
    for _ in range(320):
        ann_rows.append((decorate(rng.choice(POSITIVE_PHRASES), rng), "positive"))
    for _ in range(300):
        ann_rows.append((decorate(rng.choice(NEGATIVE_PHRASES), rng), "negative"))
    for phrase in NEUTRAL_PHRASES * 2:
        ann_rows.append((phrase, "neutral"))
    rng.shuffle(ann_rows)
    with open(DEMO_DIR / "annotations.tsv", "w", encoding="utf-8") as fh:
        fh.write("text\tlabel\n")
        for text, label in ann_rows:
            fh.write(f"{text}\t{label}\n")

    start = date(2020, 1, 12)
    end = date(2020, 7, 7)
    n_days = (end - start).days + 1
    dip = {date(2020, 3, 23), date(2020, 3, 24), date(2020, 3, 25)}

    lines: list[str] = []
    next_id = 1000

    def new_id() -> str:
        nonlocal next_id
        next_id += 1
        return f"t{next_id}"

    def timestamp(day: date) -> str:
        hh, mm, ss = rng.randint(0, 23), rng.randint(0, 59), rng.randint(0, 59)
        return datetime(day.year, day.month, day.day, hh, mm, ss,
                        tzinfo=timezone.utc).isoformat().replace("+00:00", "Z")

    for st in states:
        code = st["code"]
        n_posts = max(14, round(population[code] / 400_000))
        p_pos = positivity(policy[code], rng)
        outside_window = 0
        for _ in range(n_posts):
            day = start + timedelta(days=rng.randrange(n_days))
            p_here = p_pos * (0.40 if day in dip else 1.0)
            positive = rng.random() < p_here
            text = rng.choice(POSITIVE_PHRASES if positive else NEGATIVE_PHRASES)
            text = decorate(text, rng)
            is_rt = rng.random() < 0.15
            if is_rt:
                text = f"RT @user{rng.randint(1, 500)}: {text}"
            obj: dict = {
                "id": new_id(),
                "text": text,
                "screen_name": f"user{rng.randint(1, 5000)}",
                "user_description": "energy watcher",
                "created_at": timestamp(day),
                "is_retweet": is_rt,
            }
            locmode = rng.random()
            if locmode < 0.25:
                clat = float(st["centroid_lat"]) + rng.uniform(-0.02, 0.02)
                clon = float(st["centroid_lon"]) + rng.uniform(-0.02, 0.02)
                obj["lat"] = round(clat, 4)
                obj["lon"] = round(clon, 4)
            elif locmode < 0.70 and cities.get(code):
                obj["user_location"] = f"{rng.choice(cities[code])}, {code}"
            else:
                obj["user_location"] = st["name"]
            if rng.random() < 0.10:
                obj["quoted_text"] = rng.choice(POSITIVE_PHRASES if positive else NEGATIVE_PHRASES)
            lines.append(json.dumps(obj))
            if day not in dip:
                outside_window += 1
        assert outside_window >= 3, f"{code} lacks posts outside the exclusion window"

    # Noise: posts that exercise the filter and geolocation edge paths.
    noise: list[str] = []
    for _ in range(25):  # no keyword anywhere -> dropped at the keyword stage
        noise.append(json.dumps({
            "id": new_id(), "text": rng.choice(IRRELEVANT_TEXTS),
            "screen_name": f"user{rng.randint(1, 5000)}", "user_description": "",
            "created_at": timestamp(start + timedelta(days=rng.randrange(n_days))),
        }))
    for _ in range(15):  # stopphrase hits
        noise.append(json.dumps({
            "id": new_id(), "text": rng.choice(STOPPHRASE_TEXTS),
            "screen_name": f"user{rng.randint(1, 5000)}", "user_description": "",
            "created_at": timestamp(start + timedelta(days=rng.randrange(n_days))),
        }))
    for _ in range(12):  # keyword only in the profile
        noise.append(json.dumps({
            "id": new_id(), "text": rng.choice(IRRELEVANT_TEXTS),
            "screen_name": "SolarPanelPro", "user_description": "solar energy fan",
            "created_at": timestamp(start + timedelta(days=rng.randrange(n_days))),
        }))
    for _ in range(10):  # non-US and unresolvable posts
        obj = {
            "id": new_id(), "text": decorate(rng.choice(POSITIVE_PHRASES), rng),
            "screen_name": f"user{rng.randint(1, 5000)}", "user_description": "",
            "created_at": timestamp(start + timedelta(days=rng.randrange(n_days))),
            "user_location": rng.choice(["Toronto, Canada", "London", "Mars", "earthbound"]),
        }
        noise.append(json.dumps(obj))
    lines.extend(noise)
    rng.shuffle(lines)

    # Duplicates of real lines, plus malformed rows, appended at the end.
    dup_sources = [ln for ln in lines if '"user_location"' in ln][:8]
    lines.extend(dup_sources)
    lines.append('{"id": "broken", "text": ')
    lines.append(json.dumps({"id": "nocoords", "text": "solar power yes", "lat": 95.0, "lon": 0.0}))
    lines.append(json.dumps({"text": "solar power but no id"}))

    with open(DEMO_DIR / "corpus.jsonl", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    config = {
        "corpus": "corpus.jsonl",
        "annotations": "annotations.tsv",
        "policy": "policy_synthetic.csv",
        "keywords": "../keywords.txt",
        "stopphrases": "../stopphrases.txt",
        "gazetteer_dir": "..",
        "population": "../population.csv",
        "seed": 7,
    }
    (DEMO_DIR / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(f"wrote demo data to {DEMO_DIR} ({len(lines)} corpus lines)")


if __name__ == "__main__":
    main()
