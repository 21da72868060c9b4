#!/usr/bin/env python3
"""Writes the forced evaluation corpus.

Every post gets its own synthetic vocabulary, so the only evidence close to it
is what is generated for it here. Fact-check articles repeat the post (entail)
or insert a negation (contradict) to force the Fact score to 0/25/50/75/100;
an entity post does the same for the Entity score (0/50/100). Authors are
unique, so the Source score stays at 50. The gold label is a fixed function of
Fact + Entity.
"""

import argparse
import json
import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aou"
ENDINGS = "kpt"
NEGATIONS = ["not", "never"]

BUCKETS = [
    ("True", 87, 100),
    ("Mostly true", 70, 86),
    ("Half true", 53, 69),
    ("Barely true", 37, 52),
    ("False", 21, 36),
    ("Pants on fire", 0, 20),
]

# entailing/contradicting article counts per Fact score; None = no article
FACT_MIX = {0: [(0, 1), (0, 2)], 25: [(1, 3)], 50: [(1, 1), None], 75: [(3, 1)], 100: [(1, 0), (2, 0)]}


def label_for(fact, entity):
    pct = 100.0 / (1.0 + math.exp(-0.03 * (fact + entity - 105)))
    r = math.floor(pct + 0.5)
    for name, low, high in BUCKETS:
        if low <= r <= high:
            return name
    raise AssertionError(pct)


class Words:
    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def word(self, syllables=3):
        while True:
            w = "".join(self.rng.choice(CONSONANTS) + self.rng.choice(VOWELS) for _ in range(syllables))
            w += self.rng.choice(ENDINGS)
            if w not in self.used:
                self.used.add(w)
                return w


def ts(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def negate(words, rng):
    out = list(words)
    out.insert(rng.randrange(1, len(out) + 1), rng.choice(NEGATIONS))
    return " ".join(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fixtures/forced")
    ap.add_argument("--posts", type=int, default=480)
    ap.add_argument("--entities", type=int, default=24)
    ap.add_argument("--seed", type=int, default=20201)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    words = Words(rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    labels = ["PER", "ORG", "GPE"]
    registry = {}
    entities = []
    for i in range(args.entities):
        first, last = words.word(2), words.word(2)
        name = f"{first.capitalize()} {last.capitalize()}"
        handle = f"@{first}{last}"
        registry[name] = {"aliases": [], "label": labels[i % 3], "handle": handle}
        entities.append((name, handle))

    start = datetime(2020, 1, 1, tzinfo=timezone.utc)
    articles, entity_posts = [], []
    splits = {"train": [], "test": []}
    combos = [(f, e) for f in (0, 25, 50, 75, 100) for e in (0, 50, 100)]

    for i in range(args.posts):
        fact, entity = combos[i % len(combos)]
        body = [words.word() for _ in range(8)]
        ent = None
        if entity != 50 or rng.random() < 0.5:
            ent = entities[rng.randrange(len(entities))]
            at = rng.randrange(0, len(body) + 1)
            body = body[:at] + ent[0].split() + body[at:]
        text = " ".join(body)
        t = start + timedelta(hours=i)
        pid = f"fp-{i:04d}"

        mix = rng.choice(FACT_MIX[fact])
        if mix is not None:
            entail, contradict = mix
            for k in range(entail):
                articles.append({"id": f"{pid}-a{k}", "claim_text": text, "author": "PolitiFact",
                                 "published_at": ts(t - timedelta(hours=rng.randint(1, 48))),
                                 "url": f"https://factcheck.example/{pid}/a{k}"})
            for k in range(contradict):
                articles.append({"id": f"{pid}-c{k}", "claim_text": negate(body, rng), "author": "PolitiFact",
                                 "published_at": ts(t - timedelta(hours=rng.randint(1, 48))),
                                 "url": f"https://factcheck.example/{pid}/c{k}"})
        if ent is not None and entity != 50:
            claim = text if entity == 100 else negate(body, rng)
            entity_posts.append({"id": f"{pid}-e", "handle": ent[1], "text": claim,
                                 "published_at": ts(t - timedelta(hours=rng.randint(1, 48))),
                                 "url": f"https://social.example/{ent[1][1:]}/{pid}"})

        record = {"id": pid, "content": text.capitalize() + ".", "author": f"user{i:04d}",
                  "published_at": ts(t), "label": label_for(fact, entity)}
        splits["train" if i % 2 == 0 else "test"].append(record)

    def write_jsonl(path, rows):
        with open(path, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False) + "\n")

    write_jsonl(out / "articles.jsonl", articles)
    write_jsonl(out / "entity_posts.jsonl", entity_posts)
    write_jsonl(out / "train.jsonl", splits["train"])
    write_jsonl(out / "test.jsonl", splits["test"])
    with open(out / "registry.json", "w", encoding="utf-8") as f:
        json.dump({"format": "exfake-registry", "version": 1, "entities": registry}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
