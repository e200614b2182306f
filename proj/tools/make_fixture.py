#!/usr/bin/env python3
# Copyright 2026 The Civic Sense Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates data/study_fixture.json (deterministic).

53 reports in three neighbourhood clusters of roughly 1 km square. Garbage is fixed at 18
reports (34%); the split of the other categories is arbitrary.
"""

import json
import math
import random
import sys

AREAS = [
    ("Dhanmondi", 23.7465, 90.3760),
    ("Mirpur", 23.8223, 90.3654),
    ("Jatrabari", 23.7104, 90.4348),
]
COUNTS = [("garbage", 18), ("water", 10), ("air", 9), ("noise", 6), ("visual", 4), ("other", 4), ("light", 2)]
TEXTS = {
    "garbage": ["bins left full by the road", "rubbish piled at the corner", "waste dumped beside the drain"],
    "water": ["drain overflowing after rain", "street flooded for days", "oily water in the lake"],
    "air": ["smoke from brick kilns", "dust from construction site", "burning plastic nearby"],
    "noise": ["loudspeakers all night", "generator noise", "horns at the junction"],
    "visual": ["posters covering the wall", "tangled cables overhead"],
    "light": ["floodlight pointing at homes"],
    "other": ["open manhole", "dead animal on the road"],
}
HALF_SPAN = 0.0045  # degrees; about 1 km across at this latitude
CELL = 0.005


def components(points):
    cells = {(math.floor(lat / CELL), math.floor(lon / CELL)) for lat, lon in points}
    seen, count = set(), 0
    for c in cells:
        if c in seen:
            continue
        count += 1
        stack = [c]
        seen.add(c)
        while stack:
            r, k = stack.pop()
            for dr in (-1, 0, 1):
                for dk in (-1, 0, 1):
                    n = (r + dr, k + dk)
                    if n in cells and n not in seen:
                        seen.add(n)
                        stack.append(n)
    return count


def main():
    rng = random.Random(2016)
    labels = [cat for cat, n in COUNTS for _ in range(n)]
    rng.shuffle(labels)
    reports = []
    for i, cat in enumerate(labels):
        area, lat0, lon0 = AREAS[i % 3]
        lat = round(lat0 + rng.uniform(-HALF_SPAN, HALF_SPAN), 6)
        lon = round(lon0 + rng.uniform(-HALF_SPAN, HALF_SPAN), 6)
        reports.append({"area": area, "categories": [cat], "lat": lat, "lon": lon,
                        "text": rng.choice(TEXTS[cat])})
    assert len(reports) == 53
    assert components([(r["lat"], r["lon"]) for r in reports]) == 3
    doc = {
        "description": "Pilot-study replica: 53 reports around Dhanmondi, Mirpur and Jatrabari.",
        "notes": "Garbage share fixed at 18/53; other category counts are arbitrary placeholders.",
        "category_counts": dict(COUNTS),
        "reports": reports,
    }
    json.dump(doc, sys.stdout, indent=1, ensure_ascii=False)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
