#!/usr/bin/env python3
"""Regenerate data/social_network_ads.csv.

The first five rows are fixed; the remaining rows are drawn from a seeded
generator so the file is reproducible byte for byte.
"""
import random
import sys

HEADER = "User ID,Gender,Age,EstimatedSalary,Purchased"
FIXED = [
    (15624510, "Male", 19, 19000, 0),
    (15810944, "Male", 35, 20000, 0),
    (15686575, "Female", 26, 43000, 0),
    (15603246, "Female", 27, 57000, 0),
    (15804002, "Male", 19, 76000, 0),
]


def purchase_probability(age, salary):
    if age >= 46:
        return 0.90
    if age >= 36 and salary >= 88000:
        return 0.90
    return 0.05


def main(path):
    rng = random.Random(20200401)
    used = {r[0] for r in FIXED}
    rows = list(FIXED)
    while len(rows) < 400:
        uid = rng.randint(15566000, 15815000)
        if uid in used:
            continue
        used.add(uid)
        gender = rng.choice(["Male", "Female"])
        age = min(60, max(18, int(round(rng.gauss(37.5, 10.5)))))
        salary = min(150000, max(15000, int(round(rng.gauss(70000, 34000), -3))))
        purchased = 1 if rng.random() < purchase_probability(age, salary) else 0
        rows.append((uid, gender, age, salary, purchased))
    with open(path, "w", newline="\n") as f:
        f.write(HEADER + "\n")
        for r in rows:
            f.write(",".join(str(v) for v in r) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/social_network_ads.csv")
