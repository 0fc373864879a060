#!/usr/bin/env python3
# Copyright 2026 The vizpriv Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled adult-like census fixture (1000 rows, 8 columns).

Numerical columns are drawn around a few well separated centres so that the
elbow rule settles on a small number of bins. Each bundled pattern carries a
dependency that only exists inside its selected records.
"""

import argparse
import csv

import numpy as np

EDUCATION = ["HS-grad", "Some-college", "Bachelors", "Masters", "Doctorate"]
WORKCLASS = ["Private", "Self-emp", "Gov"]
SEX = ["Female", "Male"]
INCOME = ["<=50K", ">50K"]
DEGREES = ("Bachelors", "Masters", "Doctorate")


def generate(n, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        edu = EDUCATION[rng.choice(5, p=[0.4, 0.3, 0.1, 0.1, 0.1])]
        work = int(rng.integers(3))
        sex = int(rng.integers(2))
        income = int(rng.integers(2))
        # Weekly hours: driven by the degree inside the three degree bars, by
        # the work class everywhere else.
        if edu in DEGREES:
            level = DEGREES.index(edu)
            high = rng.random() < [0.05, 0.5, 0.95][level]
        else:
            high = rng.random() < [0.05, 0.95, 0.5][work]
        hours = rng.normal(55.0 if high else 30.0, 3.0)

        age = rng.uniform(20.0, 30.0) if rng.random() < 0.5 else rng.uniform(40.0, 60.0)
        # Older high earners form a capital-gain cluster; elsewhere the gain
        # follows sex.
        if age >= 50.0 and rng.random() < 0.8:
            gain = rng.normal(15000.0, 500.0)
        else:
            gain = rng.normal(15000.0 if (sex == 1) == (rng.random() < 0.9) else 2000.0, 500.0)
        # Tenure climbs with age over 25..45; outside it follows income.
        if 25.0 <= age <= 45.0:
            tenure = (age - 25.0) * 1.0 + rng.normal(0.0, 1.0)
        else:
            tenure = (18.0 if income == 1 else 3.0) + rng.normal(0.0, 1.0)
        rows.append([
            round(age, 1), WORKCLASS[work], edu, SEX[sex],
            round(float(np.clip(hours, 1, 99)), 1), round(float(np.clip(gain, 0, 20000)), 0),
            round(float(np.clip(tenure, 0, 40)), 1), INCOME[income],
        ])
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20260401)
    parser.add_argument("--out", default="adult_like.csv")
    args = parser.parse_args()
    header = ["age", "workclass", "education", "sex", "hours_per_week", "capital_gain",
              "tenure", "income"]
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(generate(args.rows, args.seed))


if __name__ == "__main__":
    main()
