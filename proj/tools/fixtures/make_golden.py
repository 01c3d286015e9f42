#!/usr/bin/env python3
"""Writes the 6-variable golden panel used by the end-to-end tests.

sanitation drives child_mortality (beta = -1.5) under a shared confounder;
groundwater_depth and sewerage_investment are valid instruments for
sanitation; literacy_rate and road_density are unrelated noise.
"""
import argparse
import random


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="golden.csv")
    parser.add_argument("--seed", type=int, default=20240601)
    parser.add_argument("--entities", type=int, default=20)
    parser.add_argument("--years", type=int, default=60)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    rows = []
    for e in range(args.entities):
        entity = "d%02d" % (e + 1)
        t_prev = 0.0
        for k in range(args.years + 20):
            z1 = rng.gauss(0, 1)
            z2 = rng.gauss(0, 1)
            u = rng.gauss(0, 1)
            t = 0.6 * t_prev + 0.5 * z1 + 0.5 * z2 + 0.6 * u + rng.gauss(0, 0.5)
            y = -1.5 * t + 0.6 * u + rng.gauss(0, 0.5)
            lit = rng.gauss(0, 1)
            road = rng.gauss(0, 1)
            t_prev = t
            if k < 20:
                continue
            year = 1960 + k - 20
            for name, value in (("sanitation", t), ("child_mortality", y), ("groundwater_depth", z1),
                                ("sewerage_investment", z2), ("literacy_rate", lit), ("road_density", road)):
                rows.append("%s,%d,%s,%.6f" % (entity, year, name, value))

    with open(args.out, "w") as f:
        f.write("entity,year,variable,value\n")
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
