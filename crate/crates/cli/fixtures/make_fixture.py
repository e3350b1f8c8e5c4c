"""Regenerates the synthetic fixture and the evaluation oracle.

Run from this directory: python3 make_fixture.py
"""
import json
import math

import numpy as np

YEARS = list(range(2000, 2022))
HOLDOUT = 3
# Predictor years past the last revenue observation, for `fiscast forecast`.
EXTRA = 2
rng = np.random.default_rng(20240601)
n = len(YEARS)


def walk(start, drift, sd, length=n):
    return start + np.cumsum(drift + sd * rng.standard_normal(length))


def ar1(phi, sd):
    e = np.zeros(n)
    for t in range(1, n):
        e[t] = phi * e[t - 1] + sd * rng.standard_normal()
    return e


wage_ext = walk(6000.0, 450.0, 150.0, n + EXTRA)
soc_ext = walk(2500.0, 160.0, 80.0, n + EXTRA)
wage, soc = wage_ext[:n], soc_ext[:n]
pit = 0.16 * wage + 0.12 * soc + ar1(0.4, 25.0)
mf_pit = pit * (1.0 + 0.04 + 0.03 * rng.standard_normal(n))

pi_nf = walk(9000.0, 700.0, 500.0)
pi_f = walk(800.0, 60.0, 40.0)
kd_ddd = 0.09 * pi_nf + 0.11 * pi_f + ar1(0.3, 30.0)
mf_kd = kd_ddd * (1.0 - 0.05 + 0.04 * rng.standard_normal(n))

prm = 1200.0 * np.exp(np.cumsum(0.06 + 0.03 * rng.standard_normal(n)))
dzp = 0.02 * prm ** 1.05 * np.exp(0.02 * rng.standard_normal(n))
mf_dzp = dzp * (1.0 + 0.08 + 0.05 * rng.standard_normal(n))

columns = {
    "PIT": pit, "WAGE": wage_ext, "SOC": soc_ext, "MF_PIT": mf_pit,
    "KD_DDD": kd_ddd, "PI_NF": pi_nf, "PI_F": pi_f, "MF_KD_DDD": mf_kd,
    "DZP": dzp, "PRM": prm, "MF_DZP": mf_dzp,
}
rounded = {k: [round(float(v), 2) for v in vals] for k, vals in columns.items()}

with open("synthetic.csv", "w") as f:
    f.write("year,series,value\n")
    for name, vals in rounded.items():
        years = range(YEARS[0], YEARS[0] + len(vals))
        for year, v in zip(years, vals):
            f.write(f"{year},{name},{v:.2f}\n")


def table(actual, forecast):
    n = len(actual)
    me = mae = smae = sse = sa = sf = 0.0
    for a, f in zip(actual, forecast):
        e = f - a
        me += e
        mae += abs(e)
        smae += abs(e) / ((abs(a) + abs(f)) / 2.0)
        sse += e * e
        sa += a * a
        sf += f * f
    rmse = math.sqrt(sse / n)
    u1 = rmse / (math.sqrt(sa / n) + math.sqrt(sf / n))
    return {"n": n, "me": me / n, "mae": mae / n, "smae": smae / n, "rmse": rmse, "theil_u1": u1}


oracle = {}
for tax, target, mf in [("PIT", "PIT", "MF_PIT"), ("KD_DDD", "KD_DDD", "MF_KD_DDD"), ("DZP", "DZP", "MF_DZP")]:
    oracle[tax] = table(rounded[target][-HOLDOUT:], rounded[mf][-HOLDOUT:])
    oracle[tax]["first_year"] = YEARS[-HOLDOUT]

with open("evaluate_oracle.json", "w") as f:
    json.dump(oracle, f, indent=2)
    f.write("\n")
