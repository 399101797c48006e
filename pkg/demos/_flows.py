"""Synthetic flow-feature CSV shared by the demo scripts."""

import csv

import numpy as np

CLASSES = ("BenignTraffic", "DDoS-UDP_Flood", "Mirai-greeth_flood")


def write_flows(path, n_rows=1500, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, len(CLASSES), n_rows)
    rate = np.array([50.0, 9000.0, 2500.0])[y] * rng.lognormal(0, 0.3, n_rows)
    duration = np.array([30.0, 0.5, 4.0])[y] * rng.lognormal(0, 0.4, n_rows)
    syn = rng.binomial(1, np.array([0.05, 0.1, 0.6])[y])
    size = np.array([600.0, 60.0, 300.0])[y] + rng.normal(0, 40, n_rows)
    proto = np.where(y == 1, "UDP", np.where(rng.random(n_rows) < 0.8, "TCP", "UDP"))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["flow_duration", "rate", "syn_flag_number", "tot_size", "protocol", "label"])
        for i in range(n_rows):
            row = [repr(float(duration[i])), repr(float(rate[i])), str(int(syn[i])), repr(float(size[i])), proto[i], CLASSES[y[i]]]
            if i % 97 == 0:
                row[1] = "inf"  # capture tools emit these for zero-length flows
            w.writerow(row)
            if i % 50 == 0:
                w.writerow(row)  # exact duplicate record
    return path
