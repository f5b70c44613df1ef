"""How often does auto_fit climb past (1, 1) on noisy low-temperature data?"""

import argparse
from collections import Counter

import numpy as np

from flangewear.regress import Observation, TrainingDatabase, auto_fit, fit_surface, low_temperature_surface, predict_many


def sample(n, seed, sigma):
    rng = np.random.default_rng(seed)
    v, t = rng.uniform(0, 10, n), rng.uniform(20, 75, n)
    d = predict_many(low_temperature_surface(), v, t) + rng.normal(0, sigma, n)
    return [Observation(float(k), float(a), float(b), float(c)) for k, (a, b, c) in enumerate(zip(v, t, d))]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--sigma", type=float, default=0.05)
    ap.add_argument("--threshold", type=float, default=0.975)
    args = ap.parse_args()

    picks, r11 = Counter(), []
    for seed in range(args.trials):
        obs = sample(200, 1000 + seed, args.sigma)
        m = auto_fit(TrainingDatabase(obs), threshold_r=args.threshold)
        picks[(m.order_v, m.order_t)] += 1
        r11.append(fit_surface(obs, 1, 1).metrics.correlation_r)
    print(f"orders chosen over {args.trials} trials: {dict(picks)}")
    print(f"(1, 1) correlation r: min {min(r11):.4f}  mean {np.mean(r11):.4f}  threshold {args.threshold}")


if __name__ == "__main__":
    main()
