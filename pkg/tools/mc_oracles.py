"""Monte-Carlo oracles for the chi-square numerics and the disk-probability
operation, run once with a pinned seed BEFORE the analytic implementations
were written. The printed constants are frozen into the test suite; rerun
this script to regenerate them.

Usage: python3 tools/mc_oracles.py
"""

from __future__ import annotations

import math

import numpy as np

SEED = 20260816
N_CHI2 = 10_000_000
N_DISK = 1_000_000
CHUNK = 1_000_000

# (x, lambda) grid for the noncentral CDF with 2 degrees of freedom,
# plus the single documented example point (4, 1)
GRID_X = (0.5, 2.0, 8.0, 32.0)
GRID_LAM = (0.0, 1.0, 4.0, 16.0)
EXTRA_POINTS = ((4.0, 1.0),)


def ncx2_cdf_mc(x: float, lam: float, n: int,
                rng: np.random.Generator) -> tuple[float, float]:
    """P(||Z||^2 <= x), Z ~ N((sqrt(lam), 0), I2), with its standard error."""
    hits = 0
    mean = np.array([math.sqrt(lam), 0.0])
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        z = rng.standard_normal((m, 2)) + mean
        hits += int(np.count_nonzero(z[:, 0] ** 2 + z[:, 1] ** 2 <= x))
        done += m
    p = hits / n
    se = math.sqrt(max(p * (1 - p), 1e-12) / n)
    return p, se


def disk_prob_mc(sep: float, sigma_i: float, sigma_j: float, d: float,
                 n: int, rng: np.random.Generator) -> tuple[float, float]:
    """P(||P_i - P_j|| <= d) for P_i ~ N((0,0), sigma_i^2 I),
    P_j ~ N((sep,0), sigma_j^2 I), with its standard error."""
    hits = 0
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        pi = rng.standard_normal((m, 2)) * sigma_i
        pj = rng.standard_normal((m, 2)) * sigma_j + np.array([sep, 0.0])
        diff = pi - pj
        hits += int(np.count_nonzero(diff[:, 0] ** 2 + diff[:, 1] ** 2
                                     <= d * d))
        done += m
    p = hits / n
    se = math.sqrt(max(p * (1 - p), 1e-12) / n)
    return p, se


def main() -> None:
    rng = np.random.default_rng(SEED)
    print(f"# generated by tools/mc_oracles.py, seed={SEED}, "
          f"n_chi2={N_CHI2}, n_disk={N_DISK}")
    print("NCX2_MC = {")
    points = [(x, lam) for x in GRID_X for lam in GRID_LAM]
    points += list(EXTRA_POINTS)
    for x, lam in points:
        p, se = ncx2_cdf_mc(x, lam, N_CHI2, rng)
        print(f"    ({x}, {lam}): ({p:.7f}, {se:.3e}),")
    print("}")
    print("DISK_MC = {")
    for sep, si, sj, d, n in (
            (450.0, 20.0, 20.0, 500.0, N_DISK),
            (2000.0, 10.0, 10.0, 500.0, N_DISK)):
        p, se = disk_prob_mc(sep, si, sj, d, n, rng)
        print(f"    ({sep}, {si}, {sj}, {d}): ({p:.7f}, {se:.3e}),")
    print("}")


if __name__ == "__main__":
    main()
