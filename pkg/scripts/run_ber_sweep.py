#!/usr/bin/env python3
"""Full RASK/ERASK BER sweep on the two-user cavity scenario.

Sweeps both schemes over pulse spacings 5/15/30 and the 0..30 dB SNR grid
(10 trials, 1e4 bits per point), streams the records to results/ber/, and
prints median BER per (scheme, spacing, SNR) for a quick look.
"""

import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from trlink.harness import load_scenario, run_ber_sweep  # noqa: E402


def main() -> int:
    scenario = load_scenario(ROOT / "scenarios" / "two_user.json")
    out_dir = ROOT / "results" / "ber"
    records = run_ber_sweep(scenario, out_dir)

    grouped = defaultdict(list)
    for record in records:
        grouped[(record.scheme, record.d, record.snr_db)].append(record.ber)
    print(f"{'scheme':<8}{'D':>4}  " + "  ".join(f"{s:>8.0f}dB" for s in scenario.snr_grid_db))
    for scheme in scenario.schemes:
        for spacing in scenario.d_values:
            medians = [
                np.median(grouped[(scheme.value, spacing, snr)])
                for snr in scenario.snr_grid_db
            ]
            cells = "  ".join(f"{m:>10.2e}" for m in medians)
            print(f"{scheme.value:<8}{spacing:>4}  {cells}")
    print(f"records written to {out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
