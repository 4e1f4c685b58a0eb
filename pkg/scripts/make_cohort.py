#!/usr/bin/env python3
"""Generate a synthetic arm-curl cohort (trial CSVs + manifest).

Healthy participants perform time-warped copies of a bimodal velocity
template; patients perform amplitude-degraded versions with per-participant
severity, unless --null is given (patients then copy healthy trials, so no
group difference exists). Useful as pipeline input for demos and benchmarks.
"""

import argparse
from pathlib import Path

from motionshape.synthetic import write_cohort


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, required=True, help="cohort directory")
    p.add_argument("--healthy", type=int, default=10)
    p.add_argument("--patients", type=int, default=10)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--rate-hz", type=float, default=200.0)
    p.add_argument("--duration-s", type=float, default=4.0)
    p.add_argument("--null", action="store_true",
                   help="patients are copies of healthy trials")
    return p.parse_args()


def main():
    args = parse_args()
    manifest = write_cohort(args.out, n_healthy=args.healthy,
                            n_patients=args.patients, seed=args.seed,
                            null_effect=args.null, rate_hz=args.rate_hz,
                            duration_s=args.duration_s)
    print(f"wrote {args.healthy + args.patients} trials; manifest: {manifest}")


if __name__ == "__main__":
    main()
