#!/usr/bin/env python3
"""Generate a long monitored trajectory with state snapshots for manifold learning.

Writes into OUT/:
    traj.npz        per-step columns t, dW, dy, x, p, sx, sy, sz, purity
    snapshots.npy   density-matrix snapshots (S, D, D) complex128
    snap_meta.npz   snapshot times and smallest eigenvalues
    meta.json       parameters, seed, layout declaration
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from smefilter.system import SystemParams, RecordSpec, simulate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quadrature", choices=["x", "p"], default="x")
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--t-end", type=float, default=2500.0)
    ap.add_argument("--n-max", type=int, default=59)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--snap-start", type=float, default=501.0)
    ap.add_argument("--snap-every", type=float, default=1.0)
    ap.add_argument("--no-snapshots", action="store_true")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    phi = 0.0 if args.quadrature == "x" else np.pi / 2
    params = SystemParams(phi=phi, n_max=args.n_max, dt=args.dt)
    rec = RecordSpec(
        snapshot_every=None if args.no_snapshots else args.snap_every,
        snapshot_start=args.snap_start,
        snapshot_stop=args.t_end,
        snapshot_path=None if args.no_snapshots else str(out / "snapshots.npy"),
        track_purity=True,
    )

    t0 = time.time()
    last = [t0]

    def progress(k, n):
        if k % 100_000 == 0 or k == n:
            now = time.time()
            rate = 100_000 / max(now - last[0], 1e-9)
            last[0] = now
            print(f"step {k}/{n} ({100.0 * k / n:.1f}%) {rate:.0f} steps/s "
                  f"elapsed {now - t0:.0f}s", flush=True)

    traj = simulate(params, seed=args.seed, t_end=args.t_end, record=rec, progress=progress)

    np.savez_compressed(
        out / "traj.npz",
        t=traj.t, dW=traj.dW, dy=traj.dy, x=traj.x, p=traj.p,
        sx=traj.sx, sy=traj.sy, sz=traj.sz, purity=traj.purity,
    )
    if traj.snapshot_times is not None:
        np.savez(out / "snap_meta.npz", times=traj.snapshot_times,
                 min_eig=traj.snapshot_min_eig)
    meta = {
        "format_version": 1,
        "quadrature": args.quadrature,
        "seed": args.seed,
        "t_end": args.t_end,
        "params": {
            "delta_c": params.delta_c, "delta_a": params.delta_a,
            "kappa": params.kappa, "g0": params.g0, "drive": params.drive,
            "phi": params.phi, "gamma_perp": params.gamma_perp,
            "n_max": params.n_max, "dt": params.dt,
        },
        "basis_ordering": "atom_outer",
        "wall_seconds": time.time() - t0,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    print(f"done in {meta['wall_seconds']:.0f}s -> {out}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
