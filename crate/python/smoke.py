"""Smoke test for the snslab_py extension.

Build the module first, for example with
    cargo build --release -p snslab-py
    cp target/release/libsnslab_py.so python/snslab_py.so
or `maturin develop -m crates/python/Cargo.toml`, then run
    python3 python/smoke.py
"""

import math
import sys

import snslab_py as s


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    ok = True

    u = s.SpectralField.random_solenoidal(8, 2, 7).scaled(2.0)
    ok &= check("leray idempotent", (u.leray_project() - u).seminorm(0) < 1e-13)
    ok &= check("divergence free", u.divergence_residual() < 1e-12)
    grid = u.to_grid()
    back = s.SpectralField.from_grid(8, grid)
    ok &= check("grid round trip", (back - u).seminorm(0) < 1e-12)

    path = s.NoisePath.sample(11, 0, 16, 1.0 / 16.0, 4)
    coarse = path.coarsen(4)
    fine_total = sum(path.increments()[0::4])
    coarse_total = sum(coarse.increments()[0::4])
    ok &= check("coarsening keeps W(T)", math.isclose(fine_total, coarse_total, abs_tol=1e-14))

    quiet = s.Diffusion("additive", 0.0, 4)
    traj = s.trajectory(u, path, quiet, mu=1.0)
    l2 = [n[0] for n in traj["norms"]]
    ok &= check("deterministic energy decays", all(b <= a * (1 + 1e-12) for a, b in zip(l2, l2[1:])))
    ok &= check("states kept", len(traj["states"]) == path.steps + 1)

    noisy = s.Diffusion("multiplicative", 0.5, 4)
    traj = s.trajectory(u, path, noisy, mu=1.0, radius=0.5, truncated=True)
    ok &= check("stop index in range", 0 <= traj["stop_index"] <= path.steps, f"j_R={traj['stop_index']}")

    th = s.TaylorHood(2)
    beta = th.infsup_constant()
    ok &= check("inf-sup positive", beta > 0.1, f"beta={beta:.4f}")
    l2e, h1e = th.projection_error(s.SpectralField.random_solenoidal(8, 1, 3))
    ok &= check("projection errors finite", math.isfinite(l2e) and math.isfinite(h1e))

    try:
        s.RunConfig("bogus = 1")
        ok &= check("unknown key rejected", False)
    except ValueError:
        ok &= check("unknown key rejected", True)

    report = s.run_study("invariants", s.RunConfig("experiment = invariants"))
    ok &= check("invariant suite", report["passed"], f"{len(report['checks'])} checks")

    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
