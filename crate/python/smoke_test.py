"""Builds the extension module and exercises it from Python.

    python3 python/smoke_test.py [--no-build]
"""

import argparse
import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "stirred-vacuum-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def load(workdir):
    lib = ROOT / "target" / "release" / "libstirred_vacuum_py.so"
    shutil.copy(lib, Path(workdir) / "stirred_vacuum_py.so")
    sys.path.insert(0, str(workdir))
    import stirred_vacuum_py

    return stirred_vacuum_py


def check(sv):
    p = sv.ChainParams(16, 2.5)
    assert (p.n, p.m, p.positions) == (16, 8, 13)
    assert math.isclose(p.period, 13 * 2.5)

    gs = sv.ModeState.ground_state(16)
    assert gs.n_particles == 8
    assert all(abs(d - 0.5) < 1e-10 for d in gs.site_densities())
    occ = gs.mode_occupations()
    assert all(abs(x - 1.0) < 1e-10 for x in occ[:8])
    assert abs(gs.entropy(0, 0)) < 1e-12

    final, rows = sv.evolve(gs, p, 20)
    assert len(rows) == 20
    assert final.orthonormality_defect() < 1e-10
    _, steps = sv.evolve(gs, p, 2, cadence="per-step")
    assert len(steps) == 2 * 13

    links = final.links()
    assert abs(sum(links["fractions"]) - 1.0) < 1e-10

    fl = sv.floquet_spectrum(32, 2.5)
    assert len(fl["quasi_energies"]) == 32
    assert 0.0 < fl["r_tilde_mean"] < 1.0

    assert abs(sv.mean_h2_quadrature(0.3) - sv.mean_h2_closed(0.3)) < 1e-8
    assert abs(sv.digamma(1.0) + 0.5772156649015329) < 1e-14
    ens = sv.sample_ensemble(16, 8, [4], 50, 1)
    assert len(ens["entropies"][0]) == 50

    summary = json.loads(sv.run_experiment(json.dumps({"n": 12, "tau": 1.0, "n_cycles": 40})))
    assert summary["samples"] == 40
    assert all(passed for _, _, _, passed in sv.verify())

    try:
        sv.ChainParams(7, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("odd N accepted")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--no-build", action="store_true")
    args = ap.parse_args()
    if not args.no_build:
        build()
    with tempfile.TemporaryDirectory() as tmp:
        check(load(tmp))
    print("smoke test ok")


if __name__ == "__main__":
    main()
