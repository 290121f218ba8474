"""Smoke test for the Python extension.

Build and install it first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import csv
import json
import math
import tempfile
from pathlib import Path

import planar_eikonal_py as pe


def main():
    assert abs(pe.plane_kernel(0.0) - 1.0) < 1e-15
    assert 0.0 < pe.plane_kernel(2.0) < pe.plane_kernel(1.0) < 1.0
    assert pe.bessel_k(0, 1.0) > pe.bessel_k(0, 2.0) > 0.0
    assert abs(pe.structure_factor(0.7, [0.0]) - 1.0) < 1e-15

    setup = pe.Setup.silicon_100(3, amplitude=10.0)
    assert setup.n_planes == 3
    assert abs(setup.amplitude - 10.0) < 1e-9
    prof = setup.profile()
    assert abs(prof.plane_mean(0.0)) > 0.0
    assert isinstance(prof.phase_f(0.5), complex)

    q = [4.0 * i / 40 for i in range(41)]
    sf = setup.spectrum(q)
    assert len(sf["total"]) == 41 and sf["route"] == "structure_factor"
    for t, c, i in zip(sf["total"], sf["coherent"], sf["incoherent"]):
        assert math.isfinite(t) and abs(c + i - t) <= 1e-12 * t
    born = setup.spectrum(q, route="born")
    assert born["coherent"] is None and born["born_total"] == born["total"]

    try:
        setup.spectrum(q, route="fft")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown route accepted")

    mean, se, pred, allowance = pe.averaged_phase(pe.Setup.silicon_100(1, 1.0), 2.0, n_samples=20000)
    assert abs(mean - pred) <= 4 * se + allowance, (mean, pred, se, allowance)

    assert "fig_plane1" in pe.preset_names()
    with tempfile.TemporaryDirectory() as d:
        files = pe.run_preset("fig_plane1", d, q_count=21)
        rows = list(csv.reader(open(files[0])))
        assert rows[0] == list(pe.CSV_COLUMNS) and len(rows) == 22
        meta = json.loads(Path(files[-1]).read_text())
        assert meta["n_planes"] == 1

    print("python smoke test passed")


if __name__ == "__main__":
    main()
