"""Smoke test for the drift_spectra extension module.

Build and install with `pip install --no-build-isolation ./crates/python`
(needs maturin), or copy target/release/libdrift_spectra_py.so to
drift_spectra.so somewhere on PYTHONPATH.
"""

import math

import drift_spectra as ds


def main():
    ball = ds.ModelBall(3, 1.0)
    lam, t, values = ball.principal()
    assert abs(lam - math.pi**2) < 1e-7, lam
    assert len(t) == len(values) and values[0] > 0

    levels = ds.ModelBall(2, 1.0).spectrum(40.0)
    assert [k for _, k, _, _ in levels] == [0, 1, 2, 0], levels

    drifted = ds.ModelBall(2, 1.0, drift="2*t")
    assert abs(drifted.principal()[0] - 4.0) < 1e-6
    _, _, sup_error = drifted.riccati()
    assert sup_error < 1e-6, sup_error

    disk = ds.disk_principal(n_t=48, n_theta=32)
    assert abs(disk["lambda"] - 5.7831859629) < 5e-3, disk["lambda"]

    b = ds.bounds(n_t=48, n_theta=32)
    assert b["barta_lower"] <= b["lambda"] <= min(b["barta_upper"], b["holland"]), b

    verdicts = ds.compare_corpus()
    assert len(verdicts) == 12 and not any(v["violation"] for v in verdicts)

    try:
        ds.ModelBall(2, 1.0, drift="sin(")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed drift accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
