"""Smoke test for the fwmlab Python extension.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
"""

import math

import fwmlab


def main():
    li = fwmlab.bs_idler_wavelength_nm(1549.2, 1540.7, 1563.9)
    assert abs(li - 1526.43) < 0.01, li
    ld = fwmlab.dfwm_idler_wavelength_nm(1549.2, 1540.7)
    assert abs(ld - 1532.3) < 0.1, ld

    a = fwmlab.bs_efficiency(0.022, 0.015, 0.01, 450.0, case="A")
    b = fwmlab.bs_efficiency(0.022, 0.015, 0.01, 450.0, case="B")
    assert abs(10 * math.log10(b / a) + 6.02) < 0.1
    assert fwmlab.bs_efficiency(0.022, 0.015, 0.01, 450.0, case="D") == 0.0

    mu = fwmlab.mean_photons_per_gate(30.8e-9, 1549.2)
    assert abs(mu / 600 - 1) < 0.01, mu
    assert abs(fwmlab.counts_per_second(0.0) - 0.675) < 1e-9

    cfg = fwmlab.Config()
    cfg.validate()
    assert cfg.to_dict()["fiber.length_m"] == 450.0
    cfg.case = "D"
    rows = fwmlab.counts(cfg)
    assert len(rows) == 8 and all(r["case"] == "D" for r in rows)
    try:
        cfg.set("fiber.lenght_m", 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown key accepted")

    scan = fwmlab.raman_scan()
    assert len(scan["detuning_thz"]) == 300

    sweep = fwmlab.bs_sweep([1545.0, 1549.2, 1555.0])
    assert max(sweep["eta_db"]) <= 0.0

    small = fwmlab.Config.from_toml(
        "[grid]\nn_points = 4096\ntime_window_ns = 0.5\n[fiber]\nlength_m = 10.0\n"
    )
    spec = fwmlab.spectrum(small, runs=1)
    assert len(spec["psd_total"]) == 4096
    assert set(spec["markers"]) >= {"signal", "bs_idler", "dfwm_idler"}

    print("fwmlab", fwmlab.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
