"""Smoke test for the Python extension.

Build and install first:

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/beamase-*.whl
"""

import math

import beamase


def main():
    fr1 = beamase.Deployment.preset("fr1", 250.0, 30.0)
    assert fr1.tx_dbm == 43.0 and fr1.bw_mhz == 100.0
    assert abs(fr1.density() - 4.0 / (math.pi * 250.0**2)) < 1e-15

    r = beamase.evaluate(fr1, 8)
    assert 0.0 < r.p_bm < 1.0 and 0.0 < r.overhead < 1.0
    assert abs(r.effective_ase - r.density * r.rate * (1.0 - r.overhead)) < 1e-9 * r.effective_ase
    bits = beamase.evaluate(fr1, 8, log_base="bits")
    assert abs(bits.rate / r.rate - math.log2(math.e)) < 1e-12

    best, degenerate, curve = beamase.optimize(fr1)
    assert not degenerate and len(curve) == 10 and abs(best - 8) <= 1
    print(f"FR1 ISD 250 m, 30 km/h: n* = {best}")

    still = beamase.Deployment.preset("fr2", 125.0, 30.0)
    still.speed_kmh = 0.0
    r = beamase.evaluate(still, 4)
    assert r.p_bm == 0.0 and r.overhead == 0.0

    fr2 = beamase.Deployment.preset("fr2", 125.0, 30.0)
    beams = beamase.BeamSetting(4)
    assert beams.beam_count() == 16 and beams.gain_main == 16.0
    p = beamase.success_probability(fr2, beams, 0.0)
    (mc,), (rate, rate_se) = beamase.simulate_sinr(fr2, beams, [0.0], samples=20_000, seed=3)
    assert abs(p - mc[0]) <= max(0.01, 3.0 * mc[1]), (p, mc)
    analytic_rate = beamase.ergodic_rate(fr2, beams)
    assert abs(analytic_rate - rate) <= max(0.03 * rate, 3.0 * rate_se)
    print(f"FR2 n=4 p_s(0 dB): analytic {p:.4f}, MC {mc[0]:.4f} +- {mc[1]:.4f}")

    ho, resel = beamase.count_crossings(fr2, beamase.BeamSetting(1), length_m=2e5, replicas=8)
    root = math.sqrt(fr2.density())
    assert abs(ho / (4 * root / math.pi) - 1) < 0.05
    assert abs(resel / (2 * root / math.pi) - 1) < 0.05

    bad = beamase.Deployment.preset("fr1", 250.0, 30.0)
    bad.isd_m = -1.0
    try:
        beamase.evaluate(bad, 3)
    except ValueError as e:
        print(f"rejected: {e}")
    else:
        raise AssertionError("negative ISD accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
