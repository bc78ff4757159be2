"""Monte-Carlo orchestration: rates, crossings, fits, streams."""

import numpy as np
import pytest

from semionsim import experiments
from semionsim.experiments import (
    NoCrossingInWindow,
    NonPositiveRates,
    RatePoint,
    capacity_scan,
    curriculum_records,
    derive_seed,
    estimate_rate,
    labeled_records,
    make_model,
    read_rate_csv,
    suppression_fit,
    threshold_scan,
    write_rate_csv,
)
from semionsim.lattice import build_lattice
from semionsim.noise import NoiseModel


def test_derive_seed_stable_and_distinct():
    a = derive_seed(7, 1, 2)
    assert a == derive_seed(7, 1, 2)
    assert a != derive_seed(7, 2, 1)
    assert a != derive_seed(8, 1, 2)


def test_estimate_rate_zero_noise():
    point = estimate_rate(3, NoiseModel.depolarizing(0.0), "simple",
                          n=500, seed=1)
    assert point.p_bar == 0.0 and point.failures == 0
    assert point.wilson_low <= point.p_bar <= point.wilson_high


def test_estimate_rate_worker_independence():
    model = NoiseModel.independent(p_eff=0.08)
    a = estimate_rate(3, model, "mwpm", n=2500, seed=9, workers=1)
    b = estimate_rate(3, model, "mwpm", n=2500, seed=9, workers=3)
    assert a == b
    assert 0 < a.p_bar < 1
    assert a.wilson_low <= a.p_bar <= a.wilson_high


def test_threshold_scan_with_synthetic_rates(monkeypatch):
    # quadratic families crossing exactly at p = 0.075
    def fake_rate(d, model, decoder, p_eff=None, n=0, seed=0,
                  code="semion", workers=1):
        p = model.p_eff
        rate = 0.3 * (p - 0.075) * d + 0.2 + 0.5 * (p - 0.075) ** 2
        return RatePoint(d, model.kind, p, decoder, code, n, 0, rate,
                         rate, rate, 0.0, 0.0, seed)

    monkeypatch.setattr(experiments, "estimate_rate", fake_rate)
    grid = [0.06 + 0.005 * k for k in range(9)]
    est = threshold_scan("independent", "mwpm", [4, 5, 6, 7], grid, n=10)
    assert abs(est.value - 0.075) < 1e-9
    assert est.spread < 1e-9
    assert set(est.crossings) == {"4-5", "5-6", "6-7"}
    assert len(est.points) == 36

    def flat_rate(d, model, decoder, p_eff=None, n=0, seed=0,
                  code="semion", workers=1):
        return RatePoint(d, model.kind, model.p_eff, decoder, code, n, 0,
                         0.1 + 0.01 * d, 0, 1, 0.0, 0.0, seed)

    monkeypatch.setattr(experiments, "estimate_rate", flat_rate)
    with pytest.raises(NoCrossingInWindow):
        threshold_scan("independent", "mwpm", [4, 5], grid, n=10)
    with pytest.raises(ValueError):
        threshold_scan("independent", "mwpm", [4], grid, n=10)
    with pytest.raises(ValueError):
        threshold_scan("independent", "mwpm", [4, 5], grid[:3], n=10)


def test_suppression_fit_recovers_exact_exponential():
    points = [RatePoint(d, "independent", 0.04, "mwpm", "semion", 1, 0,
                        0.7 * np.exp(-0.42 * d), 0, 1, 0, 0, 0)
              for d in range(4, 10)]
    amp, alpha, r2 = suppression_fit(points)
    assert abs(amp - 0.7) < 1e-9
    assert abs(alpha - 0.42) < 1e-9
    assert r2 > 1 - 1e-12
    with pytest.raises(ValueError):
        suppression_fit(points[:2])
    bad = points + [RatePoint(11, "independent", 0.04, "mwpm", "semion",
                              1, 0, 0.0, 0, 1, 0, 0, 0)]
    with pytest.raises(NonPositiveRates):
        suppression_fit(bad)


def test_labeled_record_streams():
    lat = build_lattice(3)
    model = make_model("independent", 0.08)
    recs = list(labeled_records(lat, model, 5, 20))
    again = list(labeled_records(lat, model, 5, 20))
    assert all(np.array_equal(a[0], b[0]) and a[1] == b[1]
               for a, b in zip(recs, again))
    assert recs[0][0].shape == (27,)
    assert all(0 <= r[1] < 16 for r in recs)
    imgs = list(labeled_records(lat, model, 5, 5, as_image=True))
    assert imgs[0][0].shape == (6, 6)
    both = list(curriculum_records(lat, model, 5, 30))
    assert len(both) == 30


def test_capacity_scan_deterministic():
    model = make_model("independent", 0.07)
    grid = [(1, 8)]
    rows1 = capacity_scan(2, model, budget=300, grid=grid, seed=3,
                          eval_n=200, batch_size=50)
    rows2 = capacity_scan(2, model, budget=300, grid=grid, seed=3,
                          eval_n=200, batch_size=50)
    assert rows1 == rows2
    assert len(rows1) == 1
    assert rows1[0]["parameters"] > 0
    assert 0 <= rows1[0]["accuracy"] <= 1


def test_capacity_trend_spearman():
    """Accuracy grows with parameter count on a reduced-budget grid."""
    from scipy import stats

    model = make_model("independent", 2 * 0.045 - 0.045 ** 2)
    grid = [(1, 12), (2, 24), (2, 64), (4, 128), (4, 256)]
    rows = capacity_scan(4, model, budget=100_000, grid=grid, seed=11,
                         eval_n=20_000, batch_size=2000)
    params = [row["parameters"] for row in rows]
    accs = [row["accuracy"] for row in rows]
    rho, p_value = stats.spearmanr(params, accs)
    assert rho > 0
    assert p_value < 0.05


def test_rate_csv_roundtrip(tmp_path):
    points = [
        RatePoint(4, "independent", 0.08, "mwpm", "semion", 1000, 123,
                  0.123, 0.1, 0.15, 0.001, 0.0, 42),
        RatePoint(5, "depolarizing", 0.09, "simple", "ktc", 2000, 456,
                  0.228, 0.2, 0.25, 0.0, 0.002, 43),
    ]
    path = tmp_path / "rates.csv"
    write_rate_csv(points, path)
    assert read_rate_csv(path) == points
