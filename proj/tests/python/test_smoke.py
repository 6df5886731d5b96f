import json
import math

import pytest

fe = pytest.importorskip("fractal_evt")


def test_qmark_values():
    assert fe.qmark_eval(0.5) == 0.5
    for n in range(2, 20):
        assert fe.qmark_eval(1.0 / n, 0.0) == pytest.approx(2.0 ** (1 - n), rel=1e-12)
    x = 0.3141
    assert fe.qmark_inverse(fe.qmark_eval(x)) == pytest.approx(x, abs=1e-10)
    assert fe.interval_measure(0.25, 0.75) == pytest.approx(
        fe.qmark_eval(0.75) - fe.qmark_eval(0.25), abs=1e-15
    )


def test_ball_matches_asymptotic():
    a = fe.ball_asymptotic(4)
    assert a["rate"] == pytest.approx(math.log(2) / 16)
    value, log_value = fe.ball_measure(4, 1e-3)
    ratio = math.exp(log_value - (math.log(a["prefactor"]) - a["rate"] / 1e-3))
    assert 0.8 <= ratio <= 1.25
    assert value == 0.0 or math.log(value) == pytest.approx(log_value)


def test_cantor_geometry():
    assert fe.gap_order(0.5) == 1
    assert fe.gap_order(0.25) is None
    assert fe.distance_to_cantor(0.5) == pytest.approx(1.0 / 6.0)
    assert fe.distance_to_cantor(0.0) == 0.0
    # At eps = 0.1 every gap but the middle third is swallowed whole; the
    # middle third keeps an uncovered core of length 1/3 - 2 eps.
    eps = 0.1
    assert fe.lebesgue_neighborhood_exact(eps) == pytest.approx(1.0 - (1.0 / 3.0 - 2 * eps))


def test_harmonic_and_saddle():
    h = fe.harmonic_series_measure(1e-3)
    assert h["exact"] > 0 and h["series"] > 0
    s = fe.saddle_point_constants()
    assert s["rate_theory"] == pytest.approx(3 * math.log(2) * 2 ** (-2 / 3))


def test_errors_carry_codes():
    with pytest.raises(fe.FractalEvtError) as info:
        fe.run_scenario("no-such-scenario")
    assert info.value.code == "invalid_argument"
    with pytest.raises(fe.FractalEvtError):
        fe.lebesgue_neighborhood_exact(-1.0)


def test_listing_names_every_scenario():
    names = [s["name"] for s in fe.scenarios()]
    assert len(names) == 7
    text = fe.list_scenarios()
    for name in names:
        assert f"{name}.samples" in text or f"{name}.mc.samples" in text


def test_run_scenario_writes_artifacts(tmp_path):
    summary = fe.run_scenario(
        "ladder-tent", seed=3, workers=2, out=tmp_path, samples=500,
        block_lengths=[1, 10, 100],
    )
    assert summary["scenario"] == "ladder-tent"
    assert summary["parameters"]["samples"] == "500"
    for name in summary["files"]:
        assert (tmp_path / name).exists()
    assert json.loads((tmp_path / "summary.json").read_text())["seed"] == 3
    header = (tmp_path / "law.csv").read_text().splitlines()[0]
    assert header == "level,n,tau,a_hat,stderr,reference,deviation"
