import math
import os

import pytest

import voltail

DATA = os.environ.get("VOLTAIL_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))

REF = voltail.SmileParams(0.1758, 1.20, 0.00030, 1 / 365)


def test_pricing_round_trip():
    ctx = voltail.MarketContext(1.0, 0.0, 0.5)
    price = voltail.bs_call_price(ctx, 1.05, 0.3)
    assert voltail.implied_vol(ctx, 1.05, price) == pytest.approx(0.3, rel=1e-8)
    with pytest.raises(voltail.NoSolutionError):
        voltail.implied_vol(ctx, 1.05, 2.0)


def test_flat_smile_is_gaussian():
    p = voltail.SmileParams(0.2, 1.0, 0.01, 1.0)
    for x in (-0.5, -0.02, 0.3):
        z = (x + 0.02) / 0.2
        ref = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) / 0.2
        assert voltail.implied_pdf(p, x) == pytest.approx(ref, rel=1e-12)
    var = voltail.value_at_risk(p, 0.01)
    assert var.lambda_ == pytest.approx(2.3263478740408408 * 0.2 + 0.02, abs=1e-5)


def test_density_grid():
    grid = voltail.density_grid(REF, 10.0, 256)
    assert len(grid) == 256
    assert grid.norm_defect <= 1e-3
    assert grid.negative_count() == 0
    assert all(b <= a + 1e-12 for a, b in zip(grid.ccdf, grid.ccdf[1:]))


def test_fit_unconditional_recovers_parameters():
    w = 3 * math.sqrt(REF.n)
    xs = [REF.x_min - w + 2 * w * i / 10 for i in range(11)]
    sig = [voltail.smile_sigma(REF, x) for x in xs]
    fit = voltail.fit_unconditional(xs, sig, REF.T)
    assert fit.converged
    assert fit.params.g == pytest.approx(0.1758, rel=1e-6)
    assert fit.params.chi == pytest.approx(1.20, rel=1e-6)
    assert fit.params.n == pytest.approx(0.00030, rel=1e-6)
    assert fit.mode == voltail.FitMode.UNCONDITIONAL


def test_fit_conditional_constraint():
    product = 2 * voltail.f_of_rho(REF.rho) / REF.chi
    hist = voltail.HistoricalStats(0.01, product / 0.01, 1.0)
    w = 3 * math.sqrt(REF.n)
    xs = [REF.x_min - w + 2 * w * i / 10 for i in range(11)]
    sig = [voltail.smile_sigma(REF, x) for x in xs]
    fit = voltail.fit_conditional(xs, sig, REF.T, hist)
    assert fit.constraint_residual <= 1e-10
    assert fit.params.chi == pytest.approx(1.20, rel=1e-6)


def test_decay_prediction():
    p = voltail.SmileParams.from_rho(0.1, 2.0, 4.0, 30 / 365)
    mu1 = 2 * voltail.f_of_rho(4.0) / (0.1 * math.sqrt(30 / 365))
    assert voltail.mu_predicted(p) == pytest.approx(mu1 / 2.0, rel=1e-14)


def test_invalid_params_raise():
    with pytest.raises(voltail.DomainError):
        voltail.value_at_risk(voltail.SmileParams(0.1, 0.5, 0.01, 1.0), 0.01)


def test_cli_entry_point():
    code, out, err = voltail.run_cli(["fit", "--quotes", os.path.join(DATA, "ref_smile_quotes.csv")])
    assert code == 0, err
    assert "exact.chi=" in out
    code, _, _ = voltail.run_cli(["fit", "--quotes", os.path.join(DATA, "missing.csv")])
    assert code == 1
