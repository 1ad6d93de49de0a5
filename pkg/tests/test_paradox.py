import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, special

from lindley_interf.errors import ConfigError, NonConvergence
from lindley_interf.mz import CoherentMZModel
from lindley_interf.paradox import (
    Region,
    ScanTable,
    classify,
    figure_preset,
    frequentist_pvalue,
    paradox_window,
    region_report,
    scan,
)
from lindley_interf.scenario import Scenario

from oracles import mz_posterior_riemann, skellam_two_sided_pvalue_scipy, squeezed_posterior_riemann, squeezed_var_direct

COHERENT = Scenario(kind="mz-coherent", alpha=10.0, eta=0.7, z0=0.99)
HOMODYNE = Scenario(kind="homodyne", alpha=10.0, r=1.0, eta=1.0, z0=0.9)
HALF_PI = math.pi / 2

# frozen from the midpoint-rule posterior oracle (1e5 points) and scipy's Skellam tails
COHERENT_WINDOW = (17, 31)
# largest spread of z at 3 sigma across eta in [0.5, 1] is 0.0274585 (squeezed oracle)
FIG5_BAND = 0.03


class TestPValue:
    def test_zero_deviation(self):
        assert frequentist_pvalue(0, CoherentMZModel(10.0, 0.7), HALF_PI) == 1.0
        assert HOMODYNE.pvalue(HOMODYNE.null_mean()) == 1.0

    def test_gaussian_five_percent(self):
        # oracle quantile by root finding on the standard-normal tail
        z = optimize.brentq(lambda x: special.erfc(x / math.sqrt(2)) - 0.05, 1.0, 3.0, xtol=1e-14)
        assert z == pytest.approx(1.95996, abs=1e-5)
        p = HOMODYNE.pvalue(HOMODYNE.null_mean() + 1.95996 * HOMODYNE.norm_sigma())
        assert p == pytest.approx(0.05, abs=1e-4)

    def test_one_sided_is_half(self):
        sc = Scenario(kind="homodyne", two_sided=False)
        x = sc.null_mean() + 2.0 * sc.norm_sigma()
        assert sc.pvalue(x) == pytest.approx(0.5 * HOMODYNE.pvalue(x), rel=1e-14)

    @pytest.mark.parametrize("d", [1, 5, 8, 17, 25, 42])
    def test_skellam_symmetric_and_exact(self, d):
        m = CoherentMZModel(10.0, 0.7)
        p = frequentist_pvalue(d, m, HALF_PI)
        assert p == pytest.approx(frequentist_pvalue(-d, m, HALF_PI), rel=1e-14)
        assert p == pytest.approx(skellam_two_sided_pvalue_scipy(d, 70), rel=1e-9)

    def test_skellam_decreasing(self):
        m = CoherentMZModel(10.0, 0.7)
        ps = [frequentist_pvalue(d, m, HALF_PI) for d in range(0, 60)]
        assert all(b < a for a, b in zip(ps, ps[1:]))


class TestClassify:
    def test_examples(self):
        assert classify(0.99, 0.8, 0.05) is Region.AGREE_NULL
        assert classify(0.9, 0.003, 0.05) is Region.PARADOX
        assert classify(0.01, 0.0001, 0.05) is Region.AGREE_ALT

    def test_boundaries(self):
        assert classify(0.5, 0.01) is Region.AGREE_ALT
        assert classify(0.9, 0.05) is Region.AGREE_NULL

    @given(z=st.floats(0, 1), p=st.floats(0, 1), a=st.floats(0, 1))
    def test_total(self, z, p, a):
        r = classify(z, p, a)
        assert (r is Region.PARADOX) == (p < a and z > 0.5)
        assert (r is Region.AGREE_ALT) == (p < a and z <= 0.5)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            classify(1.2, 0.1)

    def test_str(self):
        assert str(Region.PARADOX) == "Paradox"


class TestWindow:
    def test_coherent_frozen(self):
        w = paradox_window(COHERENT)
        assert (w.lo, w.hi) == COHERENT_WINDOW
        assert 1.5 <= w.lo_sigma <= w.hi_sigma <= 4.5

    def test_coherent_edges_against_oracles(self):
        lo, hi = COHERENT_WINDOW
        for d, inside in ((lo - 1, False), (lo, True), (hi, True), (hi + 1, False)):
            z = mz_posterior_riemann(d, 70, 0.99)
            p = skellam_two_sided_pvalue_scipy(d, 70)
            assert (p < 0.05 and z > 0.5) == inside, d

    def test_consistent_with_pointwise_classification(self):
        w = paradox_window(COHERENT)
        for c in w.cells:
            assert c.classification is Region.PARADOX
        for d in (w.lo - 1, w.hi + 1):
            assert region_report(COHERENT, d).classification is not Region.PARADOX

    def test_homodyne_overlaps_two_to_four_sigma(self):
        w = paradox_window(HOMODYNE)
        assert w.lo_sigma <= 4.0 and w.hi_sigma >= 2.0
        assert w.lo_sigma == pytest.approx(2.0, abs=0.05)

    def test_narrow_prior_covers_rejection_region(self):
        sc = Scenario(kind="mz-coherent", prior="wrapped", prior_sigma=0.01)
        w = paradox_window(sc)
        first_reject = next(d for d in range(100) if sc.pvalue(d) < 0.05)
        assert w.lo == first_reject
        assert w.hi_sigma == pytest.approx(8.0, abs=0.15)

    def test_empty_window(self):
        # z0 = 0.4: the posterior never exceeds 1/2 once the test rejects
        assert paradox_window(Scenario(kind="mz-coherent", z0=0.4)) is None

    def test_bad_step(self):
        with pytest.raises(ValueError):
            paradox_window(COHERENT, grid_step=0.0)


class TestScan:
    def test_single_cell(self):
        table = scan(COHERENT, {"d": [17.0]})
        direct = region_report(COHERENT, 17)
        assert len(table.cells) == 1
        assert table.cells[0].report == direct

    def test_cell_count_and_order(self):
        table = scan(COHERENT, {"eta": [0.5, 0.7], "t": [0.0, 1.0, 2.0]})
        assert len(table.cells) == 6
        assert [c.coords for c in table.cells][:3] == [(0.5, 0.0), (0.5, 1.0), (0.5, 2.0)]

    def test_requires_one_outcome_axis(self):
        with pytest.raises(ConfigError):
            scan(COHERENT, {})
        with pytest.raises(ConfigError):
            scan(COHERENT, {"eta": [0.7]})
        with pytest.raises(ConfigError):
            scan(COHERENT, {"t": [], "eta": [0.7]})
        with pytest.raises(ConfigError):
            scan(COHERENT, {"t": [1.0], "colour": [1.0]})

    def test_fig3_columns_monotone(self):
        sc, axes = figure_preset("fig3")
        table = scan(sc, {"alpha": axes["alpha"], "t": axes["t"]})
        rows = table.rows()
        for a in axes["alpha"]:
            zs = [r["z_bar0"] for r in rows if r["alpha"] == a]
            assert all(b <= a_ + 1e-12 for a_, b in zip(zs, zs[1:]))
            assert zs[0] > 0.99 * 0.99 and zs[-1] < 0.05

    def test_fig4_plateau(self):
        sc, axes = figure_preset("fig4")
        table = scan(sc, {"prior_sigma": [0.01, 1.0], "t": [0.0, 1.0, 2.0, 3.0, 4.0]})
        rows = table.rows()
        small = [r["z_bar0"] for r in rows if r["prior_sigma"] == 0.01]
        wide = [r["z_bar0"] for r in rows if r["prior_sigma"] == 1.0]
        assert max(abs(z - 0.99) for z in small) < 0.01
        assert wide[-1] < 0.5

    def test_fig5_band(self):
        sc, axes = figure_preset("fig5")
        table = scan(sc, {"eta": axes["eta"], "t": [3.0]})
        zs = table.column("z_bar0")
        assert zs.max() - zs.min() < FIG5_BAND
        assert FIG5_BAND < 0.2
        for eta, z in zip(axes["eta"], zs):
            d = 3.0 * math.sqrt(squeezed_var_direct(10.0, 1.0, eta, 0.0))
            assert z == pytest.approx(squeezed_posterior_riemann(d, 10.0, 1.0, eta, 0.99), rel=1e-6, abs=1e-12)

    def test_workers_do_not_change_results(self):
        axes = {"eta": [0.5, 0.9], "t": [0.0, 2.0, 3.5]}
        a = scan(COHERENT, axes, workers=1)
        b = scan(COHERENT, axes, workers=2)
        assert [c.report for c in a.cells] == [c.report for c in b.cells]

    def test_cell_error_names_coordinates(self, monkeypatch):
        import lindley_interf.paradox as paradox

        def boom(*args, **kwargs):
            raise NonConvergence("budget")

        monkeypatch.setattr(paradox, "region_report", boom)
        with pytest.raises(NonConvergence, match="'t': 2.0"):
            scan(COHERENT, {"t": [2.0]})

    def test_csv_round_trip(self):
        table = scan(COHERENT, {"eta": [0.7], "t": [0.0, 2.5, 5.0]})
        text = table.to_csv()
        assert "\r" not in text
        assert text.splitlines()[0] == "eta,t,d,sigma_units,z_bar0,pvalue,class,log_bayes_factor"
        back = ScanTable.from_csv(text)
        assert back.axes == table.axes
        np.testing.assert_array_equal(back.column("z_bar0"), table.column("z_bar0"))
        assert back.to_csv() == text

    def test_json_has_metadata(self):
        table = scan(COHERENT, {"t": [1.0]})
        doc = json.loads(table.to_json())
        assert doc["metadata"]["scenario"]["kind"] == "mz-coherent"
        assert doc["metadata"]["alpha_freq"] == 0.05

    def test_presets(self):
        for name in ("fig3", "fig4", "fig5"):
            sc, axes = figure_preset(name)
            assert "t" in axes
        with pytest.raises(ConfigError):
            figure_preset("fig9")
