import numpy as np
import pytest

from forkoam import io
from forkoam.config import echo_config, parse_config
from forkoam.errors import OutputError, SamplingError
from forkoam.scenarios import (SCENARIOS, render_artifacts, run_scenario, scenario_text, write_artifacts)

from conftest import SMALL_INI, cached_scenario


@pytest.fixture(scope="module")
def small():
    return run_scenario(parse_config(SMALL_INI))


def test_small_scenario_transfer_rule(small):
    for run in small.runs:
        for o in run.orders.orders:
            if abs(o.n) <= 1:
                assert o.winding == run.m + o.n
                assert o.dominant_q == run.m + o.n


def test_small_scenario_mirror_symmetry(small):
    pos, neg = small.run(1).orders, small.run(-1).orders
    for n in (1, 2):
        assert pos.asymmetry[n] == pytest.approx(-neg.asymmetry[n], abs=1e-12)
    assert small.run(0).orders.asymmetry[1] == pytest.approx(0, abs=1e-12)


def test_report_excludes_timings(small):
    d = small.as_dict()
    assert "timings" not in d and small.timings["total"] > 0
    assert set(d["order_power_table"]) == {"-2", "-1", "0", "1", "2"}


def test_artifacts_are_deterministic(small):
    again = run_scenario(parse_config(SMALL_INI))
    a, b = render_artifacts(small), render_artifacts(again)
    assert a.keys() == b.keys()
    for name in a:
        if name != "timings.json":
            assert a[name] == b[name], name


def test_resolved_config_reproduces_the_run(small):
    files = render_artifacts(small)
    rerun = run_scenario(parse_config(files["config.resolved.ini"].decode()))
    assert render_artifacts(rerun)["report.json"] == files["report.json"]


def test_artifact_set(small, tmp_path):
    paths = write_artifacts(small, tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(p.name for p in paths)
    assert {"report.json", "orders.csv", "spectra.csv", "mask.pbm", "config.resolved.ini",
            "intensity_m0.pgm"} <= set(names)
    report = io.read_report(tmp_path / "report.json")
    assert report["scenario"] == "small"
    assert [r["m"] for r in report["runs"]] == [-1, 0, 1]
    assert io.read_mask(tmp_path / "mask.pbm").shape == (256, 256)


def test_write_failure_leaves_nothing(small, tmp_path):
    blocker = tmp_path / "out"
    blocker.write_text("")
    with pytest.raises(OutputError):
        write_artifacts(small, blocker)
    assert [p.name for p in tmp_path.iterdir()] == ["out"]


def test_sampling_failure_before_any_output():
    with pytest.raises(SamplingError):
        run_scenario(parse_config(SMALL_INI.replace("aperture_radius_um = 0.64", "aperture_radius_um = 1.5")))


@pytest.mark.parametrize("name", SCENARIOS)
def test_bundled_scenarios_are_valid(name):
    cfg = parse_config(scenario_text(name))
    assert parse_config(echo_config(cfg)) == cfg


def test_fig1f_vortex_orders():
    report = cached_scenario("fig1f")
    run = report.run(0)
    assert run.orders.order(0).ring_flagged
    for n in (-1, 1):
        o = run.orders.order(n)
        assert o.winding == n and o.dominant_q == n and not o.ring_flagged


def test_fig2c_and_fig2d_are_mirrors():
    c, d = cached_scenario("fig2c"), cached_scenario("fig2d")
    (rc,), (rd,) = c.runs, d.runs
    for oc in rc.orders.orders:
        od = rd.orders.order(-oc.n)
        assert od.winding == -oc.winding
        assert od.ring_radius == pytest.approx(oc.ring_radius, rel=1e-6)


def test_fig3_table_is_complete():
    table = cached_scenario("fig3").order_table()
    assert set(table) == {str(n) for n in range(-7, 8)}
    for row in table.values():
        assert set(row) == {"-1", "0", "1"}
        assert all(np.isfinite(v) and v >= 0 for v in row.values())


def test_fig2a_petals():
    run = cached_scenario("fig2a").runs[0]
    assert run.center.peak_count == 10
    assert run.center.dominant_q == 10


def test_sorter_demo_recovers_every_charge():
    for run in cached_scenario("sorter-demo").runs:
        assert run.sort.m_hat == run.m
