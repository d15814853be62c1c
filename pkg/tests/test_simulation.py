import csv
import io

import numpy as np
import pytest

from clrbte.distribution import Params
from clrbte.estimators import EstimatorId
from clrbte.simulation import (
    CSV_COLUMNS,
    ConfigError,
    SimScenario,
    parse_config,
    rank_estimators,
    read_config,
    run_scenario,
    simulate_sample,
)

TRUTH = Params(1.5, 0.5, 0.3)


def truth_fitter(est, s, truth):
    return truth, True


def shifted_fitter(est, s, truth):
    # deterministic per-sample offset so bias and MSE are known
    return truth + (0.1 if est is EstimatorId.MLE else 0.2), True


def failing_fitter(est, s, truth):
    return truth, False


def test_stub_fitter_gives_zero_bias():
    sc = SimScenario(TRUTH, (10, 20), (EstimatorId.MLE, EstimatorId.LSE), replications=5)
    rep = run_scenario(sc, fitter=truth_fitter)
    for c in rep.cells:
        assert c.bias == 0 and c.mse == 0 and c.mre == 0
        assert c.convergence_rate == 1 and not c.degenerate


def test_known_offsets_and_ranking():
    sc = SimScenario(TRUTH, (10,), (EstimatorId.LSE, EstimatorId.MLE), replications=4)
    rep = run_scenario(sc, fitter=shifted_fitter)
    c = rep.cell("MLE", 10, "p1")
    assert c.bias == pytest.approx(0.1) and c.mse == pytest.approx(0.01)
    assert c.mre == pytest.approx(0.1 / 0.5)
    ranks = rank_estimators(rep)
    assert ranks[(10, "lambda")] == ["MLE", "LSE"]


def test_failed_fits_are_degenerate():
    sc = SimScenario(TRUTH, (10,), (EstimatorId.MLE,), replications=3)
    rep = run_scenario(sc, fitter=failing_fitter)
    c = rep.cell("MLE", 10, "lambda")
    assert c.n_converged == 0 and c.degenerate and np.isnan(c.bias)


def test_single_replication_is_flagged():
    sc = SimScenario(TRUTH, (10,), (EstimatorId.MLE, EstimatorId.LSE), replications=1)
    rep = run_scenario(sc)
    assert all(c.degenerate for c in rep.cells)
    assert "degenerate" in rep.to_text()


def test_real_fits_mse_dominates_squared_bias():
    sc = SimScenario(TRUTH, (30,), (EstimatorId.MLE, EstimatorId.MSADE), replications=8, base_seed=5)
    rep = run_scenario(sc)
    for c in rep.cells:
        assert c.mse >= c.bias ** 2 - 1e-12


def test_parallel_csv_is_identical():
    sc = SimScenario(TRUTH, (15,), (EstimatorId.MLE, EstimatorId.CvME), replications=6, base_seed=3)
    a = run_scenario(sc, parallelism=1).to_csv()
    b = run_scenario(sc, parallelism=3).to_csv()
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 2 * 3


def test_samples_depend_only_on_seed_rep_and_n():
    sc = SimScenario(TRUTH, (10, 20), base_seed=9)
    assert np.array_equal(simulate_sample(sc, 2, 10), simulate_sample(sc.with_replications(7), 2, 10))
    assert not np.array_equal(simulate_sample(sc, 2, 10), simulate_sample(sc, 3, 10))


def test_parse_config():
    sc = parse_config("truth = 1, 0.2, 0.3\nsizes = 20 50  # two\nestimators = MLE, tade\nreps=7\nseed = 4\n")
    assert sc.sizes == (20, 50) and sc.replications == 7 and sc.base_seed == 4
    assert sc.estimators == (EstimatorId.MLE, EstimatorId.RTADE)


@pytest.mark.parametrize("text,msg", [
    ("sizes = 10", "required"),
    ("truth = 1, 0.2\nsizes = 10", "three values"),
    ("truth = 1, 0.2, 0.3\nsizes = 50, 20", "ascending"),
    ("truth = 1, 0.2, 0.3\nsizes = 10\nbogus = 1", "unknown key"),
    ("truth = 1, 0.2, 0.3\nsizes = 10\nreps = 0", "replications"),
    ("truth = 1, 0.2, 0.3\nsizes = 3", "at least 5"),
    ("truth = 1, 0.2, 0.3\nsizes = 10\nnot a pair", "key = value"),
])
def test_config_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_bundled_scenarios_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "scenarios"
    for k in range(1, 5):
        sc = read_config(root / f"scenario{k}.cfg")
        assert sc.sizes == (50, 100, 200, 500, 1000) and len(sc.estimators) == 9
