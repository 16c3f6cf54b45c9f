import numpy as np
import pytest

from sirratio.core import CountPath, EpidemicState, ModelParams
from sirratio.reproduction import (
    RzeroConfig,
    basic_r0,
    effective_r0,
    forward_susceptibles,
    geometric_pmf,
    geometric_survival,
    initial_r0,
    r0_at,
    rzero_path,
)
from sirratio.rng import RngStream


@pytest.mark.parametrize("a,c,r0", [(0.14, 0.07, 2.0), (0.07, 0.07, 1.0), (0.035, 0.07, 0.5)])
def test_initial_r0(a, c, r0):
    assert initial_r0(ModelParams(a, c, 10)) == pytest.approx(r0, rel=1e-15)


def test_geometric_survival():
    assert geometric_survival(0.07, 1) == 1.0
    x = np.arange(1, 10_001)
    assert geometric_survival(0.07, x).sum() == pytest.approx(1 / 0.07, rel=1e-12)
    assert abs(geometric_pmf(0.07, x).sum() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        geometric_survival(0.07, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        RzeroConfig(H=0)


def test_initial_value_near_a_over_c(base_params):
    s = EpidemicState.initial()
    v = r0_at(s, base_params, RzeroConfig())
    assert v.effective == pytest.approx(0.1 / 0.07, rel=0.01)
    assert v.basic == pytest.approx(v.effective * 3_000_000 / s.N1, rel=1e-12)


def test_geometric_sum_oracle_when_disease_free(base_params):
    """No infectious: N1 stays constant, so the sum is a closed-form geometric series."""
    N1 = 1_000_000
    s = EpidemicState(50, N1, 0, 2_000_000)
    H = 100
    exact = 0.1 * N1 / 3e6 * (1 - 0.93**H) / 0.07
    assert effective_r0(s, base_params, RzeroConfig(H, 10)) == pytest.approx(exact, rel=1e-13)
    assert basic_r0(s, base_params, RzeroConfig(H, 10)) == pytest.approx(exact * 3, rel=1e-13)


def test_no_susceptibles(base_params):
    s = EpidemicState(80, 0, 10, 2_999_990)
    v = r0_at(s, base_params)
    assert v.effective == 0.0
    assert not v.defined and np.isnan(v.basic)


def test_disease_free_full_population_basic_equals_effective(base_params):
    s = EpidemicState(0, 3_000_000, 0, 0)
    v = r0_at(s, base_params)
    assert v.basic == v.effective


def test_effective_below_basic(base_params, epidemic):
    for t in (0, 100, 200, 400):
        v = r0_at(epidemic.state(t), base_params, RzeroConfig(H=50, S=20))
        assert v.effective <= v.basic


def test_c_near_one_keeps_first_term():
    params = ModelParams(0.3, 1 - 1e-12, 1000)
    s = EpidemicState(0, 900, 50, 50)
    assert effective_r0(s, params, RzeroConfig(H=20, S=50)) == pytest.approx(0.3 * 0.9, rel=1e-9)


def test_truncation_monotone_in_horizon(base_params, epidemic):
    """Shorter horizons drop non-negative terms: H=30 strictly below H=100 mid-epidemic."""
    mid = int(np.argmax(epidemic.N2))
    s = epidemic.state(mid)
    rng = RngStream(3)
    short = basic_r0(s, base_params, RzeroConfig(30, 100, rng))
    long = basic_r0(s, base_params, RzeroConfig(100, 100, rng))
    assert short < long
    # same stream: the first 30 forward days coincide, so the comparison is pathwise
    f30 = forward_susceptibles(s, base_params, RzeroConfig(30, 100, rng))
    f100 = forward_susceptibles(s, base_params, RzeroConfig(100, 100, rng))
    assert np.array_equal(f30, f100[:, :30])


def test_endpoints_of_full_epidemic(base_params, epidemic):
    cfg = RzeroConfig(100, 100, RngStream(4))
    series = rzero_path(epidemic, base_params, cfg, days=[0, 700])
    assert series.basic[0] == pytest.approx(1 / 0.7, rel=0.1)
    assert series.basic[1] == pytest.approx(1 / 0.7, rel=0.1)
    assert series.effective[1] < 0.8  # depleted susceptibles


def test_standard_error_scales_with_replications(base_params, epidemic):
    s = epidemic.state(int(np.argmax(epidemic.N2)) - 40)
    se100 = r0_at(s, base_params, RzeroConfig(60, 100, RngStream(5))).se_basic
    se400 = r0_at(s, base_params, RzeroConfig(60, 400, RngStream(6))).se_basic
    assert se100 / se400 == pytest.approx(2.0, rel=0.3)


def test_rzero_path_on_disease_free_path(base_params):
    n = 3_000_000
    path = CountPath([n - 100] * 5, [0] * 5, [100] * 5)
    series = rzero_path(path, base_params, RzeroConfig(50, 5))
    assert np.all(series.basic == series.basic[0])
    assert series.basic[0] == pytest.approx(0.1 * (1 - 0.93**50) / 0.07, rel=1e-13)
    assert np.all(series.defined)


def test_rzero_path_reproducible(base_params, epidemic):
    cfg = RzeroConfig(40, 20, RngStream(8))
    a = rzero_path(epidemic, base_params, cfg, days=[10, 150])
    b = rzero_path(epidemic, base_params, cfg, days=[150])
    assert a.basic[1] == b.basic[0]
