import numpy as np
import pytest

from blockrc.data import (
    Dataset,
    MGConfig,
    add_noise_validation,
    build_mg_task,
    debutanizer_features,
    gen_mackey_glass,
    gen_plant,
    load_csv,
    plant_test_input,
    save_csv,
    simulate_plant,
)
from blockrc.errors import DataError, InvalidArgumentError
from blockrc.numeric import substream


# ---------------------------------------------------------------------------
# delayed-feedback series
# ---------------------------------------------------------------------------

def test_mg_series_length():
    series = gen_mackey_glass(MGConfig(length=1177, seed=1))
    assert series.shape == (1177,)
    assert np.isfinite(series).all()


def test_mg_zero_dynamics_constant():
    series = gen_mackey_glass(MGConfig(upsilon=0.0, alpha_mg=0.0, length=60, seed=2))
    assert np.all(series == series[0])
    assert 0.1 <= series[0] <= 1.3


def test_mg_determinism():
    a = gen_mackey_glass(MGConfig(seed=5, length=300))
    b = gen_mackey_glass(MGConfig(seed=5, length=300))
    np.testing.assert_array_equal(a, b)
    c = gen_mackey_glass(MGConfig(seed=6, length=300))
    assert not np.array_equal(a, c)


def _euler_oracle(cfg, substeps):
    """First-order fine-step integrator on the same delayed dynamics."""
    rng = substream(cfg.seed, 101)
    u0 = rng.uniform(*cfg.init_range)
    tau_fine = cfg.tau_delay * substeps
    total = (cfg.length - 1) * substeps + 1
    h = cfg.dt / substeps
    u = np.empty(total)
    u[: tau_fine + 1] = u0
    for i in range(tau_fine, total - 1):
        ud = u[i - tau_fine]
        u[i + 1] = u[i] + h * (cfg.upsilon * u[i] + cfg.alpha_mg * ud / (1 + ud**10))
    return u[::substeps]


def test_mg_midpoint_matches_fine_euler_oracle():
    cfg = MGConfig(dt=0.1, length=200, tau_delay=17, seed=7)
    coarse = gen_mackey_glass(cfg)
    fine = _euler_oracle(cfg, substeps=100)
    assert np.abs(coarse - fine).max() < 1e-3


def test_mg_config_validation():
    with pytest.raises(InvalidArgumentError):
        MGConfig(tau_delay=0)
    with pytest.raises(InvalidArgumentError):
        MGConfig(length=10, tau_delay=17)


# ---------------------------------------------------------------------------
# lagged task construction
# ---------------------------------------------------------------------------

def test_mg_task_variants_and_splits():
    series = gen_mackey_glass(MGConfig(seed=3))
    for variant, k in (("mg", 4), ("mg1", 3), ("mg2", 2)):
        train, val, test = build_mg_task(series, variant)
        assert train.k == val.k == test.k == k
        assert train.l == 1
        assert (train.n, val.n) == (500, 300)
        assert test.n == 1177 - 18 - 6 - 800
        assert train.washout == val.washout == test.washout == 20


def test_mg_task_lag_alignment():
    series = gen_mackey_glass(MGConfig(seed=4))
    train, _, _ = build_mg_task(series, "mg")
    # row i is y(n - lag_i); target is y(n + 6); check directly on the series
    for j in range(train.n):
        c = 18 + j
        np.testing.assert_array_equal(train.u[:, j], series[[c, c - 6, c - 12, c - 18]])
        assert train.t[0, j] == series[c + 6]


def test_mg_task_splits_are_time_ordered_and_disjoint():
    series = gen_mackey_glass(MGConfig(seed=8))
    train, val, test = build_mg_task(series, "mg2")
    # consecutive split boundaries: next split's first target continues the series
    joined = np.concatenate([train.t[0], val.t[0], test.t[0]])
    np.testing.assert_array_equal(joined, series[18 + 6 : 18 + 6 + joined.size])


def test_mg_task_rejects_short_series():
    with pytest.raises(InvalidArgumentError):
        build_mg_task(np.zeros(500), "mg")


def test_mg_task_rejects_unknown_variant():
    with pytest.raises(InvalidArgumentError):
        build_mg_task(np.zeros(2000), "mg3")


# ---------------------------------------------------------------------------
# nonlinear plant
# ---------------------------------------------------------------------------

def test_plant_hand_value_zero_drive():
    y = simulate_plant(np.zeros(6))
    assert y[3] == 0.1  # y(4)
    assert y[4] == pytest.approx(0.72 * 0.1, abs=1e-15)  # y(5)


def test_plant_test_input_values():
    u = plant_test_input(1000)
    assert u[99] == pytest.approx(np.sin(4 * np.pi), abs=1e-12)  # n=100
    assert u[299] == 1.0  # n=300
    assert u[599] == -1.0  # n=600
    assert np.all(np.abs(u) <= 1.0)


def test_plant_splits():
    train, val, test = gen_plant(seed=11)
    assert (train.n, val.n, test.n) == (2000, 1000, 1000)
    assert train.k == 2 and train.l == 1
    assert train.washout == val.washout == test.washout == 100
    assert np.all(np.abs(train.u[1]) <= 1.0)  # uniform drive stays in [-1, 1]
    assert np.all(np.abs(test.u[1]) <= 1.0)
    assert not np.array_equal(train.u[1][:1000], val.u[1])


def test_plant_feature_alignment():
    train, _, _ = gen_plant(seed=12)
    # input row 0 is y(n): equals the target shifted back by one step
    np.testing.assert_array_equal(train.u[0, 1:], train.t[0, :-1])


def test_plant_determinism():
    a, _, _ = gen_plant(seed=13)
    b, _, _ = gen_plant(seed=13)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.t, b.t)


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def test_csv_roundtrip_value_exact(tmp_path):
    rng = substream(21, 105)
    ds = Dataset(rng.normal(size=(2, 9)), rng.normal(size=(1, 9)), washout=2, name="x")
    path = tmp_path / "d.csv"
    save_csv(ds, path)
    back = load_csv(path, k=2, l=1, washout=2)
    np.testing.assert_array_equal(back.u, ds.u)
    np.testing.assert_array_equal(back.t, ds.t)


def test_csv_small_file(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("u_1,u_2,t_1\n1,2,3\n4,5,6\n7,8,9\n")
    ds = load_csv(path, k=2, l=1, washout=0)
    assert ds.n == 3
    np.testing.assert_array_equal(ds.u, [[1, 4, 7], [2, 5, 8]])
    np.testing.assert_array_equal(ds.t, [[3, 6, 9]])


def test_csv_names_bad_row(tmp_path):
    path = tmp_path / "d.csv"
    rows = ["u_1,t_1"] + [f"{i},{i}" for i in range(1, 7)] + ["oops,7", "8,8"]
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(DataError, match="row 7"):
        load_csv(path, k=1, l=1, washout=0)


def test_csv_rejects_header_mismatch(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DataError, match="header"):
        load_csv(path, k=1, l=1, washout=0)


def test_csv_rejects_wrong_column_count(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("u_1,t_1\n1,2\n1,2,3\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(path, k=1, l=1, washout=0)


def test_csv_missing_file():
    with pytest.raises(DataError):
        load_csv("/nonexistent/nope.csv", k=1, l=1, washout=0)


# ---------------------------------------------------------------------------
# industrial features
# ---------------------------------------------------------------------------

def _fake_debutanizer(n=2394, seed=31):
    rng = substream(seed, 106)
    u = rng.normal(size=(7, n))
    y = rng.normal(size=(1, n))
    return Dataset(u, y, washout=0, name="debut-raw")


def test_debutanizer_reduced_mode():
    raw = _fake_debutanizer()
    train, test = debutanizer_features(raw, "reduced")
    assert train.k == test.k == 6
    assert test.n == 894
    assert train.washout == 100
    # last input row is y(n-1): the target shifted by one step
    np.testing.assert_array_equal(train.u[5, 1:], train.t[0, :-1])


def test_debutanizer_full_mode():
    raw = _fake_debutanizer()
    train, test = debutanizer_features(raw, "full")
    assert train.k == test.k == 13
    assert test.n == 894
    # averaged channel
    c = 10  # first constructed sample center (headroom 4 ... check col 6)
    np.testing.assert_allclose(
        train.u[8], (train.u[0] + train.u[1]) / 2.0, atol=1e-12
    )
    # deepest target lag
    np.testing.assert_array_equal(train.u[12, 4:], train.t[0, :-4])


def test_debutanizer_rejects_wrong_shape():
    raw = Dataset(np.zeros((3, 50)), np.zeros((1, 50)), washout=0)
    with pytest.raises(InvalidArgumentError):
        debutanizer_features(raw, "reduced")


# ---------------------------------------------------------------------------
# validation noise
# ---------------------------------------------------------------------------

def test_noise_zero_sigma_identity():
    base = _fake_debutanizer(n=200)
    out = add_noise_validation(base, 0.0, seed=5)
    np.testing.assert_array_equal(out.u, base.u)
    np.testing.assert_array_equal(out.t, base.t)


def test_noise_matches_requested_scale():
    base = _fake_debutanizer(n=894)
    out = add_noise_validation(base, 0.05, seed=6)
    for row_noisy, row_base in zip(np.vstack([out.u, out.t]), np.vstack([base.u, base.t])):
        got = (row_noisy - row_base).std()
        want = 0.05 * row_base.std()
        assert abs(got - want) <= 0.2 * want


def test_noise_determinism():
    base = _fake_debutanizer(n=100)
    a = add_noise_validation(base, 0.05, seed=7)
    b = add_noise_validation(base, 0.05, seed=7)
    np.testing.assert_array_equal(a.u, b.u)
