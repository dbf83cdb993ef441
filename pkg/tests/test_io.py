import json

import numpy as np
import pytest

from periodic_drift import io
from periodic_drift.local_time import chi_field, estimate_local_time, stationary_density
from periodic_drift.posterior import posterior
from periodic_drift.prior import PriorSpec
from periodic_drift.sde import SamplePath, simulate


def test_path_round_trip_bit_exact(tmp_path):
    path = simulate("sin", 2, 1e-3, seed=1)
    io.write_path_csv(path, tmp_path / "p.csv")
    back = io.read_path_csv(tmp_path / "p.csv")
    np.testing.assert_array_equal(back.values, path.values)
    assert back.dt == pytest.approx(path.dt, rel=1e-12)
    assert (tmp_path / "p.csv").read_text().startswith("t,x\n")


def test_path_reader_rejects_nonuniform(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("t,x\n0,0\n0.1,0.2\n0.3,0.1\n")
    with pytest.raises(ValueError):
        io.read_path_csv(f)


def test_field_round_trip(tmp_path):
    path = simulate("zero", 3, 1e-3, seed=2)
    lt, chi = estimate_local_time(path, 32), chi_field(path, 32)
    io.write_field_csv(lt, chi, tmp_path / "f.csv")
    lt2, chi2 = io.read_field_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(lt2.values, lt.values)
    np.testing.assert_array_equal(chi2.values, chi.values)
    assert lt2.T == pytest.approx(path.T, rel=1e-12)


def test_law_round_trip(tmp_path):
    law = stationary_density("sin", 16)
    io.write_law_csv(law, tmp_path / "law.csv")
    back = io.read_law_csv(tmp_path / "law.csv")
    np.testing.assert_array_equal(back.rho, law.rho)
    np.testing.assert_array_equal(back.s_prime, law.s_prime)
    assert back.m_mass == law.m_mass


def test_posterior_json_round_trip(tmp_path):
    path = simulate("sin", 20, 1e-3, seed=3)
    post = posterior(PriorSpec(N=6, eta=0.1), estimate_local_time(path, 32), chi_field(path, 32))
    io.write_posterior_json(post, tmp_path / "post.json")
    doc = json.loads((tmp_path / "post.json").read_text())
    assert set(doc) == {"p", "eta", "kappa", "N", "T", "mean", "precision"}
    back = io.read_posterior_json(tmp_path / "post.json")
    np.testing.assert_array_equal(back.mean, post.mean)
    np.testing.assert_array_equal(back.precision, post.precision)
    assert back.spec == post.spec


def test_rows_csv_cells(tmp_path):
    io.write_rows_csv(["a", "b", "c", "d"], [{"a": 1, "b": 0.1, "c": True, "d": "x, y"}, {"a": 2}], tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text() == 'a,b,c,d\n1,0.10000000000000001,1,"x, y"\n2,,,\n'
