import csv
import io
import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from glkloosterman.bounds import (CSV_HEADER, ExactBound, bound_general_nu_exact, bound_thm_w8,
                                  bound_thm_w8_exact, bound_thm_wn, bound_thm_wn_exact, c_8, c_n,
                                  delta_power, evaluate_spec, exponent_factor, germ_decay_sweep,
                                  rows_to_csv, rows_to_json, run_sweep, weil_bound,
                                  weil_bound_exact)
from glkloosterman.errors import ConfigError
from glkloosterman.kloosterman import CellSpec


def test_exact_bound_comparisons():
    a = ExactBound.make(4, 2, Fraction(1, 2))  # 2 sqrt 2
    b = ExactBound.make(1, 2, Fraction(3, 2))  # 2 sqrt 2
    assert a <= b and b <= a and not a < b
    assert math.isclose(float(a), 2 * math.sqrt(2))
    assert a.dominates(2.828) and not a.dominates(2.829)
    huge = ExactBound.make(1, 3, 4000)
    assert math.isclose(huge.log_p(), 4000)


def test_weil_examples():
    assert weil_bound(1, 1, 1, 1, 3) == pytest.approx(27)
    assert weil_bound(1, 1, 0, 1, 2) == pytest.approx(4 * math.sqrt(2))
    # |nu| = p^-m saturates |p^m nu|^-1 at p^2m
    b = weil_bound_exact(3, 3, 2, 1, 3)
    assert b.exp == Fraction(1, 2) + Fraction(2, 2) + Fraction(3, 2)


def test_exponent_factors():
    assert exponent_factor(3) == Fraction(3, 4)
    assert exponent_factor(4) == Fraction(13, 14)
    assert Fraction(7, 8) < exponent_factor(4)


@given(st.integers(3, 6), st.sampled_from([2, 3, 5]), st.integers(1, 2), st.integers(0, 4))
def test_c_n_collapses(n, p, m, extra):
    ell = m + extra
    C = c_n(n, p, m, ell)
    assert C.exp == (2 * n + 7) * (n - 1) * m
    poly_sq = (ell + (n - 1) * m + 1) ** (2 * (n * n - 1)) * ((n - 1) * ell + n) ** (n**3)
    assert C.coef_sq == 4 ** (n * n - 1) * poly_sq


def test_c_8_plug_in():
    # 8 * 2^12 * 3^3 * 3 * 3^2 * 3^2
    assert float(c_8(2, 1, 1, 1, 1, 1)) == pytest.approx(8 * 2**12 * 27 * 3 * 9 * 9)


def test_w8_forms():
    spec = CellSpec(2, 4, 1, (1, 1, 1), (1, 1, 1, 1))
    best, b_min, b_78 = bound_thm_w8_exact(spec, forms=True)
    C = c_8(2, 1, 1, 1, 1, 1)
    assert b_min.exp == C.exp + Fraction(5, 2) + 3
    assert b_78.exp == C.exp + Fraction(21, 8) + 3
    assert best == b_min
    assert bound_thm_w8(spec) == pytest.approx(float(C) * 2 ** 5.5)


def test_wn_forms_n3():
    spec = CellSpec(3, 3, 1, (1, 2), (1, 1, -1))
    best, b_min, b_uni = bound_thm_wn_exact(spec, forms=True)
    C = c_n(3, 3, 1, 2)
    # first form sigma + rho/2 + 3m, second ell/2 + 2 sigma - ell + 3m
    first, second = 1 + Fraction(2, 2) + 3, Fraction(2, 2) + 2 - 2 + 3
    assert b_min.exp == C.exp + min(first, second)
    assert b_uni.exp == C.exp + Fraction(3, 4) * 3 + 3
    assert bound_thm_wn(spec) == pytest.approx(float(min(b_min, b_uni)))


def test_general_nu_reduces_to_unit_case():
    for spec in (CellSpec(3, 3, 1, (1, 2), (1, 1, -1)), CellSpec(2, 4, 1, (1, 2, 1), (1, 1, 1, 1))):
        bound = bound_thm_wn_exact if spec.n == 3 else bound_thm_w8_exact
        assert bound_general_nu_exact(spec) == bound(spec)


def test_general_nu_saturation():
    # |nu_j|, |nu'_j| = p^-m: the gcd factor is p^(ell+m) once ell <= 3m
    base = CellSpec(3, 3, 1, (2, 3), (1, 1, -1))
    sat = base.replace(nu=(3, 3), nu_prime=(3, 3))
    _, b0, _ = bound_general_nu_exact(base, forms=True)
    _, b1, _ = bound_general_nu_exact(sat, forms=True)
    ell, m = 3, 1
    assert b1.exp - b0.exp == 2 * (Fraction(ell + m, 2) - Fraction(2 * m, 2))


def test_delta_power():
    assert delta_power((1, 1, 1), 2, Fraction(1, 2)) == Fraction(1, 8)
    assert delta_power((1,), 3, 0) == 1


def test_germ_decay_sweep():
    rows = germ_decay_sweep(2, 0.05, [(1,), (2,)], {"p": 3, "units": (1, -1)})
    assert [r.path for r in rows] == ["generic", "generic"]
    # |K_e| = p^-1 |Kl|, weighted by p^-(1 - 2 delta) a
    assert rows[0].magnitude == pytest.approx(1 * 3 ** -0.9)
    with pytest.raises(ConfigError):
        germ_decay_sweep(2, 0.3, [(1,)], {"p": 3, "units": (1, -1)})


def test_report_formats(tmp_path):
    row = evaluate_spec(CellSpec(3, 2, 1, (1,), (1, -1)))
    data = json.loads(rows_to_json([row]))[0]
    assert list(data) == ["params", "cell_size", "sum", "complex", "magnitude", "bound", "ratio",
                          "path", "elapsed_ms"]
    assert data["sum"] == {"order_exp": 3, "coeffs": [[0, -3], [9, -3]]}
    assert data["cell_size"] == 3 and row.passed
    rd = list(csv.reader(io.StringIO(rows_to_csv([row]))))
    assert rd[0] == CSV_HEADER
    assert rd[1][:4] == ["3", "1", "2", "1"]


@pytest.mark.parametrize("check,grid", [
    ("stevens", {"n": [2, 3], "p": [2], "a": [1]}),
    ("weil", {"p": [2, 3], "m": [1], "ell": [0, 1, 2]}),
    ("dr", {"n": [2, 3], "p": [2], "height": 2}),
    ("thm-wn", {"n": [3], "p": [3], "a": [1, 2]}),
    ("thm-w8", {"p": [2], "a_vectors": [[1, 2, 1]], "units": [[1, 1, 1, 1]]}),
    ("gl4-dual", {"p": [2], "a_vectors": [[1, 1, 1]], "units": [[1, 1, 1, 1]]}),
])
def test_run_sweep_checks(check, grid, tmp_path):
    out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
    summary = run_sweep({"check": check, "grid": grid, "out_json": str(out_json),
                         "out_csv": str(out_csv)})
    assert summary["failed"] == 0 and summary["passed"] > 0
    assert len(json.loads(out_json.read_text())) == len(summary["rows"])
    assert out_csv.read_text().splitlines()[0] == ",".join(CSV_HEADER)


def test_sweep_is_deterministic():
    cfg = {"check": "thm-wn", "grid": {"n": [3], "p": [2], "a": [1, 2]}}
    a, b = run_sweep(cfg), run_sweep(cfg)
    strip = lambda rows: [{k: v for k, v in r.to_json().items() if k != "elapsed_ms"} for r in rows]
    assert strip(a["rows"]) == strip(b["rows"])


def test_sweep_config_errors():
    with pytest.raises(ConfigError):
        run_sweep({"grid": {}})
    with pytest.raises(ConfigError):
        run_sweep({"check": "nope"})


def test_infeasible_points_are_skipped():
    summary = run_sweep({"check": "thm-wn", "grid": {"n": [3], "p": [3], "a": [1],
                                                     "units": [[1, 1, 1], [1, 1, -1]]}})
    paths = [r.path for r in summary["rows"]]
    assert paths == ["skipped", "generic"] and summary["skipped"] == 1
