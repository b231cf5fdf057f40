import math

import pytest

from bgrecon.hadamard import (
    HadamardInstance,
    amplification_table,
    amplification_table_to_csv,
    phi_k,
    u_k,
)


def test_instance_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        HadamardInstance(0)
    with pytest.raises(ValueError):
        phi_k(-1, 0.5)


def test_datum_closed_form():
    for k in (1, 2, 5):
        x = 0.37
        assert phi_k(k, x) == pytest.approx(math.sin(math.pi * k * x) / (math.pi * k))


def test_solution_closed_form():
    k, x, y = 3, 0.25, 0.5
    expected = (
        math.sinh(math.pi * k * y) * math.sin(math.pi * k * x) / (math.pi * k) ** 2
    )
    assert u_k(k, x, y) == pytest.approx(expected)


def test_solution_vanishes_on_data_line():
    for k in (1, 4):
        assert u_k(k, 0.3, 0.0) == 0.0


def test_table_rows_match_closed_forms():
    rows = amplification_table(6)
    assert len(rows) == 6
    for k, data_norm, solution_sup, ratio in rows:
        pk = math.pi * k
        assert data_norm == pytest.approx(1.0 / pk, rel=1e-12)
        assert ratio == pytest.approx(math.sinh(pk) / pk, rel=1e-12)
        assert solution_sup == pytest.approx(math.sinh(pk) / pk**2, rel=1e-12)


def test_table_rejects_bad_kmax():
    with pytest.raises(ValueError):
        amplification_table(0)


def test_large_k_does_not_overflow():
    # sinh(pi k) overflows float64 near k = 226; the log-scale branch
    # must keep returning finite or inf values without raising
    rows = amplification_table(300)
    assert all(math.isfinite(r[1]) for r in rows)
    assert rows[200][3] > 1e200


def test_csv_output(tmp_path):
    path = tmp_path / "hadamard.csv"
    amplification_table_to_csv(amplification_table(3), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,data_norm,solution_sup,ratio"
    assert len(lines) == 4
