import numpy as np
import pytest

from nls_collapse import tables
from nls_collapse.tables import (
    TABLE_IDS, UnknownTable, compute_table, criterion_roots, energy_zero, first_crossing, reference_values, roots_in,
)

# reference entries that disagree with their own defining formulas; the value
# here is what the formula gives
MISPRINTS = {
    ("T4:LAphase", 2.4, "p_t"): 13.0476,
    ("T4:LAphase", 3.0, "p_t"): 13.0079,
    ("T2:LAsuperphase", 2.0, "p_b"): 2.9672,
    ("T3:LAsimple", 4.0, "p_b"): 42.8238,
}


def test_roots_in():
    r = roots_in(np.sin, 0.5, 10.0)
    assert np.allclose(r, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-10)
    assert roots_in(lambda x: x**2 + 1, -1, 1) == []


def test_roots_in_exact_grid_zero():
    assert roots_in(lambda x: x - 0.5, 0, 1, n=4) == [0.5]


def test_first_crossing():
    assert first_crossing(lambda x: x > np.sqrt(2), 0, 3) == pytest.approx(np.sqrt(2), abs=1e-9)
    assert first_crossing(lambda x: x > 5, 0, 3) is None


def test_energy_zero():
    assert energy_zero("gaussian", alpha=1.0) == pytest.approx(np.sqrt(6 * np.sqrt(2)), rel=1e-12)
    assert energy_zero("gaussian", alpha=4.0) == pytest.approx(2 * np.sqrt(6 * np.sqrt(2)), rel=1e-12)


def test_criterion_roots_gaussian():
    assert criterion_roots("gaussian", "L", alpha=1.0, gamma=0.5) == pytest.approx([1.58, 4.08], abs=0.01)
    assert criterion_roots("offcentered", "me", alpha=1.0, gamma=0.5) == pytest.approx([2.3, 9.51], abs=0.02)
    with pytest.raises(ValueError):
        criterion_roots("gaussian", "nope", alpha=1.0)


def test_reference_file():
    ref = reference_values()
    assert set(TABLE_IDS) <= set(ref)
    assert ("SIM:gaussian" in ref) and all(len(v) > 0 for v in ref.values())


def test_unknown_table():
    with pytest.raises(UnknownTable):
        compute_table("T9:nothing")


@pytest.mark.parametrize("tid", TABLE_IDS)
def test_tables_reproduce_reference(tid, ground):
    for row in compute_table(tid, ground):
        key = (row.table, row.param, row.row)
        if key in MISPRINTS:
            assert row.computed == pytest.approx(MISPRINTS[key], abs=1e-3)
            assert row.abs_diff > 0.05
        else:
            assert row.abs_diff <= 0.02, key


def test_hhalf_table_zero_frequency(ground):
    rows = {(r.param, r.row): r.computed for r in compute_table("T4:H12", ground)}
    assert rows[(0.0, "hhalf_over_p2")] == pytest.approx(np.pi, rel=1e-6)
    assert rows[(0.0, "p_half")] == pytest.approx(np.sqrt(ground.hhalf_sq / np.pi), rel=1e-6)


def test_coefficients_to_hundredth(ground):
    for tid in tables.COEF_TABLES:
        for row in compute_table(tid, ground):
            assert row.abs_diff <= 0.01, (tid, row.row)
