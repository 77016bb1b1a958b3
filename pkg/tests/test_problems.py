import json
import math

import numpy as np
import pytest

from ams1d.errors import DegenerateCoefficient, ParseError, SignStructureError
from ams1d.problems import (
    ProblemKind,
    SeededRng,
    example1,
    example_random,
    load_external,
    resolve_problem,
    validate_sign_structure,
)
from ams1d.tridiag import TridiagonalSystem


def test_example1_coefficient():
    spec = example1()
    assert spec.kind is ProblemKind.ANALYTIC
    assert spec.coefficient(np.array([0.0]))[0] == pytest.approx(4 / 3, rel=1e-15)
    x = np.linspace(0, 1, 100_001)
    a = spec.coefficient(x)
    # (1 + x) in [1, 2] and 1 + cos^2 in [1, 2]
    assert a.min() >= 2 / 3 - 1e-12
    assert a.max() <= 8 / 3 + 1e-12


def test_example1_antiderivative():
    spec = example1()
    np.testing.assert_array_equal(spec.antiderivative(np.array([0.0, 0.5, 1.0])), [0, -0.5, -1])


def test_example1_homogenized():
    spec = example1()
    expect = 3 / (2 * math.sqrt(2)) * (0.5 - math.log(1.5) / math.log(2))
    assert spec.homogenized(np.array([0.5]))[0] == pytest.approx(expect, rel=1e-14)
    assert spec.homogenized(np.array([0.5]))[0] == pytest.approx(-0.090116, abs=1e-6)
    np.testing.assert_allclose(spec.homogenized(np.array([0.0, 1.0])), [0, 0], atol=1e-15)


def test_seeded_rng_open_interval_and_repeatable():
    u = SeededRng(3).uniform(10_000)
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_array_equal(u, SeededRng(3).uniform(10_000))


@pytest.mark.parametrize("variant,lo,hi", [(2, 1.5, 2.5), (4, 0.0, 1.0)])
def test_variant_ranges(variant, lo, hi):
    spec = example_random(variant, 256, SeededRng(0))
    assert spec.kind is ProblemKind.RAW_ALGEBRAIC
    assert spec.magnitudes.size == 256 and spec.rhs.size == 257
    assert np.all(spec.magnitudes >= lo) and np.all(spec.magnitudes <= hi)


def test_growing_variants_scale_with_index():
    j = np.arange(1, 129)
    c3 = example_random(3, 128, SeededRng(4)).magnitudes
    assert np.all(c3 >= 1.5 * j) and np.all(c3 <= 2.5 * j)
    c5 = example_random(5, 128, SeededRng(4)).magnitudes
    assert np.all(c5 > 0) and np.all(c5 < j)


def test_variants_deterministic():
    a = example_random(5, 64, SeededRng(9))
    b = example_random(5, 64, SeededRng(9))
    np.testing.assert_array_equal(a.magnitudes, b.magnitudes)
    np.testing.assert_array_equal(a.rhs, b.rhs)


class TinyRng:
    seed = None

    def uniform(self, size):
        return np.full(size, 1e-15)


def test_degenerate_draws_rejected():
    with pytest.raises(DegenerateCoefficient):
        example_random(4, 8, TinyRng())


def test_resolve_problem():
    assert resolve_problem("ex1", 16, 0).name == "ex1"
    assert resolve_problem("ex3", 16, 0).magnitudes.size == 16
    with pytest.raises(ValueError):
        resolve_problem("ex9", 16, 0)


def write_system(path, diag, lower, rhs):
    path.write_text(json.dumps({"diag": diag, "lower": lower, "rhs": rhs}))
    return path


def test_load_external(tmp_path):
    path = write_system(tmp_path / "s.json", [1, 3, 2], [-1, -2], [0, 1, 0])
    spec = load_external(path)
    assert spec.kind is ProblemKind.EXTERNAL
    assert spec.system.size == 3


def test_load_external_errors(tmp_path):
    with pytest.raises(ParseError):
        load_external(tmp_path / "missing.json")
    with pytest.raises(SignStructureError):
        load_external(write_system(tmp_path / "a.json", [1, 3, 2], [1, -2], [0, 0, 0]))
    with pytest.raises(SignStructureError):
        load_external(write_system(tmp_path / "b.json", [1, -3, 2], [-1, -2], [0, 0, 0]))


def test_negative_row_sum_warns():
    with pytest.warns(RuntimeWarning):
        validate_sign_structure(TridiagonalSystem([1, 2, 2], [-1, -2], [0, 0, 0]))
