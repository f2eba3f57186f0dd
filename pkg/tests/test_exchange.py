"""System serialization round trips and validation."""

import json

import numpy as np
import numpy.testing as npt
import pytest

from kppfronts import (dump_system, family_n2, load_system, system_from_dict,
                       system_to_dict)


def test_dict_round_trip_is_exact():
    rng = np.random.default_rng(50)
    spec = family_n2(rng.uniform(0.1, 0.9), rng.uniform(0.01, 0.4),
                     d=(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)))
    doc = system_to_dict(spec)
    back = system_from_dict(doc)
    npt.assert_array_equal(back.d, spec.d)
    npt.assert_array_equal(back.M, spec.M)
    npt.assert_array_equal(back.C, spec.C)


def test_dict_round_trip_survives_json():
    spec = family_n2(0.7310585786300049, 0.05000000000000001)
    doc = json.loads(json.dumps(system_to_dict(spec)))
    back = system_from_dict(doc)
    npt.assert_array_equal(back.M, spec.M)
    npt.assert_array_equal(back.C, spec.C)


def test_file_round_trip(tmp_path):
    spec = family_n2(0.8, 0.05)
    path = tmp_path / "system.json"
    dump_system(spec, path)
    back = load_system(path)
    npt.assert_array_equal(back.d, spec.d)
    npt.assert_array_equal(back.M, spec.M)
    npt.assert_array_equal(back.C, spec.C)


def test_from_dict_validation():
    good = system_to_dict(family_n2(0.3, 0.05))
    with pytest.raises((KeyError, ValueError)):
        system_from_dict({k: v for k, v in good.items() if k != "C"})
    bad = dict(good)
    bad["M"] = [[0.0, 1.0], [1.0]]  # ragged
    with pytest.raises(ValueError):
        system_from_dict(bad)
    bad = dict(good)
    bad["D"] = [1.0, -1.0]
    with pytest.raises(ValueError):
        system_from_dict(bad)
    bad = dict(good)
    bad["C"] = [[0.5, 0.5]]  # not square
    with pytest.raises(ValueError):
        system_from_dict(bad)
    bad = dict(good)
    bad["d"] = bad.pop("D")  # lowercase key must not be silently dropped
    with pytest.raises(ValueError):
        system_from_dict(bad)


def test_generator_nodes_expand():
    spec = system_from_dict({
        "D": [1.0, 1.0],
        "M": {"laplacian": {"sigmas": [0.5, 0.5], "boundary": "periodic"}},
        "C": {"circulant": {"phi": [0.25, 0.75]}},
    })
    npt.assert_array_equal(spec.M, [[-1.0, 1.0], [1.0, -1.0]])
    assert spec.C.shape == (2, 2)
    npt.assert_allclose(spec.C.sum(axis=1), 1.0, atol=1e-15)
    fam = system_from_dict({"n2": {"gamma": 0.8, "sigma": 0.05}})
    npt.assert_array_equal(fam.M, [[-0.05, 0.05], [0.05, -0.05]])
