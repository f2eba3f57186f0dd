"""System exchange format: JSON documents describing (D, M, C).

A system document is an object with optional "n" and "D" fields and matrix
fields "M" and "C", each either an explicit list of rows or a generator
descriptor:

    {"n": 2,
     "D": [1.0, 4.0],                          # diagonal; omitted -> identity
     "M": {"laplacian": {"sigmas": [1.0, 1.0], "boundary": "periodic"}},
     "C": {"circulant": {"phi": [0.25, 0.75]}}}

The shortcut {"n2": {"gamma": g, "sigma": s}} expands to the two-component
symmetric family.  Values are written back with repr, which round-trips
doubles exactly (17 significant digits).
"""

from __future__ import annotations

import json

import numpy as np

from .spectral_core import (SystemSpec, family_n2, make_circulant,
                            make_discrete_laplacian)


def system_from_dict(doc: dict) -> SystemSpec:
    """Build a SystemSpec from a parsed exchange document."""
    if not isinstance(doc, dict):
        raise ValueError("system document must be an object")
    unknown = set(doc) - {"n", "D", "M", "C", "n2"}
    if unknown:
        # a typoed key would otherwise silently fall back to a default
        raise ValueError(f"unknown system keys: {sorted(unknown)}")
    if "n2" in doc:
        fam = doc["n2"]
        try:
            spec = family_n2(float(fam["gamma"]), float(fam["sigma"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad n2 family block: {exc}") from exc
        if "D" in doc:
            return SystemSpec(d=np.asarray(doc["D"], dtype=float),
                              M=spec.M, C=spec.C)
        return spec
    if "M" not in doc or "C" not in doc:
        raise ValueError("system document needs M and C (or an n2 block)")
    M = _matrix_from_node(doc["M"], "M")
    C = _matrix_from_node(doc["C"], "C")
    n = M.shape[0]
    if "n" in doc and int(doc["n"]) != n:
        raise ValueError(f"declared n = {doc['n']} but M is {n} x {n}")
    d = np.asarray(doc.get("D", np.ones(n)), dtype=float)
    return SystemSpec(d=d, M=M, C=C)


def _matrix_from_node(node, name):
    if isinstance(node, dict):
        if "laplacian" in node:
            gen = node["laplacian"]
            return make_discrete_laplacian(gen["sigmas"],
                                           gen.get("boundary", "periodic"))
        if "circulant" in node:
            return make_circulant(node["circulant"]["phi"])
        raise ValueError(f"{name}: unknown generator {sorted(node)}")
    arr = np.asarray(node, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square row list")
    return arr


def system_to_dict(spec: SystemSpec) -> dict:
    """Explicit (rows) exchange document for a SystemSpec."""
    return {
        "n": spec.n,
        "D": [float(x) for x in spec.d],
        "M": [[float(x) for x in row] for row in spec.M],
        "C": [[float(x) for x in row] for row in spec.C],
    }


def load_system(path) -> SystemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed system file {path}: {exc}") from exc
    return system_from_dict(doc)


def dump_system(spec: SystemSpec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(spec), fh, indent=1)
        fh.write("\n")
