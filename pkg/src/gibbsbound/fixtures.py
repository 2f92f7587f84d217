"""Packaged reference fixtures and their verification.

Each fixture ships with the expected values recorded in registry.json,
tagged with their origin (closed form, hand-built bytes, direct formula).
verify_fixtures recomputes every expectation from the code paths it
exercises and reports mismatches; it runs inside oracle-check and the test
suite.
"""

import json
import math
from importlib import resources

import numpy as np

from . import data as data_mod
from . import exact_gibbs as eg
from .klscalar import binary_kl

__all__ = ["fixture_bytes", "fixture_text", "load_registry", "verify_fixtures"]

_TOL = 1e-12


def _root():
    return resources.files("gibbsbound") / "fixtures"


def fixture_bytes(name):
    return (_root() / name).read_bytes()


def fixture_text(name):
    return (_root() / name).read_text()


def load_registry():
    return json.loads(fixture_text("registry.json"))


def two_hypothesis_space():
    return eg.FiniteHypothesisSpace.from_table(fixture_text("two_hypothesis.txt"))


def verify_fixtures():
    """Recompute every registered expectation; returns a list of failures."""
    registry = load_registry()
    failures = []

    def check(name, key, got, want, tol=_TOL):
        if isinstance(want, list):
            ok = np.allclose(got, want, atol=tol, rtol=0.0)
        else:
            ok = abs(got - want) <= tol
        if not ok:
            failures.append(f"{name}: {key}: got {got}, expected {want}")

    exp = registry["two_hypothesis.txt"]["expectations"]
    space = two_hypothesis_space()
    b = math.log(3.0)
    check("two_hypothesis.txt", "partition_at_ln3", eg.partition_function(space, b),
          exp["partition_at_ln3"])
    check("two_hypothesis.txt", "free_energy_at_ln3", -eg.log_partition_function(space, b),
          exp["free_energy_at_ln3"])
    check("two_hypothesis.txt", "posterior_mean_loss_at_ln3", eg.posterior_mean_loss(space, b),
          exp["posterior_mean_loss_at_ln3"])
    check("two_hypothesis.txt", "gamma_single_rung_ln3_h0",
          eg.exact_gamma(space, (0.0, b), 0), exp["gamma_single_rung_ln3_h0"])
    check("two_hypothesis.txt", "heat_capacity_at_0", eg.heat_capacity(space, 0.0),
          exp["heat_capacity_at_0"])

    exp = registry["idx_images.bin"]["expectations"]
    raw = data_mod.load_idx(fixture_bytes("idx_images.bin"), fixture_bytes("idx_labels.bin"))
    check("idx_images.bin", "n", raw.n, exp["n"])
    check("idx_images.bin", "d_in", raw.features.shape[1], exp["d_in"])
    check("idx_images.bin", "first_row", raw.features[0], exp["first_row"])
    check("idx_images.bin", "raw_labels", raw.raw_labels, exp["raw_labels"])

    exp = registry["cifar_records.bin"]["expectations"]
    blob = fixture_bytes("cifar_records.bin")
    if len(blob) != exp["n"] * exp["record_bytes"]:
        failures.append("cifar_records.bin: unexpected byte length")
    raw = data_mod.load_cifar_binary(blob)
    check("cifar_records.bin", "n", raw.n, exp["n"])
    check("cifar_records.bin", "raw_labels", raw.raw_labels, exp["raw_labels"])

    rows = 0
    for line in fixture_text("kl_table.txt").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        p, q, expected = (float(tok) for tok in line.split())
        rows += 1
        check("kl_table.txt", f"kl({p}, {q})", binary_kl(p, q), expected)
    check("kl_table.txt", "rows", rows, registry["kl_table.txt"]["expectations"]["rows"])

    return failures
