import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from biasrep.noise_model import (ErrorRateTable, OpKind, Rates, Species,
                                 zero_rates)


def table_with(**overrides) -> ErrorRateTable:
    """Zero table with selected entries overridden, e.g.
    table_with(cz_A=Rates(eps=1e-3), prep_B=Rates(eps_leak=1e-4))."""
    kinds = {"cz": OpKind.CPHASE, "prep": OpKind.PREP_PLUS,
             "measx": OpKind.MEASURE_X}
    table = zero_rates()
    for key, rates in overrides.items():
        kind_name, species_name = key.rsplit("_", 1)
        table.entries[(kinds[kind_name], Species(species_name))] = rates
    return table


def uniform_table(eps: float, eps_other: float = 0.0) -> ErrorRateTable:
    """Same eps on every operation (phase + measurement flip), with optional
    non-phase noise on preps and CPHASEs.  Leak-free."""
    table = zero_rates()
    for sp in Species:
        table.entries[(OpKind.PREP_PLUS, sp)] = Rates(eps, eps_other)
        table.entries[(OpKind.CPHASE, sp)] = Rates(eps, eps_other)
        table.entries[(OpKind.MEASURE_X, sp)] = Rates(eps)
    return table


@pytest.fixture
def make_table():
    return table_with
