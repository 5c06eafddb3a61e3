"""Bundled data.

``compas.csv`` holds five columns of the ProPublica two-year COMPAS file
(7,214 defendants): age, prior count, race, decile score and two-year
recidivism.
"""
from __future__ import annotations

from importlib import resources

from ..data import Dataset, Schema, load_csv

COMPAS_SCHEMA = Schema(
    features=("age", "priors_count"),
    attribute="race",
    attribute_positive="African-American",
    outcome="two_year_recid",
    extra=("decile_score",),
)


def compas_path():
    return resources.files(__package__) / "compas.csv"


def load_compas() -> Dataset:
    """COMPAS in full-label mode; ``a = 1`` for Black defendants, decile score as an extra column."""
    with resources.as_file(compas_path()) as p:
        return load_csv(p, COMPAS_SCHEMA)
