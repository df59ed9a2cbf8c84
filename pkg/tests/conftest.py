"""Shared fixtures: the reference convergence runs reused across tests."""

from __future__ import annotations

import pytest

from tfbs.harness import StudyConfig, run_convergence_study


# The five study blocks behind the reference tables; solved once per
# session (DS and FS, stability monitor on) and shared by the acceptance
# criteria that examine errors, orders, scheme agreement and stability.
STUDY_SPECS = {
    "ex1_spatial": StudyConfig(
        example=1, alpha=0.3, gamma=4.0, lam=1.0, mode="spatial",
        ladder=(4, 8, 16), stability_monitor=True,
    ),
    "ex1_temporal_a03": StudyConfig(
        example=1, alpha=0.3, gamma=4.0, lam=1.0, mode="temporal",
        ladder=(800, 1600, 3200), stability_monitor=True,
    ),
    "ex1_temporal_a05": StudyConfig(
        example=1, alpha=0.5, gamma=3.0, lam=1.0, mode="temporal",
        ladder=(640, 1280), stability_monitor=True,
    ),
    "ex2_spatial": StudyConfig(
        example=2, alpha=0.3, gamma=4.0, lam=1.0, mode="spatial",
        ladder=(4, 8), stability_monitor=True,
    ),
    "ex2_temporal": StudyConfig(
        example=2, alpha=0.3, gamma=4.0, lam=1.0, mode="temporal",
        ladder=(800,), stability_monitor=True,
    ),
}


@pytest.fixture(scope="session")
def study_tables():
    return {name: run_convergence_study(cfg) for name, cfg in STUDY_SPECS.items()}
