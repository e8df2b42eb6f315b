"""Shared fixtures: the convergence sweeps behind the acceptance checks.

The sweeps are expensive (tens of seconds each), so they are computed once
per session and reused by every test that needs them.  STUDY_T is the final
time of the benchmark study; level k uses dt = (1/2)^(k+1) and nx = 2^(k+1)
so the mesh width tracks the time step.
"""

import time

import pytest

from robinsplit.cli import main as cli_main
from robinsplit.diagnostics import ConvergenceTable, run_with_errors
from robinsplit.manufactured import get_case
from robinsplit.schemes import SchemeConfig

STUDY_T = 0.25


def level_config(k, variant, fe_order, T=STUDY_T, **kw):
    return SchemeConfig(
        dt=0.5 ** (k + 1),
        T=T,
        nx=2 ** (k + 1),
        fe_order=fe_order,
        variant=variant,
        **kw,
    )


def sweep(case_name, variant, fe_order, ks, T=STUDY_T):
    case = get_case(case_name)
    return {
        k: run_with_errors(case, level_config(k, variant, fe_order, T), k=k) for k in ks
    }


@pytest.fixture(scope="session")
def compare_artifacts(tmp_path_factory):
    """Run the comparison command end to end on the primary study.

    Returns the parsed per-variant tables plus the wall time of the sweep.
    """
    out = tmp_path_factory.mktemp("compare") / "study"
    t0 = time.perf_counter()
    code = cli_main(
        [
            "compare",
            "--case",
            "example1",
            "--variant",
            "original",
            "--variant",
            "improved",
            "--kmin",
            "3",
            "--kmax",
            "6",
            "--T",
            str(STUDY_T),
            "--out",
            str(out),
        ]
    )
    elapsed = time.perf_counter() - t0
    assert code == 0, "comparison sweep failed"
    base = out.parent
    variants = ("original", "improved")
    return {
        "elapsed": elapsed,
        "final": {
            v: ConvergenceTable.read_csv(base / f"study_{v}_final.csv") for v in variants
        },
        "sums": {
            v: ConvergenceTable.read_csv(base / f"study_{v}_sums.csv") for v in variants
        },
    }


@pytest.fixture(scope="session")
def example2_reports():
    return sweep("example2", "improved", 2, range(3, 7))


@pytest.fixture(scope="session")
def example3_reports():
    return sweep("example3", "improved", 2, range(3, 7))


@pytest.fixture(scope="session")
def monolithic_reports():
    return sweep("example1", "monolithic", 1, range(3, 6))
