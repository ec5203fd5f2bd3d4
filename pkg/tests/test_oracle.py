# -*- coding: utf-8 -*-
import pytest

from dsrlab.gridworld.maps import load_map
from dsrlab.harness.oracle import (
    OracleResult,
    gradient_suite,
    ncut_suite,
    run_oracle_suites,
    spectral_gap_ratio,
    tabular_suite,
    td_fixed_point,
    two_cluster_graph,
)


def test_at_most():
    assert OracleResult.at_most("x", "a", 0.5, 1.0).passed
    assert not OracleResult.at_most("x", "a", 1.5, 1.0).passed


def test_tabular_suite_passes():
    results = tabular_suite()
    assert results
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_td_fixed_point_on_corridor():
    assert td_fixed_point(load_map("corridor")) <= 1e-4


def test_gradient_suite_passes():
    results = gradient_suite(seeds=4)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_two_cluster_gap():
    assert spectral_gap_ratio(two_cluster_graph()) >= 10.0


def test_ncut_suite_passes():
    results = ncut_suite(n_graphs=10)
    assert all(r.passed for r in results), results


def test_run_selected_suites():
    results = run_oracle_suites(["td"])
    assert {r.suite for r in results} == {"td"}
    assert all(r.passed for r in results)


@pytest.mark.slow
def test_all_suites_pass():
    results = run_oracle_suites()
    assert {r.suite for r in results} == {"tabular", "td", "gradient", "ncut"}
    assert all(r.passed for r in results), [r for r in results if not r.passed]
