from dataclasses import replace

import numpy as np
import pytest

from mmauction import (
    RadioParams,
    Scenario,
    build_instance,
    generate_scenario,
    random_association,
    rssi_association,
    solve,
    solve_cell_radius,
    total_benefit,
)


def _two_ap_scenario(client_x):
    p = RadioParams()
    r = solve_cell_radius(p)
    D = 1.1 * r
    return Scenario(((0.0, 0.0), (D, 0.0)), ((client_x(D), 0.0), (0.0, 0.0), (D, 0.0)), (1e7, 2e7, 3e7), p, r, D)


def test_rssi_tie_goes_to_lowest_index():
    sc = _two_ap_scenario(lambda D: D / 2)
    inst = build_instance(sc)
    assert inst.adjacency_B[0] == (0, 1)
    assert rssi_association(sc, inst).client_of[0] == 0


def test_rssi_picks_nearest():
    sc = _two_ap_scenario(lambda D: 0.7 * D)
    inst = build_instance(sc)
    assert rssi_association(sc, inst).client_of == (1, 0, 1)


def test_rssi_single_ap_matches_auction():
    sc = generate_scenario(1, 8, seed=2)
    inst = build_instance(sc)
    s, _, _ = solve(inst)
    assert rssi_association(sc, inst).pairs == s.pairs


def test_rssi_ignores_demands():
    sc = generate_scenario(4, 25, seed=1)
    inst = build_instance(sc)
    other = replace(sc, demands_bps=tuple(reversed(sc.demands_bps)))
    assert rssi_association(sc, inst) == rssi_association(other, build_instance(other))


def test_random_unique_when_no_choice():
    sc = _two_ap_scenario(lambda D: 0.0)
    inst = build_instance(sc)
    assert all(len(b) == 1 for b in inst.adjacency_B)
    assert random_association(inst, 1) == random_association(inst, 99)


def test_random_deterministic():
    inst = build_instance(generate_scenario(5, 40, seed=3))
    assert random_association(inst, 4) == random_association(inst, 4)
    a = random_association(inst, 4)
    assert all(i in inst.adjacency_B[j] for j, i in enumerate(a.client_of))


def test_rssi_bounds_reference_network():
    sc = generate_scenario(10, 100, seed=7)
    inst = build_instance(sc)
    _, _, rec = solve(inst)
    rssi = rssi_association(sc, inst)
    # RSSI maximises every client's own benefit, so it bounds the constrained optimum from above
    assert total_benefit(inst, rssi) >= rec.total_benefit_scaled
    if rssi.is_feasible:
        assert total_benefit(inst, rssi) == rec.total_benefit_scaled


def test_random_dominated_on_reference_network():
    inst = build_instance(generate_scenario(10, 100, seed=7))
    _, _, rec = solve(inst)
    totals = []
    for seed in range(100):
        a = random_association(inst, seed)
        totals.append(total_benefit(inst, a))
        if a.is_feasible:
            assert totals[-1] <= rec.total_benefit_scaled
    assert np.mean(totals) <= rec.total_benefit_scaled


@pytest.mark.parametrize("seed", range(15))
def test_auction_dominates_feasible_baselines(seed):
    m = 2 + seed % 5
    sc = generate_scenario(m, 3 * m + seed, seed)
    inst = build_instance(sc)
    _, _, rec = solve(inst)
    rssi = rssi_association(sc, inst)
    rand = random_association(inst, seed)
    assert total_benefit(inst, rssi) >= rec.total_benefit_scaled
    for a in (rssi, rand):
        if a.is_feasible:
            assert total_benefit(inst, a) <= rec.total_benefit_scaled
