"""Association policies used as comparison points.

Neither policy enforces that every AP serves someone; check
``Assignment.is_feasible`` on the result.
"""

from __future__ import annotations

import numpy as np

from mmauction.mmwave import Scenario, distance, snr_at_distance
from mmauction.problem import Assignment, Instance


def rssi_association(scenario: Scenario, instance: Instance) -> Assignment:
    """Each client joins the in-range AP with the strongest received signal.

    Ties (including every AP inside the flat near-field zone) go to the
    lowest AP index.  Demands are never consulted.
    """
    owner = []
    for j, client in enumerate(scenario.client_positions):
        best_i, best_snr = None, -1.0
        for i in instance.adjacency_B[j]:
            d = max(distance(scenario.ap_positions[i], client), 1e-12)
            snr = snr_at_distance(scenario.radio, d)
            if snr > best_snr:
                best_i, best_snr = i, snr
        owner.append(best_i)
    return Assignment(tuple(owner), instance.m)


def random_association(instance: Instance, seed: int) -> Assignment:
    rng = np.random.default_rng(seed)
    owner = tuple(int(bj[rng.integers(len(bj))]) for bj in instance.adjacency_B)
    return Assignment(owner, instance.m)
