"""60 GHz channel model, scenario generation and benefit-matrix construction.

All quantities are SI (W, Hz, m, bit/s).  Unit conversions from the usual
datasheet units (dBm, dBm/MHz, MHz, mm) happen only in :meth:`RadioParams.from_config`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from mmauction.problem import Instance, UncoverableClientError


class InfeasibleRadiusError(ValueError):
    """Requested SNR exceeds the flat near-field SNR, so no radius reaches it."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class RadioParams:
    bandwidth_hz: float = 1200e6
    tx_power_w: float = 1e-4
    noise_psd_w_per_hz: float = dbm_to_watts(-134.0) / 1e6
    wavelength_m: float = 5e-3
    d0_m: float = 1.0
    eta: float = 2.0
    interference_w_per_hz: float = 0.0
    gain_tx: float = 1.0
    gain_rx: float = 1.0

    def __post_init__(self):
        for name in ("bandwidth_hz", "noise_psd_w_per_hz", "wavelength_m", "d0_m", "eta", "gain_tx", "gain_rx"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        # zero transmit power is allowed as a degenerate (rate 0) case
        if self.tx_power_w < 0:
            raise ValueError("tx_power_w must be non-negative")
        if self.interference_w_per_hz < 0:
            raise ValueError("interference_w_per_hz must be non-negative")

    @classmethod
    def from_config(cls, cfg: dict) -> "RadioParams":
        """Accept SI keys (as written in scenario files) or datasheet-unit keys.

        Recognised alternates: ``bandwidth_mhz``, ``tx_power_mw``, ``tx_power_dbm``,
        ``noise_psd_dbm_per_mhz``, ``wavelength_mm``.
        """
        cfg = dict(cfg)
        out: dict = {}
        if "bandwidth_mhz" in cfg:
            out["bandwidth_hz"] = float(cfg.pop("bandwidth_mhz")) * 1e6
        if "tx_power_mw" in cfg:
            out["tx_power_w"] = float(cfg.pop("tx_power_mw")) * 1e-3
        if "tx_power_dbm" in cfg:
            out["tx_power_w"] = dbm_to_watts(float(cfg.pop("tx_power_dbm")))
        if "noise_psd_dbm_per_mhz" in cfg:
            out["noise_psd_w_per_hz"] = dbm_to_watts(float(cfg.pop("noise_psd_dbm_per_mhz"))) / 1e6
        if "wavelength_mm" in cfg:
            out["wavelength_m"] = float(cfg.pop("wavelength_mm")) * 1e-3
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown radio parameters: {sorted(unknown)}")
        out.update({k: float(v) for k, v in cfg.items()})
        return cls(**out)

    def to_json_dict(self) -> dict:
        return asdict(self)


def near_field_snr(params: RadioParams) -> float:
    """SNR for any distance up to the reference distance d0 (Friis at d0)."""
    signal = params.tx_power_w * params.gain_tx * params.gain_rx * params.wavelength_m**2
    noise = 16.0 * math.pi**2 * (params.noise_psd_w_per_hz + params.interference_w_per_hz) * params.bandwidth_hz
    return signal / noise


def snr_at_distance(params: RadioParams, d: float) -> float:
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    snr0 = near_field_snr(params)
    if d <= params.d0_m:
        return snr0
    return snr0 * (d / params.d0_m) ** (-params.eta)


def solve_cell_radius(params: RadioParams, target_snr_db: float = 10.0) -> float:
    """Distance at which the SNR falls to ``target_snr_db``."""
    snr0_db = linear_to_db(near_field_snr(params))
    if target_snr_db > snr0_db:
        raise InfeasibleRadiusError(
            f"target {target_snr_db} dB exceeds near-field SNR {snr0_db:.3f} dB"
        )
    return params.d0_m * 10.0 ** ((snr0_db - target_snr_db) / (10.0 * params.eta))


def achievable_rate(params: RadioParams, d: float) -> float:
    """Shannon rate in bit/s with the interference-free SNR at distance ``d``."""
    return params.bandwidth_hz * math.log2(1.0 + snr_at_distance(params, d))


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Scenario:
    ap_positions: tuple[tuple[float, float], ...]
    client_positions: tuple[tuple[float, float], ...]
    demands_bps: tuple[float, ...]
    radio: RadioParams
    cell_radius_m: float
    ap_spacing_m: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if len(self.demands_bps) != len(self.client_positions):
            raise ValueError("one demand per client is required")
        if any(not q > 0 for q in self.demands_bps):
            raise ValueError("every demand must be positive")
        if not self.cell_radius_m > 0:
            raise ValueError("cell radius must be positive")

    @property
    def m(self) -> int:
        return len(self.ap_positions)

    @property
    def n(self) -> int:
        return len(self.client_positions)

    def to_json_dict(self) -> dict:
        r = self.radio
        return {
            "radio": {
                "bandwidth_hz": r.bandwidth_hz,
                "tx_power_w": r.tx_power_w,
                "noise_psd_w_per_hz": r.noise_psd_w_per_hz,
                "wavelength_m": r.wavelength_m,
                "d0_m": r.d0_m,
                "eta": r.eta,
                "interference_w_per_hz": r.interference_w_per_hz,
                "gain_tx": r.gain_tx,
                "gain_rx": r.gain_rx,
            },
            "aps": [list(p) for p in self.ap_positions],
            "clients": [list(p) for p in self.client_positions],
            "demands_bps": list(self.demands_bps),
            "cell_radius_m": self.cell_radius_m,
            "ap_spacing_m": self.ap_spacing_m,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, d: dict) -> "Scenario":
        return cls(
            ap_positions=tuple((float(x), float(y)) for x, y in d["aps"]),
            client_positions=tuple((float(x), float(y)) for x, y in d["clients"]),
            demands_bps=tuple(float(q) for q in d["demands_bps"]),
            radio=RadioParams.from_config(d["radio"]),
            cell_radius_m=float(d["cell_radius_m"]),
            ap_spacing_m=None if d.get("ap_spacing_m") is None else float(d["ap_spacing_m"]),
            seed=d.get("seed"),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Scenario":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def ap_layout(m: int, spacing: float, layout: str = "line") -> list[tuple[float, float]]:
    if layout == "line":
        return [(i * spacing, 0.0) for i in range(m)]
    if layout == "grid":
        cols = math.ceil(math.sqrt(m))
        return [((k % cols) * spacing, (k // cols) * spacing) for k in range(m)]
    raise ValueError(f"unknown layout {layout!r}")


def _sample_in_disc(rng: np.random.Generator, center, radius: float) -> tuple[float, float]:
    # rejection in the bounding square; membership uses the same distance test as build_instance
    while True:
        dx, dy = rng.uniform(-radius, radius, size=2)
        p = (center[0] + float(dx), center[1] + float(dy))
        if distance(p, center) <= radius:
            return p


def _sample_in_union(rng: np.random.Generator, centers, radius: float) -> tuple[float, float]:
    xs = [c[0] for c in centers]
    ys = [c[1] for c in centers]
    lo = (min(xs) - radius, min(ys) - radius)
    hi = (max(xs) + radius, max(ys) + radius)
    while True:
        x = float(rng.uniform(lo[0], hi[0]))
        y = float(rng.uniform(lo[1], hi[1]))
        if any(distance((x, y), c) <= radius for c in centers):
            return (x, y)


def generate_scenario(
    m: int,
    n: int,
    seed: int,
    params: RadioParams | None = None,
    *,
    layout: str = "line",
    target_snr_db: float = 10.0,
    spacing_factor: float = 1.1,
    demand_max_bps: float = 100e6,
    demand_floor_bps: float = 1e6,
) -> Scenario:
    """Random network: APs ``spacing_factor * r`` apart, clients inside the cells.

    One client is placed in each cell first so every AP has a reachable client
    (and an AP-saturating matching exists); the remaining ``n - m`` clients are
    uniform over the union of the discs.  Client order is then shuffled.
    Demands are uniform on ``[0, demand_max_bps]``, redrawn while below
    ``demand_floor_bps``.
    """
    if m < 1:
        raise ValueError("need at least one AP")
    if n < m:
        raise ValueError(f"need n >= m, got m={m}, n={n}")
    if not 0 <= demand_floor_bps < demand_max_bps:
        raise ValueError("demand floor must lie in [0, demand_max_bps)")
    params = params or RadioParams()
    r = solve_cell_radius(params, target_snr_db)
    spacing = spacing_factor * r
    aps = ap_layout(m, spacing, layout)

    rng = np.random.default_rng(seed)
    clients = [_sample_in_disc(rng, ap, r) for ap in aps]
    clients += [_sample_in_union(rng, aps, r) for _ in range(n - m)]
    order = rng.permutation(n)
    clients = [clients[k] for k in order]

    demands = []
    for _ in range(n):
        q = float(rng.uniform(0.0, demand_max_bps))
        while q < demand_floor_bps or q == 0.0:
            q = float(rng.uniform(0.0, demand_max_bps))
        demands.append(q)

    return Scenario(
        ap_positions=tuple(aps),
        client_positions=tuple(clients),
        demands_bps=tuple(demands),
        radio=params,
        cell_radius_m=r,
        ap_spacing_m=spacing,
        seed=seed,
    )


def distance_matrix(scenario: Scenario) -> np.ndarray:
    return np.array(
        [[distance(ap, c) for c in scenario.client_positions] for ap in scenario.ap_positions]
    )


def coverage_mask(scenario: Scenario) -> np.ndarray:
    return distance_matrix(scenario) <= scenario.cell_radius_m


def benefit_ratios(scenario: Scenario) -> np.ndarray:
    """Unrounded R_ij / Q_j for every AP/client pair (regardless of coverage)."""
    d = distance_matrix(scenario)
    out = np.empty_like(d)
    for i in range(scenario.m):
        for j in range(scenario.n):
            out[i, j] = achievable_rate(scenario.radio, max(d[i, j], 1e-12)) / scenario.demands_bps[j]
    return out


def build_instance(scenario: Scenario, scale_k: int = 1) -> Instance:
    """Round ``scale_k * R_ij / Q_j`` to the nearest integer on covered pairs."""
    if scale_k < 1 or int(scale_k) != scale_k:
        raise ValueError("scale_k must be a positive integer")
    mask = coverage_mask(scenario)
    for j in range(scenario.n):
        if not mask[:, j].any():
            raise UncoverableClientError(j)
    ratios = benefit_ratios(scenario)
    benefit = np.where(mask, np.floor(scale_k * ratios + 0.5), 0).astype(np.int64)
    return Instance(benefit, mask, scale_k=int(scale_k))


def with_eta(params: RadioParams, eta: float) -> RadioParams:
    return replace(params, eta=eta)
