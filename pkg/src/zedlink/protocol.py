"""Access-layer calculators: resource plans, random access, data rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class ResourceGrid:
    """Downlink/uplink block counts of the cell's scheduling grid."""

    dl_blocks: int
    ul_blocks: int

    def __post_init__(self) -> None:
        if self.dl_blocks < 1 or self.ul_blocks < 1:
            raise ConfigError("grid needs at least one DL and one UL block")

    @property
    def total_blocks(self) -> int:
        return self.dl_blocks + self.ul_blocks


@dataclass(frozen=True)
class Allocation:
    direction: str  # "dl" | "ul"
    block: int
    link: str  # "r2d" | "d2r"
    overlay: bool  # True: shares the block with cellular traffic


@dataclass(frozen=True)
class ResourcePlan:
    mode: str  # "reserved" | "inband"
    grid: ResourceGrid
    allocations: tuple[Allocation, ...]

    def reserved_allocations(self) -> tuple[Allocation, ...]:
        return tuple(a for a in self.allocations if not a.overlay)

    def untouched_blocks(self) -> int:
        used = {(a.direction, a.block) for a in self.reserved_allocations()}
        return self.grid.total_blocks - len(used)

    def text_map(self) -> str:
        """Human-readable grid map: R = reserved R2D, D = reserved D2R,
        d = in-band D2R overlay, . = untouched cellular block."""
        rows = []
        for direction, count in (("dl", self.grid.dl_blocks), ("ul", self.grid.ul_blocks)):
            cells = ["."] * count
            for a in self.allocations:
                if a.direction != direction:
                    continue
                if a.overlay:
                    cells[a.block] = "d"
                else:
                    cells[a.block] = "R" if a.link == "r2d" else "D"
            rows.append(f"{direction.upper()} |{''.join(cells)}|")
        return "\n".join(rows)


def resource_plan(mode: str, grid: ResourceGrid) -> ResourcePlan:
    """Reserved: one exclusive R2D DL block and one exclusive D2R UL block.
    In-band: no exclusive blocks; D2R overlays every DL and UL block."""
    if mode == "reserved":
        allocations = (
            Allocation("dl", 0, "r2d", overlay=False),
            Allocation("ul", 0, "d2r", overlay=False),
        )
    elif mode == "inband":
        allocations = tuple(
            Allocation("dl", i, "d2r", overlay=True) for i in range(grid.dl_blocks)
        ) + tuple(
            Allocation("ul", i, "d2r", overlay=True) for i in range(grid.ul_blocks)
        )
    else:
        raise ConfigError(f"mode must be 'reserved' or 'inband', got {mode!r}")
    plan = ResourcePlan(mode=mode, grid=grid, allocations=allocations)
    _check_plan(plan)
    return plan


def _check_plan(plan: ResourcePlan) -> None:
    limits = {"dl": plan.grid.dl_blocks, "ul": plan.grid.ul_blocks}
    seen = set()
    for a in plan.allocations:
        if not 0 <= a.block < limits[a.direction]:
            raise ConfigError(f"allocation {a} lies outside the grid")
        if not a.overlay:
            key = (a.direction, a.block)
            if key in seen:
                raise ConfigError(f"reserved allocations overlap at {key}")
            seen.add(key)


def slotted_aloha_throughput(offered_load: float) -> float:
    """Classical slotted-ALOHA success rate per slot: G * exp(-G)."""
    if offered_load < 0:
        raise DomainError(f"offered load must be >= 0, got {offered_load}")
    return offered_load * math.exp(-offered_load)


def slotted_aloha_mc(
    offered_load: float,
    n_tags: int,
    n_slots: int,
    seed: Optional[int] = None,
) -> float:
    """Finite-population check: each tag transmits with probability G/n
    per slot; a slot succeeds when exactly one tag transmits."""
    if offered_load < 0:
        raise DomainError("offered load must be >= 0")
    if n_tags < 1 or n_slots < 1:
        raise DomainError("n_tags and n_slots must be >= 1")
    p = offered_load / n_tags
    if p > 1:
        raise DomainError(f"offered load {offered_load} exceeds the tag count")
    rng = np.random.default_rng(seed)
    transmitters = rng.binomial(n_tags, p, size=n_slots)
    return float(np.count_nonzero(transmitters == 1) / n_slots)


def fdma_capacity(
    total_bandwidth_hz: float, per_device_bandwidth_hz: float, guard_hz: float = 0.0
) -> int:
    """Devices that fit side by side: floor(total / (per_device + guard))."""
    if per_device_bandwidth_hz <= 0:
        raise DomainError("per_device_bandwidth_hz must be > 0")
    if total_bandwidth_hz < 0 or guard_hz < 0:
        raise DomainError("bandwidths must be >= 0")
    return int(total_bandwidth_hz // (per_device_bandwidth_hz + guard_hz))


def d2r_data_rate(
    symbol_rate_hz: float, modulation_order: int, code_rate: float
) -> float:
    """Device-to-reader bit rate: symbols/s x log2(order) x code rate."""
    if symbol_rate_hz <= 0:
        raise DomainError("symbol_rate_hz must be > 0")
    if modulation_order < 2:
        raise DomainError(f"modulation_order must be >= 2, got {modulation_order}")
    if not 0.0 < code_rate <= 1.0:
        raise DomainError(f"code_rate must lie in (0, 1], got {code_rate}")
    return symbol_rate_hz * math.log2(modulation_order) * code_rate
