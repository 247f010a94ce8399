"""Non-line-of-sight positioning from detected backscatter beacons.

Tags act as identifiable anchors: a detection implies proximity, the
power-weighted centroid of detected anchors gives a coarse fix, and the
backscatter-to-direct power ratio inverts to a coarse range. The arena
is planar (wall/lamp-post deployments).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .linkbudget import BistaticLink
from .propagation import free_space_path_loss, invert_free_space_path_loss

# Backscatter power is evaluated no closer than this to avoid the Friis
# singularity at zero separation.
MIN_RANGE_M = 1e-3


@dataclass(frozen=True)
class Zed:
    zed_id: str
    x_m: float
    y_m: float
    profile: str = "default"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)):
            raise ConfigError(f"tag {self.zed_id!r} has a non-finite position")


@dataclass(frozen=True)
class ZedDeployment:
    zeds: tuple[Zed, ...]

    def __post_init__(self) -> None:
        ids = [z.zed_id for z in self.zeds]
        if len(set(ids)) != len(ids):
            raise ConfigError("tag ids must be unique")

    def __len__(self) -> int:
        return len(self.zeds)

    def positions(self) -> np.ndarray:
        return np.array([(z.x_m, z.y_m) for z in self.zeds]).reshape(-1, 2)

    def by_id(self, zed_id: str) -> Zed:
        for z in self.zeds:
            if z.zed_id == zed_id:
                return z
        raise KeyError(zed_id)

    @classmethod
    def grid(cls, spacing_m: float, half_width_m: float) -> "ZedDeployment":
        """Square grid centred on the origin, spanning +-half_width."""
        if spacing_m <= 0 or half_width_m <= 0:
            raise ConfigError("spacing_m and half_width_m must be > 0")
        n = int(math.floor(2 * half_width_m / spacing_m)) + 1
        start = -spacing_m * (n - 1) / 2
        zeds = []
        for i in range(n):
            for j in range(n):
                zeds.append(
                    Zed(f"grid-{i}-{j}", start + i * spacing_m, start + j * spacing_m)
                )
        return cls(tuple(zeds))

    @classmethod
    def poisson(
        cls, density_per_m2: float, half_width_m: float, seed: Optional[int] = None
    ) -> "ZedDeployment":
        if density_per_m2 < 0 or half_width_m <= 0:
            raise DomainError("density must be >= 0 and half_width > 0")
        rng = np.random.default_rng(seed)
        area = (2 * half_width_m) ** 2
        count = rng.poisson(density_per_m2 * area)
        xy = rng.uniform(-half_width_m, half_width_m, size=(count, 2))
        return cls(tuple(Zed(f"pp-{k}", float(x), float(y)) for k, (x, y) in enumerate(xy)))

    @classmethod
    def from_csv(cls, path) -> "ZedDeployment":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"zed_id", "x_m", "y_m"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ConfigError(
                    f"deployment CSV needs columns zed_id,x_m,y_m[,profile_name]; "
                    f"got {reader.fieldnames}"
                )
            zeds = tuple(
                Zed(
                    row["zed_id"],
                    float(row["x_m"]),
                    float(row["y_m"]),
                    row.get("profile_name", "default") or "default",
                )
                for row in reader
            )
        return cls(zeds)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["zed_id", "x_m", "y_m", "profile_name"])
            for z in self.zeds:
                writer.writerow([z.zed_id, repr(z.x_m), repr(z.y_m), z.profile])


@dataclass(frozen=True)
class Detection:
    zed_id: str
    backscatter_power_dbm: float
    direct_power_dbm: float


@dataclass(frozen=True)
class PositionFix:
    x_m: float
    y_m: float
    uncertainty_radius_m: float
    n_detections: int


def _backscatter_power_dbm(link: BistaticLink, d_ue_zed_m: float) -> float:
    d = max(d_ue_zed_m, MIN_RANGE_M)
    b = link.breakdown(d)
    return b.backscatter_rx_power_dbm


def simulate_detections(
    ue_xy: Sequence[float],
    deployment: ZedDeployment,
    link: BistaticLink,
    jitter_sigma_db: float = 0.0,
    seed: Optional[int] = None,
) -> list[Detection]:
    """Tags with non-negative budget margin at their true distance.

    Detection is decided on the true margin; optional lognormal jitter
    perturbs only the reported backscatter powers.
    """
    read_radius = link.reading_distance_m()
    if read_radius is None:
        return []
    rng = np.random.default_rng(seed)
    ue = np.asarray(ue_xy, dtype=float)
    detections = []
    for z in deployment.zeds:
        d = float(np.hypot(z.x_m - ue[0], z.y_m - ue[1]))
        if d > read_radius:
            continue
        power = _backscatter_power_dbm(link, d)
        if jitter_sigma_db > 0:
            power += jitter_sigma_db * rng.standard_normal()
        direct = link.breakdown(max(d, MIN_RANGE_M)).direct_rx_power_dbm
        detections.append(Detection(z.zed_id, power, direct))
    return detections


def proximity_estimate(
    detections: Sequence[Detection],
    deployment: ZedDeployment,
    read_radius_m: float = 0.0,
    weighting: str = "power",
) -> Optional[PositionFix]:
    """Power-weighted centroid of the detected anchors.

    Linear-power weights by default ("uniform" for a plain centroid);
    the uncertainty radius is the largest estimate-to-anchor distance
    plus the reading radius. Returns None for an empty detection set
    (a no-fix, not an error).
    """
    if weighting not in ("power", "uniform"):
        raise ConfigError(f"weighting must be 'power' or 'uniform', got {weighting!r}")
    if not detections:
        return None
    positions = np.array(
        [(deployment.by_id(d.zed_id).x_m, deployment.by_id(d.zed_id).y_m) for d in detections]
    )
    if weighting == "power":
        powers = np.array([d.backscatter_power_dbm for d in detections])
        weights = 10.0 ** ((powers - powers.max()) / 10.0)  # shift for stability
    else:
        weights = np.ones(len(detections))
    centre = weights @ positions / weights.sum()
    spread = float(np.max(np.hypot(*(positions - centre).T)))
    return PositionFix(
        x_m=float(centre[0]),
        y_m=float(centre[1]),
        uncertainty_radius_m=spread + read_radius_m,
        n_detections=len(detections),
    )


def power_ratio_range(
    direct_power_dbm: float,
    backscatter_power_dbm: float,
    carrier_hz: float,
    leg_antenna_gain_dbi: float = 0.0,
    modulation_loss_db: float = 6.0,
) -> float:
    """Coarse range from the backscatter-to-direct power ratio.

    With the tag and UE equidistant from the BS the macro losses cancel,
    leaving ratio = -Friis(d) + 2*leg_gain - modulation_loss to invert.
    """
    ratio_db = backscatter_power_dbm - direct_power_dbm
    friis_db = 2.0 * leg_antenna_gain_dbi - modulation_loss_db - ratio_db
    if friis_db < 0:
        raise DomainError(
            f"ratio {ratio_db:.2f} dB implies a negative free-space loss; "
            "outside the model"
        )
    return invert_free_space_path_loss(friis_db, carrier_hz)


def forward_power_ratio_db(
    d_ue_zed_m: float,
    carrier_hz: float,
    leg_antenna_gain_dbi: float = 0.0,
    modulation_loss_db: float = 6.0,
) -> float:
    """Noiseless forward model of the ratio inverted by power_ratio_range."""
    return (
        -free_space_path_loss(carrier_hz, d_ue_zed_m)
        + 2.0 * leg_antenna_gain_dbi
        - modulation_loss_db
    )


def coverage_probability(density_per_m2: float, read_radius_m: float) -> float:
    """P(at least one tag in reach) under a Poisson deployment."""
    if density_per_m2 < 0 or read_radius_m < 0:
        raise DomainError("density and radius must be >= 0")
    return 1.0 - math.exp(-density_per_m2 * math.pi * read_radius_m**2)


def coverage_probability_mc(
    density_per_m2: float,
    read_radius_m: float,
    n_trials: int,
    seed: Optional[int] = None,
) -> float:
    """Geometric cross-check: scatter a Poisson field around the origin
    and test for any tag within reach."""
    if density_per_m2 < 0 or read_radius_m < 0:
        raise DomainError("density and radius must be >= 0")
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    if read_radius_m == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    half = read_radius_m
    area = (2 * half) ** 2
    covered = 0
    counts = rng.poisson(density_per_m2 * area, size=n_trials)
    for count in counts:
        if count == 0:
            continue
        xy = rng.uniform(-half, half, size=(count, 2))
        if np.any(np.hypot(xy[:, 0], xy[:, 1]) <= read_radius_m):
            covered += 1
    return covered / n_trials


@dataclass
class PositioningStats:
    n_trials: int
    no_fix_rate: float
    mean_error_m: float
    median_error_m: float
    errors_m: np.ndarray  # sorted; empirical CDF samples
    trials: dict  # per-trial arrays: ue_x_m, ue_y_m, n_detected, est_x_m, ...


def positioning_error_mc(
    deployment: ZedDeployment,
    link: BistaticLink,
    arena_half_width_m: float,
    n_trials: int,
    seed: Optional[int] = None,
    jitter_sigma_db: float = 0.0,
    weighting: str = "power",
) -> PositioningStats:
    """Uniform random UE positions, detection + proximity fix per trial.

    Vectorized over trials; equivalent to looping simulate_detections and
    proximity_estimate (asserted by the test suite).
    """
    if arena_half_width_m <= 0:
        raise ConfigError("arena_half_width_m must be > 0")
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    if weighting not in ("power", "uniform"):
        raise ConfigError(f"weighting must be 'power' or 'uniform', got {weighting!r}")
    rng = np.random.default_rng(seed)
    ue = rng.uniform(-arena_half_width_m, arena_half_width_m, size=(n_trials, 2))
    n_zeds = len(deployment)
    read_radius = link.reading_distance_m() if n_zeds else None
    if n_zeds == 0 or read_radius is None:
        detected_counts = np.zeros(n_trials, dtype=int)
        est = np.full((n_trials, 2), np.nan)
        uncertainty = np.full(n_trials, np.nan)
    else:
        positions = deployment.positions()
        d = np.hypot(
            ue[:, 0:1] - positions[None, :, 0], ue[:, 1:2] - positions[None, :, 1]
        )
        detected = d <= read_radius
        detected_counts = detected.sum(axis=1)
        # Backscatter power relative to a 1 m reference: -20log10(d) dB.
        ref_power = _backscatter_power_dbm(link, 1.0)
        power = ref_power - 20.0 * np.log10(np.maximum(d, MIN_RANGE_M))
        if jitter_sigma_db > 0:
            power = power + jitter_sigma_db * rng.standard_normal(power.shape)
        if weighting == "power":
            shift = np.where(detected, power, -np.inf).max(axis=1, keepdims=True)
            shift = np.where(np.isfinite(shift), shift, 0.0)
            weights = np.where(detected, 10.0 ** ((power - shift) / 10.0), 0.0)
        else:
            weights = detected.astype(float)
        wsum = weights.sum(axis=1)
        safe = np.where(wsum > 0, wsum, 1.0)
        est = (weights @ positions) / safe[:, None]
        est[detected_counts == 0] = np.nan
        d_est = np.hypot(
            est[:, 0:1] - positions[None, :, 0], est[:, 1:2] - positions[None, :, 1]
        )
        spread = np.where(detected, d_est, -np.inf).max(axis=1)
        uncertainty = np.where(detected_counts > 0, spread + read_radius, np.nan)
    fix = detected_counts > 0
    errors = np.hypot(est[:, 0] - ue[:, 0], est[:, 1] - ue[:, 1])[fix]
    errors = np.sort(errors)
    return PositioningStats(
        n_trials=n_trials,
        no_fix_rate=float(np.count_nonzero(~fix) / n_trials),
        mean_error_m=float(errors.mean()) if errors.size else math.nan,
        median_error_m=float(np.median(errors)) if errors.size else math.nan,
        errors_m=errors,
        trials={
            "ue_x_m": ue[:, 0],
            "ue_y_m": ue[:, 1],
            "n_detected": detected_counts,
            "est_x_m": est[:, 0],
            "est_y_m": est[:, 1],
            "error_m": np.where(
                fix, np.hypot(est[:, 0] - ue[:, 0], est[:, 1] - ue[:, 1]), np.nan
            ),
            "uncertainty_m": uncertainty,
        },
    )
