"""World configuration shared by graph building, navigation and serving."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import ValidationError


@dataclass(frozen=True)
class Config:
    camera_height: float = 1.7       # m above the ground plane
    avatar_distance: float = 1.5     # m camera-to-avatar
    fps: float = 30.0
    frame_width: int = 1920
    frame_height: int = 960
    epsilon: float = 1.0             # m, intersection pair distance
    intersection_min_angle_deg: float = 30.0
    pass_gap_frames: int = 10        # member-frame gap that splits node passes
    min_frames: int = 15             # shorter edges merge into a neighbor
    corridor_tol: float = 2.0        # m, reverse-pair mean point-to-polyline bound
    delta_end: float = 2.0           # m, intersection arrival zone
    delta_preload: float = 5.0       # m, preload hint radius (closed threshold)
    fade_seconds: float = 0.5
    max_step: float = 0.5            # m, per-step displacement cap

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool) and v <= 0:
                raise ValidationError(f"config.{f.name} must be positive, got {v}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)
