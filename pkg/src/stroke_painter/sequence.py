"""The ordered brushstroke sequence: the engine's primary interchange value.

Each entry records the painting layer, the timestep within that layer, the
stroke itself, an importance gate beta in [0, 1] (1 = painted, 0 = pruned)
and the local attention window the stroke was optimized in.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

from .geometry import FULL_WINDOW, Stroke, Window


@dataclass(frozen=True)
class SequenceEntry:
    layer: int
    t: int
    stroke: Stroke
    beta: float = 1.0
    window: Window = FULL_WINDOW

    def key(self) -> tuple[int, int]:
        return (self.layer, self.t)


@dataclass(frozen=True)
class StrokeSequence:
    """Entries sorted by (layer, timestep); construction enforces the order."""

    entries: tuple[SequenceEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        keys = [e.key() for e in self.entries]
        if keys != sorted(keys):
            raise ValueError("sequence entries must be sorted by (layer, t)")
        for e in self.entries:
            if not 0.0 <= e.beta <= 1.0:
                raise ValueError(f"beta={e.beta!r} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SequenceEntry]:
        return iter(self.entries)

    @staticmethod
    def from_entries(entries: Iterable[SequenceEntry]) -> "StrokeSequence":
        return StrokeSequence(tuple(entries))

    def num_layers(self) -> int:
        return 1 + max((e.layer for e in self.entries), default=0)

    def active(self) -> tuple[SequenceEntry, ...]:
        return tuple(e for e in self.entries if e.beta > 0.0)

    def drop_pruned(self) -> "StrokeSequence":
        return StrokeSequence(self.active())

    def with_betas(self, betas: Iterable[float]) -> "StrokeSequence":
        betas = list(betas)
        if len(betas) != len(self.entries):
            raise ValueError("one beta per entry required")
        return StrokeSequence(tuple(
            replace(e, beta=float(b)) for e, b in zip(self.entries, betas)
        ))
