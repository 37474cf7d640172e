from __future__ import annotations

from typing import List, Sequence


class HolopatchError(Exception):
    """Base class for every error raised by holopatch."""


class ConfigError(HolopatchError, ValueError):
    pass


class PatchFormatError(HolopatchError, ValueError):
    pass


class VolumeBoundsError(HolopatchError, ValueError):
    """One or more targets fall outside the addressable volume."""

    def __init__(self, offending: Sequence[int], details: Sequence[str]):
        self.offending: List[int] = list(offending)
        self.details: List[str] = list(details)
        shown = "; ".join(self.details[:5])
        more = f" (+{len(self.details) - 5} more)" if len(self.details) > 5 else ""
        super().__init__(f"{len(self.offending)} target(s) outside volume: {shown}{more}")


class CapacityError(HolopatchError, ValueError):
    pass


class AssignmentError(HolopatchError, ValueError):
    pass


class MetricError(HolopatchError, ValueError):
    pass


class ArtifactError(HolopatchError, ValueError):
    pass
