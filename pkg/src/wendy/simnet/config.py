"""Network and timing configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Messages crossing the boundary of ``members`` sent in [start, end) wait until ``end``."""

    members: tuple[int, ...]
    start: int
    end: int

    def crosses(self, src: int, dst: int) -> bool:
        return (src in self.members) != (dst in self.members)


@dataclass(frozen=True)
class NetworkConfig:
    n: int = 4
    f: int = 1
    delta: int = 10
    timeout: int | None = None
    gst: int = 0
    base_delay: int = 1
    jitter: int = 0
    pre_gst_max_delay: int = 0
    seed: int = 0
    max_views: int = 10
    max_time: int | None = None
    partitions: tuple[Partition, ...] = field(default=())

    @property
    def lam(self) -> int:
        return self.timeout if self.timeout is not None else 8 * self.delta

    @property
    def time_limit(self) -> int:
        if self.max_time is not None:
            return self.max_time
        return self.gst + (self.max_views + 2) * (self.lam + 4 * self.delta) + 10 * self.delta

    def validate(self) -> NetworkConfig:
        if self.f < 0 or self.n != 3 * self.f + 1:
            raise ConfigError(f"need n = 3f+1, got n={self.n}, f={self.f}")
        if self.delta < 1:
            raise ConfigError("delta must be positive")
        if self.base_delay < 0 or self.jitter < 0 or self.base_delay + self.jitter > self.delta:
            raise ConfigError("post-GST delays must stay within delta")
        if self.base_delay + self.jitter < 1 and self.n > 1:
            raise ConfigError("network delay must be at least one tick")
        if self.lam <= 2 * self.delta:
            raise ConfigError("view timeout must exceed 2*delta")
        if self.gst < 0 or self.pre_gst_max_delay < 0:
            raise ConfigError("negative time")
        if self.max_views < 1:
            raise ConfigError("max_views must be at least 1")
        for p in self.partitions:
            if p.start > p.end:
                raise ConfigError(f"partition ends before it starts: {p}")
            if p.end - self.gst > self.delta:
                raise ConfigError(f"partition {p} extends more than delta past GST")
            if any(not 0 <= m < self.n for m in p.members):
                raise ConfigError(f"partition names unknown replicas: {p}")
        return self


def inject_partition(config: NetworkConfig, schedule) -> NetworkConfig:
    """Return ``config`` with partitions added; ``schedule`` holds Partition or
    (members, start, end) entries. An empty schedule leaves the config unchanged."""
    parts = tuple(p if isinstance(p, Partition) else Partition(tuple(p[0]), p[1], p[2]) for p in schedule)
    if not parts:
        return config
    return replace(config, partitions=config.partitions + parts).validate()
