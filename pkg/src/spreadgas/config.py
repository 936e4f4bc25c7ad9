"""Scenario files: flat ``section.key = value`` text, one setting per line.

This is the only layer where physical units appear.  When
``detector.r_meters`` is set, companion ``*_meters`` keys (and
``cross_section_m2`` / ``number_density_per_m3`` on cloud segments) are
normalized to detector-radius units at parse time; the core modules never
see a physical unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import CloudSegment, CloudSpec, DIMENSIONALITIES
from .engine import DETECTOR_SHAPES, DetectorGeometry, MODELS
from .montecarlo import McConfig
from .opacity import KINDS, OpacitySpec, make_opacity


class ConfigError(Exception):
    """A scenario file problem, carrying file/line/field diagnostics."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        where = path or "<config>"
        if line is not None:
            where += f":{line}"
        if field is not None:
            where += f": key '{field}'"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class McMatrix:
    """Cartesian verification matrix: every (n_particles, stdev, g) combination."""

    n_particles: tuple[int, ...]
    stdev: tuple[float, ...]
    g: tuple[float, ...]

    def cases(self):
        return [(n, s, g) for n in self.n_particles for s in self.stdev for g in self.g]


@dataclass(frozen=True)
class ScenarioConfig:
    detector: DetectorGeometry
    opacity: OpacitySpec | None = None
    n_particles: int | None = None
    cloud: CloudSpec | None = None
    stdev_grid: np.ndarray | None = None
    models: tuple[str, ...] = ("nonlocal",)
    mc: McConfig | None = None
    mc_matrix: McMatrix | None = None
    source: str = "<config>"


def _parse_lines(text: str, path: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", path, lineno)
        if key in entries:
            raise ConfigError(f"duplicate key (first set on line {entries[key][1]})",
                              path, lineno, key)
        entries[key] = (value, lineno)
    return entries


class _Entries:
    """Consume-tracking view over parsed key/value pairs."""

    def __init__(self, entries: dict[str, tuple[str, int]], path: str):
        self.entries = entries
        self.path = path
        self.used: set[str] = set()

    def line(self, key: str) -> int | None:
        return self.entries[key][1] if key in self.entries else None

    def has(self, key: str) -> bool:
        return key in self.entries

    def raw(self, key: str, default=None):
        if key not in self.entries:
            return default
        self.used.add(key)
        return self.entries[key][0]

    def _convert(self, key: str, conv, what: str):
        value, lineno = self.entries[key]
        self.used.add(key)
        try:
            return conv(value)
        except ValueError:
            raise ConfigError(f"expected {what}, got {value!r}", self.path, lineno, key)

    def real(self, key: str, default=None):
        if key not in self.entries:
            return default
        return self._convert(key, float, "a number")

    def integer(self, key: str, default=None):
        if key not in self.entries:
            return default
        return self._convert(key, int, "an integer")

    def word(self, key: str, default=None, choices=None):
        if key not in self.entries:
            return default
        value = self.raw(key)
        if choices is not None and value not in choices:
            raise ConfigError(f"expected one of {', '.join(choices)}, got {value!r}",
                              self.path, self.line(key), key)
        return value

    def real_list(self, key: str):
        if key not in self.entries:
            return None
        raw = self.raw(key)
        return tuple(self._parse_item(key, item, float, "a number")
                     for item in raw.split(","))

    def int_list(self, key: str):
        if key not in self.entries:
            return None
        raw = self.raw(key)
        return tuple(self._parse_item(key, item, int, "an integer")
                     for item in raw.split(","))

    def _parse_item(self, key, item, conv, what):
        try:
            return conv(item.strip())
        except ValueError:
            raise ConfigError(f"expected a comma list of {what}s, got {item.strip()!r}",
                              self.path, self.line(key), key)

    def fail(self, key: str, message: str):
        raise ConfigError(message, self.path, self.line(key), key)

    def reject_unused(self):
        leftover = sorted(set(self.entries) - self.used)
        if leftover:
            key = leftover[0]
            raise ConfigError(f"unknown key (and {len(leftover) - 1} more)"
                              if len(leftover) > 1 else "unknown key",
                              self.path, self.line(key), key)


def _length(e: _Entries, key: str, r_meters: float | None, default=None):
    """A length in r-units, or its *_meters companion normalized by r."""
    plain = e.has(key)
    meters = e.has(key + "_meters")
    if plain and meters:
        e.fail(key + "_meters", f"give either {key} or {key}_meters, not both")
    if meters:
        if r_meters is None:
            e.fail(key + "_meters", "physical lengths need detector.r_meters")
        return e.real(key + "_meters") / r_meters
    if plain:
        return e.real(key)
    return default


def _parse_segments(e: _Entries, r_meters: float | None):
    indices = set()
    for key in e.entries:
        parts = key.split(".")
        if len(parts) == 4 and parts[0] == "cloud" and parts[1] == "segment":
            if not parts[2].isdigit():
                e.fail(key, "segment index must be a positive integer")
            indices.add(int(parts[2]))
    if not indices:
        return None
    if min(indices) != 1 or max(indices) != len(indices):
        raise ConfigError(f"segment indices must be contiguous from 1, got {sorted(indices)}",
                          e.path)
    segments = []
    for i in sorted(indices):
        prefix = f"cloud.segment.{i}."
        thickness = _length(e, prefix + "thickness", r_meters)
        transverse = _length(e, prefix + "transverse_extent", r_meters)
        if e.has(prefix + "cross_section") and e.has(prefix + "cross_section_m2"):
            e.fail(prefix + "cross_section_m2", "give one cross-section key only")
        if e.has(prefix + "cross_section_m2"):
            if r_meters is None:
                e.fail(prefix + "cross_section_m2", "physical areas need detector.r_meters")
            cross = e.real(prefix + "cross_section_m2") / r_meters ** 2
        else:
            cross = e.real(prefix + "cross_section")
        if e.has(prefix + "number_density") and e.has(prefix + "number_density_per_m3"):
            e.fail(prefix + "number_density_per_m3", "give one number-density key only")
        if e.has(prefix + "number_density_per_m3"):
            if r_meters is None:
                e.fail(prefix + "number_density_per_m3",
                       "physical densities need detector.r_meters")
            density = e.real(prefix + "number_density_per_m3") * r_meters ** 3
        else:
            density = e.real(prefix + "number_density")
        missing = [name for name, v in (("number_density", density),
                                        ("cross_section", cross),
                                        ("thickness", thickness),
                                        ("transverse_extent", transverse)) if v is None]
        if missing:
            raise ConfigError(f"segment {i} is missing {', '.join(missing)}", e.path)
        try:
            segments.append(CloudSegment(number_density=density, cross_section=cross,
                                         thickness=thickness, transverse_extent=transverse))
        except ValueError as err:
            raise ConfigError(str(err), e.path, field=f"cloud.segment.{i}")
    return segments


def _parse_stdev_grid(e: _Entries, r_meters: float | None):
    single = _length(e, "spread.stdev", r_meters)
    lo = _length(e, "spread.stdev_grid.min", r_meters)
    hi = _length(e, "spread.stdev_grid.max", r_meters)
    if single is not None and lo is not None:
        e.fail("spread.stdev", "give spread.stdev or a spread.stdev_grid, not both")
    if single is not None:
        if not single > 0:
            e.fail("spread.stdev", f"stdev must be positive, got {single}")
        return np.asarray([single])
    if lo is None and hi is None:
        return None
    if lo is None or hi is None:
        raise ConfigError("spread.stdev_grid needs both min and max", e.path)
    points = e.integer("spread.stdev_grid.points")
    if points is None:
        raise ConfigError("spread.stdev_grid needs points", e.path)
    scale = e.word("spread.stdev_grid.scale", default="log", choices=("log", "linear"))
    if points < 2:
        e.fail("spread.stdev_grid.points", f"grid needs at least 2 points, got {points}")
    if not 0 < lo < hi:
        raise ConfigError(f"grid needs 0 < min < max, got min={lo}, max={hi}", e.path)
    if scale == "log":
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _parse_mc(e: _Entries):
    samples = e.integer("mc.samples")
    if samples is None:
        for key in ("mc.seed", "mc.batches"):
            if e.has(key):
                e.fail(key, "mc settings need mc.samples")
        return None, None
    seed = e.integer("mc.seed")
    if seed is None:
        raise ConfigError("mc needs an explicit mc.seed for reproducibility", e.path)
    batches = e.integer("mc.batches", default=1)
    try:
        mc = McConfig(samples=samples, seed=seed, batches=batches)
    except ValueError as err:
        raise ConfigError(str(err), e.path, field="mc")

    ns = e.int_list("mc.matrix.n_particles")
    stdevs = e.real_list("mc.matrix.stdev")
    gs = e.real_list("mc.matrix.g")
    given = [x is not None for x in (ns, stdevs, gs)]
    if not any(given):
        return mc, None
    if not all(given):
        raise ConfigError("mc.matrix needs all of n_particles, stdev and g", e.path)
    if any(n < 1 for n in ns):
        e.fail("mc.matrix.n_particles", "lattice sizes must be >= 1")
    if any(not s > 0 for s in stdevs):
        e.fail("mc.matrix.stdev", "stdev values must be positive")
    if any(not 0 < g <= 1 for g in gs):
        e.fail("mc.matrix.g", "g values must be in (0, 1]")
    return mc, McMatrix(n_particles=ns, stdev=stdevs, g=gs)


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    path = str(path)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err.strerror or err}", path)
    e = _Entries(_parse_lines(text, path), path)

    r_meters = e.real("detector.r_meters")
    if r_meters is not None and not r_meters > 0:
        e.fail("detector.r_meters", f"detector radius must be positive, got {r_meters}")
    r = e.real("detector.r", default=1.0)
    if e.has("detector.r") and r_meters is not None:
        e.fail("detector.r", "detector.r_meters already fixes the unit; drop detector.r")
    shape = e.word("detector.shape", default="interval_1d", choices=DETECTOR_SHAPES)
    axis_offset = _length(e, "detector.axis_offset", r_meters, default=0.0)
    try:
        detector = DetectorGeometry(r=r, shape=shape, axis_offset=axis_offset)
    except ValueError as err:
        raise ConfigError(str(err), path, field="detector")

    kind = e.word("opacity.kind", choices=KINDS)
    value = e.real("opacity.value")
    if (kind is None) != (value is None):
        raise ConfigError("opacity needs both opacity.kind and opacity.value", path)
    opacity = None
    if kind is not None:
        try:
            opacity = make_opacity(kind, value)
        except ValueError as err:
            raise ConfigError(str(err), path, e.line("opacity.value"), "opacity.value")

    n_particles = e.integer("cloud.n_particles")
    if n_particles is not None and n_particles < 1:
        e.fail("cloud.n_particles", f"particle count must be >= 1, got {n_particles}")
    segments = _parse_segments(e, r_meters)
    dimensionality = e.word("cloud.dimensionality", default="d1", choices=DIMENSIONALITIES)
    cloud = None
    if segments is not None:
        if n_particles is not None:
            e.fail("cloud.n_particles", "give cloud.n_particles or cloud segments, not both")
        if opacity is not None:
            raise ConfigError("opacity is derived from cloud segments; drop the opacity keys",
                              path, e.line("opacity.kind"), "opacity.kind")
        cloud = CloudSpec(segments=tuple(segments), dimensionality=dimensionality)

    stdev_grid = _parse_stdev_grid(e, r_meters)

    models_raw = e.raw("models")
    if models_raw is None:
        models = ("nonlocal",)
    else:
        requested = [m.strip() for m in models_raw.split(",") if m.strip()]
        unknown = [m for m in requested if m not in MODELS]
        if unknown:
            e.fail("models", f"unknown model {unknown[0]!r}, expected any of {', '.join(MODELS)}")
        if not requested:
            e.fail("models", "at least one model label is required")
        # canonical column order, duplicates collapsed
        models = tuple(m for m in MODELS if m in requested)

    mc, mc_matrix = _parse_mc(e)
    e.reject_unused()

    return ScenarioConfig(detector=detector, opacity=opacity, n_particles=n_particles,
                          cloud=cloud, stdev_grid=stdev_grid, models=models,
                          mc=mc, mc_matrix=mc_matrix, source=path)
