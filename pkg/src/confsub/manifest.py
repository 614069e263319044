"""Keyed plain-text manifest format defining a verification job.

A manifest is a sequence of ``key = value`` lines; ``#`` starts a
comment and blank lines are ignored.  Keys (case-sensitive)::

    total.dim       = 3
    total.coords    = x1 x2 x3
    total.metric    = x3^-2, 0, 0 ; 0, x3^-2, 0 ; 0, 0, x3^-2
    total.domain    = x3 > 1                  # optional predicate
    base.dim        = 2
    base.coords     = y1 y2
    base.metric     = 1, 0 ; 0, 1
    base.domain     = y2 > 1                  # optional
    map.components  = x2, x3
    fields.xi       = total : 0, 0, 0         # target 'total' or 'base'
    soliton.xi      = xi                      # optional, names a field
    soliton.mu      = 2                       # optional
    checks          = G2.12, P3.1, all ...
    points.list     = (0, 1.5, 2) ; (1, 2, 3)  # or points.box
    points.box      = -1 1 ; 1.2 3 ; 1.5 4     # per-coordinate lo hi
    points.count    = 20                       # with points.box
    points.seed     = 42
    tolerance       = 1e-6

Box points are drawn by the splitmix64 counter-based generator so a
(seed, box) pair reproduces bit-identical points on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import ExprError
from .geometry import ChartManifold, Point, VectorFieldSpec
from .identities import ALL_CHECK_IDS
from .submersion import SubmersionSetup

SOLITON_CHECKS = ("fit-mu", "fiber-soliton", "base-soliton",
                  "conformal-fit", "scalar-mu", "harmonicity",
                  "structure-flags")
KNOWN_CHECKS = ALL_CHECK_IDS + SOLITON_CHECKS


class ManifestError(ValueError):
    """Schema or cross-reference violation in a manifest document."""


@dataclass
class VerificationJob:
    setup: SubmersionSetup
    fields: dict  # name -> (target, VectorFieldSpec)
    xi_name: str = None
    mu: float = None
    checks: tuple = ()
    points: list = field(default_factory=list)
    tolerance: float = 1e-6
    seed: int = 42

    @property
    def xi(self):
        if self.xi_name is None:
            return None
        return self.fields[self.xi_name][1]


# ---------------------------------------------------------------------
# splitmix64 counter-based sampling
# ---------------------------------------------------------------------

_MASK = (1 << 64) - 1


def splitmix64(state):
    """One splitmix64 output for the given 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E9B5) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _unit(seed, counter):
    return splitmix64((seed + counter * 0x9E3779B97F4A7C15) & _MASK) / 2.0 ** 64


def sample_box(box, count, seed, predicate=None, max_attempts=1000):
    """``count`` points uniform in ``box`` (list of (lo, hi) pairs),
    rejection-sampled against ``predicate`` when given."""
    points = []
    counter = 0
    attempts = 0
    while len(points) < count:
        coords = []
        for lo, hi in box:
            coords.append(lo + _unit(seed, counter) * (hi - lo))
            counter += 1
        p = Point(tuple(coords))
        attempts += 1
        if predicate is None or predicate(p):
            points.append(p)
            attempts = 0
        elif attempts >= max_attempts:
            raise ManifestError(
                f"could not sample a point satisfying the domain predicate "
                f"after {max_attempts} attempts")
    return points


# ---------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------

def _read_pairs(document):
    pairs = []
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ManifestError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs.append((lineno, key.strip(), value.strip()))
    return pairs


def _metric_rows(text):
    return [[cell.strip() for cell in row.split(",")]
            for row in text.split(";")]


def _chart_from(keys, prefix):
    try:
        dim = int(keys[f"{prefix}.dim"])
        coords = keys[f"{prefix}.coords"].split()
        metric = _metric_rows(keys[f"{prefix}.metric"])
    except KeyError as exc:
        raise ManifestError(f"missing manifest key {exc.args[0]!r}") from None
    if dim <= 0:
        raise ManifestError(f"{prefix}.dim must be positive")
    if len(coords) != dim:
        raise ManifestError(
            f"{prefix}.coords lists {len(coords)} names for dim {dim}")
    if len(metric) != dim or any(len(row) != dim for row in metric):
        raise ManifestError(f"{prefix}.metric is not a {dim}x{dim} grid")
    domain = keys.get(f"{prefix}.domain")
    try:
        return ChartManifold.from_strings(coords, metric, domain)
    except ExprError as exc:
        raise ManifestError(f"in {prefix} chart: {exc}") from None


def _parse_point_list(text, dim):
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ManifestError(f"malformed point {chunk!r}")
        coords = [float(c) for c in chunk[1:-1].split(",")]
        if len(coords) != dim:
            raise ManifestError(
                f"point {chunk!r} has {len(coords)} coordinates, expected {dim}")
        points.append(Point(tuple(coords)))
    return points


def _parse_box(text, dim):
    box = []
    for chunk in text.split(";"):
        parts = chunk.split()
        if len(parts) != 2:
            raise ManifestError(f"box range {chunk.strip()!r} is not 'lo hi'")
        lo, hi = float(parts[0]), float(parts[1])
        if not lo < hi:
            raise ManifestError(f"empty box range {chunk.strip()!r}")
        box.append((lo, hi))
    if len(box) != dim:
        raise ManifestError(f"points.box lists {len(box)} ranges for dim {dim}")
    return box


def parse_manifest(document, overrides=None):
    """Parse and fully validate a manifest document into a job.

    ``overrides`` maps manifest keys to replacement values applied after
    reading the document (used by the CLI for --tol/--seed/--points).
    """
    keys = {}
    for lineno, key, value in _read_pairs(document):
        if key in keys:
            raise ManifestError(f"line {lineno}: duplicate key {key!r}")
        keys[key] = value
    for key, value in (overrides or {}).items():
        keys[key] = value

    total = _chart_from(keys, "total")
    base = _chart_from(keys, "base")
    if base.dim >= total.dim:
        raise ManifestError("base.dim must be smaller than total.dim")

    if "map.components" not in keys:
        raise ManifestError("missing manifest key 'map.components'")
    comps = [c.strip() for c in keys["map.components"].split(",")]
    if len(comps) != base.dim:
        raise ManifestError(
            f"map.components lists {len(comps)} expressions for base dim {base.dim}")
    try:
        setup = SubmersionSetup.from_strings(total, base, comps)
    except ExprError as exc:
        raise ManifestError(f"in map.components: {exc}") from None

    fields = {}
    for key, value in keys.items():
        if not key.startswith("fields."):
            continue
        name = key[len("fields."):]
        if ":" not in value:
            raise ManifestError(
                f"field {name!r} needs the form 'total|base : comp, ...'")
        target, rest = value.split(":", 1)
        target = target.strip()
        if target not in ("total", "base"):
            raise ManifestError(f"field {name!r} target must be total or base")
        chart = total if target == "total" else base
        comps = [c.strip() for c in rest.split(",")]
        if len(comps) != chart.dim:
            raise ManifestError(
                f"field {name!r} has {len(comps)} components for "
                f"{target} dim {chart.dim}")
        try:
            fields[name] = (target, chart.field(*comps))
        except ExprError as exc:
            raise ManifestError(f"in field {name!r}: {exc}") from None

    xi_name = keys.get("soliton.xi")
    if xi_name is not None and xi_name not in fields:
        raise ManifestError(f"soliton.xi references undeclared field {xi_name!r}")
    if xi_name is not None and fields[xi_name][0] != "total":
        raise ManifestError("soliton.xi must name a field on the total manifold")
    mu = float(keys["soliton.mu"]) if "soliton.mu" in keys else None

    checks = []
    for token in keys.get("checks", "all").split(","):
        token = token.strip()
        if not token:
            continue
        if token == "all":
            checks.extend(KNOWN_CHECKS)
        elif token in KNOWN_CHECKS:
            checks.append(token)
        else:
            raise ManifestError(f"unknown check id {token!r}")
    seen = set()
    checks = tuple(c for c in checks if not (c in seen or seen.add(c)))

    tolerance = float(keys.get("tolerance", "1e-6"))
    seed = int(keys.get("points.seed", "42"))

    def in_domains(p):
        if not total.contains(p):
            return False
        return base.contains(setup.map_point(p))

    if "points.list" in keys:
        points = _parse_point_list(keys["points.list"], total.dim)
        for p in points:
            if not in_domains(p):
                raise ManifestError(
                    f"point {tuple(p.coords)} violates a domain predicate")
    elif "points.box" in keys:
        box = _parse_box(keys["points.box"], total.dim)
        count = int(keys.get("points.count", "20"))
        if count <= 0:
            raise ManifestError("points.count must be positive")
        points = sample_box(box, count, seed, predicate=in_domains)
    else:
        raise ManifestError("manifest needs points.list or points.box")

    return VerificationJob(setup=setup, fields=fields, xi_name=xi_name,
                           mu=mu, checks=checks, points=points,
                           tolerance=tolerance, seed=seed)


def load_manifest(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh.read(), overrides=overrides)
