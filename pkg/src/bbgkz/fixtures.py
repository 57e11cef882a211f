"""Fixture files: a cone, named height vectors and run defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .geometry import ConeData, GeometryError
from .triangulation import Triangulation, regular_triangulation

BUNDLED = ("rank1", "a1", "conifold", "rank2_n4", "local_p2")


class FixtureError(ValueError):
    pass


@dataclass
class Fixture:
    name: str
    cone: ConeData
    heights: dict[str, tuple]
    seeds: tuple[int, ...] = (1, 2)
    lambdas: tuple[float, ...] = (4.0, 5.0, 6.0)
    bound: int = 6
    order: int | None = None
    betas: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return self.cone.rank

    def triangulation(self, name: str | None = None) -> Triangulation:
        if name is None:
            name = next(iter(self.heights))
        if name not in self.heights:
            raise FixtureError(f"fixture {self.name} has no height vector {name!r} (have {', '.join(self.heights)})")
        return regular_triangulation(self.cone, self.heights[name])


def parse_fixture(data: dict, source: str = "<fixture>") -> Fixture:
    if not isinstance(data, dict):
        raise FixtureError(f"{source}: top level must be an object")
    for key in ("points", "deg"):
        if key not in data:
            raise FixtureError(f"{source}: missing field {key!r}")
    points = data["points"]
    if not points:
        raise FixtureError(f"{source}: empty points")
    try:
        cone = ConeData(tuple(tuple(p) for p in points), tuple(data["deg"]))
    except (GeometryError, TypeError, ValueError) as exc:
        raise FixtureError(f"{source}: {exc}") from exc
    if "rank" in data and data["rank"] != cone.rank:
        raise FixtureError(f"{source}: rank {data['rank']} does not match points of length {cone.rank}")
    heights = data.get("heights") or {"default": [0] * cone.n}
    if isinstance(heights, list):
        heights = {"default": heights}
    fx = Fixture(
        name=data.get("name", Path(source).stem),
        cone=cone,
        heights={k: tuple(v) for k, v in heights.items()},
        seeds=tuple(data.get("seeds", (1, 2))),
    )
    trunc = data.get("truncation", {})
    if "lambda" in trunc:
        fx.lambdas = tuple(float(x) for x in trunc["lambda"])
    fx.bound = int(trunc.get("bound", fx.bound))
    if trunc.get("order") is not None:
        fx.order = int(trunc["order"])
    try:
        fx.betas = [[complex(*b) if isinstance(b, list) else complex(b) for b in beta] for beta in data.get("beta", [])]
    except TypeError as exc:
        raise FixtureError(f"{source}: beta entries must be numbers or [re, im] pairs") from exc
    for beta in fx.betas:
        if len(beta) != cone.rank:
            raise FixtureError(f"{source}: beta {beta} needs {cone.rank} coordinates")
    for name in fx.heights:
        try:
            tri = fx.triangulation(name)
        except GeometryError as exc:
            raise FixtureError(f"{source}: heights {name!r}: {exc}") from exc
        missing = [i + 1 for i in cone.extremal if i not in tri.used_rays]
        if missing:
            raise FixtureError(f"{source}: heights {name!r}: rays not covered: {missing}")
    return fx


def load_fixture(path) -> Fixture:
    """Load a fixture from a JSON path or the name of a bundled fixture."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED or p.stem in BUNDLED and not p.exists():
        text = resources.files("bbgkz.data").joinpath(f"{p.stem}.json").read_text()
        source = f"{p.stem}.json"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise FixtureError(f"cannot read {path}: {exc}") from exc
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{source}: invalid JSON: {exc}") from exc
    return parse_fixture(data, source)
