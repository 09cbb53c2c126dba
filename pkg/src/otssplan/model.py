"""Domain types and instance construction for the time-slice MDM planner.

An instance bundles a directed multi-mode-fiber topology, a set of traffic
requests, the time-slice frame grid, the pairwise modal crosstalk matrix,
and planner configuration. All types are immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Optional

Link = tuple[str, str]

TIERS = ("edge", "aggregation", "core")

ACCUMULATION_VARIANTS = ("linear-power", "paper-literal-db", "tanh-coupling")


class ModelError(Exception):
    """Base error for instance construction problems."""


class ParseError(ModelError):
    """Document is not structurally parseable (bad JSON, wrong types)."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class ValidationError(ModelError):
    """One or more invariant violations; carries all of them with field paths."""

    def __init__(self, failures: list[tuple[str, str]]):
        self.failures = list(failures)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.failures)
        super().__init__(lines)


@dataclass(frozen=True)
class NodeSpec:
    id: str
    tier: str  # edge | aggregation | core


@dataclass(frozen=True)
class LinkSpec:
    src: str
    dst: str
    length_m: float

    @property
    def key(self) -> Link:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Topology:
    """Directed graph of switches and MMF links, lengths in meters.

    Stored unidirectionally: a physical duplex fiber contributes two
    directed links.
    """

    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]

    def __post_init__(self):
        failures = []
        seen = set()
        for i, n in enumerate(self.nodes):
            if n.tier not in TIERS:
                failures.append((f"topology.nodes[{i}].tier", f"unknown tier {n.tier!r}"))
            if n.id in seen:
                failures.append((f"topology.nodes[{i}].id", f"duplicate node id {n.id!r}"))
            seen.add(n.id)
        link_keys = set()
        for i, l in enumerate(self.links):
            loc = f"topology.links[{i}]"
            if l.src == l.dst:
                failures.append((loc, f"self-loop at {l.src!r}"))
            if l.src not in seen:
                failures.append((loc + ".from", f"unknown node {l.src!r}"))
            if l.dst not in seen:
                failures.append((loc + ".to", f"unknown node {l.dst!r}"))
            if not (l.length_m > 0):
                failures.append((loc + ".length_m", f"length must be > 0, got {l.length_m}"))
            if l.key in link_keys:
                failures.append((loc, f"duplicate link {l.key}"))
            link_keys.add(l.key)
        if failures:
            raise ValidationError(failures)

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def tier_of(self, node_id: str) -> str:
        for n in self.nodes:
            if n.id == node_id:
                return n.tier
        raise KeyError(node_id)

    def edge_nodes(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.tier == "edge")

    def link_keys(self) -> tuple[Link, ...]:
        return tuple(l.key for l in self.links)

    def length(self, link: Link) -> float:
        for l in self.links:
            if l.key == link:
                return l.length_m
        raise KeyError(link)

    def out_links(self, node_id: str) -> tuple[LinkSpec, ...]:
        return tuple(l for l in self.links if l.src == node_id)

    def in_links(self, node_id: str) -> tuple[LinkSpec, ...]:
        return tuple(l for l in self.links if l.dst == node_id)


@dataclass(frozen=True)
class Request:
    id: str
    source: str
    destination: str
    bandwidth_gbps: float


@dataclass(frozen=True)
class FrameConfig:
    """Time-slice frame: repeating period of length frame_ms divided into
    equal slices of slice_ms. guard_us is display-only."""

    frame_ms: float
    slice_ms: float
    guard_us: Optional[float] = None

    def __post_init__(self):
        failures = []
        if not (self.frame_ms > 0):
            failures.append(("frame.frame_ms", "must be > 0"))
        if not (self.slice_ms > 0):
            failures.append(("frame.slice_ms", "must be > 0"))
        if not failures:
            ratio = Fraction(str(self.frame_ms)) / Fraction(str(self.slice_ms))
            if ratio.denominator != 1:
                failures.append(("frame", f"frame_ms/slice_ms = {ratio} is not an integer"))
            elif ratio < 1:
                failures.append(("frame", "slot count must be >= 1"))
        if failures:
            raise ValidationError(failures)

    @property
    def slot_count(self) -> int:
        return int(Fraction(str(self.frame_ms)) / Fraction(str(self.slice_ms)))


@dataclass(frozen=True)
class CrosstalkMatrix:
    """Pairwise modal coupling in dB per 100 m; rows index the aggressor
    mode, columns the victim. Diagonal is undefined (no self-crosstalk).
    The matrix may be asymmetric."""

    db_per_100m: tuple[tuple[Optional[float], ...], ...]

    def __post_init__(self):
        failures = []
        n = len(self.db_per_100m)
        for a, row in enumerate(self.db_per_100m):
            if len(row) != n:
                failures.append((f"crosstalk_db_per_100m[{a}]", f"row length {len(row)} != {n}"))
                continue
            for v, entry in enumerate(row):
                loc = f"crosstalk_db_per_100m[{a}][{v}]"
                if a == v:
                    if entry is not None:
                        failures.append((loc, "diagonal must be null"))
                else:
                    if entry is None or not math.isfinite(entry):
                        failures.append((loc, "off-diagonal entry must be finite"))
                    elif entry >= 0:
                        failures.append((loc, f"coupling must be < 0 dB, got {entry}"))
        if failures:
            raise ValidationError(failures)

    @property
    def mode_count(self) -> int:
        return len(self.db_per_100m)

    def get(self, aggressor: int, victim: int) -> float:
        if aggressor == victim:
            raise ValueError(f"no self-crosstalk entry for mode {aggressor}")
        entry = self.db_per_100m[aggressor][victim]
        assert entry is not None
        return entry

    def strongest_off_diagonal_db(self) -> float:
        return max(
            e
            for a, row in enumerate(self.db_per_100m)
            for v, e in enumerate(row)
            if a != v and e is not None
        )


@dataclass(frozen=True)
class AccumulationModel:
    """Selects how per-pair contributions are combined into a total.

    linear-power sums linear power ratios; paper-literal-db sums scaled dB
    values directly; tanh-coupling uses tanh(h*z) with a per-meter coupling
    parameter h, weighted by relative pair strength.
    """

    variant: str = "linear-power"
    h: Optional[float] = None

    def __post_init__(self):
        if self.variant not in ACCUMULATION_VARIANTS:
            raise ValidationError([("planner.accumulation_model", f"unknown variant {self.variant!r}")])
        if self.variant == "tanh-coupling" and not (self.h is not None and self.h > 0):
            raise ValidationError([("planner.accumulation_model.h", "h must be > 0 for tanh-coupling")])


@dataclass(frozen=True)
class ObjectiveMode:
    """lexicographic two-phase by default; weighted combines the throughput
    and resource terms with eta1 >> eta2."""

    kind: str = "lexicographic"  # lexicographic | weighted
    eta1: Optional[float] = None
    eta2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("lexicographic", "weighted"):
            raise ValidationError([("planner.objective_mode", f"unknown kind {self.kind!r}")])


@dataclass(frozen=True)
class PlannerConfig:
    xt_threshold_db: float = -13.0
    link_capacity_gbps: float = 10.0
    granularity_gbps: float = 1.0  # traffic bandwidth increment
    big_m: Optional[int] = None  # defaults to the slot count
    accumulation_model: AccumulationModel = field(default_factory=AccumulationModel)
    objective_mode: ObjectiveMode = field(default_factory=ObjectiveMode)

    def __post_init__(self):
        failures = []
        if not (self.xt_threshold_db < 0):
            failures.append(("planner.xt_threshold_db", "must be < 0 dB"))
        if not (self.link_capacity_gbps > 0):
            failures.append(("planner.link_capacity_gbps", "must be > 0"))
        if not (self.granularity_gbps > 0):
            failures.append(("planner.granularity_gbps", "must be > 0"))
        if self.big_m is not None and self.big_m < 1:
            failures.append(("planner.big_m", "must be >= 1"))
        if failures:
            raise ValidationError(failures)


@dataclass(frozen=True)
class Instance:
    topology: Topology
    requests: tuple[Request, ...]
    frame: FrameConfig
    mode_count: int
    crosstalk: CrosstalkMatrix
    planner: PlannerConfig = field(default_factory=PlannerConfig)

    def __post_init__(self):
        failures = []
        granularity = Fraction(str(self.planner.granularity_gbps))
        seen_ids = set()
        for i, r in enumerate(self.requests):
            loc = f"requests[{i}]"
            if r.id in seen_ids:
                failures.append((loc + ".id", f"duplicate request id {r.id!r}"))
            seen_ids.add(r.id)
            if r.source == r.destination:
                failures.append((loc, f"request {r.id!r} has source == destination"))
            for fieldname, node in (("src", r.source), ("dst", r.destination)):
                if not self.topology.has_node(node):
                    failures.append((f"{loc}.{fieldname}", f"unknown node {node!r}"))
            if not (r.bandwidth_gbps > 0):
                failures.append((loc + ".bandwidth_gbps", "must be > 0"))
            else:
                units = Fraction(str(r.bandwidth_gbps)) / granularity
                if units.denominator != 1:
                    failures.append(
                        (loc + ".bandwidth_gbps",
                         f"{r.bandwidth_gbps} is not a multiple of the {float(granularity)} Gb/s granularity")
                    )
        if self.mode_count < 1:
            failures.append(("modes", "mode count must be >= 1"))
        if self.crosstalk.mode_count != self.mode_count:
            failures.append(
                ("crosstalk_db_per_100m",
                 f"matrix dimension {self.crosstalk.mode_count} != mode count {self.mode_count}")
            )
        if failures:
            raise ValidationError(failures)

    @property
    def slot_count(self) -> int:
        return self.frame.slot_count

    @property
    def big_m(self) -> int:
        return self.planner.big_m if self.planner.big_m is not None else self.slot_count

    def slot_capacity(self) -> Fraction:
        return slot_capacity_gbps(self.frame, self.planner)

    def slot_units(self, request: Request) -> int:
        return required_slot_units(request.bandwidth_gbps, self.slot_capacity())

    def request_by_id(self, request_id: str) -> Request:
        for r in self.requests:
            if r.id == request_id:
                return r
        raise KeyError(request_id)

    def with_requests(self, requests: Iterable[Request]) -> "Instance":
        return replace(self, requests=tuple(requests))


def mode_label(index: int) -> str:
    """Display label m1, m2, ... for a 0-based mode index."""
    return f"m{index + 1}"


# Conventional LP-mode names for the default 4-mode channel set.
LP_MODE_LABELS = ("LP01", "LP11", "LP02", "LP31")


def slot_capacity_gbps(frame: FrameConfig, config: PlannerConfig) -> Fraction:
    """Bandwidth one slot on one mode carries: C * S / T."""
    c = Fraction(str(config.link_capacity_gbps))
    return c * Fraction(str(frame.slice_ms)) / Fraction(str(frame.frame_ms))


def required_slot_units(bandwidth_gbps: float, slot_capacity: Fraction | float) -> int:
    """Number of (mode, slot) units a request needs on every link of its path."""
    if not (bandwidth_gbps > 0):
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_gbps}")
    cap = Fraction(str(slot_capacity)) if not isinstance(slot_capacity, Fraction) else slot_capacity
    if not (cap > 0):
        raise ValueError(f"slot capacity must be > 0, got {slot_capacity}")
    ratio = Fraction(str(bandwidth_gbps)) / cap
    return -(-ratio.numerator // ratio.denominator)


def build_fat_tree(edge_count: int, agg_count: int, core_count: int,
                   link_length_m: float) -> Topology:
    """Three-tier fat-tree: every edge switch connects to every aggregation
    switch, every aggregation switch to every core switch. Each physical
    fiber yields two directed links of the given length."""
    if edge_count < 1 or agg_count < 1 or core_count < 1:
        raise ValueError(
            f"switch counts must be >= 1, got ({edge_count}, {agg_count}, {core_count})")
    if not (link_length_m > 0):
        raise ValueError(f"link length must be > 0, got {link_length_m}")
    nodes = (
        [NodeSpec(f"e{i + 1}", "edge") for i in range(edge_count)]
        + [NodeSpec(f"a{i + 1}", "aggregation") for i in range(agg_count)]
        + [NodeSpec(f"c{i + 1}", "core") for i in range(core_count)]
    )
    links: list[LinkSpec] = []
    for e in range(edge_count):
        for a in range(agg_count):
            links.append(LinkSpec(f"e{e + 1}", f"a{a + 1}", link_length_m))
            links.append(LinkSpec(f"a{a + 1}", f"e{e + 1}", link_length_m))
    for a in range(agg_count):
        for c in range(core_count):
            links.append(LinkSpec(f"a{a + 1}", f"c{c + 1}", link_length_m))
            links.append(LinkSpec(f"c{c + 1}", f"a{a + 1}", link_length_m))
    return Topology(nodes=tuple(nodes), links=tuple(links))


# --- document ingestion ---------------------------------------------------


def _require(doc: dict, key: str, location: str) -> Any:
    if key not in doc:
        raise ParseError(f"{key} required", location)
    return doc[key]


def topology_from_document(doc: dict, location: str = "$.topology") -> Topology:
    if not isinstance(doc, dict):
        raise ParseError("topology must be an object", location)
    nodes_doc = _require(doc, "nodes", location)
    links_doc = _require(doc, "links", location)
    nodes = []
    for i, n in enumerate(nodes_doc):
        if not isinstance(n, dict):
            raise ParseError("node must be an object", f"{location}.nodes[{i}]")
        nodes.append(NodeSpec(str(_require(n, "id", f"{location}.nodes[{i}]")),
                              str(_require(n, "tier", f"{location}.nodes[{i}]"))))
    links = []
    for i, l in enumerate(links_doc):
        if not isinstance(l, dict):
            raise ParseError("link must be an object", f"{location}.links[{i}]")
        loc = f"{location}.links[{i}]"
        links.append(LinkSpec(str(_require(l, "from", loc)), str(_require(l, "to", loc)),
                              float(_require(l, "length_m", loc))))
    return Topology(nodes=tuple(nodes), links=tuple(links))


def _accumulation_from_document(value: Any) -> AccumulationModel:
    if value is None:
        return AccumulationModel()
    if isinstance(value, str):
        return AccumulationModel(variant=value)
    if isinstance(value, dict):
        return AccumulationModel(variant=str(value.get("variant", "tanh-coupling")),
                                 h=value.get("h"))
    raise ParseError("accumulation_model must be a string or object",
                     "$.planner.accumulation_model")


def _objective_from_document(value: Any) -> ObjectiveMode:
    if value is None or value == "lexicographic":
        return ObjectiveMode()
    if value == "weighted":
        return ObjectiveMode(kind="weighted")
    if isinstance(value, dict) and "weighted" in value:
        w = value["weighted"]
        return ObjectiveMode(kind="weighted", eta1=w.get("eta1"), eta2=w.get("eta2"))
    raise ParseError("objective_mode must be 'lexicographic', 'weighted', or {weighted: {...}}",
                     "$.planner.objective_mode")


def load_instance(document: dict | str) -> Instance:
    """Build a fully validated Instance from a JSON document (dict or text).

    Parse problems raise ParseError with a field location; invariant
    violations raise ValidationError listing every failure.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("instance document must be a JSON object")

    topology = topology_from_document(_require(document, "topology", "$"))
    modes_doc = _require(document, "modes", "$")
    if isinstance(modes_doc, dict):
        mode_count = int(_require(modes_doc, "count", "$.modes"))
    else:
        mode_count = int(modes_doc)
    if "crosstalk_db_per_100m" not in document:
        raise ParseError("crosstalk matrix required", "$.crosstalk_db_per_100m")
    matrix_doc = document["crosstalk_db_per_100m"]
    matrix = CrosstalkMatrix(tuple(
        tuple(None if e is None else float(e) for e in row) for row in matrix_doc))
    frame_doc = _require(document, "frame", "$")
    frame = FrameConfig(frame_ms=float(_require(frame_doc, "frame_ms", "$.frame")),
                        slice_ms=float(_require(frame_doc, "slice_ms", "$.frame")),
                        guard_us=frame_doc.get("guard_us"))
    planner_doc = document.get("planner", {})
    planner = PlannerConfig(
        xt_threshold_db=float(planner_doc.get("xt_threshold_db", -13.0)),
        link_capacity_gbps=float(planner_doc.get("link_capacity_gbps", 10.0)),
        granularity_gbps=float(planner_doc.get("granularity_gbps", 1.0)),
        big_m=planner_doc.get("big_m"),
        accumulation_model=_accumulation_from_document(planner_doc.get("accumulation_model")),
        objective_mode=_objective_from_document(planner_doc.get("objective_mode")),
    )
    requests = []
    for i, r in enumerate(document.get("requests", [])):
        loc = f"$.requests[{i}]"
        requests.append(Request(id=str(_require(r, "id", loc)),
                                source=str(_require(r, "src", loc)),
                                destination=str(_require(r, "dst", loc)),
                                bandwidth_gbps=float(_require(r, "bandwidth_gbps", loc))))
    return Instance(topology=topology, requests=tuple(requests), frame=frame,
                    mode_count=mode_count, crosstalk=matrix, planner=planner)


def serialize_instance(instance: Instance) -> dict:
    """Inverse of load_instance; round-trips to an equal Instance."""
    doc: dict[str, Any] = {
        "topology": {
            "nodes": [{"id": n.id, "tier": n.tier} for n in instance.topology.nodes],
            "links": [{"from": l.src, "to": l.dst, "length_m": l.length_m}
                      for l in instance.topology.links],
        },
        "modes": {"count": instance.mode_count},
        "crosstalk_db_per_100m": [list(row) for row in instance.crosstalk.db_per_100m],
        "frame": {"frame_ms": instance.frame.frame_ms, "slice_ms": instance.frame.slice_ms},
        "planner": {
            "xt_threshold_db": instance.planner.xt_threshold_db,
            "link_capacity_gbps": instance.planner.link_capacity_gbps,
            "granularity_gbps": instance.planner.granularity_gbps,
            "accumulation_model": (
                instance.planner.accumulation_model.variant
                if instance.planner.accumulation_model.variant != "tanh-coupling"
                else {"variant": "tanh-coupling", "h": instance.planner.accumulation_model.h}
            ),
            "objective_mode": (
                "lexicographic" if instance.planner.objective_mode.kind == "lexicographic"
                else {"weighted": {"eta1": instance.planner.objective_mode.eta1,
                                   "eta2": instance.planner.objective_mode.eta2}}
            ),
        },
        "requests": [{"id": r.id, "src": r.source, "dst": r.destination,
                      "bandwidth_gbps": r.bandwidth_gbps} for r in instance.requests],
    }
    if instance.frame.guard_us is not None:
        doc["frame"]["guard_us"] = instance.frame.guard_us
    if instance.planner.big_m is not None:
        doc["planner"]["big_m"] = instance.planner.big_m
    return doc


def collapse_frame(instance: Instance) -> Instance:
    """One-slot variant of an instance: the whole frame is a single slice,
    so temporal separation is impossible (the conventional-MDM grid)."""
    frame = FrameConfig(frame_ms=instance.frame.frame_ms,
                        slice_ms=instance.frame.frame_ms,
                        guard_us=instance.frame.guard_us)
    return replace(instance, frame=frame)
