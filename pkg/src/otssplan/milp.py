"""Abstract MIP of the planning problem and LP-format serialization.

Builds the full model: flow conservation and acceptance coupling (eq2),
per-slot and per-mode continuity (eq3-eq6), slot exclusivity (eq7),
contiguity via transition indicators (eq8), cross-mode slot equality
(eq9), capacity big-M (eq10), the crosstalk budget (eq11), and the
overlap-indicator linearizations (eq12-eq15). The model is solver
agnostic; emit_lp writes standard LP text for any external MILP solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import xtalk
from .model import Instance, Link

Term = tuple[float, str]


class SizeLimitError(Exception):
    """Instance would exceed the configured variable cap."""

    def __init__(self, variable_count: int, cap: int):
        super().__init__(f"model would have {variable_count} variables, cap is {cap}")
        self.variable_count = variable_count
        self.cap = cap


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = "binary"  # binary | continuous
    lb: float = 0.0
    ub: float = 1.0


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[Term, ...]
    sense: str  # <= | >= | =
    rhs: float
    family: str


@dataclass(frozen=True)
class Objective:
    sense: str  # maximize | minimize
    name: str
    terms: tuple[Term, ...]


@dataclass
class MilpModel:
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objectives: list[Objective] = field(default_factory=list)
    # throughput expression, used by phase 2 to pin the phase-1 optimum
    throughput_terms: tuple[Term, ...] = ()

    @property
    def two_phase(self) -> bool:
        return len(self.objectives) == 2

    def variable_names(self) -> set[str]:
        return {v.name for v in self.variables}

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.family] = out.get(c.family, 0) + 1
        return out


def _sanitize(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "", token) or "x"


def lambda_name(rid: str, link: Link, m: int, t: int) -> str:
    return f"l_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}_t{t}"


def rho_name(rid: str) -> str:
    return f"rho_r{_sanitize(rid)}"


def beta_name(r1: str, r2: str, link: Link, m1: int, m2: int, t: int) -> str:
    return (f"b_r{_sanitize(r1)}_r{_sanitize(r2)}_e{_sanitize(link[0])}_"
            f"{_sanitize(link[1])}_m{m1}_{m2}_t{t}")


def theta_name(r1: str, r2: str, link: Link, m1: int, m2: int) -> str:
    return (f"th_r{_sanitize(r1)}_r{_sanitize(r2)}_e{_sanitize(link[0])}_"
            f"{_sanitize(link[1])}_m{m1}_{m2}")


def _cm_name(rid: str, link: Link, m: int, t: int) -> str:
    return f"cm_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}_t{t}"


def _ca_name(rid: str, link: Link, t: int) -> str:
    return f"ca_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_t{t}"


def _u_name(rid: str, link: Link, t: int) -> str:
    return f"u_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_t{t}"


def _w_name(rid: str, link: Link, m: int) -> str:
    return f"w_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}"


def _v_name(rid: str, link: Link) -> str:
    return f"v_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}"


FAMILY_NOTES = {
    "eq2": "flow conservation and acceptance coupling",
    "eq3": "per-slot continuity at source and destination",
    "eq4": "per-slot continuity at transit nodes",
    "eq5": "per-mode continuity at source and destination",
    "eq6": "per-mode continuity at transit nodes",
    "eq7": "a time slice is used once",
    "eq8": "time slices of a request are contiguous",
    "eq9": "used time slices agree across modes",
    "eq10": "used time slices cover the demand",
    "eq11": "accumulated crosstalk within threshold",
    "eq12": "overlap-per-link follows overlap-per-slot",
    "eq13": "overlap indicator lower bound",
    "eq14": "overlap bounded by the first occupancy",
    "eq15": "overlap bounded by the second occupancy",
}


def count_formulas(instance: Instance) -> dict:
    """Closed-form variable and constraint counts; build_model must match
    these exactly."""
    R = len(instance.requests)
    E = len(instance.topology.links)
    M = instance.mode_count
    T = instance.slot_count
    N = len(instance.topology.nodes)
    P = R * (R - 1)
    Q = M * (M - 1)
    if R == 0:
        variables = {k: 0 for k in ("lambda", "rho", "beta", "theta", "c_mode",
                                    "c_any", "slot_use", "mode_use", "link_use")}
        constraints = {k: 0 for k in FAMILY_NOTES}
        return {"variables": variables, "constraints": constraints,
                "total_variables": 0, "total_constraints": 0}
    variables = {
        "lambda": R * E * M * T,
        "rho": R,
        "beta": P * E * Q * T,
        "theta": P * E * Q,
        "c_mode": R * E * M * (T + 1),
        "c_any": R * E * (T + 1),
        "slot_use": R * E * T,
        "mode_use": R * E * M,
        "link_use": R * E,
    }
    transit = max(N - 2, 0)
    constraints = {
        "eq2": R * N + R * E * M * T,
        "eq3": R * T,
        "eq4": R * T * transit,
        "eq5": R * M * T,
        "eq6": R * M * T * transit,
        "eq7": E * M * T,
        "eq8": R * E * M * (2 * (T + 1) + 1),
        "eq9": R * E * (T * (M + 1) + 2 * (T + 1) + 1 + 2 * M * T),
        "eq10": R * E * (M * T + 2),
        "eq11": R,
        "eq12": 2 * P * E * Q,
        "eq13": P * E * Q * T,
        "eq14": P * E * Q * T,
        "eq15": P * E * Q * T,
    }
    return {
        "variables": variables,
        "constraints": constraints,
        "total_variables": sum(variables.values()),
        "total_constraints": sum(constraints.values()),
    }


def build_model(instance: Instance, max_variables: int = 2_000_000) -> MilpModel:
    """Construct the full MIP for an instance.

    An instance with zero requests yields an empty (trivially optimal)
    model; an instance whose variable count exceeds max_variables raises
    SizeLimitError naming the count.
    """
    counts = count_formulas(instance)
    if counts["total_variables"] > max_variables:
        raise SizeLimitError(counts["total_variables"], max_variables)

    model = MilpModel()
    rids = [r.id for r in instance.requests]
    if not rids:
        model.objectives = [Objective("maximize", "throughput", ()),
                            Objective("minimize", "resource", ())]
        return model

    links = instance.topology.link_keys()
    modes = range(instance.mode_count)
    slots = range(instance.slot_count)
    nodes = instance.topology.node_ids()
    big_m = instance.big_m
    q = {r.id: instance.slot_units(r) for r in instance.requests}
    # eq10's big-M must dominate the largest slot-unit demand
    big_m_cap = max(big_m, max(q.values()))

    add_var = model.variables.append
    add_con = model.constraints.append

    # variables, in a fixed declaration order
    for rid in rids:
        for link in links:
            for m in modes:
                for t in slots:
                    add_var(Variable(lambda_name(rid, link, m, t)))
    for rid in rids:
        add_var(Variable(rho_name(rid)))
    for r1 in rids:
        for r2 in rids:
            if r1 == r2:
                continue
            for link in links:
                for m1 in modes:
                    for m2 in modes:
                        if m1 == m2:
                            continue
                        for t in slots:
                            add_var(Variable(beta_name(r1, r2, link, m1, m2, t)))
                        add_var(Variable(theta_name(r1, r2, link, m1, m2)))
    for rid in rids:
        for link in links:
            for m in modes:
                for t in range(instance.slot_count + 1):
                    add_var(Variable(_cm_name(rid, link, m, t)))
            for t in range(instance.slot_count + 1):
                add_var(Variable(_ca_name(rid, link, t)))
            for t in slots:
                add_var(Variable(_u_name(rid, link, t)))
            for m in modes:
                add_var(Variable(_w_name(rid, link, m)))
            add_var(Variable(_v_name(rid, link)))

    # eq2: flow conservation in slot units, plus lambda <= rho coupling
    for r in instance.requests:
        for node in nodes:
            terms: list[Term] = []
            for link in instance.topology.out_links(node):
                for m in modes:
                    for t in slots:
                        terms.append((1.0, lambda_name(r.id, link.key, m, t)))
            for link in instance.topology.in_links(node):
                for m in modes:
                    for t in slots:
                        terms.append((-1.0, lambda_name(r.id, link.key, m, t)))
            name = f"eq2_r{_sanitize(r.id)}_n{_sanitize(node)}"
            if node == r.source:
                add_con(Constraint(name, tuple(terms + [(-float(q[r.id]), rho_name(r.id))]),
                                   ">=", 0.0, "eq2"))
            elif node == r.destination:
                add_con(Constraint(name, tuple(terms + [(float(q[r.id]), rho_name(r.id))]),
                                   "<=", 0.0, "eq2"))
            else:
                add_con(Constraint(name, tuple(terms), "=", 0.0, "eq2"))
    for rid in rids:
        for link in links:
            for m in modes:
                for t in slots:
                    add_con(Constraint(
                        f"eq2_acc_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}_t{t}",
                        ((1.0, lambda_name(rid, link, m, t)), (-1.0, rho_name(rid))),
                        "<=", 0.0, "eq2"))

    # eq3/eq4: per-slot aggregate continuity; eq5/eq6: per-mode continuity
    for r in instance.requests:
        for t in slots:
            terms = []
            for link in instance.topology.out_links(r.source):
                for m in modes:
                    terms.append((1.0, lambda_name(r.id, link.key, m, t)))
            for link in instance.topology.in_links(r.destination):
                for m in modes:
                    terms.append((-1.0, lambda_name(r.id, link.key, m, t)))
            add_con(Constraint(f"eq3_r{_sanitize(r.id)}_t{t}", tuple(terms), "=", 0.0, "eq3"))
        for t in slots:
            for node in nodes:
                if node in (r.source, r.destination):
                    continue
                terms = []
                for link in instance.topology.out_links(node):
                    for m in modes:
                        terms.append((1.0, lambda_name(r.id, link.key, m, t)))
                for link in instance.topology.in_links(node):
                    for m in modes:
                        terms.append((-1.0, lambda_name(r.id, link.key, m, t)))
                add_con(Constraint(f"eq4_r{_sanitize(r.id)}_t{t}_n{_sanitize(node)}",
                                   tuple(terms), "=", 0.0, "eq4"))
        for m in modes:
            for t in slots:
                terms = []
                for link in instance.topology.out_links(r.source):
                    terms.append((1.0, lambda_name(r.id, link.key, m, t)))
                for link in instance.topology.in_links(r.destination):
                    terms.append((-1.0, lambda_name(r.id, link.key, m, t)))
                add_con(Constraint(f"eq5_r{_sanitize(r.id)}_m{m}_t{t}",
                                   tuple(terms), "=", 0.0, "eq5"))
        for m in modes:
            for t in slots:
                for node in nodes:
                    if node in (r.source, r.destination):
                        continue
                    terms = []
                    for link in instance.topology.out_links(node):
                        terms.append((1.0, lambda_name(r.id, link.key, m, t)))
                    for link in instance.topology.in_links(node):
                        terms.append((-1.0, lambda_name(r.id, link.key, m, t)))
                    add_con(Constraint(
                        f"eq6_r{_sanitize(r.id)}_m{m}_t{t}_n{_sanitize(node)}",
                        tuple(terms), "=", 0.0, "eq6"))

    # eq7: each (link, mode, slot) cell used at most once
    for link in links:
        for m in modes:
            for t in slots:
                add_con(Constraint(
                    f"eq7_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}_t{t}",
                    tuple((1.0, lambda_name(rid, link, m, t)) for rid in rids),
                    "<=", 1.0, "eq7"))

    # eq8: contiguity via transition indicators with virtual zero slots at
    # both frame boundaries; at most 2 transitions = one contiguous block
    T = instance.slot_count
    for rid in rids:
        for link in links:
            for m in modes:
                for tb in range(T + 1):
                    prev = [(1.0, lambda_name(rid, link, m, tb - 1))] if tb - 1 >= 0 else []
                    cur = [(1.0, lambda_name(rid, link, m, tb))] if tb < T else []
                    cm = _cm_name(rid, link, m, tb)
                    neg = lambda ts: [(-c, n) for c, n in ts]
                    add_con(Constraint(f"eq8_up_{cm}",
                                       tuple([(1.0, cm)] + neg(cur) + prev), ">=", 0.0, "eq8"))
                    add_con(Constraint(f"eq8_dn_{cm}",
                                       tuple([(1.0, cm)] + cur + neg(prev)), ">=", 0.0, "eq8"))
                add_con(Constraint(
                    f"eq8_sum_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}_m{m}",
                    tuple((1.0, _cm_name(rid, link, m, tb)) for tb in range(T + 1)),
                    "<=", 2.0, "eq8"))

    # eq9: aggregate occupancy indicator u, its contiguity, and mode-pattern
    # equality for modes the request uses
    for rid in rids:
        for link in links:
            for t in slots:
                for m in modes:
                    add_con(Constraint(f"eq9_uup_{_u_name(rid, link, t)}_m{m}",
                                       ((1.0, lambda_name(rid, link, m, t)),
                                        (-1.0, _u_name(rid, link, t))), "<=", 0.0, "eq9"))
                add_con(Constraint(
                    f"eq9_udn_{_u_name(rid, link, t)}",
                    tuple([(1.0, _u_name(rid, link, t))]
                          + [(-1.0, lambda_name(rid, link, m, t)) for m in modes]),
                    "<=", 0.0, "eq9"))
            for tb in range(T + 1):
                prev = [(1.0, _u_name(rid, link, tb - 1))] if tb - 1 >= 0 else []
                cur = [(1.0, _u_name(rid, link, tb))] if tb < T else []
                ca = _ca_name(rid, link, tb)
                neg = lambda ts: [(-c, n) for c, n in ts]
                add_con(Constraint(f"eq9_up_{ca}",
                                   tuple([(1.0, ca)] + neg(cur) + prev), ">=", 0.0, "eq9"))
                add_con(Constraint(f"eq9_dn_{ca}",
                                   tuple([(1.0, ca)] + cur + neg(prev)), ">=", 0.0, "eq9"))
            add_con(Constraint(
                f"eq9_sum_r{_sanitize(rid)}_e{_sanitize(link[0])}_{_sanitize(link[1])}",
                tuple((1.0, _ca_name(rid, link, tb)) for tb in range(T + 1)),
                "<=", 2.0, "eq9"))
            for m in modes:
                for t in slots:
                    add_con(Constraint(f"eq9_wub_{_w_name(rid, link, m)}_t{t}",
                                       ((1.0, lambda_name(rid, link, m, t)),
                                        (-1.0, _w_name(rid, link, m))), "<=", 0.0, "eq9"))
                    # lambda >= u - (1 - w): a used mode follows the
                    # aggregate slot pattern exactly
                    add_con(Constraint(f"eq9_wlb_{_w_name(rid, link, m)}_t{t}",
                                       ((1.0, lambda_name(rid, link, m, t)),
                                        (-1.0, _u_name(rid, link, t)),
                                        (-1.0, _w_name(rid, link, m))), ">=", -1.0, "eq9"))

    # eq10: if a request uses a link, the supplied cells cover its demand
    for r in instance.requests:
        for link in links:
            v = _v_name(r.id, link)
            for m in modes:
                for t in slots:
                    add_con(Constraint(f"eq10_vup_{v}_m{m}_t{t}",
                                       ((1.0, lambda_name(r.id, link, m, t)), (-1.0, v)),
                                       "<=", 0.0, "eq10"))
            add_con(Constraint(
                f"eq10_vdn_{v}",
                tuple([(1.0, v)] + [(-1.0, lambda_name(r.id, link, m, t))
                                    for m in modes for t in slots]),
                "<=", 0.0, "eq10"))
            add_con(Constraint(
                f"eq10_cap_{v}",
                tuple([(1.0, lambda_name(r.id, link, m, t)) for m in modes for t in slots]
                      + [(-float(big_m_cap), v)]),
                ">=", float(q[r.id]) - big_m_cap, "eq10"))

    # eq11: accumulated crosstalk budget per protected request, with
    # coefficients and threshold in the configured accumulation model's
    # additive domain
    acc = instance.planner.accumulation_model
    threshold = xtalk.threshold_in_domain(instance.planner.xt_threshold_db, acc)
    for r1 in rids:
        terms = []
        for r2 in rids:
            if r1 == r2:
                continue
            for link_spec in instance.topology.links:
                for m1 in modes:
                    for m2 in modes:
                        if m1 == m2:
                            continue
                        coef = xtalk.pairwise_contribution(
                            instance.crosstalk, m2, m1, link_spec.length_m, acc)
                        terms.append((coef, theta_name(r1, r2, link_spec.key, m1, m2)))
        add_con(Constraint(f"eq11_r{_sanitize(r1)}", tuple(terms), "<=", threshold, "eq11"))

    # eq12-eq15: beta = AND of the two occupancies; theta = OR over slots
    for r1 in rids:
        for r2 in rids:
            if r1 == r2:
                continue
            for link in links:
                for m1 in modes:
                    for m2 in modes:
                        if m1 == m2:
                            continue
                        th = theta_name(r1, r2, link, m1, m2)
                        betas = [beta_name(r1, r2, link, m1, m2, t) for t in slots]
                        add_con(Constraint(
                            f"eq12_lo_{th}",
                            tuple([(1.0 / big_m, b) for b in betas] + [(-1.0, th)]),
                            "<=", 0.0, "eq12"))
                        add_con(Constraint(
                            f"eq12_hi_{th}",
                            tuple([(1.0, th)] + [(-1.0, b) for b in betas]),
                            "<=", 0.0, "eq12"))
                        for t in slots:
                            b = beta_name(r1, r2, link, m1, m2, t)
                            l1 = lambda_name(r1, link, m1, t)
                            l2 = lambda_name(r2, link, m2, t)
                            add_con(Constraint(f"eq13_{b}",
                                               ((1.0, l1), (1.0, l2), (-1.0, b)),
                                               "<=", 1.0, "eq13"))
                            add_con(Constraint(f"eq14_{b}", ((1.0, b), (-1.0, l1)),
                                               "<=", 0.0, "eq14"))
                            add_con(Constraint(f"eq15_{b}", ((1.0, b), (-1.0, l2)),
                                               "<=", 0.0, "eq15"))

    # objective(s)
    throughput_terms = tuple((r.bandwidth_gbps, rho_name(r.id)) for r in instance.requests)
    lambda_terms = tuple((1.0, lambda_name(rid, link, m, t))
                         for rid in rids for link in links for m in modes for t in slots)
    model.throughput_terms = throughput_terms
    obj_mode = instance.planner.objective_mode
    if obj_mode.kind == "lexicographic":
        model.objectives = [Objective("maximize", "throughput", throughput_terms),
                            Objective("minimize", "resource", lambda_terms)]
    else:
        eta1 = obj_mode.eta1 if obj_mode.eta1 is not None else 1.0
        if obj_mode.eta2 is not None:
            eta2 = obj_mode.eta2
        else:
            max_b = max(r.bandwidth_gbps for r in instance.requests)
            denom = (len(rids) * len(links) * instance.mode_count
                     * instance.slot_count * max_b + 1.0)
            eta2 = eta1 / denom
        weighted = tuple([(eta1 * c, n) for c, n in throughput_terms]
                         + [(-eta2, n) for _, n in lambda_terms])
        model.objectives = [Objective("maximize", "weighted", weighted)]

    # audit against the closed forms
    assert len(model.variables) == counts["total_variables"]
    assert model.family_counts() == {k: v for k, v in counts["constraints"].items() if v}
    return model


# --- LP text emission -----------------------------------------------------


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_terms(terms: tuple[Term, ...]) -> str:
    if not terms:
        return "0 dummy_zero"
    parts = []
    for i, (coef, name) in enumerate(terms):
        if i == 0:
            if coef < 0:
                parts.append(f"- {_fmt_num(-coef)} {name}")
            else:
                parts.append(f"{_fmt_num(coef)} {name}")
        else:
            if coef < 0:
                parts.append(f"- {_fmt_num(-coef)} {name}")
            else:
                parts.append(f"+ {_fmt_num(coef)} {name}")
    return " ".join(parts)


def _wrap(body: str, width: int = 250) -> list[str]:
    """Split a constraint/objective body into LP lines: one leading space on
    the first line, three on continuations, within the LP line limit."""
    words = body.split(" ")
    lines: list[str] = []
    cur = " " + words[0]
    for w in words[1:]:
        if len(cur) + 1 + len(w) > width:
            lines.append(cur)
            cur = "   " + w
        else:
            cur += " " + w
    lines.append(cur)
    return lines


_SENSE = {"<=": "<=", ">=": ">=", "=": "="}


def _render_lp(objective: Objective, constraints: list[Constraint],
               variables: list[Variable], extra: Optional[Constraint] = None) -> str:
    lines = ["\\ LP model written by otssplan"]
    lines.append("Maximize" if objective.sense == "maximize" else "Minimize")
    lines.extend(_wrap(f"obj: {_fmt_terms(objective.terms)}" if objective.terms
                       else "obj: 0 dummy_zero"))
    lines.append("Subject To")
    last_family = None
    todo = list(constraints)
    if extra is not None:
        todo = [extra] + todo
    for c in todo:
        if c.family != last_family:
            note = FAMILY_NOTES.get(c.family, "")
            lines.append(f"\\ {c.family}: {note}" if note else f"\\ {c.family}")
            last_family = c.family
        lines.extend(_wrap(f"{c.name}: {_fmt_terms(c.terms)} {_SENSE[c.sense]} {_fmt_num(c.rhs)}"))
    lines.append("Bounds")
    need_dummy = not objective.terms or any(not c.terms for c in todo)
    if need_dummy:
        lines.append(" dummy_zero = 0")
    for v in variables:
        if v.kind == "continuous":
            lines.append(f" {_fmt_num(v.lb)} <= {v.name} <= {_fmt_num(v.ub)}")
    binaries = [v.name for v in variables if v.kind == "binary"]
    lines.append("Binary")
    for name in binaries:
        lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def emit_lp(model: MilpModel, destination: str | Path,
            phase1_value: Optional[float] = None) -> list[Path]:
    """Write the model as LP text; deterministic, byte-stable output.

    A single-objective model writes one file at `destination`. A two-phase
    model writes `<stem>.phase1.lp` and `<stem>.phase2.lp`; phase 2 pins
    the throughput to `phase1_value` (0 when not supplied) and minimizes
    resource usage.
    """
    destination = Path(destination)
    if not model.two_phase:
        text = _render_lp(model.objectives[0], model.constraints, model.variables)
        destination.write_text(text)
        return [destination]
    stem = destination
    if stem.suffix == ".lp":
        stem = stem.with_suffix("")
    p1 = stem.with_name(stem.name + ".phase1.lp")
    p2 = stem.with_name(stem.name + ".phase2.lp")
    p1.write_text(_render_lp(model.objectives[0], model.constraints, model.variables))
    fix = Constraint("fix_throughput", model.throughput_terms, ">=",
                     0.0 if phase1_value is None else float(phase1_value),
                     "fix")
    p2.write_text(_render_lp(model.objectives[1], model.constraints, model.variables,
                             extra=fix))
    return [p1, p2]


# --- assignment translation and evaluation --------------------------------


def assignment_from_schedule(instance: Instance, schedule) -> dict[str, float]:
    """Variable values induced by a schedule, including every auxiliary
    indicator, for checking against the built model."""
    values: dict[str, float] = {}
    links = instance.topology.link_keys()
    modes = range(instance.mode_count)
    T = instance.slot_count

    occupied: dict[str, set[tuple[Link, int, int]]] = {r.id: set() for r in instance.requests}
    for a in schedule.assignments:
        occupied[a.request_id] = set(a.cells())

    for r in instance.requests:
        accepted = schedule.assignment(r.id) is not None
        values[rho_name(r.id)] = 1.0 if accepted else 0.0
        cells = occupied[r.id]
        for link in links:
            for m in modes:
                for t in range(T):
                    values[lambda_name(r.id, link, m, t)] = 1.0 if (link, m, t) in cells else 0.0

    def lam(rid, link, m, t):
        if t < 0 or t >= T:
            return 0.0
        return values[lambda_name(rid, link, m, t)]

    for r in instance.requests:
        for link in links:
            for t in range(T):
                u = 1.0 if any(lam(r.id, link, m, t) for m in modes) else 0.0
                values[_u_name(r.id, link, t)] = u
            for m in modes:
                values[_w_name(r.id, link, m)] = (
                    1.0 if any(lam(r.id, link, m, t) for t in range(T)) else 0.0)
                for tb in range(T + 1):
                    a = lam(r.id, link, m, tb - 1)
                    b = lam(r.id, link, m, tb) if tb < T else 0.0
                    values[_cm_name(r.id, link, m, tb)] = 1.0 if a != b else 0.0
            for tb in range(T + 1):
                ua = values[_u_name(r.id, link, tb - 1)] if tb - 1 >= 0 else 0.0
                ub = values[_u_name(r.id, link, tb)] if tb < T else 0.0
                values[_ca_name(r.id, link, tb)] = 1.0 if ua != ub else 0.0
            values[_v_name(r.id, link)] = (
                1.0 if any((link, m, t) in occupied[r.id] for m in modes for t in range(T))
                else 0.0)

    rids = [r.id for r in instance.requests]
    for r1 in rids:
        for r2 in rids:
            if r1 == r2:
                continue
            for link in links:
                for m1 in modes:
                    for m2 in modes:
                        if m1 == m2:
                            continue
                        any_beta = 0.0
                        for t in range(T):
                            b = 1.0 if (lam(r1, link, m1, t) and lam(r2, link, m2, t)) else 0.0
                            values[beta_name(r1, r2, link, m1, m2, t)] = b
                            any_beta = max(any_beta, b)
                        values[theta_name(r1, r2, link, m1, m2)] = any_beta
    return values


def evaluate_constraints(model: MilpModel, values: dict[str, float],
                         tol: float = 1e-9) -> list[str]:
    """Names of constraints the assignment violates (missing vars read 0)."""
    violated = []
    for c in model.constraints:
        lhs = sum(coef * values.get(name, 0.0) for coef, name in c.terms)
        ok = (lhs <= c.rhs + tol if c.sense == "<="
              else lhs >= c.rhs - tol if c.sense == ">="
              else abs(lhs - c.rhs) <= tol)
        if not ok:
            violated.append(c.name)
    return violated
