"""Abstract replication systems: subproblem generation and exact scheduling.

A self-replicating system variant expands into a set of unit-duration
subproblems (translate / copy / export acts on description instances),
a mutex constraint per shared resource (each program instance and each
description instance is usable by at most one subproblem per step), and
optional ordering dependencies.  The solver computes minimum-makespan
schedules either exhaustively (branch and bound, provably optimal) or
greedily (deterministic list scheduling), and speedups as exact rationals
against a configurable sequential baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

EXHAUSTIVE_LIMIT = 24

VARIANTS = (
    "monolithic",
    "split_description",
    "redundant",
    "pipelined",
    "translator_copier_only",
    "organism",
)

_RULE_LETTER = {"translate": "a", "copy": "b", "export": "e"}
_RULE_PROGRAM = {"translate": "A", "copy": "B", "export": "E"}


class CapacityError(ValueError):
    """Exhaustive search refused: subproblem count exceeds the search bound."""


@dataclass(frozen=True)
class SystemSpec:
    variant: str
    n: int = 1
    m: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")


@dataclass(frozen=True)
class Subproblem:
    id: str
    rule: str                 # translate | copy | export
    program_instance: str     # e.g. "A0", "B1", "E0"
    description_instance: str # e.g. "a1", "c"

    @property
    def resources(self):
        return (self.program_instance, f"phi({self.description_instance})")


@dataclass
class ConstraintSet:
    mutex_resources: set = field(default_factory=set)
    dependencies: set = field(default_factory=set)  # pairs (first_id, later_id)


@dataclass
class Schedule:
    steps: list  # list of lists of subproblem ids

    @property
    def makespan(self):
        return len(self.steps)


@dataclass
class ValidationReport:
    ok: bool
    violations: list


def _descriptions(spec: SystemSpec):
    v, n = spec.variant, spec.n
    if v == "monolithic":
        return ["g"]
    if v == "translator_copier_only":
        return [f"a{j}" for j in range(n)] + [f"b{j}" for j in range(n)]
    # split_description behaves as redundant with n = 1
    n_eff = 1 if v == "split_description" else n
    return ([f"a{j}" for j in range(n_eff)]
            + [f"b{j}" for j in range(n_eff)]
            + ["c", "d"])


def _instance_counts(spec: SystemSpec):
    if spec.variant == "split_description":
        return {"translate": 1, "copy": 1}
    counts = {"translate": spec.n, "copy": spec.n}
    if spec.variant == "organism":
        counts["export"] = spec.m
    return counts


def generate_subproblems(spec: SystemSpec):
    """Expand a system variant into (subproblems, constraints).

    Description instances are assigned to program instances round-robin in
    description order, so each instance carries a balanced share.  With
    n = 1 this makes redundant and split_description generate the same set.
    """
    descs = _descriptions(spec)
    counts = _instance_counts(spec)
    subs = []
    by_rule_desc = {}
    for rule in ("translate", "copy", "export"):
        if rule not in counts:
            continue
        k = counts[rule]
        letter = _RULE_LETTER[rule]
        prog = _RULE_PROGRAM[rule]
        for j, desc in enumerate(descs):
            inst = j % k
            sub = Subproblem(
                id=f"{letter}{inst}:{desc}",
                rule=rule,
                program_instance=f"{prog}{inst}",
                description_instance=desc,
            )
            subs.append(sub)
            by_rule_desc[(rule, desc)] = sub

    cs = ConstraintSet()
    for sub in subs:
        cs.mutex_resources.update(sub.resources)
    if spec.variant == "pipelined":
        for desc in descs:
            cs.dependencies.add((by_rule_desc[("translate", desc)].id,
                                 by_rule_desc[("copy", desc)].id))
    if spec.variant == "organism":
        for desc in descs:
            e = by_rule_desc[("export", desc)].id
            cs.dependencies.add((by_rule_desc[("translate", desc)].id, e))
            cs.dependencies.add((by_rule_desc[("copy", desc)].id, e))
    subs.sort(key=lambda s: s.id)
    return subs, cs


def pairwise_mutex_conflicts(subproblems):
    """Number of unordered subproblem pairs sharing at least one resource."""
    count = 0
    for i, a in enumerate(subproblems):
        ra = set(a.resources)
        for b in subproblems[i + 1:]:
            if ra.intersection(b.resources):
                count += 1
    return count


def sequential_makespan(spec: SystemSpec):
    """Steps taken by the one-subproblem-per-step strategy: the count."""
    subs, _ = generate_subproblems(spec)
    return len(subs)


def validate_schedule(schedule: Schedule, spec: SystemSpec) -> ValidationReport:
    subs, cs = generate_subproblems(spec)
    by_id = {s.id: s for s in subs}
    violations = []

    seen = {}
    for step_idx, step in enumerate(schedule.steps):
        for sid in step:
            if sid not in by_id:
                raise ValueError(f"unknown subproblem identifier {sid!r}")
            if sid in seen:
                violations.append(f"duplicate: {sid} in steps {seen[sid] + 1} and {step_idx + 1}")
            else:
                seen[sid] = step_idx
    for sid in by_id:
        if sid not in seen:
            violations.append(f"missing: {sid}")

    for step_idx, step in enumerate(schedule.steps):
        used = {}
        for sid in step:
            for res in by_id[sid].resources:
                if res in used:
                    violations.append(
                        f"mutex: step {step_idx + 1} uses {res} for both {used[res]} and {sid}")
                else:
                    used[res] = sid

    for first, later in sorted(cs.dependencies):
        if first in seen and later in seen and seen[later] <= seen[first]:
            violations.append(f"dependency: {later} scheduled at or before {first}")

    return ValidationReport(ok=not violations, violations=violations)


def _prepare(subs, cs):
    ids = [s.id for s in subs]
    index = {sid: i for i, sid in enumerate(ids)}
    k = len(subs)
    conflict = [0] * k
    for i in range(k):
        ri = set(subs[i].resources)
        for j in range(i + 1, k):
            if ri.intersection(subs[j].resources):
                conflict[i] |= 1 << j
                conflict[j] |= 1 << i
    preds = [0] * k
    succs = [[] for _ in range(k)]
    for first, later in cs.dependencies:
        preds[index[later]] |= 1 << index[first]
        succs[index[first]].append(index[later])
    return ids, conflict, preds, succs


def _chain_bound(mask, preds, succs, k):
    # longest dependency chain entirely inside `mask`, in steps
    depth = [0] * k
    best = 0
    for i in range(k):  # indices are topologically safe: deps only a->b, a->e, b->e
        if not (mask >> i) & 1:
            continue
        d = 1
        for j in range(k):
            if (mask >> j) & 1 and (preds[i] >> j) & 1 and depth[j] + 1 > d:
                d = depth[j] + 1
        depth[i] = d
        if d > best:
            best = d
    return best


def _resource_bound(mask, subs):
    load = {}
    for i, sub in enumerate(subs):
        if (mask >> i) & 1:
            for res in sub.resources:
                load[res] = load.get(res, 0) + 1
    return max(load.values(), default=0)


def _maximal_sets(eligible, conflict):
    """All maximal conflict-free subsets of the eligible mask."""
    out = []

    def rec(chosen, candidates, excluded):
        if not candidates:
            m = excluded
            while m:
                b = m & (-m)
                i = b.bit_length() - 1
                m ^= b
                if not conflict[i] & chosen:
                    return  # an excluded task would still fit: not maximal
            out.append(chosen)
            return
        b = candidates & (-candidates)
        i = b.bit_length() - 1
        rec(chosen | b, candidates & ~b & ~conflict[i], excluded & ~conflict[i])
        rec(chosen, candidates & ~b, excluded | b)

    rec(0, eligible, 0)
    return out


def min_makespan(spec: SystemSpec, mode: str = "exhaustive"):
    """Minimum-step schedule for a variant.

    exhaustive: branch and bound over maximal compatible step sets with
    resource-load and dependency-chain lower bounds; provably optimal.
    greedy: deterministic list scheduling (lexicographic id order), valid
    but possibly longer.
    """
    subs, cs = generate_subproblems(spec)
    if mode == "greedy":
        return _greedy(subs, cs)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    if len(subs) > EXHAUSTIVE_LIMIT:
        raise CapacityError(
            f"{len(subs)} subproblems exceed the exhaustive search bound of {EXHAUSTIVE_LIMIT}")

    ids, conflict, preds, succs = _prepare(subs, cs)
    k = len(subs)
    full = (1 << k) - 1

    greedy_sched, greedy_span = _greedy(subs, cs)
    best = {"span": greedy_span, "steps": [list(s) for s in greedy_sched.steps]}
    visited = {}

    def rec(remaining, done, steps_used, trail):
        if not remaining:
            if steps_used < best["span"]:
                best["span"] = steps_used
                best["steps"] = [sorted(ids[i] for i in step) for step in trail]
            return
        lb = max(_resource_bound(remaining, subs),
                 _chain_bound(remaining, preds, succs, k))
        if steps_used + lb >= best["span"]:
            return
        prev = visited.get(remaining)
        if prev is not None and prev <= steps_used:
            return
        visited[remaining] = steps_used
        eligible = 0
        for i in range(k):
            if (remaining >> i) & 1 and (preds[i] & ~done) == 0:
                eligible |= 1 << i
        if not eligible:
            return  # dependency-blocked with nothing runnable: dead branch
        for step_mask in _maximal_sets(eligible, conflict):
            members = []
            m = step_mask
            while m:
                b = m & (-m)
                members.append(b.bit_length() - 1)
                m ^= b
            trail.append(members)
            rec(remaining & ~step_mask, done | step_mask, steps_used + 1, trail)
            trail.pop()

    rec(full, 0, 0, [])
    return Schedule(steps=best["steps"]), best["span"]


def _greedy(subs, cs):
    ids, conflict, preds, _ = _prepare(subs, cs)
    k = len(subs)
    remaining = set(range(k))
    done = 0
    steps = []
    while remaining:
        chosen_mask = 0
        step = []
        for i in sorted(remaining, key=lambda i: ids[i]):
            if (preds[i] & ~done) != 0:
                continue
            if conflict[i] & chosen_mask:
                continue
            chosen_mask |= 1 << i
            step.append(ids[i])
        if not step:
            raise RuntimeError("greedy scheduler made no progress (cyclic dependencies?)")
        steps.append(step)
        remaining = {i for i in remaining if not (chosen_mask >> i) & 1}
        done |= chosen_mask
    return Schedule(steps=steps), len(steps)


def speedup(spec: SystemSpec, baseline: SystemSpec, mode: str = "exhaustive") -> Fraction:
    """sequential_makespan(baseline) / min_makespan(spec), as an exact rational."""
    _, span = min_makespan(spec, mode=mode)
    return Fraction(sequential_makespan(baseline), span)
