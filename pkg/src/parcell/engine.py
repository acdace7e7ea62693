"""Asynchronous event engine: exponential-rate sampling over execution
quanta, group diffusion, boundary moves, and reservoir imports.

One event per step: dt = -ln(u)/R with R the total rate, event chosen by
cumulative inversion.  Sampled moves that turn out to violate permeability
or connectivity consume their time step and change nothing (rejection is a
normal outcome and keeps the clock honest).  Identical (seed, config,
initial world) gives bit-identical runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from parcell import cell as cellmod
from parcell.chem import CLOSE, EXPORT, OPEN
from parcell.pile import (DAUGHTER, MOTHER, SEPTUM, ORTHO, neighbors4,
                          permeability, try_boundary_move)
from parcell.world import World

QUIESCENT = "quiescent"


@dataclass
class RunSummary:
    elapsed: float
    total_ops: int
    events: int
    histogram: dict
    rejected: dict
    reason: str


def event_rates(world: World):
    """Full rate table as an ordered mapping (reference computation; the
    engine's incremental table must always agree with this)."""
    rates = {}
    rc = world.rates
    for pid in sorted(world.piles):
        p = world.piles[pid]
        progs_by_site = {}
        for gid in sorted(world.pile_groups[pid]):
            g = world.groups[gid]
            for item in g.items:
                if hasattr(item, "ops_executed"):
                    progs_by_site.setdefault(g.site, []).append(item)
        for site in sorted(progs_by_site):
            plist = progs_by_site[site]
            runnable = [q for q in plist if world.runnable_fn(world, q)]
            for q in plist:
                if q in runnable:
                    scale = 1.0
                    z = world.zippers.get(q.bound_zipper) if q.bound_zipper is not None else None
                    if z is not None and z.copy_index > 0:
                        scale = rc.redundant_exec_scale
                    rates[("x", q.id)] = rc.processor_rate / len(runnable) * scale
                else:
                    rates[("x", q.id)] = 0.0
        for gid in sorted(world.pile_groups[pid]):
            g = world.groups[gid]
            rates[("d", gid)] = rc.d0 / g.mass * p.neighbors_in_pile.get(g.site, 0)
        rates[("b", pid)] = rc.beta * len(p.boundary)
        importable = 0
        for key, count in p.compartment_boundary_counts(world.lattice).items():
            if p.comp_role[key] == SEPTUM:
                continue
            if any(p.cytosol[key][t] < world.tag_target for t in range(world.tag_alphabet)):
                importable += count
        rates[("i", pid)] = rc.kappa * importable
    return rates


def sample_next_event(rates, rng):
    """Reference sampler over an ordered rate mapping.

    Returns (dt, key) or None when every rate is zero (quiescent).  dt is
    -ln(u)/R with u uniform on (0, 1]; the event is chosen by cumulative
    inversion over the mapping's iteration order.
    """
    total = 0.0
    for r in rates.values():
        total += r
    if total <= 0.0:
        return None
    dt = -math.log(rng.random_open_closed()) / total
    target = rng.random() * total
    acc = 0.0
    chosen = None
    for key, r in rates.items():
        if r <= 0.0:
            continue
        acc += r
        chosen = key
        if target < acc:
            break
    return dt, chosen


def _drift_target(world, g, p):
    """Site that state-driven transport steers toward, or None for a
    plain random walk."""
    if g.state == OPEN:
        return p.septum_site
    if g.state == CLOSE:
        if g.site == p.septum_site:
            return p.interface_site
        return p.septum_site
    if g.state == EXPORT:
        return p.entry_site
    return None


def _apply_diffuse(world, gid, rng):
    g = world.groups.get(gid)
    if g is None:
        return ("diffuse", gid, None, set(), False)
    p = world.piles[g.pile_id]
    candidates = [nb for nb in neighbors4(g.site) if nb in p.footprint]
    if not candidates:
        return ("diffuse", gid, g.site, set(), False)
    target_site = _drift_target(world, g, p)
    if target_site is not None:
        best = min(abs(c[0] - target_site[0]) + abs(c[1] - target_site[1])
                   for c in candidates)
        tied = [c for c in candidates
                if abs(c[0] - target_site[0]) + abs(c[1] - target_site[1]) == best]
        dest = tied[rng.randrange(len(tied))]
    else:
        dest = candidates[rng.randrange(len(candidates))]

    from_key = p.comp_of[g.site]
    to_key = p.comp_of[dest]
    if from_key == to_key:
        world.move_group(g, dest)
        return ("diffuse", gid, dest, {p.id}, True)

    from_role = p.comp_role[from_key]
    to_role = p.comp_role[to_key]
    # the shared boundary of the fission complex is topological: a permitted
    # crossing lands on the compartment's interface site
    if g.state == OPEN and from_role == MOTHER and to_role in (DAUGHTER, SEPTUM):
        world.move_group(g, p.septum_site)
        return ("diffuse", gid, p.septum_site, {p.id}, True)
    if g.state == CLOSE and from_role == SEPTUM and p.interface_site is not None:
        world.move_group(g, p.interface_site)
        return ("diffuse", gid, p.interface_site, {p.id}, True)
    if g.state == CLOSE and from_role == DAUGHTER and to_role == SEPTUM:
        world.move_group(g, p.septum_site)
        return ("diffuse", gid, p.septum_site, {p.id}, True)
    if g.state == EXPORT and from_role == MOTHER and to_role == SEPTUM:
        return ("diffuse", gid, g.site, set(), False)
    try:
        allowed = permeability(g.state, from_role, to_role, p.septum_open)
    except ValueError:
        allowed = False
    if allowed:
        world.move_group(g, dest)
        return ("diffuse", gid, dest, {p.id}, True)
    return ("diffuse", gid, g.site, set(), False)


def _apply_boundary(world, pid, rng):
    p = world.piles.get(pid)
    if p is None or not p.boundary:
        return ("boundary", pid, None, set(), False)
    sites = p.boundary_list()
    site = sites[rng.randrange(len(sites))]
    direction = ORTHO[rng.randrange(4)]
    result = try_boundary_move(world.lattice, world.piles, p, site, direction)
    if not result:
        return ("boundary", pid, site, set(), False)
    if result[0] == "retracted":
        _, _, relocate_to, moved = result
        for gid in moved:
            world.groups[gid].site = relocate_to
    return ("boundary", pid, site, {pid}, True)


def _apply_import(world, pid, rng):
    p = world.piles.get(pid)
    if p is None:
        return ("import", pid, None, set(), False)
    needy = set()
    for key, role in p.comp_role.items():
        if role == SEPTUM:
            continue
        pool = p.cytosol[key]
        if any(pool[t] < world.tag_target for t in range(world.tag_alphabet)):
            needy.add(key)
    eligible = [s for s in p.boundary_list() if p.comp_of[s] in needy]
    if not eligible:
        return ("import", pid, None, set(), False)
    site = eligible[rng.randrange(len(eligible))]
    key = p.comp_of[site]
    pool = p.cytosol[key]
    deficits = []
    for tag in range(world.tag_alphabet):
        d = world.tag_target - pool[tag]
        if d > 0:
            deficits.append((-d, tag))
    deficits.sort()
    for _, tag in deficits:
        if world.reservoir_take(tag):
            world.pool_add(p, key, tag)
            return ("import", pid, site, {pid}, True)
    return ("import", pid, site, set(), False)


def _apply_execute(world, prog_id, rng):
    prog = world.programs.get(prog_id)
    if prog is None:
        return ("execute", prog_id, None, set(), False)
    g = world.groups[prog.group_id]
    site = g.site
    p = world.piles[g.pile_id]
    if not world.runnable_fn(world, prog):
        return ("execute", prog_id, site, set(), False)
    applied, dirty = cellmod.execute_quantum(world, prog)
    if applied:
        world.clock.total_ops += 1
        rt = world.runtimes.get(p.id)
        if rt is not None:
            rt.cycle_ops += 1
    return ("execute", prog_id, site, dirty, applied)


_HANDLERS = {"x": _apply_execute, "d": _apply_diffuse,
             "b": _apply_boundary, "i": _apply_import}
_NAMES = {"x": "execute", "d": "diffuse", "b": "boundary", "i": "import"}


def step(world: World):
    """Apply exactly one sampled event; returns its record, or None when the
    world is quiescent (no positive rates)."""
    total = world.table.total()
    if total <= 0.0:
        return None
    rng = world.rng
    dt = -math.log(rng.random_open_closed()) / total
    world.clock.t += dt
    slot = world.table.pick(rng.random())
    key = world.slot_keys.get(slot)
    if key is None:
        world.clock.events += 1
        world.rejected["dangling"] += 1
        return {"t": world.clock.t, "kind": "noop", "subject": None, "site": None}
    name, subject, site, dirty, applied = _HANDLERS[key[0]](world, key[1], rng)
    if world.force_full_refresh:
        world.refresh_all()
    else:
        for pid in dirty:
            p = world.piles.get(pid)
            if p is not None:
                world.refresh_pile(p)
    world.clock.events += 1
    world.histogram[name] += 1
    if not applied:
        world.rejected[name] += 1
    record = {"t": world.clock.t, "kind": name, "subject": subject,
              "site": list(site) if site else None}
    if world.audit_hook is not None:
        world.audit_hook(world, record)
    return record


def run_until(world: World, t_max=None, max_events=None, stop=None, trace=None):
    """Run until a predicate holds, a time/event bound is hit, or the world
    goes quiescent.  Returns elapsed time, executed operations, and the
    event-count histogram."""
    t0 = world.clock.t
    ops0 = world.clock.total_ops
    ev0 = world.clock.events
    reason = None
    while True:
        if stop is not None and stop(world):
            reason = "stop"
            break
        if t_max is not None and world.clock.t >= t_max:
            reason = "t_max"
            break
        if max_events is not None and world.clock.events - ev0 >= max_events:
            reason = "max_events"
            break
        record = step(world)
        if record is None:
            reason = QUIESCENT
            break
        if trace is not None:
            trace.write(json.dumps(record) + "\n")
    return RunSummary(
        elapsed=world.clock.t - t0,
        total_ops=world.clock.total_ops - ops0,
        events=world.clock.events - ev0,
        histogram=dict(world.histogram),
        rejected=dict(world.rejected),
        reason=reason,
    )
