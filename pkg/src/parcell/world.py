"""Simulation world: one lattice, its piles, groups, programs, and the
event-rate bookkeeping that the stochastic engine samples from.

All mutation goes through the helpers here so the rate table, stage queues,
and conservation ledger stay consistent.  A world is single-writer: exactly
one engine instance may mutate it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from parcell import chem, pile as pilemod
from parcell._core import RateTable, Xoshiro256StarStar
from parcell.chem import CLOSE, EXPORT, GIVE, NEUTRAL, OPEN, TAKE, Group, Program, Zipper
from parcell.pile import (CELL, DAUGHTER, MOTHER, SEPTUM, VACUOLE, Lattice,
                          Pile, neighbors4, permeability)


@dataclass
class RateConfig:
    d0: float = 1.0              # diffusion constant (site moves per unit time per unit inverse mass)
    beta: float = 0.1            # boundary-move rate per boundary site
    kappa: float = 1.0           # import rate per boundary site
    processor_rate: float = 1.0  # execution quanta per site stack per unit time
    redundant_exec_scale: float = 1.0  # slows work on extra gene copies; 1.0 = neutral

    def validate(self):
        for name in ("d0", "beta", "kappa", "processor_rate", "redundant_exec_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class SimClock:
    t: float = 0.0
    total_ops: int = 0
    events: int = 0


@dataclass
class GenerationRecord:
    pile_id: int
    daughter_pile_id: int
    generation: int
    t_end: float
    replication_time: float
    replication_ops: int
    genome_mass: int     # daughter roster atoms (programs + descriptions)
    pile_mass: int       # genome plus daughter cytosol
    gene_census: dict
    race_events: int


def _compartment_contact(p: Pile, from_key, to_key):
    """Shared-boundary length between two compartments and a deterministic
    landing site on the `to` side."""
    count = 0
    landing = None
    for s in sorted(p.comp_sites[to_key]):
        for nb in neighbors4(s):
            if p.comp_of.get(nb) == from_key:
                count += 1
                if landing is None:
                    landing = s
    return count, landing


def transport_channels(world, p: Pile, g: Group):
    """Cross-compartment transport open to a group, as (landing site,
    weight) pairs.  A permitted crossing is a single hop over the shared
    compartment boundary; its weight is the boundary's length, so transport
    rate scales with how far the interface is open."""
    role = p.comp_role[p.comp_of[g.site]]
    state = g.state
    out = []
    if state == OPEN and role == MOTHER and p.septum_site is not None:
        if permeability(OPEN, MOTHER, SEPTUM, p.septum_open):
            out.append((p.septum_site, p.septum_contact))
    elif state == CLOSE and role == SEPTUM and p.interface_site is not None:
        if permeability(CLOSE, SEPTUM, MOTHER, p.septum_open):
            out.append((p.interface_site, p.septum_contact))
    elif state == CLOSE and role == DAUGHTER and p.septum_site is not None:
        if permeability(CLOSE, DAUGHTER, SEPTUM, p.septum_open):
            out.append((p.septum_site, p.septum_contact))
    elif state == EXPORT and role == MOTHER and p.entry_site is not None:
        if permeability(EXPORT, MOTHER, DAUGHTER, p.septum_open):
            out.append((p.entry_site, p.septum_contact))
    elif state == GIVE and role == CELL:
        vkey = p.key_for_role(VACUOLE)
        if vkey is not None and permeability(GIVE, CELL, VACUOLE, p.septum_open):
            count, landing = _compartment_contact(p, p.key_for_role(CELL), vkey)
            if landing is not None:
                out.append((landing, count))
    elif state == TAKE and role == VACUOLE:
        ckey = p.key_for_role(CELL)
        if ckey is not None and permeability(TAKE, VACUOLE, CELL, p.septum_open):
            count, landing = _compartment_contact(p, p.key_for_role(VACUOLE), ckey)
            if landing is not None:
                out.append((landing, count))
    return out


@dataclass
class CellRuntime:
    pile_id: int
    kind: str = "parallel"        # parallel | sequential
    phase: str = "budding"        # budding | synthesizing | verifying | closing | fissioned
    cycle_start_t: float = 0.0
    cycle_start_ops: int = 0
    cycle_ops: int = 0
    generation: int = 0
    extra_copies: dict = field(default_factory=dict)  # kind -> intended copy count


class World:
    def __init__(self, width, height, seed, rates: RateConfig | None = None,
                 tag_alphabet=chem.DEFAULT_ALPHABET, cytosol_target=360,
                 reservoir_per_tag=20000):
        rates = rates or RateConfig()
        rates.validate()
        self.lattice = Lattice(width, height)
        self.rng = Xoshiro256StarStar(seed)
        self.seed = seed
        self.rates = rates
        self.tag_alphabet = tag_alphabet
        self.cytosol_target = cytosol_target
        self.tag_target = max(1, cytosol_target // tag_alphabet)

        self.piles = {}
        self.groups = {}
        self.programs = {}
        self.zippers = {}
        self.pile_groups = {}      # pile id -> set of group ids
        self.open_groups = {}      # pile id -> set of OPEN-state group ids
        self.stage_queues = {}     # (pile id, comp key, stage) -> set of zipper ids
        self.runtimes = {}
        self.records = []
        self.kind_tags = {}

        self.clock = SimClock()
        self.histogram = Counter()
        self.rejected = Counter()
        self.trace = None

        self.reservoir = Counter({t: reservoir_per_tag for t in range(tag_alphabet)})
        self.reservoir_total = reservoir_per_tag * tag_alphabet
        self.initial_mass = None

        self.table = RateTable(128)
        self.slots = {}
        self.slot_keys = {}

        # wired up by the cell layer to avoid an import cycle
        self.runnable_fn = None
        self.arrival_fn = None
        self.claim_priority_fn = None

        self._next_ids = {"pile": 0, "group": 0, "program": 0, "zipper": 0}
        self.force_full_refresh = False
        self.audit_hook = None

    # -- id allocation -------------------------------------------------------

    def new_id(self, what):
        v = self._next_ids[what]
        self._next_ids[what] = v + 1
        return v

    # -- rate slots ----------------------------------------------------------

    def _slot_set(self, key, rate):
        slot = self.slots.get(key)
        if slot is None:
            if rate == 0.0:
                return
            slot = self.table.alloc()
            self.slots[key] = slot
            self.slot_keys[slot] = key
            self.table.set(slot, rate)
            return
        if self.table.get(slot) != rate:
            self.table.set(slot, rate)

    def _slot_drop(self, key):
        slot = self.slots.pop(key, None)
        if slot is not None:
            self.slot_keys.pop(slot, None)
            self.table.free(slot)

    # -- mass ledger ---------------------------------------------------------

    def world_mass(self):
        total = self.reservoir_total
        for p in self.piles.values():
            total += p.mass_of_pools()
        for g in self.groups.values():
            total += g.mass
        return total

    def seal_mass(self):
        self.initial_mass = self.world_mass()

    # -- cytosol pools -------------------------------------------------------

    def pool_add(self, p: Pile, comp_key, tag, k=1):
        p.cytosol[comp_key][tag] += k
        p.pool_total[comp_key] += k

    def pool_take(self, p: Pile, comp_key, tag, k=1):
        c = p.cytosol[comp_key]
        if c[tag] < k:
            raise ValueError(f"pool lacks tag {tag}")
        c[tag] -= k
        if c[tag] == 0:
            del c[tag]
        p.pool_total[comp_key] -= k

    def reservoir_take(self, tag, k=1):
        if self.reservoir[tag] < k:
            return False
        self.reservoir[tag] -= k
        self.reservoir_total -= k
        return True

    def reservoir_add(self, tags):
        for tag in tags:
            self.reservoir[tag] += 1
        self.reservoir_total += len(tags)

    def deficient_tags(self, p: Pile, comp_key):
        c = p.cytosol[comp_key]
        return [t for t in range(self.tag_alphabet) if c[t] < self.tag_target]

    # -- groups --------------------------------------------------------------

    def spawn_group(self, p: Pile, site, items, state=NEUTRAL):
        g = Group(self.new_id("group"), items, state)
        g.site = site
        g.pile_id = p.id
        self.groups[g.id] = g
        self.pile_groups[p.id].add(g.id)
        p.stacks[site].append(g.id)
        for item in items:
            item.group_id = g.id
            if isinstance(item, Program):
                self.programs[item.id] = item
            else:
                self.zippers[item.id] = item
        if state == OPEN:
            self.open_groups[p.id].add(g.id)
        return g

    def destroy_group(self, g: Group):
        p = self.piles[g.pile_id]
        p.stacks[g.site].remove(g.id)
        self.pile_groups[p.id].discard(g.id)
        self.open_groups[p.id].discard(g.id)
        for item in g.items:
            if isinstance(item, Program):
                self.programs.pop(item.id, None)
                self._slot_drop(("x", item.id))
            else:
                self.zippers.pop(item.id, None)
        self._slot_drop(("d", g.id))
        del self.groups[g.id]

    def set_group_state(self, g: Group, state):
        if g.state == OPEN:
            self.open_groups[g.pile_id].discard(g.id)
        g.state = state
        if state == OPEN:
            self.open_groups[g.pile_id].add(g.id)

    def move_group(self, g: Group, target_site):
        p = self.piles[g.pile_id]
        from_key = p.comp_of[g.site]
        to_key = p.comp_of[target_site]
        p.stacks[g.site].remove(g.id)
        p.stacks[target_site].append(g.id)
        g.site = target_site
        if from_key != to_key and self.arrival_fn is not None:
            self.arrival_fn(self, g, p, from_key, to_key)

    def remove_item_from_group(self, g: Group, item):
        g.items.remove(item)
        item.group_id = None

    # -- stage queues ----------------------------------------------------------

    def queue_key(self, p: Pile, comp_key, stage):
        return (p.id, comp_key, stage)

    def enqueue_stage(self, p: Pile, comp_key, z: Zipper):
        self.stage_queues.setdefault(self.queue_key(p, comp_key, z.next_stage), set()).add(z.id)

    def dequeue_stage(self, p: Pile, comp_key, z: Zipper, stage=None):
        q = self.stage_queues.get(self.queue_key(p, comp_key, stage or z.next_stage))
        if q is not None:
            q.discard(z.id)

    def stage_candidates(self, p: Pile, comp_key, stage):
        return self.stage_queues.get((p.id, comp_key, stage), ())

    # -- pile creation / rate refresh -----------------------------------------

    def add_pile(self, p: Pile):
        self.piles[p.id] = p
        self.pile_groups.setdefault(p.id, set())
        self.open_groups.setdefault(p.id, set())

    def program_site(self, prog: Program):
        g = self.groups[prog.group_id]
        return self.piles[g.pile_id], g.site

    def refresh_pile(self, p: Pile):
        """Recompute every rate slot belonging to one pile."""
        rc = self.rates
        # execution: zero-sum processor sharing per site stack
        progs_by_site = {}
        for gid in self.pile_groups[p.id]:
            g = self.groups[gid]
            for item in g.items:
                if isinstance(item, Program):
                    progs_by_site.setdefault(g.site, []).append(item)
            ck = p.comp_of[g.site]
            walk = 0
            for nb in neighbors4(g.site):
                if p.comp_of.get(nb) == ck:
                    walk += 1
            weight = walk + sum(w for _, w in transport_channels(self, p, g))
            self._slot_set(("d", gid), rc.d0 / g.mass * weight)
        live = set()
        for site, plist in progs_by_site.items():
            runnable = [q for q in plist if self.runnable_fn(self, q)]
            cnt = len(runnable)
            for q in plist:
                live.add(q.id)
                if q in runnable:
                    scale = 1.0
                    z = self.zippers.get(q.bound_zipper) if q.bound_zipper is not None else None
                    if z is not None and z.copy_index > 0:
                        scale = rc.redundant_exec_scale
                    self._slot_set(("x", q.id), rc.processor_rate / cnt * scale)
                else:
                    self._slot_set(("x", q.id), 0.0)

        self._slot_set(("b", p.id), rc.beta * len(p.boundary))
        needy = set()
        for key, role in p.comp_role.items():
            if role == pilemod.SEPTUM:
                continue
            pool = p.cytosol[key]
            if any(pool[t] < self.tag_target for t in range(self.tag_alphabet)):
                needy.add(key)
        importable = 0
        if needy:
            for site in p.boundary:
                if p.comp_of[site] in needy:
                    importable += 1
        self._slot_set(("i", p.id), rc.kappa * importable)

    def refresh_all(self):
        for key in list(self.slots):
            what, ident = key
            stale = (
                (what == "x" and ident not in self.programs)
                or (what == "d" and ident not in self.groups)
                or (what in ("b", "i") and ident not in self.piles)
            )
            if stale:
                self._slot_drop(key)
        for p in self.piles.values():
            self.refresh_pile(p)

    # -- snapshots -------------------------------------------------------------

    def snapshot(self):
        return {
            "t": self.clock.t,
            "total_ops": self.clock.total_ops,
            "events": self.clock.events,
            "mass": self.world_mass(),
            "reservoir_total": self.reservoir_total,
            "piles": pilemod.snapshot_json(self.lattice, self.piles),
            "groups": {str(g.id): chem.group_to_json(g) for g in
                       sorted(self.groups.values(), key=lambda g: g.id)},
            "records": len(self.records),
        }
