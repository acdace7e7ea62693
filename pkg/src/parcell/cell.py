"""The artificial cell: genome setup, the six-stage synthesis pipeline,
budding, viability verification, septum closure, and fission accounting.

Stage machines, one per program kind:

  A  claims a ready description and copies its single-atom front (2 quanta)
  B  forward traversal, one consuming step per quantum
  C,D constant-cost conformation advances (2 quanta each)
  E  reverse traversal finishing both copies, one consuming step per quantum
  F  bundles the copies into an export group and flags the mother zipper
     toward the septum (2 quanta)
  X  buds a daughter footprint, moves over, smashes itself into cytosol
  Y  non-executable
  Z  consumes the daughter's proof-of-viability pair, migrates to the
     septum, returns stashed zippers, closes and ejects
  S  the combined single-method cell: same work, strictly one action at a
     time

A cell that has spent its budding program rebuilds one through a
translate-only pass on the X description (the surplus description copy is
recycled into cytosol so gene counts stay exact); an attached daughter does
the same for Z after its closer departs.  Both passes use the ordinary
pipeline in `solo` mode.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from parcell import chem
from parcell import pile as pilemod
from parcell.chem import (CELL_KINDS, CONSUMED, EXPORT, FORWARD_COMPLETE,
                          NEUTRAL, OPEN, PROGRAM_LENGTHS, REVERSE_COMPLETE,
                          STALLED, Program, SequencingError, Zipper)
from parcell.pile import CELL, DAUGHTER, MOTHER, SEPTUM, Pile
from parcell.world import CellRuntime, GenerationRecord, RateConfig, World

X_BUDGET = PROGRAM_LENGTHS["X"]  # atoms a budding program leaves as daughter cytosol


@dataclass
class GenomeConfig:
    n_b: int = 1
    n_e: int = 1
    tag_alphabet: int = chem.DEFAULT_ALPHABET
    cytosol_target: int = 360
    initial_side: int = 8
    lattice_width: int = 96
    lattice_height: int = 96
    reservoir_per_tag: int = 20000

    def __post_init__(self):
        if self.n_b < 1 or self.n_e < 1:
            raise ValueError("n_b and n_e must be >= 1")


def genome_mass(config: GenomeConfig):
    """Roster atoms of a fresh cell: one program + one description of each
    kind, extra copies of the B and E genes."""
    base = 2 * sum(PROGRAM_LENGTHS[k] for k in CELL_KINDS)
    return (base
            + 2 * PROGRAM_LENGTHS["B"] * (config.n_b - 1)
            + 2 * PROGRAM_LENGTHS["E"] * (config.n_e - 1))


# ---------------------------------------------------------------------------
# construction


def _wire(world: World):
    world.runnable_fn = is_runnable
    world.arrival_fn = on_group_arrival


def _roster(config: GenomeConfig):
    roster = []
    for kind in CELL_KINDS:
        copies = {"B": config.n_b, "E": config.n_e}.get(kind, 1)
        for i in range(copies):
            roster.append((kind, i))
    return roster


def init_mother(config: GenomeConfig, seed, rates: RateConfig | None = None) -> World:
    """Fresh world holding one parallel cell with its full genome and a
    stocked cytosol."""
    world = World(config.lattice_width, config.lattice_height, seed,
                  rates=rates, tag_alphabet=config.tag_alphabet,
                  cytosol_target=config.cytosol_target,
                  reservoir_per_tag=config.reservoir_per_tag)
    _wire(world)
    for kind in CELL_KINDS:
        world.kind_tags[kind] = tuple(
            world.rng.randrange(config.tag_alphabet)
            for _ in range(PROGRAM_LENGTHS[kind]))

    p = Pile(world.new_id("pile"))
    comp = p.new_compartment(CELL)
    world.add_pile(p)
    side = config.initial_side
    x0 = (config.lattice_width - side) // 2
    y0 = (config.lattice_height - side) // 2
    for x in range(x0, x0 + side):
        for y in range(y0, y0 + side):
            pilemod._add_site(world.lattice, world.piles, p, (x, y), comp)
    p.area_cap = side * side

    sites = sorted(p.footprint)
    stride = max(1, len(sites) // (2 * len(_roster(config)) + 1))
    place = 0

    def next_site():
        nonlocal place
        s = sites[(place * stride) % len(sites)]
        place += 1
        return s

    for kind, copy_index in _roster(config):
        prog = Program(world.new_id("program"), kind, world.kind_tags[kind])
        world.spawn_group(p, next_site(), [prog])
    for kind, copy_index in _roster(config):
        z = Zipper(world.new_id("zipper"), kind, world.kind_tags[kind])
        z.copy_index = copy_index
        world.spawn_group(p, next_site(), [z])
        world.enqueue_stage(p, comp, z)

    per_tag = config.cytosol_target // config.tag_alphabet
    for tag in range(config.tag_alphabet):
        world.pool_add(p, comp, tag, per_tag)

    world.runtimes[p.id] = CellRuntime(
        pile_id=p.id, kind="parallel",
        extra_copies={"B": config.n_b, "E": config.n_e})
    world.seal_mass()
    world.refresh_all()
    return world


def build_sequential_cell(config: GenomeConfig, seed, rates: RateConfig | None = None) -> World:
    """World holding the combined single-method cell: one group with one
    program and its description, so synthesis never runs two actions at
    once."""
    world = World(config.lattice_width, config.lattice_height, seed,
                  rates=rates, tag_alphabet=config.tag_alphabet,
                  cytosol_target=config.cytosol_target,
                  reservoir_per_tag=config.reservoir_per_tag)
    _wire(world)
    world.kind_tags["S"] = tuple(
        world.rng.randrange(config.tag_alphabet)
        for _ in range(PROGRAM_LENGTHS["S"]))

    p = Pile(world.new_id("pile"))
    comp = p.new_compartment(CELL)
    world.add_pile(p)
    side = config.initial_side
    x0 = (config.lattice_width - side) // 2
    y0 = (config.lattice_height - side) // 2
    for x in range(x0, x0 + side):
        for y in range(y0, y0 + side):
            pilemod._add_site(world.lattice, world.piles, p, (x, y), comp)
    p.area_cap = side * side

    prog = Program(world.new_id("program"), "S", world.kind_tags["S"])
    prog.phase = "bud"
    z = Zipper(world.new_id("zipper"), "S", world.kind_tags["S"])
    center = sorted(p.footprint)[len(p.footprint) // 2]
    world.spawn_group(p, center, [prog, z])

    per_tag = config.cytosol_target // config.tag_alphabet
    for tag in range(config.tag_alphabet):
        world.pool_add(p, comp, tag, per_tag)

    world.runtimes[p.id] = CellRuntime(pile_id=p.id, kind="sequential",
                                       extra_copies={"B": 1, "E": 1})
    world.seal_mass()
    world.refresh_all()
    return world


# ---------------------------------------------------------------------------
# shared queries


def _locate(world: World, prog: Program):
    g = world.groups[prog.group_id]
    p = world.piles[g.pile_id]
    return p, g, p.comp_of[g.site]


def _has_solo_program(world, p: Pile, kind, roles):
    for gid in world.pile_groups[p.id]:
        g = world.groups[gid]
        if g.state == EXPORT:
            continue
        if p.comp_role[p.comp_of[g.site]] not in roles:
            continue
        for item in g.items:
            if isinstance(item, Program) and item.kind == kind:
                return True
    return False


def _solo_eligible(world, p: Pile, comp_role, z: Zipper):
    if z.kind == "X":
        return (comp_role == CELL and p.septum_site is None
                and not _has_solo_program(world, p, "X", (CELL,)))
    if z.kind == "Z":
        return (comp_role == DAUGHTER
                and not _has_solo_program(world, p, "Z", (DAUGHTER,)))
    return False


def _claimable(world, p: Pile, comp_key, z: Zipper, stage):
    if z.worker is not None or z.parked:
        return False
    g = world.groups[z.group_id]
    if g.state != NEUTRAL:
        return False
    role = p.comp_role[comp_key]
    if role == DAUGHTER and stage == "A":
        # an attached daughter only proves viability (Y) and rebuilds its
        # departed closer (Z, translate-only)
        if z.kind == "Y":
            return True
        return _solo_eligible(world, p, role, z)
    return True


def _claim_key(world, p, comp_role, z, stage):
    solo = 0 if (stage == "A" and _solo_eligible(world, p, comp_role, z)) else 1
    dummy_last = 1 if z.kind == "Y" else 0
    return (solo, dummy_last, -z.length, z.id)


def _find_claim(world, prog: Program):
    p, g, comp_key = _locate(world, prog)
    stage = prog.kind
    role = p.comp_role[comp_key]
    best = None
    best_key = None
    for zid in world.stage_candidates(p, comp_key, stage):
        z = world.zippers[zid]
        if not _claimable(world, p, comp_key, z, stage):
            continue
        key = _claim_key(world, p, role, z, stage)
        if best_key is None or key < best_key:
            best, best_key = z, key
    return best


def _pool(world, p: Pile, comp_key):
    return p.cytosol[comp_key]


def _export_y_pair(world, p: Pile):
    dkey = p.key_for_role(DAUGHTER)
    if dkey is None:
        return None
    for gid in sorted(world.pile_groups[p.id]):
        g = world.groups[gid]
        if g.state == EXPORT and p.comp_of.get(g.site) == dkey:
            if any(item.kind == "Y" for item in g.items):
                return g
    return None


def daughter_complement_ok(world, p: Pile):
    """Viability: the attached daughter holds at least one program and one
    description of every cell kind."""
    dkey = p.key_for_role(DAUGHTER)
    if dkey is None:
        return False
    progs = Counter()
    descs = Counter()
    for gid in world.pile_groups[p.id]:
        g = world.groups[gid]
        if p.comp_of.get(g.site) != dkey:
            continue
        for item in g.items:
            if isinstance(item, Program):
                progs[item.kind] += 1
            else:
                descs[item.kind] += 1
    return all(progs[k] >= 1 and descs[k] >= 1 for k in CELL_KINDS)


def gene_census(world, p: Pile, comp_role=None):
    """kind -> (complete gene count, in-flight count) over a pile, or over
    one compartment role of it."""
    progs = Counter()
    descs = Counter()
    partial = Counter()
    for gid in world.pile_groups[p.id]:
        g = world.groups[gid]
        if comp_role is not None and p.comp_role[p.comp_of[g.site]] != comp_role:
            continue
        for item in g.items:
            if isinstance(item, Program):
                progs[item.kind] += 1
            else:
                descs[item.kind] += 1
                if item.daughter_front or item.daughter_desc or item.program_tags:
                    partial[item.kind] += 1
    out = {}
    for kind in set(progs) | set(descs):
        complete = min(progs[kind], descs[kind])
        in_flight = (progs[kind] - complete) + (descs[kind] - complete) + partial[kind]
        out[kind] = (complete, in_flight)
    return out


def check_fission_complete(world, after_index=0):
    """Latest generation record past `after_index`, or None (not yet)."""
    if len(world.records) > after_index:
        return world.records[-1]
    return None


# ---------------------------------------------------------------------------
# runnability


def is_runnable(world, prog: Program):
    kind = prog.kind
    if kind == "Y":
        return False
    if kind in ("A", "B", "C", "D", "E", "F"):
        return _pipeline_runnable(world, prog)
    if kind == "X":
        return _x_runnable(world, prog)
    if kind == "Z":
        return _z_runnable(world, prog)
    if kind == "S":
        return _seq_runnable(world, prog)
    return False


def _pipeline_runnable(world, prog):
    p, g, comp_key = _locate(world, prog)
    if prog.bound_zipper is None:
        return _find_claim(world, prog) is not None
    z = world.zippers[prog.bound_zipper]
    pool = _pool(world, p, comp_key)
    kind = prog.kind
    if kind == "A":
        return prog.phase != "consume" or pool[z.tags[0]] > 0
    if kind == "B":
        return pool[z.focus] > 0
    if kind == "E":
        return pool[chem.reverse_need(z)] > 0
    return True  # C, D, F have no material preconditions


def _x_runnable(world, prog):
    p, g, comp_key = _locate(world, prog)
    if prog.phase == "smash":
        return True
    return p.comp_role[comp_key] == CELL and p.septum_site is None


def _z_runnable(world, prog):
    p, g, comp_key = _locate(world, prog)
    role = p.comp_role[comp_key]
    phase = prog.phase
    if phase in (None, "wait_trigger"):
        return role == DAUGHTER and _export_y_pair(world, p) is not None
    if phase == "go_septum":
        return True
    if phase == "to_septum":
        if g.site != p.septum_site:
            return False
        if _septum_open_groups(world, p):
            return True
        return _close_conditions(world, p, g)
    return False


def _septum_open_groups(world, p: Pile):
    if p.septum_site is None:
        return []
    return sorted(gid for gid in p.stacks.get(p.septum_site, ())
                  if world.groups[gid].state == OPEN)


def _close_conditions(world, p: Pile, zgroup):
    stack = p.stacks.get(p.septum_site, [])
    if [gid for gid in stack if gid != zgroup.id]:
        return False
    mkey = p.key_for_role(MOTHER)
    for gid in world.open_groups[p.id]:
        g = world.groups[gid]
        if p.comp_of.get(g.site) == mkey:
            return False
    return daughter_complement_ok(world, p)


def _seq_runnable(world, prog):
    p, g, comp_key = _locate(world, prog)
    role = p.comp_role[comp_key]
    phase = prog.phase
    if role == DAUGHTER:
        return False  # a delivered copy idles until fission
    if phase == "bud":
        return p.septum_site is None
    if phase == "pipeline":
        z = _seq_zipper(world, p)
        if z is None:
            return False
        pool = _pool(world, p, p.comp_of[world.groups[z.group_id].site])
        if z.conformation == "ready":
            return prog.mode != "consume" or pool[z.tags[0]] > 0
        if z.conformation == "forward":
            return pool[z.focus] > 0
        if z.conformation == "reverse":
            return pool[chem.reverse_need(z)] > 0
        return True
    if isinstance(phase, tuple) and phase[0] == "provision":
        mkey = p.key_for_role(MOTHER)
        return p.pool_total.get(mkey, 0) > 0
    if phase == "await_delivery":
        return _seq_delivered(world, p)
    return False


def _seq_zipper(world, p: Pile):
    for gid in sorted(world.pile_groups[p.id]):
        g = world.groups[gid]
        role = p.comp_role[p.comp_of[g.site]]
        if role not in (CELL, MOTHER) or g.state != NEUTRAL:
            continue
        for item in g.items:
            if isinstance(item, Zipper) and item.kind == "S":
                return item
    return None


def _seq_delivered(world, p: Pile):
    dkey = p.key_for_role(DAUGHTER)
    if dkey is None:
        return False
    progs = 0
    descs = 0
    for gid in world.pile_groups[p.id]:
        g = world.groups[gid]
        if p.comp_of.get(g.site) != dkey:
            continue
        for item in g.items:
            if item.kind == "S":
                if isinstance(item, Program):
                    progs += 1
                else:
                    descs += 1
    return progs >= 1 and descs >= 1


# ---------------------------------------------------------------------------
# quanta


def execute_quantum(world, prog: Program):
    """One execution quantum for one program.  Returns (applied, dirty pile
    ids); a quantum that cannot proceed applies nothing and charges nothing."""
    kind = prog.kind
    if kind in ("A", "B", "C", "D", "E", "F"):
        return _pipeline_quantum(world, prog)
    if kind == "X":
        return _x_quantum(world, prog)
    if kind == "Z":
        return _z_quantum(world, prog)
    if kind == "S":
        return _seq_quantum(world, prog)
    return (False, set())


def _release(world, p, comp_key, prog, z):
    z.worker = None
    prog.bound_zipper = None
    prog.phase = None
    world.enqueue_stage(p, comp_key, z)


def _pipeline_quantum(world, prog):
    p, g, comp_key = _locate(world, prog)
    if prog.bound_zipper is None:
        z = _find_claim(world, prog)
        if z is None:
            return (False, set())
        if prog.kind == "A":
            z.mode = "solo" if _solo_eligible(world, p, p.comp_role[comp_key], z) else "full"
        world.dequeue_stage(p, comp_key, z)
        z.worker = prog.id
        prog.bound_zipper = z.id
    else:
        z = world.zippers[prog.bound_zipper]
    pool = _pool(world, p, comp_key)
    kind = prog.kind

    if kind == "A":
        if prog.phase != "consume":
            prog.phase = "consume"
        else:
            need = z.tags[0]
            if pool[need] <= 0:
                return (False, set())
            world.pool_take(p, comp_key, need)
            z.daughter_front.append(need)
            z.conformation = "forward"
            z.next_stage = "B"
            _release(world, p, comp_key, prog, z)
    elif kind == "B":
        res = chem.traverse_forward_step(z, pool)
        if res[0] == STALLED:
            return (False, set())
        p.pool_total[comp_key] -= 1
        if res[0] == FORWARD_COMPLETE:
            z.next_stage = "C"
            _release(world, p, comp_key, prog, z)
    elif kind in ("C", "D"):
        if prog.phase != "advance":
            prog.phase = "advance"
        else:
            z.conformation = "turnaround" if kind == "C" else "reverse"
            z.next_stage = "D" if kind == "C" else "E"
            _release(world, p, comp_key, prog, z)
    elif kind == "E":
        res = chem.traverse_reverse_step(z, pool)
        if res[0] == STALLED:
            return (False, set())
        p.pool_total[comp_key] -= 1
        if res[0] == REVERSE_COMPLETE:
            z.next_stage = "F"
            _release(world, p, comp_key, prog, z)
    elif kind == "F":
        if prog.phase != "finish":
            prog.phase = "finish"
        else:
            _finish_pipeline(world, p, comp_key, prog, z)
    prog.charge()
    return (True, {p.id})


def _finish_pipeline(world, p, comp_key, prog, z):
    copy_prog, copy_desc = chem.extract_copies(
        z, world.new_id("program"), world.new_id("zipper"))
    zg = world.groups[z.group_id]
    if z.mode == "solo":
        # translate-only replenishment: keep the program, recycle the
        # surplus description copy into local cytosol
        for tag in copy_desc.tags:
            world.pool_add(p, comp_key, tag)
        world.spawn_group(p, zg.site, [copy_prog])
        z.reset_cycle()
        z.worker = None
        prog.bound_zipper = None
        prog.phase = None
        world.enqueue_stage(p, comp_key, z)
        return
    world.spawn_group(p, zg.site, [copy_prog, copy_desc], state=EXPORT)
    z.reset_cycle()
    z.worker = None
    prog.bound_zipper = None
    prog.phase = None
    world.set_group_state(zg, OPEN)  # stash toward the septum; quiescent until return
    if z.kind == "Y" and p.comp_role[comp_key] == DAUGHTER:
        rt = world.runtimes.get(p.id)
        if rt is not None:
            rt.phase = "verifying"


def _x_quantum(world, prog):
    p, g, comp_key = _locate(world, prog)
    if prog.phase == "smash":
        tags = chem.smash(prog)
        dkey = p.comp_of[g.site]
        for tag in tags:
            world.pool_add(p, dkey, tag)
        world.remove_item_from_group(g, prog)
        world.programs.pop(prog.id, None)
        world._slot_drop(("x", prog.id))
        if not g.items:
            world.destroy_group(g)
        return (True, {p.id})
    anchor = pilemod.find_bud_anchor(world.lattice, p)
    if anchor is None:
        return (False, set())
    created = pilemod.create_bud(world.lattice, world.piles, p, anchor)
    if created is None:
        return (False, set())
    world.move_group(g, p.entry_site)
    prog.phase = "smash"
    rt = world.runtimes.get(p.id)
    if rt is not None:
        rt.phase = "synthesizing"
    prog.charge()
    return (True, {p.id})


def _z_quantum(world, prog):
    p, g, comp_key = _locate(world, prog)
    phase = prog.phase
    if phase in (None, "wait_trigger"):
        pair = _export_y_pair(world, p)
        if pair is None:
            return (False, set())
        dkey = p.comp_of[pair.site]
        for item in pair.items:
            for tag in _item_atoms(item):
                world.pool_add(p, dkey, tag)
        world.destroy_group(pair)
        prog.phase = "go_septum"
        rt = world.runtimes.get(p.id)
        if rt is not None:
            rt.phase = "closing"
        prog.charge()
        return (True, {p.id})
    if phase == "go_septum":
        world.set_group_state(g, chem.CLOSE)
        prog.phase = "to_septum"
        prog.charge()
        return (True, {p.id})
    if phase == "to_septum":
        if g.site != p.septum_site:
            return (False, set())
        opens = _septum_open_groups(world, p)
        if opens:
            world.set_group_state(world.groups[opens[0]], chem.CLOSE)
            prog.charge()
            return (True, {p.id})
        if not _close_conditions(world, p, g):
            return (False, set())
        p.septum_open = False
        world.reservoir_add(list(prog.tags))
        world.remove_item_from_group(g, prog)
        world.programs.pop(prog.id, None)
        world._slot_drop(("x", prog.id))
        if not g.items:
            world.destroy_group(g)
        dirty = _finish_fission(world, p)
        return (True, dirty)
    return (False, set())


def _item_atoms(item):
    if isinstance(item, Program):
        return list(item.tags)
    return (list(item.front) + ([item.focus] if item.focus is not None else [])
            + list(item.back) + list(item.daughter_front)
            + list(item.daughter_desc) + list(item.program_tags))


# ---------------------------------------------------------------------------
# fission


def _rebuild_queues(world, p: Pile):
    for key in [k for k in world.stage_queues if k[0] == p.id]:
        world.stage_queues[key] = set()
    for gid in world.pile_groups[p.id]:
        g = world.groups[gid]
        if g.state != NEUTRAL:
            continue
        for item in g.items:
            if isinstance(item, Zipper) and item.worker is None and not item.parked:
                if item.conformation == "ready":
                    item.next_stage = "A"
                world.enqueue_stage(p, p.comp_of[g.site], item)


def _finish_fission(world, p: Pile):
    now = world.clock.t
    rt = world.runtimes[p.id]
    mother, daughter, relocated = pilemod.eject_septum(
        world.lattice, world.piles, p, world.new_id("pile"))
    for gid, new_site in relocated:
        world.groups[gid].site = new_site
    world.pile_groups.setdefault(daughter.id, set())
    world.open_groups.setdefault(daughter.id, set())

    for gid in list(world.pile_groups[mother.id]):
        g = world.groups[gid]
        if g.site in daughter.footprint:
            world.pile_groups[mother.id].discard(gid)
            world.open_groups[mother.id].discard(gid)
            world.pile_groups[daughter.id].add(gid)
            g.pile_id = daughter.id

    # group states keyed to the fission episode expire with the septum
    for pl in (mother, daughter):
        for gid in list(world.pile_groups[pl.id]):
            g = world.groups[gid]
            if g.state == OPEN:
                world.set_group_state(g, NEUTRAL)
            for item in g.items:
                if isinstance(item, Zipper):
                    item.parked = False

    _rebuild_queues(world, mother)
    _rebuild_queues(world, daughter)

    census = gene_census(world, daughter)
    genome = sum(world.groups[gid].mass for gid in world.pile_groups[daughter.id])
    pool_mass = daughter.mass_of_pools()
    race = 0
    for kind in ("B", "E"):
        intended = rt.extra_copies.get(kind, 1)
        have = census.get(kind, (0, 0))[0]
        race += max(0, intended - have)

    record = GenerationRecord(
        pile_id=mother.id,
        daughter_pile_id=daughter.id,
        generation=rt.generation,
        t_end=now,
        replication_time=now - rt.cycle_start_t,
        replication_ops=rt.cycle_ops,
        genome_mass=genome,
        pile_mass=genome + pool_mass,
        gene_census={k: list(v) for k, v in sorted(census.items())},
        race_events=race,
    )
    world.records.append(record)

    world.runtimes[daughter.id] = CellRuntime(
        pile_id=daughter.id, kind=rt.kind, phase="budding",
        cycle_start_t=now, cycle_start_ops=world.clock.total_ops,
        generation=rt.generation + 1,
        extra_copies=dict(rt.extra_copies))
    rt.cycle_start_t = now
    rt.cycle_start_ops = world.clock.total_ops
    rt.cycle_ops = 0
    rt.phase = "budding"

    world.refresh_pile(mother)
    world.refresh_pile(daughter)
    return {mother.id, daughter.id}


# ---------------------------------------------------------------------------
# arrival transitions


def on_group_arrival(world, g, p: Pile, from_key, to_key):
    role = p.comp_role[to_key]
    if role == SEPTUM and g.state == chem.CLOSE:
        world.set_group_state(g, NEUTRAL)  # the closer stays put
        return
    if role == MOTHER and g.state == chem.CLOSE:
        world.set_group_state(g, NEUTRAL)
        for item in g.items:
            if isinstance(item, Zipper):
                item.parked = True  # re-enters the pipeline after fission
        return
    if role == DAUGHTER and g.state == EXPORT:
        world.set_group_state(g, NEUTRAL)
        keep = g.items[0]
        rest = g.items[1:]
        g.items = [keep]
        for item in rest:
            item.group_id = None
            world.spawn_group(p, g.site, [item])
        for item in [keep] + rest:
            if isinstance(item, Zipper):
                world.enqueue_stage(p, to_key, item)


# ---------------------------------------------------------------------------
# the sequential cell's single method


def _seq_quantum(world, prog):
    p, g, comp_key = _locate(world, prog)
    phase = prog.phase

    if phase == "bud":
        anchor = pilemod.find_bud_anchor(world.lattice, p)
        if anchor is None:
            return (False, set())
        if pilemod.create_bud(world.lattice, world.piles, p, anchor) is None:
            return (False, set())
        prog.phase = "pipeline"
        prog.mode = None
        prog.charge()
        return (True, {p.id})

    if phase == "pipeline":
        z = _seq_zipper(world, p)
        if z is None:
            return (False, set())
        zkey = p.comp_of[world.groups[z.group_id].site]
        pool = _pool(world, p, zkey)
        if z.conformation == "ready":
            if prog.mode != "consume":
                prog.mode = "consume"
            else:
                need = z.tags[0]
                if pool[need] <= 0:
                    return (False, set())
                world.pool_take(p, zkey, need)
                z.daughter_front.append(need)
                z.conformation = "forward"
                prog.mode = None
        elif z.conformation == "forward":
            res = chem.traverse_forward_step(z, pool)
            if res[0] == STALLED:
                return (False, set())
            p.pool_total[zkey] -= 1
            if res[0] == FORWARD_COMPLETE:
                z.conformation = "reverse"
        elif z.conformation == "reverse":
            res = chem.traverse_reverse_step(z, pool)
            if res[0] == STALLED:
                return (False, set())
            p.pool_total[zkey] -= 1
            if res[0] == REVERSE_COMPLETE:
                copy_prog, copy_desc = chem.extract_copies(
                    z, world.new_id("program"), world.new_id("zipper"))
                copy_prog.phase = "bud"
                zg = world.groups[z.group_id]
                world.spawn_group(p, zg.site, [copy_prog, copy_desc], state=EXPORT)
                z.reset_cycle()
                prog.phase = ("provision", 0)
        prog.charge()
        return (True, {p.id})

    if isinstance(phase, tuple) and phase[0] == "provision":
        mkey = p.key_for_role(MOTHER)
        dkey = p.key_for_role(DAUGHTER)
        pool = p.cytosol[mkey]
        tag = max(range(world.tag_alphabet), key=lambda t: (pool[t], -t))
        if pool[tag] <= 0:
            return (False, set())
        world.pool_take(p, mkey, tag)
        world.pool_add(p, dkey, tag)
        moved = phase[1] + 1
        prog.phase = ("provision", moved) if moved < X_BUDGET else "await_delivery"
        prog.charge()
        return (True, {p.id})

    if phase == "await_delivery":
        if not _seq_delivered(world, p):
            return (False, set())
        if p.stacks.get(p.septum_site):
            return (False, set())
        p.septum_open = False
        prog.phase = "bud"
        prog.mode = None
        dirty = _finish_fission(world, p)
        prog.charge()
        return (True, dirty)

    return (False, set())
