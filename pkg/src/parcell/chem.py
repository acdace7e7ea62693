"""Program fragments, descriptions-as-zippers, and primitive synthesis steps.

Atoms are unit-mass typed tags drawn from a finite alphabet; they are moved
between pools and objects, never created or destroyed.  A description is a
traversable zipper over a program's tag sequence.  One forward traversal
builds the raw copy material, one reverse traversal finishes both a program
copy and a description copy while restoring the mother zipper, each step
consuming exactly one matching-tag atom from the local free-atom pool.
"""

from __future__ import annotations

from collections import Counter, deque

PROGRAM_LENGTHS = {
    "A": 42, "B": 62, "C": 55, "D": 63, "E": 74, "F": 92,
    "X": 89, "Y": 8, "Z": 43,
    # the single-method cell: one program owning the whole cycle
    "S": 367,
}
CELL_KINDS = ("A", "B", "C", "D", "E", "F", "X", "Y", "Z")
X_PROLOGUE = 8  # executable head of X; the other 81 atoms are payload
DEFAULT_ALPHABET = 16

NEUTRAL, GIVE, TAKE, OPEN, CLOSE, EXPORT = (
    "neutral", "give", "take", "open", "close", "export")
GROUP_STATES = (NEUTRAL, GIVE, TAKE, OPEN, CLOSE, EXPORT)

STALLED = "stalled"
CONSUMED = "consumed"
FORWARD_COMPLETE = "forward_complete"
REVERSE_COMPLETE = "reverse_complete"


class PairingError(ValueError):
    """Export bundling offered a program and description of different kinds."""


class SequencingError(RuntimeError):
    """A lifecycle action was attempted out of order."""


class Program:
    __slots__ = ("id", "kind", "tags", "ops_executed", "phase",
                 "bound_zipper", "group_id", "mode")

    def __init__(self, pid, kind, tags):
        if len(tags) != PROGRAM_LENGTHS[kind]:
            raise ValueError(f"{kind} program must hold {PROGRAM_LENGTHS[kind]} atoms")
        self.id = pid
        self.kind = kind
        self.tags = tuple(tags)
        self.ops_executed = 0
        self.phase = None
        self.bound_zipper = None
        self.group_id = None
        self.mode = None

    @property
    def length(self):
        return len(self.tags)

    @property
    def mass(self):
        return len(self.tags)

    def charge(self):
        self.ops_executed += 1


class Zipper:
    """front / focus / back over the described tag sequence, plus the
    nascent daughter material accumulated during traversal."""

    __slots__ = ("id", "kind", "tags", "front", "focus", "back",
                 "daughter_front", "daughter_desc", "program_tags",
                 "conformation", "next_stage", "worker", "substep",
                 "copy_index", "mode", "group_id", "parked")

    def __init__(self, zid, kind, tags):
        if len(tags) != PROGRAM_LENGTHS[kind]:
            raise ValueError(f"{kind} description must hold {PROGRAM_LENGTHS[kind]} atoms")
        self.id = zid
        self.kind = kind
        self.tags = tuple(tags)
        self.front = [self.tags[0]]
        self.focus = self.tags[1]
        self.back = deque(self.tags[2:])
        self.daughter_front = []
        self.daughter_desc = deque()
        self.program_tags = []
        self.conformation = "ready"
        self.next_stage = "A"
        self.worker = None
        self.substep = 0
        self.copy_index = 0
        self.mode = "full"
        self.group_id = None
        self.parked = False

    @property
    def length(self):
        return len(self.tags)

    @property
    def mother_mass(self):
        return len(self.front) + (1 if self.focus is not None else 0) + len(self.back)

    @property
    def mass(self):
        return (self.mother_mass + len(self.daughter_front)
                + len(self.daughter_desc) + len(self.program_tags))

    def reset_cycle(self):
        """Back to the conformation the first pipeline stage expects."""
        self.conformation = "ready"
        self.next_stage = "A"
        self.worker = None
        self.substep = 0
        self.mode = "full"


class Group:
    """Unit of diffusion: an ordered bag of programs/zippers with a state."""

    __slots__ = ("id", "items", "state", "site", "pile_id")

    def __init__(self, gid, items, state=NEUTRAL):
        self.id = gid
        self.items = list(items)
        self.state = state
        self.site = None
        self.pile_id = None

    @property
    def mass(self):
        return sum(item.mass for item in self.items)


def make_description(kind, rng, alphabet=DEFAULT_ALPHABET, zid=0):
    """Fresh ready-conformation zipper with a seeded random tag sequence."""
    if kind not in PROGRAM_LENGTHS:
        raise ValueError(f"unknown program kind {kind!r}")
    tags = tuple(rng.randrange(alphabet) for _ in range(PROGRAM_LENGTHS[kind]))
    return Zipper(zid, kind, tags)


def traverse_forward_step(z: Zipper, pool: Counter):
    """One forward step: focus -> front, matching atom -> daughter front,
    back -> focus.  Returns (CONSUMED, tag), (FORWARD_COMPLETE, tag) when the
    back is down to a single atom, or STALLED with no state change."""
    if z.conformation not in ("ready", "forward"):
        raise SequencingError(f"forward step in conformation {z.conformation}")
    if len(z.back) < 2:
        raise SequencingError("forward traversal already complete")
    need = z.focus
    if pool[need] <= 0:
        return (STALLED, need)
    pool[need] -= 1
    if pool[need] == 0:
        del pool[need]
    z.conformation = "forward"
    z.front.append(z.focus)
    z.daughter_front.append(need)
    z.focus = z.back.popleft()
    if len(z.back) == 1:
        return (FORWARD_COMPLETE, need)
    return (CONSUMED, need)


def reverse_need(z: Zipper):
    """Tag the next reverse-traversal step must consume."""
    if len(z.front) > 1 or z.daughter_front:
        return z.tags[len(z.program_tags)]
    if len(z.daughter_desc) < z.length:
        return z.tags[len(z.daughter_desc)]
    return z.tags[len(z.program_tags)]


def traverse_reverse_step(z: Zipper, pool: Counter):
    """One reverse step: restores the mother zipper toward its original
    order, reassembles the description copy, and consumes one matching-tag
    atom toward the program copy.  After length+2 steps both copies are
    complete and REVERSE_COMPLETE is returned."""
    if z.conformation != "reverse":
        raise SequencingError(f"reverse step in conformation {z.conformation}")
    need = reverse_need(z)
    if pool[need] <= 0:
        return (STALLED, need)
    pool[need] -= 1
    if pool[need] == 0:
        del pool[need]
    if len(z.front) > 1:
        z.program_tags.append(need)
        z.back.appendleft(z.focus)
        z.focus = z.front.pop()
        z.daughter_desc.appendleft(z.daughter_front.pop())
    elif z.daughter_front:
        z.program_tags.append(need)
        z.daughter_desc.appendleft(z.daughter_front.pop())
    elif len(z.daughter_desc) < z.length:
        z.daughter_desc.append(need)
    else:
        z.program_tags.append(need)
    if len(z.program_tags) == z.length and len(z.daughter_desc) == z.length:
        z.conformation = "done"
        return (REVERSE_COMPLETE, need)
    return (CONSUMED, need)


def extract_copies(z: Zipper, program_id, zipper_id):
    """Materialize the finished copies; the mother zipper keeps only its
    own atoms afterwards."""
    if z.conformation != "done":
        raise SequencingError("copies are not complete")
    program = Program(program_id, z.kind, tuple(z.program_tags))
    desc = Zipper(zipper_id, z.kind, tuple(z.daughter_desc))
    z.program_tags = []
    z.daughter_desc = deque()
    return program, desc


def smash(p: Program):
    """Break a program into free atoms (its whole tag sequence)."""
    if p.bound_zipper is not None:
        raise SequencingError("cannot smash a program mid-action")
    return list(p.tags)


def bundle_export(x_copy: Program, d_copy: Zipper, gid=0):
    """Wrap a finished (program copy, description copy) pair in an
    export-state group."""
    if x_copy.kind != d_copy.kind:
        raise PairingError(f"cannot pair {x_copy.kind} program with {d_copy.kind} description")
    if len(x_copy.tags) != PROGRAM_LENGTHS[x_copy.kind]:
        raise PairingError("program copy is incomplete")
    if d_copy.mother_mass != PROGRAM_LENGTHS[d_copy.kind]:
        raise PairingError("description copy is incomplete")
    return Group(gid, [x_copy, d_copy], state=EXPORT)


def zipper_to_json(z: Zipper):
    return {
        "id": z.id,
        "kind": z.kind,
        "conformation": z.conformation,
        "next_stage": z.next_stage,
        "front": list(z.front),
        "focus": z.focus,
        "back": list(z.back),
        "daughter_front": list(z.daughter_front),
        "daughter_desc": list(z.daughter_desc),
        "program_tags": list(z.program_tags),
        "mass": z.mass,
    }


def group_to_json(g: Group):
    items = []
    for item in g.items:
        if isinstance(item, Program):
            items.append({"type": "program", "kind": item.kind, "mass": item.mass,
                          "ops_executed": item.ops_executed})
        else:
            items.append({"type": "zipper", "kind": item.kind, "mass": item.mass,
                          "conformation": item.conformation})
    return {"id": g.id, "state": g.state, "site": list(g.site) if g.site else None,
            "mass": g.mass, "items": items}
