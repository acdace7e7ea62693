"""Roving piles: connected lattice footprints with compartments.

A pile occupies a 4-connected set of sites; each site hosts a stack of
groups and belongs to exactly one compartment.  Compartment boundaries are
selectively permeable according to group state.  Budding claims a free 3x3
block (an 8-site daughter ring around a 1x1 septum) in a single Moore
neighborhood with a constant number of site writes; ejecting the septum
splits the pile in two with constant work.
"""

from __future__ import annotations

from collections import Counter

from parcell.chem import CLOSE, EXPORT, GIVE, NEUTRAL, OPEN, TAKE, SequencingError

CELL, VACUOLE, MOTHER, SEPTUM, DAUGHTER = (
    "cell", "vacuole", "mother", "septum", "daughter")

ORTHO = ((0, -1), (1, 0), (0, 1), (-1, 0))
MOORE = ((-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0))

_ADJACENT_COMPARTMENTS = {
    (CELL, VACUOLE), (VACUOLE, CELL),
    (MOTHER, SEPTUM), (SEPTUM, MOTHER),
    (SEPTUM, DAUGHTER), (DAUGHTER, SEPTUM),
    (MOTHER, DAUGHTER), (DAUGHTER, MOTHER),
}


class TopologyError(ValueError):
    """The named compartments do not share a boundary."""


def permeability(state, frm, to, septum_open=True):
    """Whether a group in `state` may cross from compartment `frm` to `to`.

    Pure rule table; all combinations not listed are denied.
    """
    if frm == to:
        raise TopologyError("permeability is for cross-compartment moves")
    if (frm, to) not in _ADJACENT_COMPARTMENTS:
        raise TopologyError(f"compartments {frm} and {to} are not adjacent")
    if state == GIVE:
        return frm == CELL and to == VACUOLE
    if state == TAKE:
        return frm == VACUOLE and to == CELL
    if state == OPEN:
        return frm == MOTHER and to == SEPTUM
    if state == CLOSE:
        return (frm == SEPTUM and to == MOTHER) or (frm == DAUGHTER and to == SEPTUM)
    if state == EXPORT:
        return frm == MOTHER and to == DAUGHTER and septum_open
    return False  # NEUTRAL and anything else: within-compartment only


class Lattice:
    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.owner = {}
        self.site_writes = 0

    def in_bounds(self, site):
        x, y = site
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, site):
        return self.in_bounds(site) and site not in self.owner

    def claim(self, site, pile_id):
        if site in self.owner:
            raise ValueError(f"site {site} already owned by pile {self.owner[site]}")
        self.owner[site] = pile_id
        self.site_writes += 1

    def release(self, site):
        del self.owner[site]
        self.site_writes += 1


class Pile:
    def __init__(self, pid):
        self.id = pid
        self.footprint = set()
        self.comp_of = {}          # site -> compartment key
        self.comp_role = {}        # compartment key -> role string
        self.comp_sites = {}       # compartment key -> set of sites
        self.stacks = {}           # site -> list of group ids
        self.cytosol = {}          # compartment key -> Counter(tag -> count)
        self.pool_total = {}       # compartment key -> int
        self.neighbors_in_pile = {}
        self.boundary = set()
        self.septum_open = False
        self.septum_site = None
        self.entry_site = None     # daughter-side site touching the mother
        self.interface_site = None # mother-side site touching the daughter block
        self.area_cap = None       # soft footprint budget; None = unbounded
        self.septum_contact = 0    # shared-boundary length of the fission complex
        self._next_comp_key = 0
        self._boundary_cache = None

    # -- compartment helpers -------------------------------------------------

    def new_compartment(self, role):
        key = self._next_comp_key
        self._next_comp_key += 1
        self.comp_role[key] = role
        self.comp_sites[key] = set()
        self.cytosol[key] = Counter()
        self.pool_total[key] = 0
        return key

    def role_of_site(self, site):
        return self.comp_role[self.comp_of[site]]

    def key_for_role(self, role):
        for key, r in self.comp_role.items():
            if r == role:
                return key
        return None

    def roles(self):
        return set(self.comp_role.values())

    # -- geometry ------------------------------------------------------------

    def mass_of_pools(self):
        return sum(self.pool_total.values())

    def boundary_list(self):
        if self._boundary_cache is None:
            self._boundary_cache = sorted(self.boundary)
        return self._boundary_cache

    def compartment_boundary_counts(self, lattice):
        counts = {}
        for site in self.boundary:
            key = self.comp_of[site]
            counts[key] = counts.get(key, 0) + 1
        return counts


def neighbors4(site):
    x, y = site
    return ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y))


def is_connected(sites):
    if not sites:
        return True
    seen = set()
    stack = [next(iter(sites))]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        for nb in neighbors4(s):
            if nb in sites and nb not in seen:
                stack.append(nb)
    return len(seen) == len(sites)


def _locally_safe_removal(sites, site):
    """Simple-point style test: removal certainly keeps 4-connectivity when
    the occupied Moore ring around `site` forms one component that touches
    all occupied orthogonal neighbors.  False only means 'must recheck'."""
    x, y = site
    ring = [(x + dx, y + dy) for dx, dy in MOORE]
    occupied = [s for s in ring if s in sites]
    if not occupied:
        return True  # isolated site; caller guards emptiness elsewhere
    comp = set()
    stack = [occupied[0]]
    occ = set(occupied)
    while stack:
        s = stack.pop()
        if s in comp:
            continue
        comp.add(s)
        for nb in neighbors4(s):
            if nb in occ:
                stack.append(nb)
    ortho_occ = [s for s in neighbors4(site) if s in sites]
    return all(s in comp for s in ortho_occ) and len(comp) == len(occ)


def refresh_geometry(lattice, pile):
    """Recompute neighbor counts and the boundary set from scratch."""
    pile.neighbors_in_pile = {}
    pile.boundary = set()
    pile._boundary_cache = None
    for site in pile.footprint:
        n_in = 0
        has_free = False
        for nb in neighbors4(site):
            if nb in pile.footprint:
                n_in += 1
            elif lattice.is_free(nb):
                has_free = True
        pile.neighbors_in_pile[site] = n_in
        if has_free:
            pile.boundary.add(site)


def _add_site(lattice, piles, pile, site, comp_key):
    lattice.claim(site, pile.id)
    pile.footprint.add(site)
    pile.comp_of[site] = comp_key
    pile.comp_sites[comp_key].add(site)
    pile.stacks[site] = []
    n_in = 0
    for nb in neighbors4(site):
        if nb in pile.footprint and nb != site:
            n_in += 1
            pile.neighbors_in_pile[nb] = pile.neighbors_in_pile.get(nb, 0) + 1
    pile.neighbors_in_pile[site] = n_in
    _refresh_boundary_around(lattice, piles, site)


def _remove_site(lattice, piles, pile, site):
    lattice.release(site)
    pile.footprint.discard(site)
    key = pile.comp_of.pop(site)
    pile.comp_sites[key].discard(site)
    pile.stacks.pop(site, None)
    pile.neighbors_in_pile.pop(site, None)
    pile.boundary.discard(site)
    for nb in neighbors4(site):
        if nb in pile.footprint:
            pile.neighbors_in_pile[nb] -= 1
    _refresh_boundary_around(lattice, piles, site)


def _refresh_boundary_around(lattice, piles, site):
    for s in (site,) + tuple(neighbors4(site)):
        owner = lattice.owner.get(s)
        if owner is None:
            continue
        p = piles[owner]
        p._boundary_cache = None
        if any(lattice.is_free(nb) for nb in neighbors4(s)):
            p.boundary.add(s)
        else:
            p.boundary.discard(s)


def try_boundary_move(lattice, piles, pile, site, direction):
    """Grow outward into a free neighbor, or retract a boundary site inward.

    Rejection (returning False) is a normal outcome: moves that would
    disconnect the footprint or a compartment, empty a compartment, strand
    stacked groups, or touch the septum site are refused with no change.
    """
    if site not in pile.footprint:
        return False
    if pile.comp_role[pile.comp_of[site]] == SEPTUM:
        return False  # the septum footprint is pinned at 1x1
    dx, dy = direction
    target = (site[0] + dx, site[1] + dy)
    if not lattice.in_bounds(target):
        return False

    if lattice.is_free(target):
        if pile.area_cap is not None:
            budget = pile.area_cap + (9 if pile.septum_site is not None else 0)
            if len(pile.footprint) >= budget:
                return False  # area tracks the pile's material budget
        _add_site(lattice, piles, pile, target, pile.comp_of[site])
        return ("grew", target)

    if lattice.owner.get(target) != pile.id:
        return False

    # inward move: retract `site`, pushing its stack onto a neighbor
    if site in (pile.septum_site, pile.entry_site, pile.interface_site):
        return False  # fission-interface geometry is pinned until ejection
    if pile.area_cap is not None and len(pile.footprint) <= max(4, pile.area_cap // 2):
        return False
    key = pile.comp_of[site]
    if len(pile.comp_sites[key]) <= 1:
        return False
    relocate_to = None
    if pile.stacks.get(site):
        for nb in neighbors4(site):
            if nb in pile.footprint and pile.comp_of[nb] == key:
                relocate_to = nb
                break
        if relocate_to is None:
            return False
    if not _locally_safe_removal(pile.footprint, site):
        if not is_connected(pile.footprint - {site}):
            return False
    if not _locally_safe_removal(pile.comp_sites[key], site):
        if not is_connected(pile.comp_sites[key] - {site}):
            return False
    moved = list(pile.stacks.get(site, ()))
    if moved:
        pile.stacks[relocate_to].extend(moved)
        pile.stacks[site] = []
    _remove_site(lattice, piles, pile, site)
    return ("retracted", site, relocate_to, moved)


BUD_OFFSETS = ((2, 0), (-2, 0), (0, 2), (0, -2),
               (2, 1), (2, -1), (-2, 1), (-2, -1),
               (1, 2), (-1, 2), (1, -2), (-1, -2))


def find_bud_anchor(lattice, pile):
    """Deterministic scan for a free 3x3 block touching the pile: the anchor
    is the prospective septum site (block center)."""
    for b in sorted(pile.boundary):
        for off in BUD_OFFSETS:
            anchor = (b[0] + off[0], b[1] + off[1])
            if _block_ok(lattice, pile, anchor):
                return anchor
    return None


def _block_sites(anchor):
    ax, ay = anchor
    return [(ax + dx, ay + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]


def _block_ok(lattice, pile, anchor):
    block = _block_sites(anchor)
    if not all(lattice.is_free(s) for s in block):
        return False
    for s in block:
        for nb in neighbors4(s):
            if nb in pile.footprint:
                return True
    return False


def create_bud(lattice, piles, pile, anchor):
    """Claim the 3x3 block centered at `anchor`: 8 daughter ring sites
    around a 1x1 septum.  Constant site writes (9) regardless of pile size.
    Returns (daughter_key, septum_key) or None when the block will not fit.
    """
    if SEPTUM in pile.roles() or DAUGHTER in pile.roles():
        raise SequencingError("pile already has a bud")
    if not _block_ok(lattice, pile, anchor):
        return None

    # the resident compartment becomes the mother for the fission episode
    cell_key = pile.key_for_role(CELL)
    pile.comp_role[cell_key] = MOTHER

    daughter_key = pile.new_compartment(DAUGHTER)
    septum_key = pile.new_compartment(SEPTUM)
    for s in _block_sites(anchor):
        _add_site(lattice, piles, pile, s, septum_key if s == anchor else daughter_key)

    pile.septum_site = anchor
    pile.septum_open = True
    interface = entry = None
    contact = 0
    for s in sorted(pile.comp_sites[daughter_key]):
        for nb in neighbors4(s):
            if nb in pile.footprint and pile.comp_of[nb] == cell_key:
                contact += 1
                if interface is None:
                    interface, entry = nb, s
    pile.interface_site = interface
    pile.entry_site = entry
    # the contractile-ring boundary shared by all three compartments; its
    # length sets cross-compartment transport rates for the whole episode
    pile.septum_contact = contact
    return daughter_key, septum_key


def eject_septum(lattice, piles, pile, new_pile_id):
    """Release the septum site, fill the daughter's hole by relocating one
    of its block corners, and split the pile in two.  Constant work in one
    Moore neighborhood.  Returns (mother_pile, daughter_pile)."""
    septum_key = pile.key_for_role(SEPTUM)
    daughter_key = pile.key_for_role(DAUGHTER)
    if septum_key is None or daughter_key is None:
        raise SequencingError("no fission in progress")
    hole = pile.septum_site
    if pile.stacks.get(hole):
        raise SequencingError("septum still occupied")

    _remove_site(lattice, piles, pile, hole)
    pile.comp_role.pop(septum_key)
    pile.comp_sites.pop(septum_key)
    pile.cytosol.pop(septum_key)
    pile.pool_total.pop(septum_key)

    relocated = []
    dsites = pile.comp_sites[daughter_key]
    hx, hy = hole
    for corner in sorted((hx + dx, hy + dy) for dx in (-1, 1) for dy in (-1, 1)):
        if corner in dsites and is_connected((dsites - {corner}) | {hole}):
            stack = list(pile.stacks.get(corner, ()))
            _remove_site(lattice, piles, pile, corner)
            _add_site(lattice, piles, pile, hole, daughter_key)
            pile.stacks[hole] = stack
            relocated = [(gid, hole) for gid in stack]
            break

    daughter = Pile(new_pile_id)
    daughter.area_cap = pile.area_cap
    dk = daughter.new_compartment(CELL)
    for s in sorted(pile.comp_sites[daughter_key]):
        lattice.release(s)
        pile.footprint.discard(s)
        pile.comp_of.pop(s)
        lattice.claim(s, daughter.id)
        daughter.footprint.add(s)
        daughter.comp_of[s] = dk
        daughter.comp_sites[dk].add(s)
        daughter.stacks[s] = pile.stacks.pop(s, [])
    daughter.cytosol[dk] = pile.cytosol.pop(daughter_key)
    daughter.pool_total[dk] = pile.pool_total.pop(daughter_key)
    pile.comp_role.pop(daughter_key)
    pile.comp_sites.pop(daughter_key)

    mother_key = pile.key_for_role(MOTHER)
    pile.comp_role[mother_key] = CELL
    pile.septum_site = None
    pile.septum_open = False
    pile.entry_site = None
    pile.interface_site = None
    pile.septum_contact = 0

    piles[daughter.id] = daughter
    refresh_geometry(lattice, pile)
    refresh_geometry(lattice, daughter)
    for s in list(pile.boundary) + list(daughter.boundary):
        _refresh_boundary_around(lattice, piles, s)
    return pile, daughter, relocated


def snapshot_text(lattice, piles):
    """Plain-text grid: '.' free, one letter per compartment role."""
    letter = {CELL: "c", VACUOLE: "v", MOTHER: "m", SEPTUM: "s", DAUGHTER: "d"}
    rows = []
    for y in range(lattice.height):
        row = []
        for x in range(lattice.width):
            owner = lattice.owner.get((x, y))
            if owner is None:
                row.append(".")
            else:
                p = piles[owner]
                row.append(letter[p.role_of_site((x, y))])
        rows.append("".join(row))
    return "\n".join(rows)


def snapshot_json(lattice, piles):
    out = {}
    for pid, p in sorted(piles.items()):
        out[str(pid)] = {
            "sites": sorted([list(s) for s in p.footprint]),
            "compartments": {
                str(k): {"role": p.comp_role[k],
                         "sites": sorted([list(s) for s in p.comp_sites[k]])}
                for k in sorted(p.comp_role)
            },
            "septum_open": p.septum_open,
        }
    return out
