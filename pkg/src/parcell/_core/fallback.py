"""Pure-Python implementations of the simulation hot kernels.

Two primitives live here and in the compiled twin ``parcell._core._kernel``:

* ``Xoshiro256StarStar`` -- the simulator's random stream.  xoshiro256**
  seeded through splitmix64, a public-domain 64-bit generator with a
  documented, platform-independent bit stream.  Every stochastic choice in
  a world draws from one instance of this generator, which is what makes
  runs bit-reproducible.
* ``RateTable`` -- a growable segment tree over event rates supporting
  O(log n) rate updates and cumulative-inversion sampling.

The compiled twin must behave identically draw-for-draw; the test suite
checks the two against each other.
"""

_MASK64 = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** PRNG; the four 64-bit state words come from splitmix64."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed):
        s = seed & _MASK64
        s, self._s0 = _splitmix64(s)
        s, self._s1 = _splitmix64(s)
        s, self._s2 = _splitmix64(s)
        s, self._s3 = _splitmix64(s)

    def next_u64(self):
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self):
        """Uniform on [0, 1), 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def random_open_closed(self):
        """Uniform on (0, 1]; safe as the argument of log()."""
        return ((self.next_u64() >> 11) + 1) * (2.0 ** -53)

    def randrange(self, n):
        """Unbiased integer in [0, n) via bit-masked rejection."""
        if n <= 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            v = self.next_u64() >> (64 - k)
            if v < n:
                return v

    def getstate(self):
        return (self._s0, self._s1, self._s2, self._s3)


class RateTable:
    """Segment tree of event rates with O(log n) update and sampling.

    Slots are allocated/freed explicitly so callers can keep stable handles;
    the free list is LIFO and the allocation sequence is deterministic.
    """

    def __init__(self, capacity=64):
        n = 1
        while n < capacity:
            n <<= 1
        self._n = n
        self._tree = [0.0] * (2 * n)
        self._free = list(range(n - 1, -1, -1))
        self.n_live = 0

    def alloc(self):
        if not self._free:
            self._grow()
        self.n_live += 1
        return self._free.pop()

    def free(self, slot):
        self.set(slot, 0.0)
        self._free.append(slot)
        self.n_live -= 1

    def set(self, slot, rate):
        tree = self._tree
        i = self._n + slot
        tree[i] = rate
        i >>= 1
        while i:
            j = i << 1
            tree[i] = tree[j] + tree[j + 1]
            i >>= 1

    def get(self, slot):
        return self._tree[self._n + slot]

    def total(self):
        return self._tree[1]

    def pick(self, u):
        """Cumulative-inversion draw: slot s with probability rate(s)/total.

        ``u`` is uniform on [0, 1).  Zero-rate leaves are skipped by the
        descent; a final downward scan guards against landing on one via
        floating-point overshoot.
        """
        tree = self._tree
        n = self._n
        target = u * tree[1]
        node = 1
        while node < n:
            left = node << 1
            lv = tree[left]
            if target < lv or tree[left + 1] <= 0.0:
                node = left
            else:
                target -= lv
                node = left + 1
        slot = node - n
        while slot > 0 and tree[n + slot] <= 0.0:
            slot -= 1
        return slot

    def _grow(self):
        old_n = self._n
        n = old_n * 2
        tree = [0.0] * (2 * n)
        tree[n:n + old_n] = self._tree[old_n:2 * old_n]
        for i in range(n - 1, 0, -1):
            tree[i] = tree[2 * i] + tree[2 * i + 1]
        self._n = n
        self._tree = tree
        self._free = list(range(n - 1, old_n - 1, -1)) + self._free
