# cython: language_level=3
"""Compiled twin of parcell._core.fallback.

Same algorithms, same draw-for-draw behaviour: xoshiro256** seeded via
splitmix64, and a segment-tree rate table with cumulative-inversion
sampling.  Keep any change here in lockstep with the fallback module; the
test suite compares the two stream-for-stream.
"""

from libc.stdlib cimport free as c_free, malloc


cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t parcell_rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    """
    ctypedef unsigned long long uint64_t
    uint64_t parcell_rotl(uint64_t x, int k) nogil


cdef uint64_t _splitmix64_next(uint64_t *state) nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef class Xoshiro256StarStar:
    cdef uint64_t s0, s1, s2, s3

    def __init__(self, seed):
        cdef uint64_t s = <uint64_t>(seed & ((1 << 64) - 1))
        self.s0 = _splitmix64_next(&s)
        self.s1 = _splitmix64_next(&s)
        self.s2 = _splitmix64_next(&s)
        self.s3 = _splitmix64_next(&s)

    cdef uint64_t _next(self) nogil:
        cdef uint64_t result = parcell_rotl(self.s1 * <uint64_t>5, 7) * <uint64_t>9
        cdef uint64_t t = self.s1 << 17
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = parcell_rotl(self.s3, 45)
        return result

    def next_u64(self):
        return self._next()

    def random(self):
        return <double>(self._next() >> 11) * (2.0 ** -53)

    def random_open_closed(self):
        return <double>((self._next() >> 11) + 1) * (2.0 ** -53)

    def randrange(self, n):
        cdef uint64_t nn = <uint64_t>n
        cdef uint64_t v
        cdef int k = 0
        cdef uint64_t m
        if nn <= 1:
            return 0
        m = nn - 1
        while m:
            k += 1
            m >>= 1
        while True:
            v = self._next() >> (64 - k)
            if v < nn:
                return v

    def getstate(self):
        return (self.s0, self.s1, self.s2, self.s3)


cdef class RateTable:
    cdef double *tree
    cdef Py_ssize_t n
    cdef list _free_slots
    cdef public Py_ssize_t n_live

    def __cinit__(self, capacity=64):
        cdef Py_ssize_t n = 1
        while n < capacity:
            n <<= 1
        self.n = n
        self.tree = <double *>malloc(2 * n * sizeof(double))
        if self.tree == NULL:
            raise MemoryError()
        cdef Py_ssize_t i
        for i in range(2 * n):
            self.tree[i] = 0.0
        self._free_slots = list(range(n - 1, -1, -1))
        self.n_live = 0

    def __dealloc__(self):
        if self.tree != NULL:
            c_free(self.tree)

    def alloc(self):
        if not self._free_slots:
            self._grow()
        self.n_live += 1
        return self._free_slots.pop()

    def free(self, slot):
        self.set(slot, 0.0)
        self._free_slots.append(slot)
        self.n_live -= 1

    cpdef set(self, Py_ssize_t slot, double rate):
        cdef Py_ssize_t i = self.n + slot
        cdef Py_ssize_t j
        self.tree[i] = rate
        i >>= 1
        while i:
            j = i << 1
            self.tree[i] = self.tree[j] + self.tree[j + 1]
            i >>= 1

    def get(self, slot):
        return self.tree[self.n + slot]

    cpdef double total(self):
        return self.tree[1]

    cpdef Py_ssize_t pick(self, double u):
        cdef double target = u * self.tree[1]
        cdef Py_ssize_t node = 1
        cdef Py_ssize_t left, slot
        cdef double lv
        while node < self.n:
            left = node << 1
            lv = self.tree[left]
            if target < lv or self.tree[left + 1] <= 0.0:
                node = left
            else:
                target -= lv
                node = left + 1
        slot = node - self.n
        while slot > 0 and self.tree[self.n + slot] <= 0.0:
            slot -= 1
        return slot

    cdef _grow(self):
        cdef Py_ssize_t old_n = self.n
        cdef Py_ssize_t n = old_n * 2
        cdef double *tree = <double *>malloc(2 * n * sizeof(double))
        cdef Py_ssize_t i
        if tree == NULL:
            raise MemoryError()
        for i in range(2 * n):
            tree[i] = 0.0
        for i in range(old_n):
            tree[n + i] = self.tree[old_n + i]
        for i in range(n - 1, 0, -1):
            tree[i] = tree[2 * i] + tree[2 * i + 1]
        c_free(self.tree)
        self.tree = tree
        self.n = n
        self._free_slots = list(range(n - 1, old_n - 1, -1)) + self._free_slots
