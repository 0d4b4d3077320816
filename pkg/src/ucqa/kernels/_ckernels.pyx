# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bitmask kernels for hulls of at most 64 facts.

Same contract as the pure-Python module; packing a rule whose masks do not fit
in 64 bits raises OverflowError so the caller can fall back.
"""
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free


cdef class RuleSet:
    cdef uint64_t* lhs
    cdef uint64_t* rhs
    cdef Py_ssize_t n

    def __cinit__(self, lhs, rhs):
        lhs = list(lhs)
        rhs = list(rhs)
        if len(lhs) != len(rhs):
            raise ValueError("lhs and rhs lists differ in length")
        self.n = len(lhs)
        self.lhs = <uint64_t*> malloc((self.n + 1) * sizeof(uint64_t))
        self.rhs = <uint64_t*> malloc((self.n + 1) * sizeof(uint64_t))
        if self.lhs == NULL or self.rhs == NULL:
            raise MemoryError()
        cdef Py_ssize_t k
        for k in range(self.n):
            self.lhs[k] = lhs[k]
            self.rhs[k] = rhs[k]

    def __dealloc__(self):
        free(self.lhs)
        free(self.rhs)

    def __len__(self):
        return self.n

    @property
    def lhs_masks(self):
        return [self.lhs[k] for k in range(self.n)]

    @property
    def rhs_masks(self):
        return [self.rhs[k] for k in range(self.n)]

    cdef Py_ssize_t _first_violated(self, uint64_t m) nogil:
        cdef Py_ssize_t k
        for k in range(self.n):
            if (self.lhs[k] & ~m) == 0 and (self.rhs[k] & m) == 0:
                return k
        return -1

    cdef uint64_t _closure(self, uint64_t m) nogil:
        cdef bint changed = True
        cdef Py_ssize_t k
        while changed:
            changed = False
            for k in range(self.n):
                if (self.lhs[k] & ~m) == 0 and (self.rhs[k] & ~m) != 0:
                    m |= self.rhs[k]
                    changed = True
        return m

    def is_consistent(self, uint64_t mask):
        return self._first_violated(mask) < 0

    def first_violated(self, uint64_t mask):
        return self._first_violated(mask)

    def closure(self, uint64_t mask):
        return self._closure(mask)


def consistent_masks(int nbits, RuleSet rules):
    """Plain scan over all 2**nbits masks."""
    if nbits > 30:
        raise OverflowError("too many bits for exhaustive scan")
    cdef uint64_t m, top = (<uint64_t> 1) << nbits
    out = []
    for m in range(top):
        if rules._first_violated(m) < 0:
            out.append(m)
    return out


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def _weight(uint64_t x):
    return (__builtin_popcountll(x), x)


def minimal_masks(uint64_t base, masks):
    """Differences to ``base`` in popcount order, each tested against the minimal ones kept so far."""
    cdef uint64_t x
    diffs = set()
    for m in masks:
        x = m
        diffs.add(x ^ base)
    ds = sorted(diffs, key=_weight)
    cdef Py_ssize_t n = len(ds), a, b, nk = 0
    cdef uint64_t* kept = <uint64_t*> malloc((n + 1) * sizeof(uint64_t))
    if kept == NULL:
        raise MemoryError()
    cdef uint64_t d
    cdef bint dominated
    try:
        for a in range(n):
            d = ds[a]
            dominated = False
            for b in range(nk):
                if (kept[b] & ~d) == 0:
                    dominated = True
                    break
            if not dominated:
                kept[nk] = d
                nk += 1
        out = []
        for b in range(nk):
            out.append(kept[b] ^ base)
        out.sort()
    finally:
        free(kept)
    return out


def check_repair_mask(uint64_t imask, uint64_t cand, RuleSet tgd, RuleSet allr):
    cdef Py_ssize_t k = allr._first_violated(cand)
    if k >= 0:
        return 1, k, 0
    cdef uint64_t c = tgd._closure(cand & imask)
    if c != cand:
        return 2, -1, c ^ cand
    cdef uint64_t outside = cand & ~imask
    cdef uint64_t dropped = imask & ~cand
    cdef uint64_t low, j
    cdef int bit
    while dropped:
        low = dropped & (~dropped + 1)
        j = tgd._closure(cand | low)
        if (j & ~imask) == outside and allr._first_violated(j) < 0:
            bit = 0
            while (low >> bit) != 1:
                bit += 1
            return 3, bit, j
        dropped ^= low
    return 0, -1, 0
