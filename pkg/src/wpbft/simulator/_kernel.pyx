# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels. Same contract and draw layout as _pure."""

from libc.math cimport log, pow, sqrt
from libc.stdint cimport int64_t, uint64_t

NAME = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double U53 = 1.0 / 9007199254740992.0
cdef double U52 = 1.0 / 4503599627370496.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t draw_bits(uint64_t key, uint64_t slot) noexcept nogil:
    return mix64(key + (slot + 1) * GOLDEN)


cdef inline double uniform_at(uint64_t key, uint64_t slot) noexcept nogil:
    return <double>(draw_bits(key, slot) >> 11) * U53


cdef inline double positive_uniform_at(uint64_t key, uint64_t slot) noexcept nogil:
    return (<double>(draw_bits(key, slot) >> 11) + 1.0) * U53


cdef inline double open_uniform_at(uint64_t key, uint64_t slot) noexcept nogil:
    # 52-bit resolution keeps the top value strictly below 1.0.
    return (<double>(draw_bits(key, slot) >> 12) + 0.5) * U52


def run_chunk_iid(uint64_t seed, int64_t start, int64_t stop, int n, int f,
                  double ps, int64_t[:, ::1] hist):
    cdef int64_t trial, successes = 0
    cdef int stage, position, population, fails, cumulative
    cdef uint64_t key, base
    cdef bint alive
    with nogil:
        for trial in range(start, stop):
            key = mix64(seed + (<uint64_t>trial + 1) * GOLDEN)
            cumulative = 0
            alive = True
            for stage in range(4):
                population = n - 1 - cumulative if stage < 2 else n - cumulative
                base = <uint64_t>(stage * n)
                fails = 0
                for position in range(population):
                    if uniform_at(key, base + <uint64_t>position) >= ps:
                        fails += 1
                hist[stage, fails] += 1
                cumulative += fails
                if cumulative > f:
                    alive = False
                    break
            if alive:
                successes += 1
    return successes


def run_chunk_geometric(uint64_t seed, int64_t start, int64_t stop, int n, int f,
                        double radius, double coefficient, double alpha,
                        int64_t[:, ::1] hist):
    cdef int64_t trial, successes = 0
    cdef int stage, position, population, fails, cumulative
    cdef uint64_t key, slot
    cdef double separation, fading
    cdef bint alive
    with nogil:
        for trial in range(start, stop):
            key = mix64(seed + (<uint64_t>trial + 1) * GOLDEN)
            cumulative = 0
            alive = True
            for stage in range(4):
                population = n - 1 - cumulative if stage < 2 else n - cumulative
                fails = 0
                for position in range(population):
                    slot = 2 * (<uint64_t>(stage * n) + <uint64_t>position)
                    separation = radius * sqrt(positive_uniform_at(key, slot))
                    fading = -log(open_uniform_at(key, slot + 1))
                    if not (fading > coefficient * pow(separation, alpha)):
                        fails += 1
                hist[stage, fails] += 1
                cumulative += fails
                if cumulative > f:
                    alive = False
                    break
            if alive:
                successes += 1
    return successes
