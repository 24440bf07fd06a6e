"""Detection and extraction of cyclic harmonic structure in Gram matrices.

A Gram on n = m*t vectors is "harmonic" when, under some ordering, it
splits into t x t blocks of m x m circulants.  Such a Gram is the Gram of
t generator vectors and their m cyclic translates.  The tools here detect
that structure, recover generators, straighten a scaled permutation
symmetry into honest block circulance, and search for such symmetries.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import galois
from .constructions import (
    double_signature,
    line_system_conference,
)
from .errors import (
    InconsistentWitnessError,
    InvalidArgumentError,
    NumericFailureError,
    UnsupportedInputError,
)
from .frames import circulant, gram_of_signature
from .linalg import ComplexMatrix, as_array, dft_matrix

_OMEGA = {1: 1.0 + 0.0j, 3: 1.0j}


@dataclass(frozen=True)
class BlockGram:
    """Gram split into t x t circulant blocks of size m, with the
    per-frequency t x t components (F G_ij F*)_aa collected along axis 0."""

    m: int
    t: int
    gram: np.ndarray
    frequency_components: np.ndarray

    def __post_init__(self):
        m, t = int(self.m), int(self.t)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "t", t)
        g = np.asarray(self.gram, dtype=complex)
        h = np.asarray(self.frequency_components, dtype=complex)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "frequency_components", h)
        if m < 1 or t < 1:
            raise InvalidArgumentError("m and t must be positive")
        if g.shape != (m * t, m * t):
            raise InvalidArgumentError("gram shape disagrees with m*t")
        if h.shape != (m, t, t):
            raise InvalidArgumentError("frequency components must be (m, t, t)")


@dataclass(frozen=True)
class AutomorphismWitness:
    """Scaled permutation symmetry of a Gram: G[i,j] = conj(c_i) c_j
    G[sigma(i), sigma(j)] for all i, j."""

    sigma: tuple
    c: np.ndarray

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        c = np.asarray(self.c, dtype=complex)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "c", c)
        n = len(sigma)
        if sorted(sigma) != list(range(n)):
            raise InvalidArgumentError("sigma is not a permutation")
        if c.shape != (n,):
            raise InvalidArgumentError("scalar vector length disagrees with sigma")
        if float(np.max(np.abs(np.abs(c) - 1.0))) > 1e-10:
            raise InvalidArgumentError("witness scalars must be unimodular to 1e-10")

    @property
    def n(self):
        return len(self.sigma)

    def cycles(self):
        """Cycles of sigma, each led by its least element, leaders ascending."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            nxt = self.sigma[start]
            while nxt != start:
                cyc.append(nxt)
                seen[nxt] = True
                nxt = self.sigma[nxt]
            out.append(cyc)
        return out

    def cycle_type(self):
        """Sorted tuple of cycle lengths."""
        return tuple(sorted(len(c) for c in self.cycles()))


def verify_automorphism(gram, witness):
    """Largest deviation in G[i,j] = conj(c_i) c_j G[sigma(i), sigma(j)]."""
    g = as_array(gram)
    n = witness.n
    if g.shape != (n, n):
        raise InvalidArgumentError("gram shape disagrees with witness length")
    sigma = list(witness.sigma)
    c = witness.c
    mapped = np.outer(np.conj(c), c) * g[np.ix_(sigma, sigma)]
    return float(np.max(np.abs(g - mapped)))


def detect_harmonic_gram(gram, m, tol=1e-8):
    """Split an n x n Gram into t = n/m blocks of m x m circulants.

    Every block must be stable under the simultaneous cyclic shift of its
    rows and columns to within tol.  Returns the block decomposition with
    the per-frequency t x t component matrices, which are checked to be
    Hermitian positive semidefinite.
    """
    g = as_array(gram)
    m = int(m)
    n = g.shape[0]
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidArgumentError("gram must be square")
    if m < 1 or n % m != 0:
        raise UnsupportedInputError("block size m must divide the Gram order")
    t = n // m
    worst = 0.0
    for i in range(t):
        for j in range(t):
            block = g[i * m : (i + 1) * m, j * m : (j + 1) * m]
            dev = float(np.max(np.abs(block - np.roll(block, (1, 1), axis=(0, 1)))))
            worst = max(worst, dev)
    if worst > tol:
        raise UnsupportedInputError(
            "blocks are not circulant: worst shift deviation %.3e" % worst
        )
    f = dft_matrix(m)
    comps = np.empty((m, t, t), dtype=complex)
    for i in range(t):
        for j in range(t):
            block = g[i * m : (i + 1) * m, j * m : (j + 1) * m]
            comps[:, i, j] = np.einsum("ag,gh,ah->a", f, block, np.conj(f))
    herm = float(np.max(np.abs(comps - np.conj(np.transpose(comps, (0, 2, 1))))))
    if herm > tol:
        raise NumericFailureError(
            "frequency components lost hermiticity: %.3e" % herm
        )
    for alpha in range(m):
        ev = np.linalg.eigvalsh((comps[alpha] + comps[alpha].conj().T) / 2.0)
        if float(ev[0]) < -1e-8:
            raise NumericFailureError(
                "frequency component %d has eigenvalue %.3e < 0" % (alpha, float(ev[0]))
            )
    return BlockGram(m=m, t=t, gram=g, frequency_components=comps)


def check_regular_representation(block, tol=1e-8):
    """Tightness of the underlying frame in block-circulant terms.

    Verifies G^2 = t G, that the diagonal blocks sum to t I_m, and that
    every frequency component has eigenvalue t with multiplicity exactly
    one (the rest near zero).  Returns (idempotency deviation, tightness
    deviation).
    """
    m, t, g = block.m, block.t, block.gram
    dev_sq = float(np.max(np.abs(g @ g - t * g)))
    diag_sum = np.zeros((m, m), dtype=complex)
    for i in range(t):
        diag_sum += g[i * m : (i + 1) * m, i * m : (i + 1) * m]
    dev_tight = float(np.max(np.abs(diag_sum - t * np.eye(m))))
    if dev_sq > tol or dev_tight > tol:
        raise UnsupportedInputError(
            "gram is not tight: G^2-tG off by %.3e, block trace off by %.3e"
            % (dev_sq, dev_tight)
        )
    for alpha in range(m):
        ev = np.linalg.eigvalsh(
            (block.frequency_components[alpha]
             + block.frequency_components[alpha].conj().T) / 2.0
        )
        big = int(np.sum(np.abs(ev - t) <= 1e-6))
        small = int(np.sum(np.abs(ev) <= 1e-6))
        if big != 1 or small != t - 1:
            raise NumericFailureError(
                "frequency %d eigenvalues %s split as %d near t and %d near 0"
                % (alpha, np.array2string(ev, precision=3), big, small)
            )
    return dev_sq, dev_tight


def generators_from_blockgram(block, tol=1e-8):
    """Recover t generator vectors whose cyclic translates carry the Gram.

    Each frequency component is (numerically) rank one; its leading
    eigenpair fixes the generators' DFT coefficients up to a harmless
    per-frequency phase.  The reassembled Gram is checked against the
    input to within tol.
    """
    m, t = block.m, block.t
    xhat = np.zeros((t, m), dtype=complex)
    for alpha in range(m):
        h = (block.frequency_components[alpha]
             + block.frequency_components[alpha].conj().T) / 2.0
        ev, vec = np.linalg.eigh(h)
        lead = float(ev[-1])
        rest = float(np.max(np.abs(ev[:-1]))) if t > 1 else 0.0
        if rest > max(tol, 1e-10 * max(lead, 1.0)) * 10:
            raise UnsupportedInputError(
                "frequency %d is not rank one: secondary eigenvalue %.3e"
                % (alpha, rest)
            )
        xhat[:, alpha] = math.sqrt(max(lead, 0.0)) * np.conj(vec[:, -1])
    gens = np.fft.ifft(xhat, axis=1)
    cols = [circulant(gens[i]) for i in range(t)]
    phi = np.hstack(cols)
    rebuilt = phi.conj().T @ phi
    dev = float(np.max(np.abs(rebuilt - block.gram)))
    if dev > max(tol, 1e-7):
        raise NumericFailureError(
            "generators reproduce the Gram only to %.3e" % dev
        )
    return gens


def circulantize(gram, witness, tol=1e-8):
    """Straighten a scaled permutation symmetry into block circulance.

    Needs a verified witness whose cycles all share one length m and a
    Gram with no zero entries off the diagonal of the relation track.
    Reindexing by cycles and conjugating by a diagonal unimodular matrix
    built from the witness scalars (with the cycle holonomy split evenly
    by a principal m-th root) produces a Gram that passes
    detect_harmonic_gram.  Returns (block_gram, diagonal, permutation).
    """
    g = as_array(gram)
    res = verify_automorphism(gram, witness)
    if res > tol:
        raise InconsistentWitnessError(
            "witness fails on this Gram: residual %.3e" % res
        )
    cycles = witness.cycles()
    lengths = {len(c) for c in cycles}
    if len(lengths) != 1:
        raise InconsistentWitnessError(
            "cycle lengths %s are not all equal" % sorted(lengths)
        )
    m = lengths.pop()
    t = len(cycles)
    c = witness.c
    sigma = witness.sigma
    holonomy = np.empty(t, dtype=complex)
    for j, cyc in enumerate(cycles):
        holonomy[j] = np.prod(c[cyc])
    spread = float(np.max(np.abs(holonomy - holonomy[0])))
    if spread > tol:
        raise InconsistentWitnessError(
            "cycle scalar products disagree by %.3e" % spread
        )
    mean = np.mean(holonomy)
    mean = mean / abs(mean)
    beta = complex(mean) ** (1.0 / m)
    n = witness.n
    diag = np.empty(n, dtype=complex)
    perm = []
    for cyc in cycles:
        acc = 1.0 + 0.0j
        idx = cyc[0]
        for ell in range(m):
            diag[idx] = acc / beta**ell
            perm.append(idx)
            acc = acc * c[idx]
            idx = sigma[idx]
    scaled = np.conj(diag)[:, None] * g * diag[None, :]
    reordered = scaled[np.ix_(perm, perm)]
    block = detect_harmonic_gram(reordered, m, tol=max(tol, 1e-8))
    return block, diag, perm


def _halfturn_witness(system):
    q = system.q
    m = (q + 1) // 2
    n = q + 1
    sigma = [0] * n
    c = np.empty(n, dtype=complex)
    for eps in (0, 1):
        for j in range(m):
            sigma[eps * m + j] = eps * m + (j + 1) % m
            c[eps * m + j] = float(system.chi(system.alpha_signs[j]))
    return AutomorphismWitness(sigma=tuple(sigma), c=c)


def _fullturn_witness(system):
    q = system.q
    n = q + 1
    sigma = [0] * (2 * n)
    c = np.empty(2 * n, dtype=complex)
    for eps in (0, 1):
        for i in range(n):
            sigma[eps * n + i] = (1 - eps) * n + (i + 1) % n
            c[eps * n + i] = (-1.0) ** eps * float(system.chi(system.alpha_signs[i]))
    return AutomorphismWitness(sigma=tuple(sigma), c=c)


def family_automorphism(family, q):
    """Gram and its shift symmetry for the symplectic families.

    family "paley_plus": the (q+1)/2 x (q+1) system; the witness advances
    each halfturn orbit, scalars chi of the wrap signs.
    family "double_paley_plus": the doubled (q+1) x 2(q+1) system; the
    witness advances the fullturn orbit while swapping the two copies.
    Verified here to 1e-10.
    """
    q = int(q)
    if family == "paley_plus":
        system = galois.build_line_system(q, "halfturn")
        conf = line_system_conference(system)
        s = _OMEGA[q % 4] * conf.data.astype(complex)
        gram = gram_of_signature(ComplexMatrix(s, "signature"), (q + 1) // 2)
        witness = _halfturn_witness(system)
    elif family == "double_paley_plus":
        system = galois.build_line_system(q, "fullturn")
        conf = line_system_conference(system)
        s_base = _OMEGA[q % 4] * conf.data.astype(complex)
        doubled = double_signature(s_base, (q + 1) // 2, q + 1, +1)
        gram = gram_of_signature(doubled, q + 1)
        witness = _fullturn_witness(system)
    else:
        raise InvalidArgumentError(
            "family must be 'paley_plus' or 'double_paley_plus'"
        )
    res = verify_automorphism(gram, witness)
    if res > 1e-10:
        raise NumericFailureError(
            "family witness fails verification: residual %.3e" % res
        )
    return gram, witness


def _cycle_type_permutations(n, m):
    """Lazily enumerate permutations of [n] with all cycles of length m,
    in a canonical order (cycles led by least remaining element)."""
    if n % m != 0:
        return

    def rec(remaining, assignment):
        if not remaining:
            yield dict(assignment)
            return
        rest = sorted(remaining)
        lead = rest[0]
        pool = rest[1:]
        for tail in itertools.permutations(pool, m - 1):
            cyc = (lead,) + tail
            for a, b in zip(cyc, cyc[1:] + (lead,)):
                assignment[a] = b
            yield from rec(remaining - set(cyc), assignment)
        for a in rest:
            assignment.pop(a, None)

    for mapping in rec(set(range(n)), {}):
        yield tuple(mapping[i] for i in range(n))


def _random_cycle_type_permutation(n, m, rng):
    order = list(rng.permutation(n))
    sigma = [0] * n
    for start in range(0, n, m):
        cyc = order[start : start + m]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            sigma[a] = b
    return tuple(sigma)


def brute_force_automorphism_search(gram, m, t, budget=200000, seed=0, tol=1e-8):
    """Search for a shift symmetry with cycle type m^t.

    Scalars are forced by the permutation through the pivot row:
    c_0 = 1 and c_j = G[0,j] / G[sigma(0), sigma(j)], which is complete
    whenever the Gram has no zero off-diagonal entries (the witness
    scalars are only ever determined up to one global phase).  Candidate
    permutations are enumerated canonically up to `budget`, then sampled
    at random.  Returns a witness or None.
    """
    g = as_array(gram)
    n = g.shape[0]
    if g.shape != (n, n) or n != m * t:
        raise InvalidArgumentError("gram order must equal m*t")
    offdiag = np.abs(g[~np.eye(n, dtype=bool)])
    if float(np.min(offdiag)) < 1e-12:
        raise UnsupportedInputError(
            "scalar recovery needs all off-diagonal entries nonzero"
        )
    tested = 0
    exhausted = True
    for sigma in _cycle_type_permutations(n, m):
        if tested >= budget:
            exhausted = False
            break
        tested += 1
        witness = _witness_from_sigma(g, sigma, n)
        if witness is not None and verify_automorphism(g, witness) <= tol:
            return witness
    if exhausted:
        return None
    rng = np.random.default_rng(seed)
    while tested < 2 * budget:
        tested += 1
        sigma = _random_cycle_type_permutation(n, m, rng)
        witness = _witness_from_sigma(g, sigma, n)
        if witness is not None and verify_automorphism(g, witness) <= tol:
            return witness
    return None


def _witness_from_sigma(g, sigma, n):
    s0 = sigma[0]
    c = np.empty(n, dtype=complex)
    c[0] = 1.0
    for j in range(1, n):
        denom = g[s0, sigma[j]]
        if abs(denom) < 1e-12:
            return None
        c[j] = g[0, j] / denom
    if float(np.max(np.abs(np.abs(c) - 1.0))) > 1e-8:
        return None
    c = c / np.abs(c)
    return AutomorphismWitness(sigma=sigma, c=c)
