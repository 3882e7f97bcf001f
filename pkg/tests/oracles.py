"""Reference computations that share no code with the package.

Everything here is dense linear algebra on full 2^n vectors and matrices,
with grid geometry recomputed from coordinates.  Qubit 0 is the most
significant tensor factor.
"""

from __future__ import annotations

import itertools
import math
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def ket_plus(angle_index: int) -> np.ndarray:
    phase = np.exp(1j * math.pi * angle_index / 4)
    return np.array([1, phase], dtype=complex) / math.sqrt(2)


def ket_bit(bit: int) -> np.ndarray:
    return np.array([1 - bit, bit], dtype=complex)


def kron_all(items) -> np.ndarray:
    return reduce(np.kron, items)


def pauli_matrix(text: str) -> np.ndarray:
    """'+XZ' / '-iYY' style string to a dense matrix; letter k acts on qubit k."""
    sign = {"+": 1, "-": -1}[text[0]]
    body = text[1:]
    if body.startswith("i"):
        sign, body = sign * 1j, body[1:]
    return sign * kron_all([LETTERS[c] for c in body])


# -- grid geometry ------------------------------------------------------------


def grid_coords(width: int, depth: int):
    return [(r, c) for r in range(width) for c in range(depth)]


def grid_index(depth: int, r: int, c: int) -> int:
    return r * depth + c


def grid_edges(width: int, depth: int) -> set[tuple[int, int]]:
    out = set()
    for r, c in grid_coords(width, depth):
        if c + 1 < depth:
            out.add((grid_index(depth, r, c), grid_index(depth, r, c + 1)))
        if r + 1 < width:
            out.add((grid_index(depth, r, c), grid_index(depth, r + 1, c)))
    return out


def grid_neighbours(width: int, depth: int) -> dict[int, set[int]]:
    nb = {v: set() for v in range(width * depth)}
    for a, b in grid_edges(width, depth):
        nb[a].add(b)
        nb[b].add(a)
    return nb


def column_order(width: int, depth: int) -> list[int]:
    return [grid_index(depth, r, c) for c in range(depth) for r in range(width)]


def grid_corrections(width: int, depth: int):
    """X and Z dependency sets for the left-to-right flow, straight from coordinates."""
    nb = grid_neighbours(width, depth)
    sx = {v: set() for v in range(width * depth)}
    sz = {v: set() for v in range(width * depth)}
    for r, c in grid_coords(width, depth):
        i = grid_index(depth, r, c)
        if c > 0:
            sx[i].add(grid_index(depth, r, c - 1))
        for r2, c2 in grid_coords(width, depth):
            j = grid_index(depth, r2, c2)
            if c2 + 1 < depth and j != i and i in nb[grid_index(depth, r2, c2 + 1)]:
                sz[i].add(j)
    return sx, sz


# -- dense states -------------------------------------------------------------


def cz_diagonal(n: int, edges) -> np.ndarray:
    diag = np.ones(2**n, dtype=complex)
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        for a, b in edges:
            if bits[a] and bits[b]:
                diag[idx] *= -1
    return diag


def graph_state(n: int, edges, qubits=None) -> np.ndarray:
    qubits = qubits if qubits is not None else [ket_plus(0)] * n
    return cz_diagonal(n, edges) * kron_all(qubits)


def project(state: np.ndarray, labels: list[int], qubit: int, bra: np.ndarray):
    """Contract ``bra`` into ``qubit``; returns the unnormalised rest and its labels."""
    t = state.reshape((2,) * len(labels))
    ax = labels.index(qubit)
    rest = np.tensordot(np.conj(bra), t, axes=([0], [ax]))
    return rest.reshape(-1), [q for q in labels if q != qubit]


def adaptive_distribution(width: int, depth: int, phi) -> dict[tuple[int, ...], float]:
    """Exact output law of the grid pattern, enumerating every outcome branch with its corrections."""
    n = width * depth
    sx, sz = grid_corrections(width, depth)
    order = column_order(width, depth)
    outputs = sorted(grid_index(depth, r, depth - 1) for r in range(width))
    dist: dict[tuple[int, ...], float] = {}

    def recurse(state, labels, k, outcomes, prob):
        if prob < 1e-15:
            return
        if k == n:
            key = tuple(outcomes[o] for o in outputs)
            dist[key] = dist.get(key, 0.0) + prob
            return
        v = order[k]
        s_x = sum(outcomes[j] for j in sx[v]) % 2
        s_z = sum(outcomes[j] for j in sz[v]) % 2
        angle = ((-phi[v] if s_x else phi[v]) + 4 * s_z) % 8
        for bit in (0, 1):
            rest, rl = project(state, labels, v, ket_plus(angle + 4 * bit))
            p = float(np.vdot(rest, rest).real)
            if p > 1e-15:
                recurse(rest / math.sqrt(p), rl, k + 1, {**outcomes, v: bit}, prob * p)

    recurse(graph_state(n, grid_edges(width, depth)), list(range(n)), 0, {}, 1.0)
    return dist


# -- traps --------------------------------------------------------------------


def stabilizer_letters(width: int, depth: int, subset) -> str:
    nb = grid_neighbours(width, depth)
    out = []
    for v in range(width * depth):
        x = v in subset
        z = len(nb[v] & set(subset)) % 2
        out.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)])
    return "".join(out)


def stabilizer_product_matrix(width: int, depth: int, subset) -> np.ndarray:
    """Product of the generator matrices X_a Z_N(a) over ``subset`` in increasing order."""
    n = width * depth
    nb = grid_neighbours(width, depth)
    mats = []
    for a in sorted(subset):
        mats.append(kron_all([X if q == a else (Z if q in nb[a] else I2) for q in range(n)]))
    return reduce(np.matmul, mats)


def blinded_trap_parity_law(width, depth, subset, thetas, pads, dummy_bits, errors=None):
    """Exact law of the unblinded support parity of one blinded trap round.

    ``errors`` maps vertex -> Pauli letter applied to the prepared qubit
    before entangling.  Returns Pr[parity = 1].
    """
    n = width * depth
    letters = stabilizer_letters(width, depth, subset)
    qubits, angles = [], {}
    for v in range(n):
        if letters[v] == "Z":
            qubits.append(ket_bit(dummy_bits[v]))
            angles[v] = thetas[v]
        else:
            qubits.append(ket_plus(thetas[v]))
            base = {"X": 0, "Y": 2, "I": 0}[letters[v]]
            angles[v] = (base + thetas[v] + 4 * pads[v]) % 8
        if errors and v in errors:
            qubits[-1] = LETTERS[errors[v]] @ qubits[-1]
    state = graph_state(n, grid_edges(width, depth), qubits)
    labels = list(range(n))
    support = [v for v in range(n) if letters[v] in "XY"]
    # parity law by enumerating support outcomes; other qubits are traced out
    p_one = 0.0
    for bits in itertools.product((0, 1), repeat=len(support)):
        st, lb = state, labels
        for v, b in zip(support, bits):
            st, lb = project(st, lb, v, ket_plus(angles[v] + 4 * b))
        parity = sum(b ^ pads[v] for v, b in zip(support, bits)) % 2
        if parity:
            p_one += float(np.vdot(st, st).real)
    return p_one


def prep_noise_fail_rate(width: int, depth: int, p: float) -> float:
    """Exact failed-trap probability under per-qubit preparation depolarizing noise.

    Averages over uniform nonempty subsets, theta, pads, dummy bits and every
    error pattern.  The reference parity of each configuration is its
    noiseless value, so no trap bookkeeping from the package is used.
    """
    n = width * depth
    subsets = [s for k in range(1, n + 1) for s in itertools.combinations(range(n), k)]
    patterns = []
    for letters in itertools.product("IXYZ", repeat=n):
        w = 1.0
        for c in letters:
            w *= (1 - p) if c == "I" else p / 3
        patterns.append((dict(enumerate(letters)), w))
    total = 0.0
    count = 0
    for subset in subsets:
        for thetas in itertools.product(range(8), repeat=n):
            for pads in itertools.product((0, 1), repeat=n):
                for dummies in itertools.product((0, 1), repeat=n):
                    ideal = blinded_trap_parity_law(width, depth, subset, thetas, pads, dummies)
                    assert ideal < 1e-9 or ideal > 1 - 1e-9
                    want = int(round(ideal))
                    fail = 0.0
                    for errs, w in patterns:
                        q = blinded_trap_parity_law(width, depth, subset, thetas, pads, dummies, errs)
                        fail += w * (q if want == 0 else 1 - q)
                    total += fail
                    count += 1
    return total / count


# -- bench ----------------------------------------------------------------


def single_vertex_vbqc_law(n: int, q: float, trap_fraction: float, c_t: float) -> dict[str, float]:
    """Exact Pr[acc and correct], Pr[acc and wrong] for robust VBQC on one vertex with readout flips q.

    The single-vertex pattern at angle 0 has output 0 and every trap is a
    plain X measurement, so a trap activates iff its bit flips.
    """
    from math import comb

    out = {"acc_correct": 0.0, "acc_wrong": 0.0}
    for k in range(n + 1):  # trap rounds
        pk = comb(n, k) * trap_fraction**k * (1 - trap_fraction) ** (n - k)
        comp = n - k
        for a in range(k + 1):
            pa = comb(k, a) * q**a * (1 - q) ** (k - a)
            if not a < c_t * n or comp == 0:
                continue
            for w in range(comp + 1):
                pw = comb(comp, w) * q**w * (1 - q) ** (comp - w)
                if 2 * w > comp:
                    out["acc_wrong"] += pk * pa * pw
                elif 2 * (comp - w) > comp:
                    out["acc_correct"] += pk * pa * pw
    return out
