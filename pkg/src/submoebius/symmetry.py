"""The groups S4 and S3, the sign character and the cross-ratio homomorphism.

Permutations are tuples of 1-based images, ``pi = (pi(1), ..., pi(k))``,
rendered as digit strings such as ``"2143"``.  Composition is
``compose(p, q)(j) = p(q(j))``.

Conventions (calibrated so that ``M_d(pi P) = sign(pi) phi(pi) M_d(P)``
holds exactly for every semi-metric):

* ``act_on_tuple(pi, P)[j] = P[pi(j)]`` -- entry ``j`` of the result is
  entry ``pi(j)`` of ``P``;
* ``phi(pi)`` is the permutation ``s`` of the opposite edge pairs
  ``e1 = (12)(34)``, ``e2 = (13)(24)``, ``e3 = (14)(23)`` with
  ``pi(e_j) = e_{s(j)}``;
* ``S3`` acts on coordinates as in :func:`extended_line.signed_permute`.

Both actions are right actions, so the pairing is consistent.
"""

from __future__ import annotations

import itertools
from typing import Sequence

Perm = tuple[int, ...]


def parse_perm(text: str) -> Perm:
    images = tuple(int(ch) for ch in text)
    if sorted(images) != list(range(1, len(images) + 1)):
        raise ValueError(f"{text!r} is not a permutation")
    return images


def perm_str(p: Perm) -> str:
    return "".join(str(i) for i in p)


def compose(p: Perm, q: Perm) -> Perm:
    """``p o q``: apply ``q`` first."""
    return tuple(p[q[j] - 1] for j in range(len(q)))


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for j, image in enumerate(p, start=1):
        inv[image - 1] = j
    return tuple(inv)


def identity(k: int) -> Perm:
    return tuple(range(1, k + 1))


def sign_of(p: Perm) -> int:
    """Parity character via inversion count."""
    inversions = sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j])
    return -1 if inversions % 2 else 1


S4: tuple[Perm, ...] = tuple(itertools.permutations(range(1, 5)))
S3: tuple[Perm, ...] = tuple(itertools.permutations(range(1, 4)))

EDGE_PAIRS: tuple[frozenset, ...] = (
    frozenset({frozenset({1, 2}), frozenset({3, 4})}),
    frozenset({frozenset({1, 3}), frozenset({2, 4})}),
    frozenset({frozenset({1, 4}), frozenset({2, 3})}),
)


def _phi_by_edges(p: Perm) -> Perm:
    images = []
    for pair in EDGE_PAIRS:
        moved = frozenset(frozenset(p[i - 1] for i in edge) for edge in pair)
        images.append(EDGE_PAIRS.index(moved) + 1)
    return tuple(images)


_PHI = {p: _phi_by_edges(p) for p in S4}
_SIGN = {p: sign_of(p) for p in S4}


def phi(p: Perm) -> Perm:
    """Cross-ratio homomorphism ``S4 -> S3``."""
    return _PHI[tuple(p)]


def sign4(p: Perm) -> int:
    return _SIGN[p]


KLEIN: frozenset = frozenset(p for p in S4 if _PHI[p] == identity(3))

# Coset representatives of the Klein kernel and their phi-images.
COSET_TABLE: tuple[tuple[tuple[str, ...], str], ...] = (
    (("1234",), "123"),
    (("2134", "1243"), "132"),
    (("3214", "1432"), "321"),
    (("4231", "1324"), "213"),
    (("2431",), "231"),
    (("3241",), "312"),
)


def act_on_tuple(p: Perm, entries: Sequence) -> tuple:
    """Permute entries: position ``j`` receives entry ``p(j)``."""
    return tuple(entries[i - 1] for i in p)


def left_coset(p: Perm) -> frozenset:
    return frozenset(compose(p, k) for k in KLEIN)


def sorting_perm(entries: Sequence) -> tuple[Perm, tuple]:
    """For pairwise distinct ``entries`` return ``(pi, R)`` with ``R`` sorted
    and ``act_on_tuple(pi, R) == entries``."""
    rep = tuple(sorted(entries))
    return tuple(rep.index(x) + 1 for x in entries), rep
