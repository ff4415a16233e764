"""Reference clustering driver built on explicit cluster merging.

Candidate clusters are the neighborhoods of core points, taken in point
order; two candidates merge when one contains a core point of the
other.  Running the merge loop to a fixed point yields the same
components as the union-find sweep in :mod:`.core`, which the test
suite asserts.  This driver is O(n^2)-ish and exists for readability
and cross-checking, not production use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..track import MotionClass
from .core import Cluster, ClusterParams, Clustering, query_neighbors


@dataclass(eq=False)
class ClusterDraft:
    """Mutable cluster under construction: members plus known core points.

    Drafts compare by identity: two seeds can have equal neighborhoods,
    and the merge loop must treat them as distinct clusters.
    """

    members: set[int]
    cores: set[int] = field(default_factory=set)


def merge_clusters(a: ClusterDraft, b: ClusterDraft) -> bool:
    """Absorb b into a when b has a core point that already belongs to a."""
    if any(j in a.members for j in b.cores):
        a.members |= b.members
        a.cores |= b.cores
        return True
    return False


def dbscansd_merge_loop(
    points,
    params: ClusterParams,
    motion: MotionClass = MotionClass.MOVING,
) -> Clustering:
    n = len(points)
    neighborhoods = [query_neighbors(points, i, params) for i in range(n)]
    core = [len(nb) >= params.n_min for nb in neighborhoods]

    drafts: list[ClusterDraft] = []
    for i in range(n):
        if core[i]:
            drafts.append(
                ClusterDraft(
                    members=set(neighborhoods[i]),
                    cores={j for j in neighborhoods[i] if core[j]},
                )
            )

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(drafts):
            a = drafts[i]
            j = 0
            while j < len(drafts):
                b = drafts[j]
                if a is not b and merge_clusters(a, b):
                    del drafts[j]
                    changed = True
                    if j < i:
                        i -= 1
                else:
                    j += 1
            i += 1

    # Deterministic ids and exclusive membership: clusters ordered by
    # their smallest core index; border points go to the first claiming
    # core in ascending point order.
    drafts.sort(key=lambda d: min(d.cores))
    labels = [-1] * n
    for cid, d in enumerate(drafts):
        for i in sorted(d.cores):
            labels[i] = cid
    for i in range(n):
        if core[i]:
            for j in neighborhoods[i]:
                if labels[j] < 0:
                    labels[j] = labels[i]

    clusters = []
    for cid in range(len(drafts)):
        members = tuple(i for i in range(n) if labels[i] == cid)
        clusters.append(
            Cluster(
                cluster_id=cid,
                member_indices=members,
                core_flags=tuple(core[i] for i in members),
                motion=motion,
            )
        )
    noise = tuple(i for i in range(n) if labels[i] < 0)
    return Clustering(clusters=tuple(clusters), noise=noise, params=params, n_points=n)
