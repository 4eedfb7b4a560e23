"""Knowledge-graph data model, dataset IO, and synthetic benchmark pairs.

Graphs are stored with dense integer entity ids (index into ``entity_labels``)
and an undirected 0/1 adjacency matrix: relation direction is collapsed, the
diagonal is kept empty, and relation labels are retained only for round-trip
fidelity with the on-disk format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DatasetFormatError, IntegrityError, ParameterError

TRIPLE_FILES = ("rel_triples_1", "rel_triples_2")
LINKS_FILE = "ent_links"


@dataclass(frozen=True, eq=False)
class KnowledgeGraph:
    """One graph: labelled entities/relations, triples, undirected adjacency."""

    entity_labels: tuple[str, ...]
    relation_labels: tuple[str, ...]
    triples: tuple[tuple[int, int, int], ...]
    adjacency: sp.csr_matrix = field(repr=False)

    @property
    def entity_count(self) -> int:
        return len(self.entity_labels)

    def __post_init__(self):
        n = len(self.entity_labels)
        if len(set(self.entity_labels)) != n:
            raise IntegrityError("entity labels are not unique")
        r = len(self.relation_labels)
        for h, rel, t in self.triples:
            if not (0 <= h < n and 0 <= t < n):
                raise IntegrityError(f"triple ({h},{rel},{t}) has entity index out of range")
            if not 0 <= rel < r:
                raise IntegrityError(f"triple ({h},{rel},{t}) has relation index out of range")
        if self.adjacency.shape != (n, n):
            raise IntegrityError("adjacency shape does not match entity count")

    @classmethod
    def from_triples(cls, entity_labels, relation_labels, triples) -> "KnowledgeGraph":
        """Build the symmetric 0/1 adjacency from triples (self-loops dropped)."""
        n = len(entity_labels)
        r = len(relation_labels)
        for h, rel, t in triples:
            if not (0 <= h < n and 0 <= t < n and 0 <= rel < r):
                raise IntegrityError(f"triple ({h},{rel},{t}) has index out of range")
        heads = np.array([h for h, _, t in triples if h != t], dtype=np.int64)
        tails = np.array([t for h, _, t in triples if h != t], dtype=np.int64)
        data = np.ones(2 * len(heads), dtype=float)
        rows = np.concatenate([heads, tails])
        cols = np.concatenate([tails, heads])
        adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        adj.data[:] = 1.0  # collapse duplicate edges
        adj.sort_indices()
        return cls(
            entity_labels=tuple(entity_labels),
            relation_labels=tuple(relation_labels),
            triples=tuple((int(h), int(r), int(t)) for h, r, t in triples),
            adjacency=adj,
        )


@dataclass(frozen=True)
class SeedAlignments:
    """Labelled train pairs plus held-out test pairs, all as index pairs."""

    train_pairs: tuple[tuple[int, int], ...]
    test_pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        train_src = [s for s, _ in self.train_pairs]
        train_tgt = [t for _, t in self.train_pairs]
        if len(set(train_src)) != len(train_src) or len(set(train_tgt)) != len(train_tgt):
            raise IntegrityError("train pairs are not one-to-one")
        test_src = {s for s, _ in self.test_pairs}
        test_tgt = {t for _, t in self.test_pairs}
        if set(train_src) & test_src or set(train_tgt) & test_tgt:
            raise IntegrityError("train and test pairs overlap on some entity")


@dataclass(frozen=True)
class DatasetBundle:
    source: KnowledgeGraph
    target: KnowledgeGraph
    seeds: SeedAlignments

    def __post_init__(self):
        n, m = self.source.entity_count, self.target.entity_count
        for s, t in (*self.seeds.train_pairs, *self.seeds.test_pairs):
            if not (0 <= s < n and 0 <= t < m):
                raise IntegrityError(f"alignment pair ({s},{t}) out of range")


def normalized_adjacency(g: KnowledgeGraph) -> sp.csr_matrix:
    """Row-normalized adjacency D^-1 A; rows of isolated entities stay zero."""
    adj = g.adjacency
    deg = np.asarray(adj.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return sp.diags(inv).tocsr() @ adj


def _read_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DatasetFormatError(f"missing dataset file: {path}") from None
    except OSError as exc:
        raise DatasetFormatError(f"cannot read {path}: {exc}") from None
    for i, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if line:
            yield i, line


def _load_triples(path: Path):
    """Return (entity_labels, relation_labels, triples) with ids by first appearance."""
    ent_ids: dict[str, int] = {}
    rel_ids: dict[str, int] = {}
    triples = []
    for lineno, line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise DatasetFormatError(
                f"{path.name}:{lineno}: expected head<TAB>relation<TAB>tail"
            )
        h, r, t = parts
        hid = ent_ids.setdefault(h, len(ent_ids))
        tid = ent_ids.setdefault(t, len(ent_ids))
        rid = rel_ids.setdefault(r, len(rel_ids))
        triples.append((hid, rid, tid))
    return list(ent_ids), list(rel_ids), triples


def load_openea_dataset(dir_path, train_ratio: float, rng_seed: int = 0) -> DatasetBundle:
    """Load an OpenEA-style directory and split its links into train/test.

    The first ceil(train_ratio * |links|) links after a seeded shuffle become
    the train pairs; the seed is recorded by callers for reproducibility.
    """
    if not 0.0 <= train_ratio <= 1.0:
        raise ParameterError(f"train_ratio={train_ratio!r} must be in [0, 1]")
    root = Path(dir_path)
    graphs = []
    lookups = []
    for fname in TRIPLE_FILES:
        ents, rels, triples = _load_triples(root / fname)
        graphs.append(KnowledgeGraph.from_triples(ents, rels, triples))
        lookups.append({label: i for i, label in enumerate(ents)})

    links = []
    seen_src: dict[str, int] = {}
    seen_tgt: dict[str, int] = {}
    links_path = root / LINKS_FILE
    for lineno, line in _read_lines(links_path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DatasetFormatError(f"{LINKS_FILE}:{lineno}: expected source<TAB>target")
        s_label, t_label = parts
        if s_label in seen_src:
            raise IntegrityError(
                f"{LINKS_FILE}:{lineno}: duplicate source label {s_label!r} "
                f"(first at line {seen_src[s_label]})"
            )
        if t_label in seen_tgt:
            raise IntegrityError(
                f"{LINKS_FILE}:{lineno}: duplicate target label {t_label!r} "
                f"(first at line {seen_tgt[t_label]})"
            )
        seen_src[s_label] = lineno
        seen_tgt[t_label] = lineno
        if s_label not in lookups[0]:
            raise IntegrityError(
                f"{LINKS_FILE}:{lineno}: unknown source entity {s_label!r}"
            )
        if t_label not in lookups[1]:
            raise IntegrityError(
                f"{LINKS_FILE}:{lineno}: unknown target entity {t_label!r}"
            )
        links.append((lookups[0][s_label], lookups[1][t_label]))

    order = np.random.default_rng(rng_seed).permutation(len(links))
    n_train = math.ceil(train_ratio * len(links))
    shuffled = [links[i] for i in order]
    seeds = SeedAlignments(
        train_pairs=tuple(shuffled[:n_train]),
        test_pairs=tuple(shuffled[n_train:]),
    )
    return DatasetBundle(source=graphs[0], target=graphs[1], seeds=seeds)


def write_openea_dataset(bundle: DatasetBundle, dir_path) -> None:
    """Write a bundle back to the OpenEA text layout (links: train then test)."""
    root = Path(dir_path)
    root.mkdir(parents=True, exist_ok=True)
    for fname, graph in zip(TRIPLE_FILES, (bundle.source, bundle.target)):
        lines = [
            f"{graph.entity_labels[h]}\t{graph.relation_labels[r]}\t{graph.entity_labels[t]}"
            for h, r, t in graph.triples
        ]
        (root / fname).write_text("\n".join(lines) + "\n", encoding="utf-8")
    link_lines = [
        f"{bundle.source.entity_labels[s]}\t{bundle.target.entity_labels[t]}"
        for s, t in (*bundle.seeds.train_pairs, *bundle.seeds.test_pairs)
    ]
    (root / LINKS_FILE).write_text("\n".join(link_lines) + "\n", encoding="utf-8")


def _largest_component(adj: sp.csr_matrix) -> np.ndarray:
    _, labels = sp.csgraph.connected_components(adj, directed=False)
    return np.flatnonzero(labels == np.argmax(np.bincount(labels)))


def generate_synthetic_pair(
    n: int,
    edge_prob: float,
    perturb: float,
    seed_ratio: float,
    rng_seed: int,
) -> DatasetBundle:
    """Build an aligned graph pair: ER source, permuted (optionally noisy) copy.

    The source is G(n, edge_prob) restricted to its largest connected
    component; the target relabels it by a random permutation pi, then a
    fraction ``perturb`` of edges is independently deleted and the same
    expected number of random non-edges added. ceil(seed_ratio * n_c) pairs
    (v, pi(v)) become train pairs, the rest test pairs. Deterministic in
    ``rng_seed``.
    """
    if n < 2:
        raise ParameterError(f"n={n} must be at least 2")
    if not 0.0 <= perturb < 1.0:
        raise ParameterError(f"perturb={perturb!r} must be in [0, 1)")
    if not 0.0 < seed_ratio <= 1.0:
        raise ParameterError(f"seed_ratio={seed_ratio!r} must be in (0, 1]")
    if not 0.0 <= edge_prob <= 1.0:
        raise ParameterError(f"edge_prob={edge_prob!r} must be in [0, 1]")

    rng = np.random.default_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    edge_mask = rng.random(len(iu)) < edge_prob
    adj = sp.csr_matrix(
        (np.ones(edge_mask.sum()), (iu[edge_mask], ju[edge_mask])), shape=(n, n)
    )
    adj = adj + adj.T
    keep = _largest_component(adj)
    adj_s = adj[np.ix_(keep, keep)].tocsr()
    nc = len(keep)

    pi = rng.permutation(nc)
    perm = sp.csr_matrix((np.ones(nc), (pi, np.arange(nc))), shape=(nc, nc))
    adj_t = (perm @ adj_s @ perm.T).tocsr()

    if perturb > 0.0:
        dense_t = adj_t.toarray() > 0
        ti, tj = np.triu_indices(nc, k=1)
        is_edge = dense_t[ti, tj]
        edges = np.flatnonzero(is_edge)
        non_edges = np.flatnonzero(~is_edge)
        drop = edges[rng.random(len(edges)) < perturb]
        add_prob = perturb * len(edges) / max(len(non_edges), 1)
        add = non_edges[rng.random(len(non_edges)) < add_prob]
        dense_t[ti[drop], tj[drop]] = False
        dense_t[tj[drop], ti[drop]] = False
        dense_t[ti[add], tj[add]] = True
        dense_t[tj[add], ti[add]] = True
        adj_t = sp.csr_matrix(dense_t.astype(float))

    source = _graph_from_adjacency(adj_s, prefix="s")
    target = _graph_from_adjacency(adj_t, prefix="t")

    n_seeds = math.ceil(seed_ratio * nc)
    seed_nodes = rng.permutation(nc)[:n_seeds]
    seed_set = set(int(v) for v in seed_nodes)
    train = tuple((int(v), int(pi[v])) for v in seed_nodes)
    test = tuple((v, int(pi[v])) for v in range(nc) if v not in seed_set)
    return DatasetBundle(
        source=source, target=target, seeds=SeedAlignments(train, test)
    )


def _graph_from_adjacency(adj: sp.csr_matrix, prefix: str) -> KnowledgeGraph:
    nc = adj.shape[0]
    coo = sp.triu(adj, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    triples = [(int(coo.row[i]), 0, int(coo.col[i])) for i in order]
    return KnowledgeGraph.from_triples(
        entity_labels=[f"{prefix}{i}" for i in range(nc)],
        relation_labels=["r0"],
        triples=triples,
    )
