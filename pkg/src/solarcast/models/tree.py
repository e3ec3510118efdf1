"""Exhaustive-split regression trees, grown one depth level at a time.

Every split score has the form ``G_L^2/(H_L+reg) + G_R^2/(H_R+reg) - G^2/(H+reg)``
and every leaf value is ``G/(H+reg)``. With ``G = sum(w*y)``, ``H = sum(w)``
and ``reg = 0`` this is weighted variance reduction with a weighted-mean
leaf; with ``G = -sum(gradient)``, ``H = sum(hessian)`` it is the regularized
second-order boosting gain.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

# relative floor below which a gain counts as zero
_GAIN_RTOL = 1e-12


@dataclass(frozen=True)
class DecisionTree:
    """Flat array tree: ``feature[i] < 0`` marks node ``i`` as a leaf.

    Rows with ``x[feature] <= threshold`` go to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] >= 0]
        return node

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max()) if self.n_nodes else 0

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=float),
            d.get("max_depth"),
            d.get("min_samples_leaf", 1),
        )


def presort(X: np.ndarray) -> np.ndarray:
    """Per-feature stable argsort, shape (d, n); reusable across trees on the same X."""
    return np.argsort(X, axis=0, kind="stable").T.copy()


def _midpoint(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    mid = a + (b - a) / 2.0
    # adjacent floats: the midpoint can round up onto b
    return np.where(mid >= b, a, mid)


def grow_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    *,
    counts: Optional[np.ndarray] = None,
    reg: float = 0.0,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    max_features: Optional[int] = None,
    feature_mask: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    order: Optional[np.ndarray] = None,
) -> DecisionTree:
    """Greedy tree on per-row statistics ``g`` (numerator) and ``h`` (denominator).

    ``counts`` are the row multiplicities used for ``min_samples_leaf`` (rows
    with zero count are ignored). ``max_features`` draws that many candidate
    features afresh for every node; ``feature_mask`` restricts the candidates
    for the whole tree. Ties go to the lowest feature index, then the lowest
    threshold. ``order`` is an optional :func:`presort` of ``X``.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    c = np.ones(n) if counts is None else np.asarray(counts, dtype=float)
    if order is None:
        order = presort(X)
    allowed_features = np.arange(d) if feature_mask is None else np.flatnonzero(feature_mask)
    if max_features is not None and max_features >= allowed_features.size:
        max_features = None
    if max_features is not None and rng is None:
        raise ValueError("max_features needs an rng")

    node_of = np.where(c > 0, 0, -1).astype(np.int64)
    live = node_of >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.sum(np.where(h[live] > 0, g[live] ** 2 / h[live], 0.0)) if live.any() else 0.0
    min_gain = _GAIN_RTOL * max(scale, 1e-300)

    # nodes are numbered level by level; children of a level sit in creation order
    levels: list[tuple[np.ndarray, ...]] = []
    offset = 0
    m = 1
    depth = 0
    while m:
        act = node_of >= 0
        G = np.bincount(node_of[act], weights=g[act], minlength=m)
        H = np.bincount(node_of[act], weights=h[act], minlength=m)
        C = np.bincount(node_of[act], weights=c[act], minlength=m)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = np.where(H + reg > 0, G / (H + reg), 0.0)
        feat = np.full(m, -1, dtype=np.int64)
        thr = np.full(m, np.nan)
        lft = np.full(m, -1, dtype=np.int64)
        rgt = np.full(m, -1, dtype=np.int64)
        levels.append((feat, thr, lft, rgt, value))
        if max_depth is not None and depth >= max_depth:
            break

        with np.errstate(divide="ignore", invalid="ignore"):
            parent_score = G ** 2 / (H + reg)
        best_gain = np.full(m, -np.inf)
        best_feat = np.full(m, -1, dtype=np.int64)
        best_thr = np.full(m, np.nan)
        if max_features is not None:
            keys = rng.random((m, allowed_features.size))
            picks = np.argsort(keys, axis=1)[:, :max_features]
            allowed = np.zeros((m, d), dtype=bool)
            np.put_along_axis(allowed, allowed_features[picks], True, axis=1)
        else:
            allowed = None
        id_dtype = np.uint16 if m < 65536 else np.int64

        for f in allowed_features:
            o = order[f]
            if allowed is None:
                o = o[act[o]]
            else:
                o = o[act[o]]
                o = o[allowed[node_of[o], f]]
                if o.size < 2:
                    continue
            s = np.argsort(node_of[o].astype(id_dtype), kind="stable")
            o = o[s]
            nid = node_of[o]
            xs = X[o, f]
            cg = np.cumsum(g[o])
            ch = np.cumsum(h[o])
            cc = np.cumsum(c[o])
            starts = np.searchsorted(nid, np.arange(m))
            base_g = np.where(starts > 0, cg[starts - 1], 0.0)
            base_h = np.where(starts > 0, ch[starts - 1], 0.0)
            base_c = np.where(starts > 0, cc[starts - 1], 0.0)
            gl = cg - base_g[nid]
            hl = ch - base_h[nid]
            cl = cc - base_c[nid]
            valid = np.zeros(o.size, dtype=bool)
            valid[:-1] = (nid[1:] == nid[:-1]) & (xs[1:] > xs[:-1])
            valid &= (cl >= min_samples_leaf) & (C[nid] - cl >= min_samples_leaf)
            valid &= (hl + reg > 0) & (H[nid] - hl + reg > 0)
            if not valid.any():
                continue
            pos = np.flatnonzero(valid)
            vn = nid[pos]
            gr = G[vn] - gl[pos]
            hr = H[vn] - hl[pos]
            gain = gl[pos] ** 2 / (hl[pos] + reg) + gr ** 2 / (hr + reg) - parent_score[vn]
            fbest = np.full(m, -np.inf)
            np.maximum.at(fbest, vn, gain)
            hit = gain == fbest[vn]
            # positions run in ascending x inside each node: first hit = lowest threshold
            nodes, first = np.unique(vn[hit], return_index=True)
            j = pos[hit][first]
            better = fbest[nodes] > best_gain[nodes]
            nodes, j = nodes[better], j[better]
            best_gain[nodes] = fbest[nodes]
            best_feat[nodes] = f
            best_thr[nodes] = _midpoint(xs[j], xs[j + 1])

        split = best_gain > min_gain
        n_split = int(split.sum())
        if not n_split:
            break
        local = np.full(m, -1, dtype=np.int64)
        local[split] = np.arange(n_split)
        child0 = offset + m + 2 * local[split]
        feat[split] = best_feat[split]
        thr[split] = best_thr[split]
        lft[split] = child0
        rgt[split] = child0 + 1

        rows = np.flatnonzero(act)
        nd = node_of[rows]
        node_of[rows] = -1
        keep = split[nd]
        rows, nd = rows[keep], nd[keep]
        go_right = X[rows, best_feat[nd]] > best_thr[nd]
        node_of[rows] = 2 * local[nd] + go_right
        offset += m
        m = 2 * n_split
        depth += 1

    feature, threshold, left, right, value = (np.concatenate(parts) for parts in zip(*levels))
    return DecisionTree(feature, threshold, left, right, value, max_depth, min_samples_leaf)


def fit_tree(X, y, weights=None, max_depth: Optional[int] = None, min_samples_leaf: int = 1,
             **kwargs) -> DecisionTree:
    """CART regression tree maximizing weighted variance reduction.

    Leaves predict the weighted mean of their rows. ``weights`` double as the
    row multiplicities that ``min_samples_leaf`` counts.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(y.size) if weights is None else np.asarray(weights, dtype=float)
    return grow_tree(X, w * y, w, counts=w, reg=0.0, max_depth=max_depth,
                     min_samples_leaf=min_samples_leaf, **kwargs)
