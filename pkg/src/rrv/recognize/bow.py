"""Bag-of-words encoding of RRV sequences with k-means dictionaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..descriptor import SR, ST, WIDTH
from ..errors import DimensionMismatch, EmptyTrainingSet, InvalidParams, TooFewPatches

KINDS = {"rotational": 4, "translational": 3}

# (K_r, K_t) per benchmark
DEFAULT_SIZES = {
    "auslan": (120, 130),
    "msr_action3d": (120, 180),
    "msrc12": (180, 180),
}


@dataclass(frozen=True)
class Dictionary:
    words: np.ndarray  # (K, m)
    kind: str

    def __post_init__(self):
        w = np.asarray(self.words, dtype=float)
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown dictionary kind {self.kind!r}")
        if w.ndim != 2 or w.shape[1] != KINDS[self.kind] or len(w) < 2:
            raise InvalidParams(f"{self.kind} dictionary needs shape (K>=2, {KINDS[self.kind]}), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidParams("non-finite centroid")
        object.__setattr__(self, "words", w)

    @property
    def k(self) -> int:
        return len(self.words)


def sq_dists(x: np.ndarray, c: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Exact squared distances ``(n, k)`` from explicit differences."""
    out = np.empty((len(x), len(c)))
    for s in range(0, len(x), chunk):
        diff = x[s : s + chunk, None, :] - c[None, :, :]
        out[s : s + chunk] = np.einsum("nkm,nkm->nk", diff, diff)
    return out


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(len(x))]
    d2 = sq_dists(x, centers[:1])[:, 0]
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(x))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, len(x) - 1)
        centers[i] = x[idx]
        d2 = np.minimum(d2, sq_dists(x, centers[i : i + 1])[:, 0])
    return centers


def kmeans(x, k: int, seed: int = 42, max_iter: int = 100, tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """k-means++ seeding followed by Lloyd iterations.

    Stops once no centroid moves more than ``tol`` or after ``max_iter``
    rounds. An emptied cluster is re-seeded at the point farthest from its
    centroid. Returns ``(centroids, labels)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidParams("patches must be a 2-D array")
    if k < 2:
        raise InvalidParams("k must be at least 2")
    if len(x) < k:
        raise TooFewPatches(f"{len(x)} patches for {k} words")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(x, k, rng)
    for _ in range(max_iter):
        d2 = sq_dists(x, centers)
        labels = d2.argmin(axis=1)
        new = np.empty_like(centers)
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j]:
                new[j] = x[labels == j].mean(axis=0)
            else:
                far = int(d2[np.arange(len(x)), labels].argmax())
                new[j] = x[far]
                labels[far] = j
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break
    labels = sq_dists(x, centers).argmin(axis=1)
    return centers, labels


def learn_dictionary(patches, k: int, seed: int = 42, kind: str | None = None, **kw) -> Dictionary:
    patches = np.asarray(patches, dtype=float)
    if kind is None:
        kind = {4: "rotational", 3: "translational"}.get(patches.shape[-1])
        if kind is None:
            raise DimensionMismatch(f"patch dimension {patches.shape[-1]} is neither 4 nor 3")
    if patches.shape[-1] != KINDS[kind]:
        raise DimensionMismatch(f"{kind} dictionary needs {KINDS[kind]}-D patches, got {patches.shape[-1]}")
    words, _ = kmeans(patches, k, seed, **kw)
    return Dictionary(words, kind)


def patches(seq) -> tuple[np.ndarray, np.ndarray]:
    """Split a ``(T, 7k)`` sequence into rotational ``(T*k, 4)`` and translational ``(T*k, 3)`` patches."""
    seq = np.asarray(seq, dtype=float)
    if seq.ndim != 2 or seq.shape[1] % WIDTH:
        raise DimensionMismatch(f"descriptor width {seq.shape[-1]} is not a multiple of {WIDTH}")
    blocks = seq.reshape(-1, WIDTH)
    return blocks[:, SR], blocks[:, ST]


def histogram(p: np.ndarray, d: Dictionary) -> np.ndarray:
    """Occurrence frequency of each word under nearest-centroid assignment."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[1] != d.words.shape[1]:
        raise DimensionMismatch(f"{p.shape[-1]}-D patches against a {d.words.shape[1]}-D dictionary")
    h = np.zeros(d.k)
    if len(p) == 0:
        return h
    idx = sq_dists(p, d.words).argmin(axis=1)
    h += np.bincount(idx, minlength=d.k)
    return h / len(p)


@dataclass
class Codebook:
    """Rotational and translational dictionaries for each part, in part order."""

    dicts: dict  # part -> (Dictionary, Dictionary)

    @property
    def parts(self) -> list:
        return list(self.dicts)

    @property
    def dim(self) -> int:
        return sum(r.k + t.k for r, t in self.dicts.values())


def _as_parts(desc) -> dict:
    if hasattr(desc, "parts"):
        return dict(desc.parts)
    return {"all": np.asarray(desc)}


def learn_codebook(descriptors, k_r: int, k_t: int, seed: int = 42) -> Codebook:
    """Learn one rotational and one translational dictionary per part.

    ``descriptors`` are arrays ``(T, 7k)`` (a single part named ``all``) or
    objects with a ``parts`` mapping such as skeleton descriptors.
    """
    descriptors = list(descriptors)
    if not descriptors:
        raise EmptyTrainingSet("no descriptors to learn a codebook from")
    names = list(_as_parts(descriptors[0]))
    dicts = {}
    for name in names:
        rot, tra = zip(*(patches(_as_parts(d)[name]) for d in descriptors))
        dicts[name] = (
            learn_dictionary(np.concatenate(rot), k_r, seed, "rotational"),
            learn_dictionary(np.concatenate(tra), k_t, seed, "translational"),
        )
    return Codebook(dicts)


def encode_bow(seq, codebook: Codebook) -> np.ndarray:
    """Concatenated per-part ``[H_r, H_t]`` histograms, each block summing to one."""
    parts = _as_parts(seq)
    if list(parts) != codebook.parts:
        raise DimensionMismatch(f"parts {list(parts)} do not match codebook parts {codebook.parts}")
    out = []
    for name, (dr, dt) in codebook.dicts.items():
        pr, pt = patches(parts[name])
        out.append(histogram(pr, dr))
        out.append(histogram(pt, dt))
    return np.concatenate(out)
