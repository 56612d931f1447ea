"""Synthetic data generators and file ingestion for the three models.

Generators are pure functions of their spec and seed: streams come from
a counter-based Philox generator and Gaussian draws use Box-Muller in a
fixed order (see :mod:`cvbopt.rng`), so identical seeds give identical
outputs across runs.
"""

import re
from dataclasses import dataclass

import numpy as np

from .models import AlignmentMatrix, Corpus, MogData
from .rng import make_rng, standard_normal

__all__ = [
    "MogGenSpec",
    "generate_mog",
    "generate_corpus",
    "generate_alignments",
    "load_points_csv",
    "load_docword",
    "load_alignments",
    "write_points_csv",
    "write_docword",
    "write_alignments",
]


@dataclass(frozen=True)
class MogGenSpec:
    """Five-cluster mixture layout: one center at the origin, four at
    the corners (+-R, +-R), unit spherical covariance throughout."""

    R: float
    n_per_cluster: int
    seed: int

    def __post_init__(self):
        if not (np.isfinite(self.R) and self.R > 0.0):
            raise ValueError("R must be finite and > 0")
        if self.n_per_cluster < 1:
            raise ValueError("n_per_cluster must be >= 1")

    def centers(self):
        r = float(self.R)
        return np.array([[0.0, 0.0], [r, r], [r, -r], [-r, r], [-r, -r]])


def generate_mog(spec):
    """Draw 5 * n_per_cluster points, one block per cluster in order."""
    rng = make_rng(spec.seed)
    blocks = [
        c + standard_normal(rng, (spec.n_per_cluster, 2)) for c in spec.centers()
    ]
    return MogData(np.concatenate(blocks, axis=0))


def _categorical_rows(p_rows, u):
    """Inverse-CDF categorical draw for one probability row per sample."""
    cum = np.cumsum(p_rows, axis=1)
    return (cum < u[:, None]).sum(axis=1)


def generate_corpus(k, n_docs, vocab_size, doc_len, alpha, beta, seed):
    """Plant topics and sample a bag-of-words corpus.

    Returns the corpus together with the planted word distributions
    (one row per topic) for recovery tests.
    """
    if min(k, n_docs, vocab_size, doc_len) < 1:
        raise ValueError("k, n_docs, vocab_size and doc_len must be >= 1")
    rng = make_rng(seed)
    theta = rng.dirichlet(np.full(k, float(alpha)), size=n_docs)
    phi = rng.dirichlet(np.full(vocab_size, float(beta)), size=k)
    counts = np.zeros((n_docs, vocab_size), dtype=np.int64)
    for d in range(n_docs):
        z = _categorical_rows(
            np.broadcast_to(theta[d], (doc_len, k)), rng.random(doc_len)
        )
        w = _categorical_rows(phi[z], rng.random(doc_len))
        np.add.at(counts[d], w, 1)
    doc_ids, word_ids = np.nonzero(counts)
    corpus = Corpus(
        n_docs=n_docs,
        vocab_size=vocab_size,
        doc_ids=doc_ids,
        word_ids=word_ids,
        counts=counts[doc_ids, word_ids].astype(np.float64),
    )
    return corpus, phi


def generate_alignments(m, n_reads, ambiguity, noise_sigma, seed):
    """Plant abundances and sample noisy read alignments.

    Each read aligns to its true transcript (base log-likelihood 0) and
    ambiguity - 1 decoys (base -|Normal(0,1)|); every entry then gets a
    Normal(0, noise_sigma) perturbation. Returns the alignments and the
    planted abundance vector.
    """
    if not 1 <= ambiguity <= m:
        raise ValueError("ambiguity must lie in [1, m]")
    if n_reads < 1:
        raise ValueError("n_reads must be >= 1")
    if noise_sigma < 0.0:
        raise ValueError("noise_sigma must be >= 0")
    rng = make_rng(seed)
    theta = rng.dirichlet(np.ones(m))
    true = _categorical_rows(np.broadcast_to(theta, (n_reads, m)), rng.random(n_reads))
    entries = []
    for i in range(n_reads):
        t = int(true[i])
        cand = [t]
        if ambiguity > 1:
            others = np.delete(np.arange(m), t)
            cand.extend(int(x) for x in rng.permutation(others)[: ambiguity - 1])
        base = np.zeros(ambiguity)
        if ambiguity > 1:
            base[1:] = -np.abs(standard_normal(rng, (ambiguity - 1,)))
        loglik = base + noise_sigma * standard_normal(rng, (ambiguity,))
        entries.extend(zip([i] * ambiguity, cand, loglik))
    return AlignmentMatrix.from_entries(n_reads, m, entries), theta


def _fail(path, lineno, msg):
    raise ValueError(f"{path}:{lineno}: {msg}")


def load_points_csv(path):
    """Observation matrix from headerless CSV, one row per point."""
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                _fail(path, lineno, f"expected {width} columns, found {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                _fail(path, lineno, f"not a number: {text!r}")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return MogData(np.array(rows))


def write_points_csv(path, data):
    """Inverse of load_points_csv; floats use shortest round-trip form."""
    with open(path, "w") as fh:
        for row in data.Y:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_int(path, fh, lineno, what):
    line = fh.readline()
    if not line:
        _fail(path, lineno, f"unexpected end of file, expected {what}")
    try:
        return int(line.strip())
    except ValueError:
        _fail(path, lineno, f"expected {what}, found {line.strip()!r}")


def load_docword(path, vocab_path=None):
    """Corpus from UCI docword format (1-indexed ids).

    Three header lines give the document count, vocabulary size and
    triple count; each following line is `docId wordId count`. A vocab
    file supplies one word per line.
    """
    vocab = None
    if vocab_path is not None:
        with open(vocab_path) as fh:
            vocab = tuple(line.strip() for line in fh if line.strip())
    with open(path) as fh:
        n_docs = _read_int(path, fh, 1, "document count")
        vocab_size = _read_int(path, fh, 2, "vocabulary size")
        nnz = _read_int(path, fh, 3, "triple count")
        doc_ids = np.empty(nnz, dtype=np.int64)
        word_ids = np.empty(nnz, dtype=np.int64)
        counts = np.empty(nnz, dtype=np.float64)
        for i in range(nnz):
            lineno = 4 + i
            line = fh.readline()
            if not line:
                _fail(path, lineno, f"unexpected end of file, expected triple {i + 1} of {nnz}")
            parts = line.split()
            if len(parts) != 3:
                _fail(path, lineno, f"expected `docId wordId count`, found {line.strip()!r}")
            try:
                d, w, c = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                _fail(path, lineno, f"expected integers, found {line.strip()!r}")
            if not 1 <= d <= n_docs:
                _fail(path, lineno, f"doc id {d} outside 1..{n_docs}")
            if not 1 <= w <= vocab_size:
                _fail(path, lineno, f"word id {w} outside 1..{vocab_size}")
            doc_ids[i], word_ids[i], counts[i] = d - 1, w - 1, c
        extra = fh.readline()
        if extra.strip():
            _fail(path, 4 + nnz, f"unexpected data after {nnz} triples")
    return Corpus(
        n_docs=n_docs,
        vocab_size=vocab_size,
        doc_ids=doc_ids,
        word_ids=word_ids,
        counts=counts,
        vocab=vocab,
    )


def write_docword(path, corpus):
    """Inverse of load_docword (vocab travels separately)."""
    with open(path, "w") as fh:
        fh.write(f"{corpus.n_docs}\n{corpus.vocab_size}\n{corpus.n_types}\n")
        for d, w, c in zip(corpus.doc_ids, corpus.word_ids, corpus.counts):
            fh.write(f"{d + 1} {w + 1} {int(c)}\n")


_ALIGN_HEADER = re.compile(r"#reads=(\d+)\s+#transcripts=(\d+)\s*$")


def load_alignments(path):
    """AlignmentMatrix from `readId transcriptId logLik` lines.

    The first line is a header `#reads=N #transcripts=M`; ids are
    0-indexed.
    """
    with open(path) as fh:
        header = fh.readline()
        match = _ALIGN_HEADER.match(header.strip())
        if not match:
            _fail(path, 1, "expected header `#reads=N #transcripts=M`")
        n_reads, m = int(match.group(1)), int(match.group(2))
        entries = []
        for lineno, line in enumerate(fh, 2):
            text = line.strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 3:
                _fail(path, lineno, f"expected `readId transcriptId logLik`, found {text!r}")
            try:
                entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError:
                _fail(path, lineno, f"could not parse {text!r}")
            r, t = entries[-1][0], entries[-1][1]
            if not 0 <= r < n_reads:
                _fail(path, lineno, f"read id {r} outside 0..{n_reads - 1}")
            if not 0 <= t < m:
                _fail(path, lineno, f"transcript id {t} outside 0..{m - 1}")
    return AlignmentMatrix.from_entries(n_reads, m, entries)


def write_alignments(path, alignments):
    """Inverse of load_alignments."""
    with open(path, "w") as fh:
        fh.write(
            f"#reads={alignments.n_reads} #transcripts={alignments.n_transcripts}\n"
        )
        for i in range(alignments.n_reads):
            for s in range(alignments.indptr[i], alignments.indptr[i + 1]):
                fh.write(f"{i} {alignments.cols[s]} {float(alignments.loglik[s])!r}\n")
