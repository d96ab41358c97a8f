"""Compact transformer-encoder text classifier with hand-written backprop.

Token + learned position embeddings feed a stack of post-norm encoder
layers (multi-head self-attention and a GELU feed-forward block, each with
residual connection and layer normalization); the first-position state is
classified by a linear head under softmax cross-entropy. Optimization is
Adam with decoupled weight decay (applied directly to matrix-shaped
weights, not through gradients).

Everything runs in float64 NumPy: desk-scale by design, deterministic per
seed, and checkable against central finite differences (:func:`grad_check`).
Cross-layer parameter sharing reuses one layer parameter set for every
encoder pass when ``share_layer_params`` is set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Dataset
from .tokenization import PAD_TOKEN, WordPieceVocab, encode

LN_EPS = 1e-5
MASK_NEG = 1e9
_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class TransformerConfig:
    vocab_size: int = 0
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 128
    max_len: int = 64
    share_layer_params: bool = False
    dropout: float = 0.1

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ModelError("d_model must be divisible by n_heads")
        if self.max_len < 2:
            raise ModelError("max_len must be >= 2")
        if not (0.0 <= self.dropout < 1.0):
            raise ModelError("dropout must lie in [0, 1)")


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 2e-5
    epochs: int = 4
    weight_decay: float = 0.01
    batch_size: int = 32
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ModelError("epochs must be >= 1")
        if self.learning_rate <= 0.0:
            raise ModelError("learning_rate must be positive")


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _gelu(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.tanh(_GELU_C * (z + _GELU_A * z**3))
    return 0.5 * z * (1.0 + t), t


def _gelu_grad(z: np.ndarray, t: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + t) + 0.5 * z * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * z * z)


def _layer_norm(u: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = u.mean(axis=-1, keepdims=True)
    var = ((u - mu) ** 2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (u - mu) * inv
    return g * xhat + b, (xhat, inv)


def _layer_norm_back(dy: np.ndarray, g: np.ndarray, cache):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=(0, 1))
    db = dy.sum(axis=(0, 1))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


class TransformerClassifier:
    """Binary text classifier; parameters live in a flat name->array dict."""

    def __init__(self, config: TransformerConfig, vocab: WordPieceVocab, seed: int = 0):
        if config.vocab_size and config.vocab_size != len(vocab):
            raise ModelError("config vocab_size disagrees with the vocabulary")
        self.config = config if config.vocab_size else replace(config, vocab_size=len(vocab))
        self.vocab = vocab
        self.rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        self.history: list[float] = []
        self._init_params()

    # -- parameters ---------------------------------------------------------

    def _add(self, name: str, shape, kind: str = "weight"):
        if kind == "weight":
            self.params[name] = self.rng.normal(0.0, 0.02, size=shape)
        elif kind == "zeros":
            self.params[name] = np.zeros(shape)
        else:
            self.params[name] = np.ones(shape)

    def _layer_prefixes(self) -> list[str]:
        if self.config.share_layer_params:
            return ["enc.shared."] * self.config.n_layers
        return ["enc.%d." % i for i in range(self.config.n_layers)]

    def _init_params(self):
        c = self.config
        self._add("tok_emb", (c.vocab_size, c.d_model))
        self._add("pos_emb", (c.max_len, c.d_model))
        for prefix in dict.fromkeys(self._layer_prefixes()):
            for w in ("Wq", "Wk", "Wv", "Wo"):
                self._add(prefix + w, (c.d_model, c.d_model))
            for b in ("bq", "bk", "bv", "bo"):
                self._add(prefix + b, (c.d_model,), "zeros")
            self._add(prefix + "ln1_g", (c.d_model,), "ones")
            self._add(prefix + "ln1_b", (c.d_model,), "zeros")
            self._add(prefix + "W1", (c.d_model, c.d_ff))
            self._add(prefix + "b1", (c.d_ff,), "zeros")
            self._add(prefix + "W2", (c.d_ff, c.d_model))
            self._add(prefix + "b2", (c.d_model,), "zeros")
            self._add(prefix + "ln2_g", (c.d_model,), "ones")
            self._add(prefix + "ln2_b", (c.d_model,), "zeros")
        self._add("head_W", (c.d_model, 2))
        self._add("head_b", (2,), "zeros")

    def n_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    # -- forward ------------------------------------------------------------

    def _dropout(self, x: np.ndarray, training: bool):
        p = self.config.dropout
        if not training or p == 0.0:
            return x, None
        keep = (self.rng.random(x.shape) >= p).astype(np.float64) / (1.0 - p)
        return x * keep, keep

    def _forward(self, ids: np.ndarray, mask: np.ndarray, training: bool):
        c = self.config
        P = self.params
        T = ids.shape[1]
        if T > c.max_len:
            raise ModelError("sequence length %d exceeds max_len %d" % (T, c.max_len))
        x = P["tok_emb"][ids] + P["pos_emb"][:T]
        x, emb_keep = self._dropout(x, training)
        caches = {"ids": ids, "mask": mask, "emb_keep": emb_keep, "layers": []}
        key_bias = (mask[:, None, None, :] - 1.0) * MASK_NEG
        dh = c.d_model // c.n_heads
        scale = 1.0 / math.sqrt(dh)
        for prefix in self._layer_prefixes():
            lc = {"prefix": prefix, "x_in": x}
            q = x @ P[prefix + "Wq"] + P[prefix + "bq"]
            k = x @ P[prefix + "Wk"] + P[prefix + "bk"]
            v = x @ P[prefix + "Wv"] + P[prefix + "bv"]
            Q, K, V = (_split_heads(a, c.n_heads) for a in (q, k, v))
            scores = Q @ K.transpose(0, 1, 3, 2) * scale + key_bias
            A = _softmax(scores)
            Ad, a_keep = self._dropout(A, training)
            ctx = _merge_heads(Ad @ V)
            attn = ctx @ P[prefix + "Wo"] + P[prefix + "bo"]
            attn_d, attn_keep = self._dropout(attn, training)
            x1, ln1 = _layer_norm(x + attn_d, P[prefix + "ln1_g"], P[prefix + "ln1_b"])
            z1 = x1 @ P[prefix + "W1"] + P[prefix + "b1"]
            act, gelu_t = _gelu(z1)
            ff = act @ P[prefix + "W2"] + P[prefix + "b2"]
            ff_d, ff_keep = self._dropout(ff, training)
            x2, ln2 = _layer_norm(x1 + ff_d, P[prefix + "ln2_g"], P[prefix + "ln2_b"])
            lc.update(
                Q=Q, K=K, V=V, A=A, Ad=Ad, a_keep=a_keep, ctx=ctx, attn_keep=attn_keep,
                ln1=ln1, x1=x1, z1=z1, gelu_t=gelu_t, act=act, ff_keep=ff_keep, ln2=ln2,
            )
            caches["layers"].append(lc)
            x = x2
        cls = x[:, 0, :]
        logits = cls @ P["head_W"] + P["head_b"]
        caches["cls"] = cls
        return logits, caches

    # -- backward -----------------------------------------------------------

    def loss_and_grads(self, ids, mask, y, training: bool = True):
        """Mean cross-entropy over the batch and gradients for every parameter."""
        c = self.config
        P = self.params
        B = ids.shape[0]
        y = np.asarray(y, dtype=np.int64)
        logits, caches = self._forward(ids, mask, training)
        probs = _softmax(logits)
        onehot = np.zeros_like(probs)
        onehot[np.arange(B), y] = 1.0
        loss = float(-np.mean(np.log(np.maximum(probs[np.arange(B), y], 1e-300))))

        grads = {name: np.zeros_like(p) for name, p in P.items()}
        dlogits = (probs - onehot) / B
        grads["head_W"] += caches["cls"].T @ dlogits
        grads["head_b"] += dlogits.sum(axis=0)
        dx = np.zeros((B, ids.shape[1], c.d_model))
        dx[:, 0, :] = dlogits @ P["head_W"].T

        dh = c.d_model // c.n_heads
        scale = 1.0 / math.sqrt(dh)
        for lc in reversed(caches["layers"]):
            prefix = lc["prefix"]
            dres2, dg2, db2 = _layer_norm_back(dx, P[prefix + "ln2_g"], lc["ln2"])
            grads[prefix + "ln2_g"] += dg2
            grads[prefix + "ln2_b"] += db2
            dff = dres2 if lc["ff_keep"] is None else dres2 * lc["ff_keep"]
            act_flat = lc["act"].reshape(-1, c.d_ff)
            dff_flat = dff.reshape(-1, c.d_model)
            grads[prefix + "W2"] += act_flat.T @ dff_flat
            grads[prefix + "b2"] += dff_flat.sum(axis=0)
            dact = dff @ P[prefix + "W2"].T
            dz1 = dact * _gelu_grad(lc["z1"], lc["gelu_t"])
            x1_flat = lc["x1"].reshape(-1, c.d_model)
            dz1_flat = dz1.reshape(-1, c.d_ff)
            grads[prefix + "W1"] += x1_flat.T @ dz1_flat
            grads[prefix + "b1"] += dz1_flat.sum(axis=0)
            dx1 = dres2 + dz1 @ P[prefix + "W1"].T

            dres1, dg1, db1 = _layer_norm_back(dx1, P[prefix + "ln1_g"], lc["ln1"])
            grads[prefix + "ln1_g"] += dg1
            grads[prefix + "ln1_b"] += db1
            dattn = dres1 if lc["attn_keep"] is None else dres1 * lc["attn_keep"]
            ctx_flat = lc["ctx"].reshape(-1, c.d_model)
            dattn_flat = dattn.reshape(-1, c.d_model)
            grads[prefix + "Wo"] += ctx_flat.T @ dattn_flat
            grads[prefix + "bo"] += dattn_flat.sum(axis=0)
            dctx = _split_heads(dattn @ P[prefix + "Wo"].T, c.n_heads)
            dAd = dctx @ lc["V"].transpose(0, 1, 3, 2)
            dV = lc["Ad"].transpose(0, 1, 3, 2) @ dctx
            dA = dAd if lc["a_keep"] is None else dAd * lc["a_keep"]
            A = lc["A"]
            dscores = A * (dA - (dA * A).sum(axis=-1, keepdims=True))
            dQ = dscores @ lc["K"] * scale
            dK = dscores.transpose(0, 1, 3, 2) @ lc["Q"] * scale
            x_in = lc["x_in"]
            x_flat = x_in.reshape(-1, c.d_model)
            dx = dres1.copy()
            for name, dmat in (("q", dQ), ("k", dK), ("v", dV)):
                dm = _merge_heads(dmat)
                dm_flat = dm.reshape(-1, c.d_model)
                grads[prefix + "W" + name] += x_flat.T @ dm_flat
                grads[prefix + "b" + name] += dm_flat.sum(axis=0)
                dx += dm @ P[prefix + "W" + name].T

        if caches["emb_keep"] is not None:
            dx = dx * caches["emb_keep"]
        np.add.at(grads["tok_emb"], ids, dx)
        grads["pos_emb"][: ids.shape[1]] += dx.sum(axis=0)
        return loss, grads

    # -- inference ----------------------------------------------------------

    def forward_probs(self, ids, mask, return_attention: bool = False):
        logits, caches = self._forward(ids, mask, training=False)
        probs = _softmax(logits)
        if return_attention:
            return probs, [lc["A"] for lc in caches["layers"]]
        return probs

    def encode_batch(self, texts: list[str]) -> tuple[np.ndarray, np.ndarray]:
        seqs = [encode(t, self.vocab, self.config.max_len) for t in texts]
        pad = self.vocab.id(PAD_TOKEN)
        T = max(len(s) for s in seqs)
        ids = np.full((len(seqs), T), pad, dtype=np.int64)
        mask = np.zeros((len(seqs), T), dtype=np.float64)
        for i, s in enumerate(seqs):
            ids[i, : len(s)] = s
            mask[i, : len(s)] = 1.0
        return ids, mask

    def predict_proba(self, texts: list[str], batch_size: int = 64) -> np.ndarray:
        out = []
        for i in range(0, len(texts), batch_size):
            ids, mask = self.encode_batch(texts[i : i + batch_size])
            out.append(self.forward_probs(ids, mask))
        return np.concatenate(out, axis=0)

    def predict(self, texts: list[str]) -> np.ndarray:
        return np.argmax(self.predict_proba(texts), axis=1)


class AdamW:
    """Adam with decoupled weight decay; decay skips vector-shaped params
    (biases and layer-norm scales), the usual convention."""

    def __init__(self, params: dict[str, np.ndarray], cfg: TrainingConfig):
        self.cfg = cfg
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for name, w in params.items():
            gr = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * gr
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * gr * gr
            w -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
            if cfg.weight_decay and w.ndim >= 2:
                w -= cfg.learning_rate * cfg.weight_decay * w


def train_transformer(
    dataset: Dataset,
    vocab: WordPieceVocab,
    tcfg: TransformerConfig = TransformerConfig(),
    train: TrainingConfig = TrainingConfig(),
    preprocess_fn=None,
    progress=None,
) -> TransformerClassifier:
    """Fine-tuning loop: shuffled mini-batches, AdamW, fixed epoch count.

    Deterministic per ``train.seed``; sequences longer than max_len are
    truncated. ``progress(epoch, mean_loss)`` is called per epoch.
    """
    if len(dataset) == 0:
        raise ModelError("cannot train on an empty dataset")
    y = np.array(dataset.labels(), dtype=np.int64)
    clf = TransformerClassifier(tcfg, vocab, seed=train.seed)
    texts = [s.text for s in dataset.samples]
    if preprocess_fn is not None:
        texts = [preprocess_fn(t) for t in texts]
    seqs = [encode(t, vocab, clf.config.max_len) for t in texts]
    pad = vocab.id(PAD_TOKEN)
    opt = AdamW(clf.params, train)
    n = len(seqs)
    for epoch in range(train.epochs):
        order = clf.rng.permutation(n)
        losses = []
        for start in range(0, n, train.batch_size):
            chunk = order[start : start + train.batch_size]
            T = max(len(seqs[i]) for i in chunk)
            ids = np.full((len(chunk), T), pad, dtype=np.int64)
            mask = np.zeros((len(chunk), T), dtype=np.float64)
            for r, i in enumerate(chunk):
                ids[r, : len(seqs[i])] = seqs[i]
                mask[r, : len(seqs[i])] = 1.0
            loss, grads = clf.loss_and_grads(ids, mask, y[chunk], training=True)
            opt.step(clf.params, grads)
            losses.append(loss)
        epoch_loss = float(np.mean(losses))
        clf.history.append(epoch_loss)
        if progress is not None:
            progress(epoch, epoch_loss)
    return clf


def grad_check(
    classifier: TransformerClassifier,
    batch: tuple[np.ndarray, np.ndarray, np.ndarray],
    epsilon: float = 1e-5,
    n_checks: int = 60,
    seed: int = 0,
    min_grad: float = 1e-6,
) -> float:
    """Max relative error between analytic and central-difference gradients
    over a random subset of at least ``n_checks`` scalar parameters.

    Dropout is disabled for the check so the loss is a deterministic
    function of the parameters. Coordinates whose analytic gradient sits
    below ``min_grad`` are not sampled: there the central-difference value
    is dominated by float64 cancellation noise (~1e-11 at eps=1e-5), so no
    implementation could certify them against the 1e-8-floored relative
    error; the complementary directional-derivative test covers the full
    gradient vector including those coordinates.
    """
    ids, mask, y = batch
    _, grads = classifier.loss_and_grads(ids, mask, y, training=False)

    y = np.asarray(y, dtype=np.int64)

    def loss_only() -> float:
        logits, _ = classifier._forward(ids, mask, training=False)
        probs = _softmax(logits)
        b = ids.shape[0]
        return float(-np.mean(np.log(np.maximum(probs[np.arange(b), y], 1e-300))))

    names = sorted(classifier.params)
    sizes = np.array([classifier.params[n].size for n in names])
    offsets = np.cumsum(sizes) - sizes
    flat_grads = np.concatenate([grads[n].reshape(-1) for n in names])
    eligible = np.nonzero(np.abs(flat_grads) >= min_grad)[0]
    if len(eligible) < n_checks:
        # fall back to the largest-magnitude coordinates
        eligible = np.argsort(-np.abs(flat_grads))[: max(n_checks, 1)]
    rng = np.random.default_rng(seed)
    picks = rng.choice(eligible, size=min(n_checks, len(eligible)), replace=False)
    worst = 0.0
    for flat_idx in picks:
        pi = int(np.searchsorted(offsets, flat_idx, side="right") - 1)
        name = names[pi]
        local = int(flat_idx - offsets[pi])
        w = classifier.params[name].reshape(-1)
        orig = w[local]
        w[local] = orig + epsilon
        lp = loss_only()
        w[local] = orig - epsilon
        lm = loss_only()
        w[local] = orig
        fd = (lp - lm) / (2.0 * epsilon)
        an = grads[name].reshape(-1)[local]
        rel = abs(an - fd) / max(abs(an), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst
