"""Segment-aware Transformer for translation suggestion.

Encoder input is the concatenation of source, masked translation and
(optionally) hint segments.  Each token's representation sums its token,
per-segment position and segment embeddings, and encoder self-attention can
additionally scale query/key rows elementwise by the shared segment
embedding before projection.  All three mechanisms sit behind ablation
flags; with every flag off the model computes exactly a naive Transformer
over the concatenated sequence.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

CHECKPOINT_VERSION = 1
NUM_SEGMENTS = 3  # source / masked translation / hint


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_dim: int = 256
    dropout: float = 0.1
    max_positions: int = 512
    independent_positions: bool = True
    segment_embedding_in_input: bool = True
    segment_aware_attention: bool = True

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        for name in ("vocab_size", "d_model", "n_heads", "encoder_layers",
                     "decoder_layers", "ffn_dim", "max_positions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


class PositionOverflowError(ValueError):
    pass


class NonFiniteLossError(RuntimeError):
    pass


def attention_logits(
    q: torch.Tensor,
    k: torch.Tensor,
    w_q: torch.Tensor,
    w_k: torch.Tensor,
    seg_rows: torch.Tensor | None = None,
) -> torch.Tensor:
    """Pre-softmax attention scores ((E∘Q)W_q)((E∘K)W_k)^T / sqrt(d).

    With ``seg_rows`` None (or all ones) this is the naive scaled dot-product
    logit matrix.  ``seg_rows`` is the per-token gather of the segment
    embedding table, multiplied in elementwise before projection.
    """
    if q.shape[-1] != k.shape[-1]:
        raise ValueError("query/key dimension mismatch")
    if seg_rows is not None:
        q = q * seg_rows
        k = k * seg_rows
    d = q.shape[-1]
    return (q @ w_q) @ (k @ w_k).transpose(-2, -1) / math.sqrt(d)


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, query, key, value, key_padding_mask=None, causal=False,
                q_scale=None, k_scale=None):
        # q_scale/k_scale: segment-embedding rows applied elementwise at full
        # model width, before projection and head split.
        if q_scale is not None:
            query = query * q_scale
        if k_scale is not None:
            key = key * k_scale
        bsz, q_len, d_model = query.shape
        k_len = key.shape[1]
        q = self.q_proj(query).view(bsz, q_len, self.n_heads, self.d_head).transpose(1, 2)
        k = self.k_proj(key).view(bsz, k_len, self.n_heads, self.d_head).transpose(1, 2)
        v = self.v_proj(value).view(bsz, k_len, self.n_heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if key_padding_mask is not None:
            scores = scores.masked_fill(
                key_padding_mask[:, None, None, :], float("-inf")
            )
        if causal:
            causal_mask = torch.triu(
                torch.ones(q_len, k_len, dtype=torch.bool, device=scores.device), 1
            )
            scores = scores.masked_fill(causal_mask, float("-inf"))
        attn = F.softmax(scores, dim=-1)
        attn = self.dropout(attn)
        out = (attn @ v).transpose(1, 2).reshape(bsz, q_len, d_model)
        return self.out_proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, ffn_dim: int, dropout: float):
        super().__init__()
        self.fc1 = nn.Linear(d_model, ffn_dim)
        self.fc2 = nn.Linear(ffn_dim, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x):
        return self.fc2(self.dropout(F.relu(self.fc1(x))))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x, pad_mask, seg_scale=None):
        a = self.self_attn(x, x, x, key_padding_mask=pad_mask,
                           q_scale=seg_scale, k_scale=seg_scale)
        x = self.norm1(x + self.dropout(a))
        f = self.ffn(x)
        return self.norm2(x + self.dropout(f))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.norm3 = nn.LayerNorm(cfg.d_model)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x, memory, src_pad_mask, tgt_pad_mask):
        a = self.self_attn(x, x, x, key_padding_mask=tgt_pad_mask, causal=True)
        x = self.norm1(x + self.dropout(a))
        c = self.cross_attn(x, memory, memory, key_padding_mask=src_pad_mask)
        x = self.norm2(x + self.dropout(c))
        f = self.ffn(x)
        return self.norm3(x + self.dropout(f))


class SaTransformer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.tok_emb = nn.Embedding(config.vocab_size, config.d_model)
        self.pos_emb = nn.Embedding(config.max_positions, config.d_model)
        # one shared table feeds both the input sum and the attention scaling
        self.seg_emb = nn.Embedding(NUM_SEGMENTS, config.d_model)
        self.encoder = nn.ModuleList(EncoderLayer(config) for _ in range(config.encoder_layers))
        self.decoder = nn.ModuleList(DecoderLayer(config) for _ in range(config.decoder_layers))
        self.out_proj = nn.Linear(config.d_model, config.vocab_size)
        self.emb_dropout = nn.Dropout(config.dropout)
        self._init_parameters()

    def _init_parameters(self):
        nn.init.normal_(self.tok_emb.weight, std=0.02)
        nn.init.normal_(self.pos_emb.weight, std=0.02)
        # start at the naive-equivalent point: all-ones plus small noise
        with torch.no_grad():
            self.seg_emb.weight.copy_(
                1.0 + 0.01 * torch.randn_like(self.seg_emb.weight)
            )

    def embed(self, token_ids, position_ids, segment_ids):
        """Encoder input rows: token + position (+ segment) embeddings."""
        cfg = self.config
        if cfg.independent_positions:
            positions = position_ids
        else:
            length = token_ids.shape[-1]
            positions = torch.arange(length, device=token_ids.device).expand_as(token_ids)
        if int(positions.max()) >= cfg.max_positions:
            seg = int(segment_ids.flatten()[int(positions.argmax())])
            raise PositionOverflowError(
                f"position {int(positions.max())} exceeds max_positions "
                f"{cfg.max_positions} (segment {seg})"
            )
        h = self.tok_emb(token_ids) + self.pos_emb(positions)
        if cfg.segment_embedding_in_input:
            h = h + self.seg_emb(segment_ids)
        return h

    def encode(self, token_ids, position_ids, segment_ids, pad_mask):
        x = self.emb_dropout(self.embed(token_ids, position_ids, segment_ids))
        seg_scale = None
        if self.config.segment_aware_attention:
            seg_scale = self.seg_emb(segment_ids)
        for layer in self.encoder:
            x = layer(x, pad_mask, seg_scale)
        return x

    def decode(self, tgt_in, memory, src_pad_mask, tgt_pad_mask=None):
        length = tgt_in.shape[-1]
        if length > self.config.max_positions:
            raise PositionOverflowError(
                f"target length {length} exceeds max_positions (decoder segment)"
            )
        positions = torch.arange(length, device=tgt_in.device).expand_as(tgt_in)
        x = self.emb_dropout(self.tok_emb(tgt_in) + self.pos_emb(positions))
        for layer in self.decoder:
            x = layer(x, memory, src_pad_mask, tgt_pad_mask)
        return self.out_proj(x)

    def forward_loss(self, batch):
        """Mean negative log-likelihood of gold targets (teacher forcing).

        Returns ``(loss, per_token_log_probs)``; per-token log-probs are for
        the gold tokens at non-pad positions.
        """
        memory = self.encode(
            batch["src_tokens"], batch["src_positions"], batch["src_segments"],
            batch["src_pad_mask"],
        )
        logits = self.decode(
            batch["tgt_in"], memory, batch["src_pad_mask"], batch["tgt_pad_mask"]
        )
        log_probs = F.log_softmax(logits, dim=-1)
        gold = batch["tgt_out"]
        token_logp = log_probs.gather(-1, gold.unsqueeze(-1)).squeeze(-1)
        mask = ~batch["tgt_pad_mask"]
        loss = -(token_logp * mask).sum() / mask.sum()
        if not torch.isfinite(loss):
            raise NonFiniteLossError("non-finite loss in forward pass (output layer)")
        return loss, token_logp

    # -- persistence -----------------------------------------------------

    def save_checkpoint(self, path) -> None:
        torch.save(
            {
                "version": CHECKPOINT_VERSION,
                "config": self.config.to_dict(),
                "state_dict": self.state_dict(),
            },
            path,
        )


def load_checkpoint(path) -> SaTransformer:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    model = SaTransformer(ModelConfig.from_dict(payload["config"]))
    model.load_state_dict(payload["state_dict"])
    return model


def import_pretrained_encoder(model: SaTransformer, checkpoint_path) -> SaTransformer:
    """Hook for first-phase (external) encoder initialization.

    Loads encoder-side tensors from a compatible checkpoint into ``model``.
    By default training starts from random initialization; this entry point
    exists so an externally pretrained encoder can be imported.
    """
    donor = load_checkpoint(checkpoint_path)
    own = model.state_dict()
    for name, tensor in donor.state_dict().items():
        if name.startswith(("encoder.", "tok_emb.", "pos_emb.", "seg_emb.")):
            if name in own and own[name].shape == tensor.shape:
                own[name] = tensor
    model.load_state_dict(own)
    return model
