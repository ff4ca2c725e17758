"""Independent numpy re-implementation of the plain encoder-decoder forward.

Used as the oracle for the naive-reduction identity: with every
segment-aware flag turned off, the package model must reproduce these
numbers.  Everything here works directly on state-dict tensors so no code is
shared with the module under test.
"""

import numpy as np


def _softmax(x, axis=-1):
    x = x - x.max(axis=axis, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=axis, keepdims=True)


def _log_softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def _layer_norm(x, weight, bias, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * weight + bias


def _linear(x, weight, bias):
    return x @ weight.T + bias


def _attention(params, prefix, query, key, value, n_heads,
               key_padding_mask=None, causal=False):
    bsz, q_len, d_model = query.shape
    k_len = key.shape[1]
    d_head = d_model // n_heads

    def proj(name, x):
        return _linear(x, params[f"{prefix}.{name}.weight"],
                       params[f"{prefix}.{name}.bias"])

    def split(x, length):
        return x.reshape(bsz, length, n_heads, d_head).transpose(0, 2, 1, 3)

    q = split(proj("q_proj", query), q_len)
    k = split(proj("k_proj", key), k_len)
    v = split(proj("v_proj", value), k_len)
    scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(d_head)
    if key_padding_mask is not None:
        scores = np.where(key_padding_mask[:, None, None, :], -np.inf, scores)
    if causal:
        upper = np.triu(np.ones((q_len, k_len), dtype=bool), 1)
        scores = np.where(upper, -np.inf, scores)
    out = _softmax(scores) @ v
    out = out.transpose(0, 2, 1, 3).reshape(bsz, q_len, d_model)
    return proj("out_proj", out)


def _ffn(params, prefix, x):
    h = _linear(x, params[f"{prefix}.fc1.weight"], params[f"{prefix}.fc1.bias"])
    h = np.maximum(h, 0.0)
    return _linear(h, params[f"{prefix}.fc2.weight"], params[f"{prefix}.fc2.bias"])


def naive_encode(params, config, src_tokens, src_pad_mask):
    bsz, length = src_tokens.shape
    positions = np.tile(np.arange(length), (bsz, 1))
    x = params["tok_emb.weight"][src_tokens] + params["pos_emb.weight"][positions]
    for i in range(config["encoder_layers"]):
        p = f"encoder.{i}"
        a = _attention(params, f"{p}.self_attn", x, x, x, config["n_heads"],
                       key_padding_mask=src_pad_mask)
        x = _layer_norm(x + a, params[f"{p}.norm1.weight"], params[f"{p}.norm1.bias"])
        f = _ffn(params, f"{p}.ffn", x)
        x = _layer_norm(x + f, params[f"{p}.norm2.weight"], params[f"{p}.norm2.bias"])
    return x


def naive_decode(params, config, tgt_in, memory, src_pad_mask, tgt_pad_mask):
    bsz, length = tgt_in.shape
    positions = np.tile(np.arange(length), (bsz, 1))
    x = params["tok_emb.weight"][tgt_in] + params["pos_emb.weight"][positions]
    for i in range(config["decoder_layers"]):
        p = f"decoder.{i}"
        a = _attention(params, f"{p}.self_attn", x, x, x, config["n_heads"],
                       key_padding_mask=tgt_pad_mask, causal=True)
        x = _layer_norm(x + a, params[f"{p}.norm1.weight"], params[f"{p}.norm1.bias"])
        c = _attention(params, f"{p}.cross_attn", x, memory, memory,
                       config["n_heads"], key_padding_mask=src_pad_mask)
        x = _layer_norm(x + c, params[f"{p}.norm2.weight"], params[f"{p}.norm2.bias"])
        f = _ffn(params, f"{p}.ffn", x)
        x = _layer_norm(x + f, params[f"{p}.norm3.weight"], params[f"{p}.norm3.bias"])
    return _linear(x, params["out_proj.weight"], params["out_proj.bias"])


def naive_forward_loss(params, config, batch):
    """Mean gold-token NLL with teacher forcing, mirroring the batch layout."""
    memory = naive_encode(params, config, batch["src_tokens"], batch["src_pad_mask"])
    logits = naive_decode(params, config, batch["tgt_in"], memory,
                          batch["src_pad_mask"], batch["tgt_pad_mask"])
    log_probs = _log_softmax(logits)
    gold = batch["tgt_out"]
    token_logp = np.take_along_axis(log_probs, gold[..., None], axis=-1)[..., 0]
    mask = ~batch["tgt_pad_mask"]
    loss = -(token_logp * mask).sum() / mask.sum()
    return loss, token_logp


def params_from_model(model):
    """State-dict tensors as float64 numpy arrays."""
    return {k: v.detach().double().numpy() for k, v in model.state_dict().items()}


def batch_to_numpy(batch):
    out = {}
    for key, value in batch.items():
        arr = value.detach().numpy()
        out[key] = arr.astype(bool) if key.endswith("pad_mask") else arr
    return out
