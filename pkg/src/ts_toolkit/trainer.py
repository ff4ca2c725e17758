"""Training orchestration: synthetic-corpus pretraining and golden finetuning.

Optimizer is Adam (0.9 / 0.98 / 1e-9) with an inverse-sqrt warmup schedule.
Finetuning tracks corpus BLEU of top-1 suggestions on a dev split and keeps
the best checkpoint (ties broken by lower loss).  Checkpoints carry model,
optimizer, step counter and RNG state so a save/load/continue run reproduces
uninterrupted training bit-exactly.
"""

from __future__ import annotations

import copy
import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from . import data as data_mod, evaluator
from .corpus_io import TsExample
from .sa_model import NonFiniteLossError, SaTransformer
from .subword import SubwordModel


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    phase: str = "pretrain"  # "pretrain" | "finetune"
    batch_tokens: int = 1000
    lr: float = 3e-4
    warmup_steps: int = 100
    max_steps: int = 1000
    eval_interval: int = 50
    seed: int = 0
    checkpoint_dir: str | None = None
    clip_norm: float | None = 1.0

    def __post_init__(self):
        if self.batch_tokens <= 0:
            raise ValueError("batch_tokens must be > 0")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


def inverse_sqrt_lr(base_lr: float, step: int, warmup_steps: int) -> float:
    """Linear warmup to ``base_lr`` then inverse-sqrt decay."""
    step = max(step, 1)
    warmup = max(warmup_steps, 1)
    if step < warmup:
        return base_lr * step / warmup
    return base_lr * math.sqrt(warmup / step)


class Trainer:
    def __init__(
        self,
        model: SaTransformer,
        instances: list[data_mod.EncodedExample],
        cfg: TrainConfig,
        subword: SubwordModel,
    ):
        self.model = model
        self.cfg = cfg
        self.subword = subword
        rng = random.Random(cfg.seed)
        order = list(range(len(instances)))
        rng.shuffle(order)
        shuffled = [instances[i] for i in order]
        self.batches = data_mod.batch_by_tokens(shuffled, cfg.batch_tokens)
        self.optimizer = torch.optim.Adam(
            model.parameters(), lr=cfg.lr, betas=(0.9, 0.98), eps=1e-9
        )
        self.step = 0
        self.metrics: list[dict] = []
        torch.manual_seed(cfg.seed)

    def train_step(self) -> float:
        self.step += 1
        lr = inverse_sqrt_lr(self.cfg.lr, self.step, self.cfg.warmup_steps)
        for group in self.optimizer.param_groups:
            group["lr"] = lr
        batch = data_mod.make_batch(
            self.batches[(self.step - 1) % len(self.batches)], self.subword
        )
        self.model.train()
        self.optimizer.zero_grad()
        try:
            loss, _ = self.model.forward_loss(batch)
        except NonFiniteLossError as exc:
            raise TrainingDiverged(str(exc))
        loss.backward()
        if self.cfg.clip_norm is not None:
            torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.cfg.clip_norm)
        self.optimizer.step()
        value = float(loss.detach())
        if not math.isfinite(value):
            raise TrainingDiverged(f"loss became non-finite at step {self.step}")
        self.metrics.append(
            {"step": self.step, "phase": self.cfg.phase, "loss": value, "lr": lr}
        )
        return value

    # -- checkpointing ----------------------------------------------------

    def save_checkpoint(self, path) -> None:
        torch.save(
            {
                "model_config": self.model.config.to_dict(),
                "model": self.model.state_dict(),
                "optimizer": self.optimizer.state_dict(),
                "step": self.step,
                "torch_rng": torch.get_rng_state(),
                "train_config": self.cfg.to_dict(),
            },
            path,
        )

    def load_checkpoint(self, path) -> None:
        payload = torch.load(path, map_location="cpu", weights_only=False)
        self.model.load_state_dict(payload["model"])
        self.optimizer.load_state_dict(payload["optimizer"])
        self.step = payload["step"]
        torch.set_rng_state(payload["torch_rng"])


def _write_metrics(metrics: list[dict], cfg: TrainConfig) -> None:
    if cfg.checkpoint_dir is None:
        return
    path = Path(cfg.checkpoint_dir)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / f"metrics-{cfg.phase}.jsonl", "w", encoding="utf-8") as fh:
        for record in metrics:
            fh.write(json.dumps(record))
            fh.write("\n")


def pretrain(
    model: SaTransformer,
    corpora: list[list[TsExample]],
    cfg: TrainConfig,
    subword: SubwordModel,
) -> list[dict]:
    """Pretrain on the concatenation of all synthetic corpora (shuffled)."""
    if not corpora:
        raise ValueError("at least one synthetic corpus is required")
    combined: list[TsExample] = []
    for corpus in corpora:
        combined.extend(corpus)
    instances = data_mod.encode_training_instances(combined, subword)
    trainer = Trainer(model, instances, cfg, subword)
    ckpt_path = None
    if cfg.checkpoint_dir is not None:
        Path(cfg.checkpoint_dir).mkdir(parents=True, exist_ok=True)
        ckpt_path = Path(cfg.checkpoint_dir) / "pretrain-last.pt"
    for _ in range(cfg.max_steps):
        trainer.train_step()
        if ckpt_path is not None and trainer.step % cfg.eval_interval == 0:
            trainer.save_checkpoint(ckpt_path)
    _write_metrics(trainer.metrics, cfg)
    return trainer.metrics


def finetune(
    model: SaTransformer,
    train_examples: list[TsExample],
    cfg: TrainConfig,
    subword: SubwordModel,
    dev_examples: list[TsExample] | None = None,
    beam_size: int = 4,
    max_len: int = 32,
) -> list[dict]:
    """Finetune on golden data; keeps the best-dev-BLEU parameters."""
    if not train_examples:
        raise ValueError("golden corpus is empty")
    instances = data_mod.encode_training_instances(train_examples, subword)
    trainer = Trainer(model, instances, cfg, subword)
    best: tuple[float, float] | None = None  # (bleu, -loss)
    best_state = None
    for _ in range(cfg.max_steps):
        loss = trainer.train_step()
        at_eval = trainer.step % cfg.eval_interval == 0 or trainer.step == cfg.max_steps
        if at_eval:
            record = {
                "step": trainer.step,
                "phase": cfg.phase,
                "loss": loss,
                "lr": trainer.metrics[-1]["lr"],
                "eval": True,
            }
            if dev_examples:
                result = evaluator.evaluate_testset(
                    model, dev_examples, subword, beam_size=beam_size, max_len=max_len
                )
                record["bleu"] = result.report.bleu
                key = (result.report.bleu, -loss)
                if best is None or key > best:
                    best = key
                    best_state = copy.deepcopy(model.state_dict())
            trainer.metrics.append(record)
    if best_state is not None:
        model.load_state_dict(best_state)
    _write_metrics(trainer.metrics, cfg)
    return trainer.metrics
