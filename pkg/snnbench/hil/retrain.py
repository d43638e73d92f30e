"""
snnbench - Hardware-in-the-Loop Retraining
Back-propagation through spike rates recorded on an emulated device.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from ..ann.model import AnnModel, ForwardPass, apply_head, forward_batch
from ..ann.train import apply_update, backprop
from ..conversion.config import ConversionConfig
from ..conversion.convert import convert
from ..exceptions import DivergenceError
from ..hardware.device import DeviceInstance, run_on_device
from ..metrics import record_training_epoch
from ..snn.params import LifParams

logger = logging.getLogger("snnbench")


class HilConfig(BaseModel):
    """
    Retraining schedule.

    ``rate_normalizer`` maps a recorded rate in Hz to activation 1.0; when
    unset it is calibrated as the largest hidden-layer rate of a run of the
    untouched model. ``substitute`` selects whether every recorded layer or
    only the output layer replaces the ANN forward pass.
    """

    epochs: int = Field(default=10, ge=0)
    learning_rate: float = Field(default=0.01, gt=0)
    samples_per_epoch: int = Field(default=1000, ge=1)
    batch_size: int = Field(default=100, ge=1)
    rate_normalizer: Optional[float] = Field(default=None, gt=0)
    substitute: Literal["all", "output"] = "all"
    eval_samples: int = Field(default=1000, ge=1)
    seed: int = 0


@dataclass
class HilEpoch:
    epoch: int
    device_accuracy: float
    loss: float = 0.0


@dataclass
class HilResult:
    """Retrained model plus the device accuracy after every epoch (0 = before)."""

    model: AnnModel
    trace: List[HilEpoch] = field(default_factory=list)
    rate_normalizer: float = 0.0
    provenance: Dict[str, Any] = field(default_factory=dict)

    def trace_to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "device_accuracy"])
            for row in self.trace:
                writer.writerow([row.epoch, repr(row.device_accuracy)])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "hil_trace",
            "rate_normalizer": self.rate_normalizer,
            "provenance": self.provenance,
            "trace": [
                {"epoch": r.epoch, "device_accuracy": r.device_accuracy, "loss": r.loss}
                for r in self.trace
            ],
        }


def recorded_rates(
    layer_counts: Dict[int, np.ndarray], t_present: float
) -> Dict[int, np.ndarray]:
    """Spike counts of every layer as rates in Hz over the presentation."""
    seconds = t_present / 1000.0
    return {layer: counts / seconds for layer, counts in layer_counts.items()}


def calibrate_rate_normalizer(
    model: AnnModel,
    dev: DeviceInstance,
    lif: LifParams,
    cconf: ConversionConfig,
    images: np.ndarray,
) -> float:
    """Largest hidden-layer rate (Hz) of the model on the device; f_max if silent."""
    net = convert(model, lif, cconf)
    result, _ = run_on_device(dev, net, images, cconf, record_layers=True)
    rates = recorded_rates(result.layer_counts or {}, cconf.t_present)
    hidden = [rates[layer] for layer in range(1, len(model.layer_dims) - 1)]
    observed = hidden or [rates.get(len(model.layer_dims) - 1, np.zeros(1))]
    peak = max(float(r.max()) if r.size else 0.0 for r in observed)
    return peak if peak > 0 else cconf.f_max


def substituted_pass(
    model: AnnModel,
    inputs: np.ndarray,
    rates: Dict[int, np.ndarray],
    normalizer: float,
    substitute: str = "all",
) -> ForwardPass:
    """
    Forward pass whose activations are replaced by normalized device rates.

    Input activations stay the pixel intensities. With ``substitute="output"``
    only the output layer is replaced.
    """
    fp = forward_batch(model, inputs)
    activations = list(fp.activations)
    out_layer = len(model.layer_dims) - 1
    if substitute == "all":
        for layer in range(1, out_layer):
            activations[layer] = rates[layer] / normalizer
    logits = rates[out_layer] / normalizer
    activations[out_layer] = apply_head(model, logits)
    return ForwardPass(activations, logits)


def device_accuracy(
    model: AnnModel,
    dev: DeviceInstance,
    lif: LifParams,
    cconf: ConversionConfig,
    dataset,
) -> float:
    net = convert(model, lif, cconf)
    result, _ = run_on_device(dev, net, dataset, cconf)
    return result.accuracy


def hil_train(
    model: AnnModel,
    dev: DeviceInstance,
    lif: LifParams,
    cconf: ConversionConfig,
    hconf: HilConfig,
    train,
    evaluation=None,
) -> HilResult:
    """
    Retrain ``model`` for one specific device.

    Every mini-batch is converted with the current weights and run on the
    device while recording all layers. The recorded rates divided by the
    rate normalizer stand in for the ANN activations, the configured loss is
    back-propagated through them and the weights are updated (and projected
    to non-negative values for non-negative models).

    Args:
        model: trained network, left untouched
        dev: device instance the result is specific to
        lif: nominal neuron parameters
        cconf: conversion settings
        hconf: retraining schedule
        train: Dataset the mini-batches are drawn from
        evaluation: Dataset for the per-epoch device accuracy; defaults to
            the first ``eval_samples`` training samples

    Returns:
        HilResult with the retrained model and the accuracy trace

    Raises:
        DivergenceError: non-finite loss or gradient
    """
    current = model.copy()
    if hconf.epochs == 0:
        return HilResult(current, [], hconf.rate_normalizer or 0.0)

    if evaluation is None:
        evaluation = train.subset(0, min(hconf.eval_samples, len(train)))
    elif len(evaluation) > hconf.eval_samples:
        evaluation = evaluation.subset(0, hconf.eval_samples)

    normalizer = hconf.rate_normalizer
    if normalizer is None:
        calib = train.images[: min(hconf.samples_per_epoch, len(train))]
        normalizer = calibrate_rate_normalizer(current, dev, lif, cconf, calib)
        logger.info(f"Calibrated rate normalizer: {normalizer:.2f} Hz")

    trace = [HilEpoch(0, device_accuracy(current, dev, lif, cconf, evaluation))]
    logger.info(f"HIL epoch 0: device accuracy {trace[0].device_accuracy:.4f}")

    for epoch in range(1, hconf.epochs + 1):
        rng = np.random.default_rng(np.random.SeedSequence([hconf.seed, epoch]))
        order = rng.permutation(len(train))[: hconf.samples_per_epoch]
        losses = []
        for batch, start in enumerate(range(0, len(order), hconf.batch_size)):
            idx = order[start : start + hconf.batch_size]
            images, labels = train.images[idx], train.labels[idx]

            net = convert(current, lif, cconf)
            result, _ = run_on_device(dev, net, images, cconf, record_layers=True)
            rates = recorded_rates(result.layer_counts or {}, cconf.t_present)
            fp = substituted_pass(current, images, rates, normalizer, hconf.substitute)

            loss, grads = backprop(current, fp, labels)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise DivergenceError("non-finite HIL update", epoch, batch)
            apply_update(current, grads, hconf.learning_rate)
            losses.append(loss)

        mean_loss = float(np.mean(losses)) if losses else 0.0
        record_training_epoch(mean_loss, len(order))
        accuracy = device_accuracy(current, dev, lif, cconf, evaluation)
        trace.append(HilEpoch(epoch, accuracy, mean_loss))
        logger.info(
            f"HIL epoch {epoch}/{hconf.epochs}: loss {mean_loss:.4f}, "
            f"device accuracy {accuracy:.4f}"
        )

    provenance = {
        "hil": {
            "profile": dev.profile.name,
            "device_seed": dev.seed,
            "epochs": hconf.epochs,
            "substitute": hconf.substitute,
            "rate_normalizer": normalizer,
        }
    }
    current.provenance.update(provenance)
    return HilResult(current, trace, normalizer, provenance)
