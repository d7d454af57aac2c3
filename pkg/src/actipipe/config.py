"""Run configuration: one JSON document covering every pipeline stage.

``RunConfig`` round-trips losslessly through ``to_dict``/``from_dict``;
``actipipe config init`` writes the defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError
from .features import EntropyParams, default_grids, grids_from_json, grids_to_json
from .model import ModelConfig
from .segmentation import SegmentationConfig
from .synth import ClassEffect, SynthConfig


@dataclass
class RunConfig:
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    grids: dict[str, list[EntropyParams]] = field(default_factory=default_grids)
    log_level: str = "INFO"

    def to_dict(self) -> dict:
        synth = dataclasses.asdict(self.synth)
        synth["class_effect"] = {
            str(label): dataclasses.asdict(eff) for label, eff in self.synth.class_effect.items()
        }
        return {
            "segmentation": dataclasses.asdict(self.segmentation),
            "model": {**dataclasses.asdict(self.model), "k_grid": list(self.model.k_grid)},
            "synth": synth,
            "grids": grids_to_json(self.grids),
            "log_level": self.log_level,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        try:
            seg = SegmentationConfig(**obj.get("segmentation", {}))
            model_obj = dict(obj.get("model", {}))
            if "k_grid" in model_obj:
                model_obj["k_grid"] = tuple(model_obj["k_grid"])
            model = ModelConfig(**model_obj)
            synth_obj = dict(obj.get("synth", {}))
            effects = synth_obj.pop("class_effect", {})
            synth = SynthConfig(
                **synth_obj,
                class_effect={int(k): ClassEffect(**v) for k, v in effects.items()},
            )
            grids = grids_from_json(obj["grids"]) if "grids" in obj else default_grids()
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad run config: {exc}") from exc
        return cls(seg, model, synth, grids, obj.get("log_level", "INFO"))

    def to_json(self, path: Path | str) -> None:
        with Path(path).open("w") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")

    @classmethod
    def from_json(cls, path: Path | str) -> "RunConfig":
        try:
            with Path(path).open() as handle:
                return cls.from_dict(json.load(handle))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read config {path}: {exc}") from exc
