from typing import Any, Dict, Optional

import argparse
import logging
import os

from attrs import evolve
from cattrs import GenConverter
from cattrs.errors import ForbiddenExtraKeysError

from notecnn.constants import MODEL_CNN, MODEL_RF
from notecnn.exceptions import ArgumentError, NoteCnnError
from notecnn.helpers import hash_object, read_json
from notecnn.schemas import ExperimentConfig, Provenance

logger = logging.getLogger()

converter = GenConverter(forbid_extra_keys=True, detailed_validation=False)


def structure_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return converter.structure(data, ExperimentConfig)
    except ForbiddenExtraKeysError as e:
        raise ArgumentError(f"unknown config keys {sorted(e.extra_fields)} in {e.cl.__name__}") from e
    except NoteCnnError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ArgumentError(f"invalid config ({type(e).__name__}: {e})") from e


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """Read a JSON experiment config; missing sections and keys take their defaults."""
    if path is None:
        return ExperimentConfig()
    data = read_json(path)
    data.pop("provenance", None)
    return structure_config(data)


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Command-line flags win over file values. ``--seed`` reseeds every stage (splits, CNN, forest, synth)."""
    given = {name: value for name, value in vars(args).items() if value is not None}
    if "seed" in given:
        seed = given["seed"]
        config = evolve(
            config,
            seed=seed,
            synth=evolve(config.synth, seed=seed),
            cnn=evolve(config.cnn, train=evolve(config.cnn.train, seed=seed)),
        )
    for name in ("task", "model"):
        if name in given:
            config = evolve(config, **{name: given[name]})
    if given.get("model") in (MODEL_CNN, MODEL_RF):
        config = evolve(config, explain=evolve(config.explain, model=given["model"]))
    if given.get("allow_train_eval"):
        config = evolve(config, allow_train_eval=True)
    if "output_dir" in given:
        config = evolve(config, paths=evolve(config.paths, output_dir=given["output_dir"]))
    for name in ("admissions", "notes", "embeddings"):
        if name in given:
            config = evolve(config, paths=evolve(config.paths, **{name: given[name]}))
    if "patients" in given:
        config = evolve(config, synth=evolve(config.synth, n_patients=given["patients"]))
    if "k" in given:
        config = evolve(config, explain=evolve(config.explain, k=given["k"]))
    return config


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    return converter.unstructure(config)


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of SHA-256 over the canonical JSON of the resolved config, output directory excluded."""
    data = config_to_dict(config)
    data["paths"].pop("output_dir", None)
    return hash_object(data)


def provenance(config: ExperimentConfig) -> Dict[str, Any]:
    return converter.unstructure(Provenance(config_hash=config_hash(config), seed=config.seed))


def output_path(config: ExperimentConfig, *parts: str) -> str:
    return os.path.join(config.paths.output_dir, *parts)
