#!/usr/bin/env python3
"""
Experiment configuration handling.
Loads YAML experiment configs and tap-profile files and turns them into the typed
configs the simulator and estimators take.
"""

import logging
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml

from testbench.airlink.config import SystemConfig, epa_profile, profile_from_ns_db
from testbench.bench.experiment import ExperimentConfig
from testbench.defaults_config import DEFAULT_DIP, DEFAULT_EXPERIMENT, DEFAULT_STAGE1, DEFAULT_SYSTEM
from testbench.errors import ConfigError
from testbench.stage1.trainer import Stage1Params
from testbench.stage2.dip import DipConfig

logger = logging.getLogger(__name__)

SECTIONS = ('system', 'stage1', 'dip', 'experiment')


@contextmanager
def section_errors(name: str):
    """Re-raise conversion failures inside a section as ConfigError."""
    try:
        yield
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {name} section: {e}") from e


class ConfigHandler:
    """Resolves config names against a list of base directories and builds typed configs."""

    def __init__(self, base_paths: Optional[List[Path]] = None):
        if base_paths is None:
            base_paths = [Path('.'), Path('configs')]
        self.base_paths = [Path(p) for p in base_paths]

    def resolve(self, name: Union[str, Path]) -> Path:
        """Find a config file, trying the name as given, then under each base path."""
        candidate = Path(name)
        if candidate.is_absolute():
            if candidate.is_file():
                return candidate
            raise ConfigError(f"Config file not found: {candidate}")
        for stem in (candidate, candidate.with_suffix('.yaml')):
            for base in self.base_paths:
                path = base / stem
                if path.is_file():
                    return path
        raise ConfigError(f"Config file not found: {name} (searched {[str(p) for p in self.base_paths]})")

    def load_yaml(self, name: Union[str, Path]) -> Any:
        path = self.resolve(name)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read {path}: {e}") from e
        logger.debug("Loaded config %s", path)
        return data

    def load_config(self, name: Union[str, Path]) -> Dict[str, Any]:
        """Raw sections of an experiment config; an empty file is a valid config."""
        data = self.load_yaml(name)
        return self.check_sections(data, str(name))

    @staticmethod
    def check_sections(data: Any, source: str = 'config') -> Dict[str, Any]:
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be a mapping")
        unknown = [k for k in data if k not in SECTIONS]
        if unknown:
            raise ConfigError(f"{source}: unknown sections {unknown}")
        for key in SECTIONS:
            if data.get(key) is not None and not isinstance(data[key], dict):
                raise ConfigError(f"{source}: section '{key}' must be a mapping")
        return data

    @staticmethod
    def section(data: Dict[str, Any], key: str, defaults: Dict[str, Any]) -> Dict[str, Any]:
        """A section merged over its defaults; unknown fields are rejected."""
        given = data.get(key) or {}
        unknown = [k for k in given if k not in defaults]
        if unknown:
            raise ConfigError(f"Unknown fields in '{key}': {unknown}")
        merged = dict(defaults)
        merged.update(given)
        return merged

    # Tap profiles

    def load_tap_profile(self, profile: Any, subcarriers: int):
        """'epa', a path to a profile file, or an inline list of {delay_ns, power_db}."""
        if profile is None or profile == 'epa':
            return epa_profile(subcarriers)
        if isinstance(profile, str):
            data = self.load_yaml(profile)
            if isinstance(data, dict):
                data = data.get('taps')
            return self.load_tap_profile(data, subcarriers)
        if isinstance(profile, list) and profile:
            try:
                delays = [float(t['delay_ns']) for t in profile]
                powers = [float(t['power_db']) for t in profile]
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"Tap entries need numeric delay_ns and power_db: {e}") from e
            return profile_from_ns_db(delays, powers, subcarriers)
        raise ConfigError(f"Unrecognized tap profile {profile!r}")

    # Typed configs

    def build_system(self, data: Dict[str, Any]) -> SystemConfig:
        s = self.section(data, 'system', DEFAULT_SYSTEM)
        with section_errors('system'):
            subcarriers = int(s['subcarriers'])
            return SystemConfig(
                users=int(s['users']),
                antennas=int(s['antennas']),
                subcarriers=subcarriers,
                symbols=int(s['symbols']),
                pilots=int(s['pilots']),
                snr_db=float(s['snr_db']),
                seed=int(s['seed']),
                tap_profile=self.load_tap_profile(s['tap_profile'], subcarriers),
            )

    def build_stage1(self, data: Dict[str, Any]) -> Stage1Params:
        s = self.section(data, 'stage1', DEFAULT_STAGE1)
        with section_errors('stage1'):
            return Stage1Params(
                epochs=int(s['epochs']),
                learning_rate=float(s['learning_rate']),
                generated_samples=int(s['generated_samples']),
                seed=int(s['seed']),
                workers=int(s['workers']),
                log_every=int(s['log_every']),
            )

    def build_dip(self, data: Dict[str, Any], system: SystemConfig) -> DipConfig:
        defaults = dict(DEFAULT_DIP, widths=None, bn_mode='batch')
        s = self.section(data, 'dip', defaults)
        with section_errors('dip'):
            layers = int(s['layers'])
            widths = s['widths']
            if widths is None:
                widths = [DEFAULT_DIP['widths'][0]] * layers
            widths = [int(w) for w in widths]
            # hidden widths only: the 2M output width is implied by the antenna count
            if len(widths) == layers:
                widths.append(2 * system.antennas)
            return DipConfig(
                subcarriers=system.subcarriers,
                symbols=int(s['symbols']),
                antennas=system.antennas,
                layers=layers,
                widths=tuple(widths),
                iterations=int(s['iterations']),
                learning_rate=float(s['learning_rate']),
                seed=int(s['seed']),
                noise_low=float(s['noise_low']),
                noise_high=float(s['noise_high']),
                bn_mode=str(s['bn_mode']),
                log_every=int(s['log_every']),
            )

    def build_experiment(self, data: Dict[str, Any]) -> ExperimentConfig:
        data = self.check_sections(data)
        system = self.build_system(data)
        e = self.section(data, 'experiment', dict(DEFAULT_EXPERIMENT, timing=False))
        methods = e['methods']
        if isinstance(methods, str):
            methods = parse_list(methods)
        with section_errors('experiment'):
            return ExperimentConfig(
                system=system,
                stage1=self.build_stage1(data),
                dip=self.build_dip(data, system),
                snr_db=tuple(float(v) for v in e['snr_db']),
                realizations=int(e['realizations']),
                methods=tuple(methods),
                users=str(e['users']),
                output=str(e['output']),
                seed=int(e['seed']),
                workers=int(e['workers']),
                timing=bool(e['timing']),
            )

    def load_experiment(self, name: Optional[Union[str, Path]] = None) -> ExperimentConfig:
        """Experiment from a YAML file, or the all-defaults experiment when name is None."""
        data = self.load_config(name) if name is not None else {}
        return self.build_experiment(data)


def parse_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def parse_snr_list(text: str) -> List[float]:
    try:
        return [float(item) for item in parse_list(text)]
    except ValueError as e:
        raise ConfigError(f"Invalid SNR list '{text}': {e}") from e


def apply_overrides(cfg: ExperimentConfig, seed: Optional[int] = None,
                    methods: Optional[Sequence[str]] = None,
                    snr_db: Optional[Sequence[float]] = None,
                    output: Optional[str] = None) -> ExperimentConfig:
    """Command-line values replace the file's."""
    changes = {}
    if seed is not None:
        changes['seed'] = int(seed)
    if methods:
        changes['methods'] = tuple(methods)
    if snr_db:
        changes['snr_db'] = tuple(snr_db)
    if output:
        changes['output'] = output
    return replace(cfg, **changes) if changes else cfg
