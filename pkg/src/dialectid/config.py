"""Declarative run configuration: INI sections per pipeline stage.

Values resolve as CLI override > config file > built-in default. The
effective configuration is dumped into every command's run log.
"""

import configparser
from pathlib import Path

DEFAULTS = {
    "corpus": {
        "dialects": "",  # comma-separated; empty = derive from TRAIN split
    },
    "features": {
        "kind": "mfcc",
        "window_len_samples": "400",
        "hop_samples": "160",
        "fft_size": "512",
        "num_mel_filters": "40",
        "mel_low_hz": "20",
        "mel_high_hz": "7600",
    },
    "augment": {
        "speed_factors": "0.9,1.1",
        "volume_factors": "0.25,2.0",
    },
    "train_e2e": {
        "batch_size": "32",
        "max_epochs": "30",
        "scale_divisor": "1",
        "random_segment": "true",
        "learning_rate": "0.001",
        "lr_decay": "0.98",
        "lr_decay_interval": "50000",
        "convergence_threshold": "1e-5",
        "convergence_window": "100",
        "seed": "0",
    },
    "vsm": {
        "level": "word",
        "ngram_order": "0",  # 0 = per-level default (1 word, 3 char/phone)
    },
    # Pair-network hyperparameters below are toolkit defaults, not sourced
    # from any reference configuration.
    "train_siamese": {
        "batch_size": "32",
        "num_batches": "600",
        "learning_rate": "0.05",
        "dev_weight": "5",
        "seed": "0",
    },
    "evaluate": {
        "znorm": "true",
    },
    "fusion": {
        "l2": "1e-6",
        "grad_tol": "1e-8",
        "max_iter": "200",
    },
}


class Config:
    def __init__(self, values=None):
        self.values = {s: dict(kv) for s, kv in DEFAULTS.items()}
        for section, kv in (values or {}).items():
            for key, val in kv.items():
                self.set(section, key, val)

    def set(self, section, key, value):
        if section not in self.values or key not in self.values[section]:
            raise KeyError(f"unknown config key [{section}] {key}")
        self.values[section][key] = str(value)

    def get(self, section, key):
        return self.values[section][key]

    def get_int(self, section, key):
        return int(self.values[section][key])

    def get_float(self, section, key):
        return float(self.values[section][key])

    def get_bool(self, section, key):
        v = self.values[section][key].strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"[{section}] {key}: not a boolean: {v!r}")

    def get_floats(self, section, key):
        raw = self.values[section][key].strip()
        return tuple(float(v) for v in raw.split(",") if v.strip()) if raw else ()

    def get_list(self, section, key):
        raw = self.values[section][key].strip()
        return [v.strip() for v in raw.split(",") if v.strip()] if raw else []

    def to_dict(self):
        return {s: dict(kv) for s, kv in sorted(self.values.items())}


def load_config(path=None, overrides=()):
    """Read an INI file (optional) and apply "section.key=value" overrides."""
    cfg = Config()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        read = parser.read(Path(path))
        if not read:
            raise FileNotFoundError(f"config file not found: {path}")
        for section in parser.sections():
            for key, value in parser.items(section):
                cfg.set(section, key, value)
    for item in overrides:
        target, _, value = item.partition("=")
        section, _, key = target.partition(".")
        if not value or not key:
            raise ValueError(f"override must look like section.key=value: {item!r}")
        cfg.set(section.strip(), key.strip(), value.strip())
    return cfg
