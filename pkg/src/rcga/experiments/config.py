from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

_PKG_DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[1] / "config.json"
ROOT_CONFIG_NAME = "rcga.config.json"
CONFIG_ENV = "RCGA_CONFIG"

_FALLBACK: Dict[str, Any] = {
    "max_iterations": 10**7,
    "replications": 100,
    "base_seed": 20240601,
    "threads": 1,
    "trace_stride": 1,
    "pzero_samples": 10**5,
    "drift_samples": 10**4,
    "verify_n": [10, 50, 100],
    "verify_r": [2, 3, 5],
    "verify_k": 1000,
    "log_level": "WARNING",
}


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _normalize_config(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Map flag-style spellings onto canonical keys.

    Canonical keys:
      - max_iterations (was max-iters / max_iters)
      - base_seed (was seed)
      - pzero_samples / drift_samples (were pzero-samples / drift-samples)
      - verify_n / verify_r / verify_k (were n-grid / r-grid / k)
    """
    mapping = {
        "max-iters": "max_iterations",
        "max_iters": "max_iterations",
        "seed": "base_seed",
        "pzero-samples": "pzero_samples",
        "drift-samples": "drift_samples",
        "trace-stride": "trace_stride",
        "log-level": "log_level",
        "n-grid": "verify_n",
        "r-grid": "verify_r",
        "k": "verify_k",
    }
    out: Dict[str, Any] = {k: raw[k] for k in _FALLBACK if k in raw}
    for old, new in mapping.items():
        if new not in out and old in raw:
            out[new] = raw[old]
    unknown = set(raw) - set(_FALLBACK) - set(mapping)
    if unknown:
        logger.warning(f"ignoring unknown config keys: {', '.join(sorted(unknown))}")
    return out


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Resolve configuration: RCGA_CONFIG, then ./rcga.config.json, then packaged defaults.

    An explicit ``path`` is layered on top of the resolved configuration.
    """
    cfg = dict(_FALLBACK)
    candidates = [
        os.getenv(CONFIG_ENV),
        Path.cwd() / ROOT_CONFIG_NAME,
        _PKG_DEFAULT_CONFIG_PATH,
    ]
    for candidate in candidates:
        if candidate and Path(candidate).exists():
            try:
                cfg.update(_normalize_config(_read_json(candidate)))
                logger.debug(f"config loaded from {candidate}")
                break
            except Exception as e:
                logger.warning(f"unreadable config {candidate}: {e}")
    if path:
        try:
            cfg.update(_normalize_config(_read_json(path)))
        except Exception as e:
            raise RuntimeError(f"Failed to read config from {path}: {e}")
    return cfg
