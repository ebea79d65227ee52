"""
Logging system: cross construction, generator trials, search outcomes, grid points, verification checks.
Timestamp, level, message and a JSON payload on one line, written to stderr (stdout carries CSV/JSON output).
"""

import os
import sys
import json
from datetime import datetime, timezone
from typing import Dict, Any, Optional

_LOG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "gensets_logs")
_LOG_FILE = None  # set to path to enable file logging
_QUIET = False


def _ensure_log_dir():
    global _LOG_DIR
    try:
        os.makedirs(_LOG_DIR, exist_ok=True)
    except Exception:
        _LOG_DIR = None


def set_log_file(path: Optional[str] = None):
    """Enable file logging. If path is None, use default gensets_logs/gensets.log."""
    global _LOG_FILE
    if path:
        _LOG_FILE = path
    else:
        _ensure_log_dir()
        _LOG_FILE = os.path.join(_LOG_DIR, "gensets.log") if _LOG_DIR else None


def set_quiet(quiet: bool = True):
    """Silence stderr output (file logging, if enabled, continues)."""
    global _QUIET
    _QUIET = quiet


def _log(level: str, message: str, data: Optional[Dict] = None):
    ts = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S UTC")
    line = "{} [{}] {}".format(ts, level, message)
    if data:
        line += " | " + json.dumps(data, default=str)
    if not _QUIET:
        print(line, file=sys.stderr)
    if _LOG_FILE:
        try:
            parent = os.path.dirname(_LOG_FILE)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(_LOG_FILE, "a", encoding="utf-8") as f:
                f.write(line + "\n")
        except Exception:
            pass


def log_info(message: str, data: Optional[Dict] = None):
    _log("INFO", message, data)


def log_warning(message: str, data: Optional[Dict] = None):
    _log("WARN", message, data)


def log_cross_built(d: int, M: float, size: int):
    _log("CROSS", "d={} M={} size={}".format(d, M, size), {})


def log_generator_trial(kind: str, trial: int, accepted: bool, diagnostics: Dict[str, Any]):
    """Log one candidate generator and its acceptance diagnostics."""
    status = "ACCEPTED" if accepted else "REJECTED"
    _log("TRIAL", "{} #{} {}".format(kind, trial, status), diagnostics)


def log_search_done(kind: str, accepted: bool, trials_used: int):
    _log("SEARCH", "{} done: accepted={} after {} trials".format(kind, accepted, trials_used), {})


def log_grid_point(command: str, point: Dict[str, Any], feasible: bool):
    _log("GRID", "{} feasible={}".format(command, feasible), point)


def log_check_result(name: str, passed: bool, details: Optional[Dict] = None):
    """Log one verification check (lemma, oracle, invariant)."""
    status = "PASS" if passed else "FAIL"
    _log("CHECK", "{} {}".format(name, status), details or {})


def log_run_start(command: str, seed: int):
    _log("RUN", "{} started, seed={}".format(command, seed), {})


def log_run_done(command: str, rows: int):
    _log("RUN", "{} done: {} rows".format(command, rows), {})
