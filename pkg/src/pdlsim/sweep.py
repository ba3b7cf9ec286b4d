"""Parameter sweeps over PDL or detector efficiency, written as CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import oracle
from .detectors import DetectorSpec
from .errors import InvalidParameter, ZeroProbabilityEvent
from .fock import PolarizationQubit
from .metrics import t_h_from_db
from .schemes import SCHEMES, T_STRATEGIES, SchemeConfig, SchemeResult, run_scheme

OUTPUT_DIR_ENV = "PDLSIM_OUTPUT_DIR"
CSV_HEADER = ["x", "scheme", "acceptance", "fidelity", "T_used", "oracle_delta", "flag"]
FIG6_ETA_MAX = 1 - 1e-4


def parse_complex(text: str) -> complex:
    """Parse ``"re,im"`` or a plain real number."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InvalidParameter(f"cannot parse complex amplitude {text!r}; expected 're,im'")


@dataclass
class SweepSpec:
    variable: str = "pdl_db"
    start: float = 0.0
    stop: float = 10.0
    steps: int = 101
    schemes: tuple[str, ...] = SCHEMES
    c1: complex = 1 / math.sqrt(2)
    c2: complex = 1 / math.sqrt(2)
    pdl_db: float = 3.0
    eta: float | None = None
    dark: float = 0.0
    T: float | str = "auto"
    t_strategy: str = "balance"
    cutoff: int = 4
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def validate(self) -> "SweepSpec":
        if self.variable not in ("pdl_db", "eta"):
            raise InvalidParameter(f"variable must be 'pdl_db' or 'eta', got {self.variable!r}")
        if int(self.steps) < 2:
            raise InvalidParameter("steps must be at least 2")
        lo, hi = sorted((self.start, self.stop))
        if self.variable == "pdl_db" and lo < 0:
            raise InvalidParameter("PDL range must be non-negative")
        if self.variable == "eta" and not (0 <= lo and hi <= 1):
            raise InvalidParameter("efficiency range must lie in [0, 1]")
        if self.variable == "eta" and hi == 1 and self.dark > 0:
            raise InvalidParameter("efficiency 1 with dark counts diverges; stop at 1 - 1e-4")
        for s in self.schemes:
            if s not in SCHEMES:
                raise InvalidParameter(f"unknown scheme {s!r}; expected a subset of {SCHEMES}")
        if self.t_strategy not in T_STRATEGIES:
            raise InvalidParameter(f"t_strategy must be one of {T_STRATEGIES}")
        if self.format not in ("csv", "json"):
            raise InvalidParameter("format must be 'csv' or 'json'")
        PolarizationQubit(self.c1, self.c2)
        return self

    def xs(self) -> np.ndarray:
        return np.sort(np.linspace(self.start, self.stop, int(self.steps)))

    def config_at(self, x: float) -> SchemeConfig:
        if self.variable == "pdl_db":
            t_h, eta = t_h_from_db(x), self.eta
        else:
            t_h, eta = t_h_from_db(self.pdl_db), x
        detector = "ideal" if eta is None else DetectorSpec(eta, self.dark)
        return SchemeConfig(PolarizationQubit(self.c1, self.c2), t_h, self.T, detector,
                            self.cutoff, self.t_strategy)


PRESETS: dict[str, dict] = {
    "fig3": dict(variable="pdl_db", start=0.0, stop=10.0, steps=101,
                 schemes=("passive", "noiseless-att", "amplification")),
    "fig4": dict(variable="pdl_db", start=0.0, stop=10.0, steps=101, schemes=SCHEMES),
    "fig6": dict(variable="eta", start=0.01, stop=FIG6_ETA_MAX, steps=100, pdl_db=3.0, dark=4e-5,
                 schemes=("passive", "noiseless-att", "amplification")),
}


def preset(name: str, **overrides) -> SweepSpec:
    try:
        values = dict(PRESETS[name])
    except KeyError:
        raise InvalidParameter(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    values.update(overrides)
    return SweepSpec(**values).validate()


def oracle_for(result: SchemeResult) -> oracle.OracleState | None:
    """Closed-form counterpart of a scheme run, or ``None`` where none exists."""
    cfg = result.config
    c1, c2, t_h, T = cfg.qubit.c1, cfg.qubit.c2, cfg.t_h, result.T_used
    det = cfg.detector if isinstance(cfg.detector, DetectorSpec) and not cfg.detector.is_ideal else None
    if result.scheme == "uncorrected":
        return oracle.oracle_pdl(c1, c2, t_h)
    if result.scheme == "passive":
        return oracle.oracle_passive(c1, c2, t_h) if T == t_h else None
    if result.scheme == "noiseless-att":
        if det is None:
            return oracle.oracle_noiseless_att(c1, c2, t_h, T)[0]
        return oracle.oracle_att_imperfect(c1, c2, t_h, T, det.efficiency, det.nu)
    if det is None:
        return oracle.oracle_amp(c1, c2, t_h, T)[0]
    if det.efficiency < 0.01:
        return None
    return oracle.oracle_amp_imperfect(c1, c2, t_h, T, det.efficiency, det.nu)


def oracle_delta(result: SchemeResult) -> float | None:
    ref = oracle_for(result)
    return None if ref is None else oracle.max_delta(result.unnormalized_output, ref)


def evaluate(scheme: str, config: SchemeConfig) -> dict:
    """One scheme run summarized as a flat record."""
    res = run_scheme(scheme, config)
    return {
        "scheme": scheme,
        "t_h": config.t_h,
        "T_used": res.T_used,
        "acceptance": res.acceptance_probability,
        "fidelity": res.fidelity,
        "vacuum_weight": res.vacuum_weight,
        "two_photon_weight": res.two_photon_weight,
        "oracle_delta": oracle_delta(res),
        "converged": res.converged,
    }


def _row(args) -> dict:
    spec, x, scheme = args
    row = {"x": float(x), "scheme": scheme, "acceptance": None, "fidelity": None,
           "T_used": None, "oracle_delta": None, "flag": ""}
    try:
        rec = evaluate(scheme, spec.config_at(float(x)))
    except ZeroProbabilityEvent:
        row["acceptance"] = 0.0
        row["flag"] = "zero-probability"
        return row
    row.update({k: rec[k] for k in ("acceptance", "fidelity", "T_used", "oracle_delta")})
    if not rec["converged"]:
        row["flag"] = "search-not-converged"
    return row


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Rows ordered by ascending ``x`` then by the spec's scheme order."""
    spec.validate()
    jobs = [(spec, x, s) for x in spec.xs() for s in spec.schemes]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            return list(pool.map(_row, jobs, chunksize=8))
    return [_row(job) for job in jobs]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2, sort_keys=True) + "\n"


def resolve_output(path: str | None, default_name: str) -> Path | None:
    """``path`` as given, or ``default_name`` under ``$PDLSIM_OUTPUT_DIR`` when set."""
    if path:
        return Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    return Path(base) / default_name if base else None


def plot_script(csv_path: str | Path, variable: str) -> str:
    """Gnuplot script plotting fidelity and acceptance per scheme from a sweep CSV."""
    xlabel = "PDL [dB]" if variable == "pdl_db" else "detector efficiency"
    return "\n".join([
        "set datafile separator ','",
        f"set xlabel '{xlabel}'",
        "set key outside",
        f"file = '{csv_path}'",
        "schemes = system(\"tail -n +2 '\" . file . \"' | cut -d, -f2 | sort -u\")",
        "set multiplot layout 2,1",
        "set ylabel 'fidelity'",
        "plot for [s in schemes] file using ($2 eq s ? $1 : NaN):4 with lines title s",
        "set ylabel 'acceptance'",
        "plot for [s in schemes] file using ($2 eq s ? $1 : NaN):3 with lines title s",
        "unset multiplot",
        "",
    ])


_FLOAT_KEYS = {"start", "stop", "pdl_db", "dark"}
_INT_KEYS = {"steps", "cutoff", "workers"}


class ConfigError(InvalidParameter):
    pass


def _coerce(key: str, raw: str):
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _INT_KEYS:
        return int(raw)
    if key == "eta":
        return None if raw.lower() in ("", "ideal", "none") else float(raw)
    if key in ("c1", "c2"):
        return parse_complex(raw)
    if key == "T":
        return "auto" if raw == "auto" else float(raw)
    if key == "schemes":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key == "t_h":
        return float(raw)
    return raw


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into SweepSpec field values.

    ``#`` starts a comment. ``preset`` pulls in a preset's values before the
    remaining keys apply; ``t_h`` is accepted as an alternative to ``pdl_db``.
    """
    known = {f.name for f in fields(SweepSpec)} | {"preset", "t_h"}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except (ValueError, InvalidParameter) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return values


def build_spec(values: dict) -> SweepSpec:
    values = dict(values)
    base = {}
    if "preset" in values:
        name = values.pop("preset")
        if name not in PRESETS:
            raise InvalidParameter(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        base = dict(PRESETS[name])
    if "t_h" in values:
        t_h = values.pop("t_h")
        if not 0 < t_h <= 1:
            raise InvalidParameter(f"t_h must lie in (0, 1], got {t_h!r}")
        values["pdl_db"] = -10 * math.log10(t_h)
    base.update(values)
    return SweepSpec(**base).validate()


def load_config(path: str | Path, overrides: dict | None = None) -> SweepSpec:
    """Read a config file; ``overrides`` (e.g. from CLI flags) win over file values."""
    values = parse_config(Path(path).read_text())
    if overrides:
        if "preset" in overrides:
            values.pop("preset", None)
        values.update(overrides)
    return build_spec(values)


def spec_summary(spec: SweepSpec) -> dict:
    d = asdict(spec)
    d["c1"], d["c2"] = str(spec.c1), str(spec.c2)
    d["schemes"] = list(spec.schemes)
    return d


def with_overrides(spec: SweepSpec, **kw) -> SweepSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None}).validate()

