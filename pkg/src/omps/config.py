"""Run configuration: a small INI-like format plus named presets.

Sections: [model] for the dimensionless parameters, [pump] for the holding
beam, any number of [beam:NAME] blocks for address beams, [run] for solver
settings.  Unknown sections or keys are errors that carry the line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .field import Beam, PumpSchedule
from .model import NormalizedParams


class ConfigError(ValueError):
    """Malformed configuration; line is 1-based, 0 for file-level issues."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(where + message)


@dataclass
class RunConfig:
    """Everything a run needs."""

    params: NormalizedParams
    schedule: PumpSchedule
    dtau: float = 1e-3
    tau_end: float = 200.0
    seed: int = 1234
    noise_amp: float = 1e-3
    snap_interval: float = 2.0
    tol_steady: float = 1e-7
    mode: str = "lattice"
    continuum_points: int = 1024
    label: str = "custom"

    def __post_init__(self):
        if self.dtau <= 0 or self.tau_end <= 0:
            raise ConfigError("dt and tau_end must be positive")
        if self.mode not in ("lattice", "continuum"):
            raise ConfigError(f"unknown mode {self.mode!r}")


_MODEL_KEYS = {"gamma", "Omega", "Delta", "rho", "N", "M", "xmax"}
_PUMP_KEYS = {"E0", "E0sq", "sigma_x", "exponent"}
_BEAM_KEYS = {"amplitude", "phase", "center", "width", "tau_on", "tau_off"}
_RUN_KEYS = {"dt", "tau_end", "seed", "noise_amp", "snapshot_interval",
             "steady_tol", "mode", "continuum_points"}


def _parse_sections(text: str):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", lineno)
            current = (line[1:-1].strip(), lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, val = (part.strip() for part in line.split("=", 1))
        if key in current[2]:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        current[2][key] = (val, lineno)
    return sections


def _num(entries, key, lineno, cast=float):
    val, ln = entries[key]
    try:
        return cast(val)
    except ValueError:
        raise ConfigError(f"{key} must be a {cast.__name__}, got {val!r}", ln)


def _check_keys(entries, allowed, section, lineno):
    for key, (_, ln) in entries.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]", ln)


def parse_config(text: str, label: str = "custom") -> RunConfig:
    """Parse configuration text into a RunConfig."""
    model = None
    pump = None
    beams = []
    run = {}

    for name, lineno, entries in _parse_sections(text):
        if name == "model":
            _check_keys(entries, _MODEL_KEYS, name, lineno)
            missing = _MODEL_KEYS - entries.keys()
            if missing:
                raise ConfigError(f"[model] missing {sorted(missing)}", lineno)
            try:
                model = NormalizedParams(
                    gamma=_num(entries, "gamma", lineno),
                    Omega=_num(entries, "Omega", lineno),
                    Delta=_num(entries, "Delta", lineno),
                    rho=_num(entries, "rho", lineno),
                    n_mirrors=_num(entries, "N", lineno, int),
                    points_per_mirror=_num(entries, "M", lineno, int),
                    xbar_max=_num(entries, "xmax", lineno))
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(str(exc), lineno)
        elif name == "pump":
            _check_keys(entries, _PUMP_KEYS, name, lineno)
            if "E0" in entries and "E0sq" in entries:
                raise ConfigError("give E0 or E0sq, not both", lineno)
            if "E0" in entries:
                e0 = _num(entries, "E0", lineno)
            elif "E0sq" in entries:
                e0 = math.sqrt(_num(entries, "E0sq", lineno))
            else:
                raise ConfigError("[pump] needs E0 or E0sq", lineno)
            pump = {
                "e0": e0,
                "sigma_x": _num(entries, "sigma_x", lineno)
                if "sigma_x" in entries else math.inf,
                "exponent": _num(entries, "exponent", lineno, int)
                if "exponent" in entries else 20,
            }
        elif name.startswith("beam:"):
            _check_keys(entries, _BEAM_KEYS, name, lineno)
            for req in ("amplitude", "center", "width", "tau_on", "tau_off"):
                if req not in entries:
                    raise ConfigError(f"[{name}] missing {req}", lineno)
            amp = _num(entries, "amplitude", lineno)
            phase = _num(entries, "phase", lineno) if "phase" in entries else 0.0
            try:
                beams.append(Beam(
                    amplitude=amp * complex(math.cos(phase), math.sin(phase)),
                    center=_num(entries, "center", lineno),
                    width=_num(entries, "width", lineno),
                    tau_on=_num(entries, "tau_on", lineno),
                    tau_off=_num(entries, "tau_off", lineno)))
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(str(exc), lineno)
        elif name == "run":
            _check_keys(entries, _RUN_KEYS, name, lineno)
            run = {k: v for k, v in entries.items()}
        else:
            raise ConfigError(f"unknown section [{name}]", lineno)

    if model is None:
        raise ConfigError("missing [model] section")
    if pump is None:
        raise ConfigError("missing [pump] section")

    try:
        schedule = PumpSchedule(beams=tuple(beams), **pump)
    except ValueError as exc:
        raise ConfigError(str(exc))

    kwargs = {}
    casts = {"dt": ("dtau", float), "tau_end": ("tau_end", float),
             "seed": ("seed", int), "noise_amp": ("noise_amp", float),
             "snapshot_interval": ("snap_interval", float),
             "steady_tol": ("tol_steady", float),
             "continuum_points": ("continuum_points", int)}
    for key, (val, ln) in run.items():
        if key == "mode":
            kwargs["mode"] = val
        else:
            attr, cast = casts[key]
            try:
                kwargs[attr] = cast(val)
            except ValueError:
                raise ConfigError(f"{key} must be a {cast.__name__}", ln)
    return RunConfig(params=model, schedule=schedule, label=label, **kwargs)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read(), label=str(path))


# -- presets ------------------------------------------------------------------


def _fig2_params(n_mirrors: int) -> NormalizedParams:
    return NormalizedParams(gamma=0.1, Omega=10.0, Delta=-2.2, rho=1.13,
                            n_mirrors=n_mirrors, points_per_mirror=11,
                            xbar_max=40.0)


def preset(name: str) -> RunConfig:
    """Named parameter sets for the reference scenarios."""
    if name == "fig2-soliton":
        # bistable pump: a timed beam kicks one spot onto the upper branch,
        # leaving a single pinned structure; the beam sits on a mirror
        # centre so the written state does not slide to a tie-breaking
        # position afterwards
        sched = PumpSchedule(
            e0=math.sqrt(2.25), sigma_x=40.0, exponent=20,
            beams=(Beam(amplitude=1.0, center=1.0, width=3.0,
                        tau_on=10.0, tau_off=40.0),))
        return RunConfig(params=_fig2_params(40), schedule=sched,
                         dtau=2e-3, tau_end=400.0, noise_amp=0.0,
                         continuum_points=1760, label=name)
    if name == "fig2-pattern":
        sched = PumpSchedule(e0=math.sqrt(2.7), sigma_x=40.0, exponent=20)
        return RunConfig(params=_fig2_params(40), schedule=sched,
                         dtau=2e-3, tau_end=400.0, noise_amp=1e-3,
                         continuum_points=1760, label=name)
    if name == "fig3-write-erase":
        # the holding pump sits below the fold of the per-mirror response,
        # so structures need their address beam held on; an out-of-phase
        # beam of equal strength cancels a held one, erasing its structure
        hold = 1e6
        sched = PumpSchedule(
            e0=math.sqrt(1.5), sigma_x=23.0, exponent=20,
            beams=(
                Beam(amplitude=1.2, center=12.0, width=4.0,
                     tau_on=20.0, tau_off=hold),
                Beam(amplitude=1.2, center=-12.0, width=4.0,
                     tau_on=110.0, tau_off=hold),
                Beam(amplitude=-1.2, center=12.0, width=4.0,
                     tau_on=210.0, tau_off=hold),
            ))
        params = NormalizedParams(gamma=0.1, Omega=10.0, Delta=-2.2, rho=1.13,
                                  n_mirrors=7, points_per_mirror=11,
                                  xbar_max=40.0)
        # the erase kick leaves the addressed mirror ringing at its natural
        # frequency with decay gamma/2, so the steady tolerance is looser
        # than the pattern presets
        return RunConfig(params=params, schedule=sched, dtau=2e-3,
                         tau_end=500.0, noise_amp=0.0, tol_steady=3e-5,
                         label=name)
    raise ConfigError(f"unknown preset {name!r}; available: "
                      f"{', '.join(PRESETS)}")


PRESETS = ("fig2-soliton", "fig2-pattern", "fig3-write-erase")


def apply_overrides(cfg: RunConfig, seed=None, dtau=None, tau_end=None) -> RunConfig:
    """CLI-level overrides returning a new config."""
    out = cfg
    if seed is not None:
        out = replace(out, seed=int(seed))
    if dtau is not None:
        out = replace(out, dtau=float(dtau))
    if tau_end is not None:
        out = replace(out, tau_end=float(tau_end))
    return out
