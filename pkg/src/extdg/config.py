"""Plain-text run configuration: `[section]` headers and `key = value` lines.

The format is deliberately tiny: UTF-8 text, `#` comments, sections in
square brackets, one key per line.  Parsing is strict: unknown sections or
keys, type mismatches and missing required keys are reported with line
numbers.  ``render`` writes the canonical form, and parse(render(c)) == c.

Units are SI throughout (lengths in m, times in s, diffusivity in m^2/s).
"""

from dataclasses import dataclass, field

from .scenarios import Scenario

__all__ = ["Config", "ConfigError", "parse_config", "render_config", "config_to_scenario"]


class ConfigError(ValueError):
    pass


def _typed(name):
    def parse_float(s):
        return float(s)

    def parse_int(s):
        f = float(s)
        if f != int(f):
            raise ValueError
        return int(f)

    def parse_str(s):
        return s

    def parse_beta(s):
        return "auto" if s == "auto" else float(s)

    return {"float": parse_float, "int": parse_int, "str": parse_str,
            "beta": parse_beta}[name]


# section -> key -> (type, required)
_SCHEMA = {
    "domain": {"L": ("float", True), "N": ("int", True), "p": ("int", True),
               "q": ("int", True), "beta": ("beta", False)},
    "equation": {"kind": ("str", True), "mu": ("float", True),
                 "u": ("float", False), "pe": ("float", False)},
    "time": {"T": ("float", True), "nsteps": ("int", False), "dt": ("float", False)},
    "bc": {"type": ("str", False), "A": ("float", False), "k": ("float", False),
           "g0": ("float", False)},
    "initial": {"kind": ("str", False), "zc": ("float", False),
                "sigma_c": ("float", False)},
    "penalty": {"sigma": ("float", False)},
    "damping": {"dgamma": ("float", False), "alpha": ("float", False),
                "sigma_d": ("float", False)},
    "reference": {"L_ref": ("float", False)},
    "output": {"dir": ("str", False), "snapshots": ("int", False)},
}

_REQUIRED_SECTIONS = ("domain", "equation", "time")


@dataclass(frozen=True)
class Config:
    """Validated key-value document, grouped by section."""

    sections: dict = field(default_factory=dict)

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def __eq__(self, other):
        return isinstance(other, Config) and self.sections == other.sections


def parse_config(text):
    """Parse and validate a config document."""
    sections = {}
    current = None
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current = None
                continue
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        key, _, value = (part.strip() for part in line.partition("="))
        sec_name = next(n for n, s in sections.items() if s is current)
        schema = _SCHEMA[sec_name]
        if key not in schema:
            errors.append(f"line {lineno}: unknown key {key!r} in section [{sec_name}]")
            continue
        typ, _ = schema[key]
        try:
            current[key] = _typed(typ)(value)
        except ValueError:
            errors.append(f"line {lineno}: value {value!r} for {key!r} is not a valid {typ}")
    for sec in _REQUIRED_SECTIONS:
        if sec not in sections:
            errors.append(f"missing required section [{sec}]")
            continue
        for key, (_, required) in _SCHEMA[sec].items():
            if required and key not in sections[sec]:
                errors.append(f"section [{sec}]: missing required key {key!r}")
    if "time" in sections:
        tsec = sections["time"]
        if ("nsteps" in tsec) == ("dt" in tsec):
            errors.append("section [time]: give exactly one of 'nsteps' or 'dt'")
    if "equation" in sections:
        esec = sections["equation"]
        if esec.get("kind") == "linear_advdiff" and ("u" in esec) == ("pe" in esec):
            errors.append("section [equation]: give exactly one of 'u' or 'pe'")
    if errors:
        raise ConfigError("\n".join(errors))
    return Config(sections=sections)


def render_config(config):
    """Canonical text form; parse(render(c)) == c."""
    out = []
    for sec in _SCHEMA:
        if sec not in config.sections:
            continue
        out.append(f"[{sec}]")
        for key in _SCHEMA[sec]:
            if key in config.sections[sec]:
                val = config.sections[sec][key]
                out.append(f"{key} = {val}")
        out.append("")
    return "\n".join(out)


def config_to_scenario(config):
    """Resolve a Config into a runnable Scenario."""
    dom = config.sections["domain"]
    eq = config.sections["equation"]
    tim = config.sections["time"]
    kind = eq["kind"]
    if kind not in ("linear_advdiff", "burgers"):
        raise ConfigError(f"unknown equation kind {kind!r}")
    mu = eq["mu"]
    if kind == "burgers":
        u = 0.0
    elif "u" in eq:
        u = eq["u"]
    else:
        # scenario-family convention for the manufactured tests: u = 2 Pe mu
        u = 2.0 * eq["pe"] * mu
    nsteps = tim.get("nsteps")
    if nsteps is None:
        nsteps = int(round(tim["T"] / tim["dt"]))
    beta = dom.get("beta", "auto")
    bc_sec = config.sections.get("bc", {})
    bc_type = bc_sec.get("type", "zero")
    if bc_type == "zero":
        bc = {"kind": "zero"}
    elif bc_type == "constant":
        bc = {"kind": "constant", "value": bc_sec["g0"]}
    elif bc_type == "sine":
        bc = {"kind": "sine", "A": bc_sec["A"], "k": bc_sec["k"], "T": tim["T"]}
    else:
        raise ConfigError(f"unknown bc type {bc_type!r}")
    ini_sec = config.sections.get("initial", {})
    ini_kind = ini_sec.get("kind", "zero")
    if ini_kind == "zero":
        initial = {"kind": "zero"}
    elif ini_kind == "gaussian":
        initial = {"kind": "gaussian", "zc": ini_sec["zc"], "sigma_c": ini_sec["sigma_c"]}
    elif ini_kind == "manufactured":
        initial = {"kind": "manufactured"}
    else:
        raise ConfigError(f"unknown initial kind {ini_kind!r}")
    damp_sec = config.sections.get("damping")
    damping = None
    if damp_sec and damp_sec.get("dgamma", 0.0) > 0.0:
        damping = {"dgamma": damp_sec["dgamma"],
                   "alpha": damp_sec.get("alpha", 0.3),
                   "sigma_d": damp_sec.get("sigma_d")}
    ref_sec = config.sections.get("reference")
    reference = {"L_ref": ref_sec["L_ref"]} if ref_sec and "L_ref" in ref_sec else None
    return Scenario(
        equation=kind, L=dom["L"], N=dom["N"], p=dom["p"], q=dom["q"],
        beta=None if beta == "auto" else beta,
        mu=mu, u=u, sigma=config.get("penalty", "sigma"),
        T=tim["T"], nsteps=nsteps,
        bc=bc, initial=initial,
        source="manufactured" if ini_kind == "manufactured" else "none",
        damping=damping, reference=reference,
        snapshots=config.get("output", "snapshots", 0) or 0)
