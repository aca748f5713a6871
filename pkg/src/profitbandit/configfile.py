"""Line-oriented text configs describing a full experiment.

Schema
------

A config is a sequence of ``[section]`` blocks holding ``key = value``
lines.  Blank lines and lines starting with ``#`` are ignored.  Three
block kinds exist:

``[arm]`` (one per arm, at least one required)
    ``family``     bernoulli | poisson | exponential | gaussian
    ``variance``   reward variance, gaussian arms only (required there)
    ``mean``       true mean reward (within the family's mean range)
    ``threshold``  per-client profitability threshold
    ``lambda``     shifted-Poisson client rate (count law 1 + Poisson(lambda))
    ``clients``    fixed client count per round (alternative to lambda)

``[run]`` (at most one, all keys optional)
    ``horizon``       rounds per trajectory (default 10000)
    ``trajectories``  Monte Carlo repetitions (default 10000)
    ``seed``          base seed for the seed-derivation tree (default 1)

``[policy]`` (one per roster entry, at least one required)
    ``kind``   kl-ucb | kl-ucb-plus | kl-bernoulli-ucb | kl-gaussian-ucb
               | bayes-ucb | ts | emp-kl-ucb | oracle
    ``c``      exploration boost (optional; per-kind default)
    ``bound``  known reward bound, required for the bounded-reward kinds
    ``prior``  jeffreys | uniform, for the Bayesian kinds (default jeffreys)

Unknown sections and unknown keys are rejected with the offending line
number, as are duplicate keys and malformed values.
"""

from __future__ import annotations

from pathlib import Path

from .environment import ArmSpec, constant_clients, shifted_poisson_clients
from .families import BERNOULLI, EXPONENTIAL, POISSON, Distribution, DomainError, gaussian
from .policies import PolicyConfig
from .presets import DEFAULT_SEED, FULL_HORIZON, FULL_TRAJECTORIES
from .simulate import ExperimentConfig

__all__ = ["ConfigError", "parse_config", "parse_config_text"]


class ConfigError(ValueError):
    """A config file failed to parse; the message carries file and line."""


_ARM_KEYS = ("family", "variance", "mean", "threshold", "lambda", "clients")
_RUN_KEYS = ("horizon", "trajectories", "seed")
_POLICY_KEYS = ("kind", "c", "bound", "prior")
_KEYS = {"arm": _ARM_KEYS, "run": _RUN_KEYS, "policy": _POLICY_KEYS}

_PLAIN_FAMILIES = {
    "bernoulli": BERNOULLI,
    "poisson": POISSON,
    "exponential": EXPONENTIAL,
}


class _Block:
    """One ``[section]`` with its keys, each remembering its line."""

    def __init__(self, kind: str, line: int):
        self.kind = kind
        self.line = line
        self.entries: dict[str, tuple[int, str]] = {}

    def get(self, key: str) -> str | None:
        hit = self.entries.get(key)
        return None if hit is None else hit[1]

    def line_of(self, key: str) -> int:
        return self.entries[key][0] if key in self.entries else self.line


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read and interpret a config file."""
    where = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {where}: {exc}") from exc
    return parse_config_text(text, where=where)


def parse_config_text(text: str, where: str = "<config>") -> ExperimentConfig:
    """Interpret config text; ``where`` names the source in error messages."""
    blocks = _split_blocks(text, where)
    arms: list[ArmSpec] = []
    policies: list[PolicyConfig] = []
    run: _Block | None = None
    for block in blocks:
        if block.kind == "arm":
            arms.append(_arm_from(block, where))
        elif block.kind == "policy":
            policies.append(_policy_from(block, where))
        else:
            if run is not None:
                _fail(where, block.line, "duplicate [run] block")
            run = block
    if not arms:
        _fail(where, 1, "no [arm] blocks; an experiment needs at least one arm")
    if not policies:
        _fail(where, 1, "no [policy] blocks; an experiment needs at least one policy")
    horizon = FULL_HORIZON
    trajectories = FULL_TRAJECTORIES
    seed = DEFAULT_SEED
    if run is not None:
        if run.get("horizon") is not None:
            horizon = _int(where, run.line_of("horizon"), "horizon", run.get("horizon"))
        if run.get("trajectories") is not None:
            trajectories = _int(
                where, run.line_of("trajectories"), "trajectories", run.get("trajectories")
            )
        if run.get("seed") is not None:
            seed = _int(where, run.line_of("seed"), "seed", run.get("seed"))
    try:
        return ExperimentConfig(
            specs=tuple(arms),
            policies=tuple(policies),
            horizon=horizon,
            trajectories=trajectories,
            base_seed=seed,
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


# -- block splitting ----------------------------------------------------------------


def _fail(where: str, line: int, message: str) -> None:
    raise ConfigError(f"{where}:{line}: {message}")


def _split_blocks(text: str, where: str) -> list[_Block]:
    blocks: list[_Block] = []
    current: _Block | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            kind = line[1:-1].strip()
            if kind not in _KEYS:
                _fail(where, lineno, f"unknown section [{kind}]; expected [arm], [run], or [policy]")
            current = _Block(kind, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            _fail(where, lineno, f"expected 'key = value' or a [section] header, got {line!r}")
        if current is None:
            _fail(where, lineno, "key outside any [section] block")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS[current.kind]:
            _fail(
                where,
                lineno,
                f"unknown key {key!r} in [{current.kind}] block; "
                f"expected one of: {', '.join(_KEYS[current.kind])}",
            )
        if key in current.entries:
            _fail(where, lineno, f"duplicate key {key!r} in [{current.kind}] block")
        if not value:
            _fail(where, lineno, f"key {key!r} has no value")
        current.entries[key] = (lineno, value)
    return blocks


# -- value parsing ------------------------------------------------------------------


def _float(where: str, line: int, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        _fail(where, line, f"{key} must be a number, got {raw!r}")
    return value


def _int(where: str, line: int, key: str, raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        _fail(where, line, f"{key} must be an integer, got {raw!r}")


def _require(block: _Block, key: str, where: str) -> str:
    value = block.get(key)
    if value is None:
        _fail(where, block.line, f"[{block.kind}] block is missing the {key!r} key")
    return value


def _arm_from(block: _Block, where: str) -> ArmSpec:
    family_name = _require(block, "family", where)
    if family_name == "gaussian":
        raw = _require(block, "variance", where)
        variance = _float(where, block.line_of("variance"), "variance", raw)
        try:
            family = gaussian(variance)
        except DomainError as exc:
            _fail(where, block.line_of("variance"), str(exc))
    elif family_name in _PLAIN_FAMILIES:
        if block.get("variance") is not None:
            _fail(
                where,
                block.line_of("variance"),
                "variance only applies to gaussian arms",
            )
        family = _PLAIN_FAMILIES[family_name]
    else:
        _fail(
            where,
            block.line_of("family"),
            f"unknown family {family_name!r}; expected bernoulli, poisson, "
            "exponential, or gaussian",
        )
    mean = _float(where, block.line_of("mean"), "mean", _require(block, "mean", where))
    threshold = _float(
        where, block.line_of("threshold"), "threshold", _require(block, "threshold", where)
    )
    rate = block.get("lambda")
    count = block.get("clients")
    if (rate is None) == (count is None):
        _fail(
            where,
            block.line,
            "[arm] block needs exactly one client law: 'lambda = RATE' "
            "(shifted Poisson) or 'clients = K' (constant)",
        )
    try:
        if rate is not None:
            law = shifted_poisson_clients(_float(where, block.line_of("lambda"), "lambda", rate))
        else:
            law = constant_clients(_int(where, block.line_of("clients"), "clients", count))
        return ArmSpec(Distribution(family, mean), threshold, law)
    except DomainError as exc:
        _fail(where, block.line, str(exc))


def _policy_from(block: _Block, where: str) -> PolicyConfig:
    kind = _require(block, "kind", where)
    c = block.get("c")
    bound = block.get("bound")
    prior = block.get("prior")
    if prior is not None and prior not in ("jeffreys", "uniform"):
        _fail(
            where,
            block.line_of("prior"),
            f"prior must be 'jeffreys' or 'uniform', got {prior!r}",
        )
    try:
        return PolicyConfig(
            kind=kind,
            c=None if c is None else _float(where, block.line_of("c"), "c", c),
            reward_bound=None
            if bound is None
            else _float(where, block.line_of("bound"), "bound", bound),
            prior_kind=prior if prior is not None else "jeffreys",
        )
    except DomainError as exc:
        _fail(where, block.line, str(exc))
